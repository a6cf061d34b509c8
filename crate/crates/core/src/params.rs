//! Physical coefficients, the constants derived from them, and the
//! regularity gate on `(d, gamma, s)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Coefficients of the fluid/laser system.
///
/// Pressure law `Pi(rho) = K rho^gamma`; the laser envelope obeys
/// `(2i/c) A_t + Delta A / k0 + zeta A - zeta2 rho A = 0` with
/// `zeta = k0 + i eta0` and `zeta2 = (k0 - i nu0) / rho_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    #[serde(rename = "K")]
    pub pressure_k: f64,
    pub gamma: f64,
    pub gamma_p: f64,
    pub k0: f64,
    pub c: f64,
    pub eta0: f64,
    pub nu0: f64,
    pub rho_c: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            pressure_k: 1.0,
            gamma: 3.0,
            gamma_p: 1.0,
            k0: 10.0,
            c: 1.0,
            eta0: 2.0,
            nu0: 0.1,
            rho_c: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &str); 8] = [
            (self.pressure_k > 0.0, "K must be > 0"),
            (self.gamma > 1.0, "gamma must be > 1 (sound-speed variable undefined otherwise)"),
            (self.gamma_p >= 0.0, "gamma_p must be >= 0"),
            (self.k0 > 0.0, "k0 must be > 0"),
            (self.c > 0.0, "c must be > 0"),
            (self.eta0 > 0.0, "eta0 must be > 0"),
            (self.nu0 >= 0.0, "nu0 must be >= 0"),
            (self.rho_c > 0.0, "rho_c must be > 0"),
        ];
        for (ok, msg) in checks {
            // NaN fails every comparison above, so it lands here too.
            if !ok {
                return Err(Error::InvalidParameter(msg.into()));
            }
        }
        Ok(())
    }

    /// `((gamma-1) / (2 sqrt(K gamma)))^(2/(gamma-1))`, the factor relating
    /// physical density to a power of the sound-speed variable.
    pub fn makino_density_factor(&self) -> f64 {
        let g = self.gamma;
        ((g - 1.0) / (2.0 * (self.pressure_k * g).sqrt())).powf(2.0 / (g - 1.0))
    }
}

/// Everything derived from `(PhysicalParams, d, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub dim: usize,
    pub s: f64,
    pub gamma: f64,
    pub zeta: Complex64,
    pub zeta2: Complex64,
    pub zeta_prime: Complex64,
    pub nu0_tilde: f64,
    /// `min(eta0, (gamma-1) d/2) - d/2`.
    pub c_dg: f64,
    /// Weight exponent `1 + d/2 + c_dg`.
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s_plus: f64,
    /// `4 / (gamma - 1)`.
    pub q: f64,
    /// `(d/s)(1/2 - 1/q)`.
    pub delta: f64,
    /// Exponent of the density nonlinearity, `2 / (gamma - 1)`.
    pub power: f64,
    eta0: f64,
}

impl DerivedConstants {
    pub fn c_dgs(&self, sigma: f64) -> f64 {
        self.c_dg + sigma
    }

    /// Target decay exponent of the `H^sigma`-seminorm of the deviation:
    /// `d/2 - sigma - min(1, d (gamma-1)/2)`.
    pub fn decay_floor(&self, sigma: f64) -> f64 {
        let d = self.dim as f64;
        d / 2.0 - sigma - f64::min(1.0, d * (self.gamma - 1.0) / 2.0)
    }

    /// Exponent implied by the energy constant instead: `-(c_dg + sigma)`,
    /// i.e. `d/2 - sigma - min(eta0, (gamma-1) d/2)`.
    pub fn energy_decay_exponent(&self, sigma: f64) -> f64 {
        -self.c_dgs(sigma)
    }

    /// The weaker (larger) of the two exponents above.
    pub fn safe_decay_exponent(&self, sigma: f64) -> f64 {
        self.decay_floor(sigma).max(self.energy_decay_exponent(sigma))
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }
}

/// `alpha` exactly as printed: `1 + 2/(g-1) + d (1 + (g-1)(g-2) / (2(g-1)))`.
pub fn alpha_printed(d: usize, gamma: f64) -> f64 {
    let d = d as f64;
    let g1 = gamma - 1.0;
    1.0 + 2.0 / g1 + d * (1.0 + g1 * (gamma - 2.0) / (2.0 * g1))
}

/// Simplified `alpha = 1 + 2/(g-1) + d g / 2`.
pub fn alpha_simplified(d: usize, gamma: f64) -> f64 {
    1.0 + 2.0 / (gamma - 1.0) + d as f64 * gamma / 2.0
}

/// `beta = (2d/(g-1)) (1/2 - (g-1)/4)`.
pub fn beta(d: usize, gamma: f64) -> f64 {
    2.0 * d as f64 / (gamma - 1.0) * (0.5 - (gamma - 1.0) / 4.0)
}

/// `s_+ = (-beta + sqrt(alpha^2 + 4 beta)) / 2`.
pub fn s_plus(d: usize, gamma: f64) -> Result<f64> {
    let alpha = checked_alpha(d, gamma)?;
    let b = beta(d, gamma);
    let radicand = alpha * alpha + 4.0 * b;
    if radicand < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "s_+ radicand alpha^2 + 4 beta = {radicand} is negative"
        )));
    }
    Ok(0.5 * (-b + radicand.sqrt()))
}

fn checked_alpha(d: usize, gamma: f64) -> Result<f64> {
    let printed = alpha_printed(d, gamma);
    let simplified = alpha_simplified(d, gamma);
    if (printed - simplified).abs() > 1e-12 * simplified.abs().max(1.0) {
        return Err(Error::ConstantMismatch {
            name: "alpha",
            printed,
            simplified,
        });
    }
    Ok(printed)
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimension must be 1, 2 or 3, got {d}")))
    }
}

pub fn derive_constants(p: &PhysicalParams, d: usize, s: f64) -> Result<DerivedConstants> {
    p.validate()?;
    check_dim(d)?;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("regularity s must be > 0, got {s}")));
    }
    let g = p.gamma;
    let df = d as f64;
    let zeta = Complex64::new(p.k0, p.eta0);
    let zeta2 = Complex64::new(p.k0, -p.nu0) / p.rho_c;
    let factor = p.makino_density_factor();
    let c_dg = f64::min(p.eta0, (g - 1.0) * df / 2.0) - df / 2.0;
    let q = 4.0 / (g - 1.0);
    let alpha = checked_alpha(d, g)?;
    Ok(DerivedConstants {
        dim: d,
        s,
        gamma: g,
        zeta,
        zeta2,
        zeta_prime: zeta2 * factor,
        nu0_tilde: factor * p.nu0,
        c_dg,
        a: 1.0 + df / 2.0 + c_dg,
        alpha,
        beta: beta(d, g),
        s_plus: s_plus(d, g)?,
        q,
        delta: df / s * (0.5 - 1.0 / q),
        power: 2.0 / (g - 1.0),
        eta0: p.eta0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateCondition {
    pub name: String,
    pub threshold: f64,
    pub s: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateReport {
    pub conditions: Vec<GateCondition>,
    pub pass: bool,
}

impl GateReport {
    pub fn failures(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// The three strict inequalities on `s`: `s > 1 + d/2`, `s > 2d + 3`,
/// `s > s_+`.
pub fn regularity_gate(d: usize, gamma: f64, s: f64) -> Result<GateReport> {
    check_dim(d)?;
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 1, got {gamma}")));
    }
    let df = d as f64;
    let thresholds = [
        ("s > 1 + d/2", 1.0 + df / 2.0),
        ("s > 2d + 3", 2.0 * df + 3.0),
        ("s > s_plus", s_plus(d, gamma)?),
    ];
    let conditions: Vec<GateCondition> = thresholds
        .iter()
        .map(|&(name, threshold)| GateCondition {
            name: name.to_string(),
            threshold,
            s,
            pass: s > threshold,
        })
        .collect();
    let pass = conditions.iter().all(|c| c.pass);
    Ok(GateReport { conditions, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64, k: f64, eta0: f64) -> PhysicalParams {
        PhysicalParams {
            pressure_k: k,
            gamma,
            eta0,
            ..PhysicalParams::default()
        }
    }

    #[test]
    fn c_dg_one_dimensional_gamma_three() {
        let c = derive_constants(&params(3.0, 1.0, 2.0), 1, 5.5).unwrap();
        assert!((c.c_dg - 0.5).abs() < 1e-15);
        assert!((c.a - 2.0).abs() < 1e-15);
    }

    #[test]
    fn s_plus_gamma_two() {
        let c = derive_constants(&params(2.0, 1.0, 2.0), 1, 5.5).unwrap();
        assert!((c.alpha - 4.0).abs() < 1e-14);
        assert!((c.beta - 0.5).abs() < 1e-14);
        // Root-finding cross-check on 2 s + beta = sqrt(alpha^2 + 4 beta).
        let f = |s: f64| 2.0 * s + c.beta - (c.alpha * c.alpha + 4.0 * c.beta).sqrt();
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        assert!((c.s_plus - lo).abs() < 1e-12);
        assert!((c.s_plus - 1.8713).abs() < 1e-4);
    }

    #[test]
    fn zeta_prime_unit_factor() {
        let p = params(3.0, 1.0 / 3.0, 2.0);
        let c = derive_constants(&p, 1, 5.5).unwrap();
        assert!((c.zeta_prime - c.zeta2).norm() < 1e-15);
        assert!((p.makino_density_factor() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_gamma_at_most_one() {
        assert!(derive_constants(&params(1.0, 1.0, 2.0), 1, 5.5).is_err());
        assert!(derive_constants(&params(0.5, 1.0, 2.0), 1, 5.5).is_err());
        assert!(regularity_gate(1, 1.0, 5.5).is_err());
    }

    #[test]
    fn gate_examples() {
        assert!(regularity_gate(1, 2.0, 5.5).unwrap().pass);
        let r = regularity_gate(1, 2.0, 4.0).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failures(), vec!["s > 2d + 3"]);
        let r = regularity_gate(3, 2.0, 9.0).unwrap();
        assert!(!r.pass);
        assert!(r.failures().contains(&"s > 2d + 3"));
    }

    #[test]
    fn decay_exponents() {
        let c = derive_constants(&params(3.0, 1.0, 2.0), 1, 5.5).unwrap();
        assert!((c.decay_floor(0.0) + 0.5).abs() < 1e-15);
        assert!((c.decay_floor(1.0) - c.decay_floor(0.0) + 1.0).abs() < 1e-15);
        assert!((c.c_dgs(2.5) - c.c_dg - 2.5).abs() < 1e-15);
        // Small eta0 makes the energy exponent the weaker one.
        let c = derive_constants(&params(3.0, 1.0, 0.25), 1, 5.5).unwrap();
        assert!(c.energy_decay_exponent(0.0) > c.decay_floor(0.0));
        assert_eq!(c.safe_decay_exponent(0.0), c.energy_decay_exponent(0.0));
    }

    #[test]
    fn delta_in_unit_interval_when_admissible() {
        for &(d, g, s) in &[(1, 2.0, 5.5), (2, 1.5, 7.5), (3, 3.0, 9.5), (1, 1.2, 6.0)] {
            let c = derive_constants(&params(g, 1.0, 2.0), d, s).unwrap();
            assert!((0.0..=1.0).contains(&c.delta), "{d} {g} {s}: {}", c.delta);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn c_dgs_affine(sigma in 0.0f64..20.0, g in 1.01f64..5.0) {
                let c = derive_constants(&params(g, 1.0, 2.0), 2, 8.0).unwrap();
                prop_assert!((c.c_dgs(sigma) - c.c_dgs(0.0) - sigma).abs() < 1e-12);
                prop_assert!((c.decay_floor(sigma) - c.decay_floor(0.0) + sigma).abs() < 1e-12);
            }

            #[test]
            fn a_exceeds_one(g in 1.001f64..6.0, eta0 in 0.01f64..10.0, d in 1usize..=3) {
                let c = derive_constants(&params(g, 1.0, eta0), d, 10.0).unwrap();
                prop_assert!(c.a > 1.0);
            }

            #[test]
            fn c_dg_saturates_in_eta0(g in 1.01f64..4.0, d in 1usize..=3, extra in 0.0f64..5.0) {
                let sat = (g - 1.0) * d as f64 / 2.0;
                let c1 = derive_constants(&params(g, 1.0, sat + 1e-9), d, 10.0).unwrap();
                let c2 = derive_constants(&params(g, 1.0, sat + extra + 1e-9), d, 10.0).unwrap();
                prop_assert_eq!(c1.c_dg, c2.c_dg);
            }

            #[test]
            fn alpha_forms_agree(g in 1.001f64..10.0, d in 1usize..=3) {
                let p = alpha_printed(d, g);
                let s = alpha_simplified(d, g);
                prop_assert!((p - s).abs() <= 1e-12 * s);
            }
        }
    }
}
