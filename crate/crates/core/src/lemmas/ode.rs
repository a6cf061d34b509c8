//! Bootstrap ODE: integrate the equality version of
//!
//! ```text
//! Y' = -a Y/(1+t) + C( Y/(1+t)^2 + Y^2 + sum_j (1+t)^(m'_j - 1) Y^(m_j + 1) )
//! ```
//!
//! and compare against `2 e^{Ct/(1+t)} Y0 (1+t)^{-a}`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub m: Vec<f64>,
    pub m_prime: Vec<f64>,
    #[serde(rename = "Y0")]
    pub y0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Keep the `Y^2` and `Y^(m_j+1)` terms.
    pub nonlinear: bool,
}

impl Default for OdeSpec {
    fn default() -> Self {
        Self {
            a: 2.0,
            c: 1.0,
            m: vec![1.0],
            m_prime: vec![0.0],
            y0: 0.01,
            t_end: 1e3,
            nonlinear: true,
        }
    }
}

impl OdeSpec {
    pub fn validate(&self) -> Result<()> {
        let terms_ok = self.m.len() == self.m_prime.len()
            && self
                .m
                .iter()
                .zip(&self.m_prime)
                .all(|(&m, &mp)| m > 0.0 && mp < m * self.a);
        if self.a > 1.0
            && self.c > 0.0
            && terms_ok
            && self.y0 >= 0.0
            && self.y0.is_finite()
            && self.t_end > 0.0
            && self.t_end.is_finite()
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid bootstrap ODE: {self:?}")))
        }
    }

    pub fn with_y0(&self, y0: f64) -> Self {
        Self { y0, ..self.clone() }
    }

    pub fn rhs(&self, t: f64, y: f64) -> f64 {
        let s = 1.0 + t;
        let mut forcing = y / (s * s);
        if self.nonlinear {
            forcing += y * y;
            for (&m, &mp) in self.m.iter().zip(&self.m_prime) {
                forcing += s.powf(mp - 1.0) * y.powf(m + 1.0);
            }
        }
        -self.a * y / s + self.c * forcing
    }

    /// `2 e^{Ct/(1+t)} Y0 / (1+t)^a`.
    pub fn bound(&self, t: f64) -> f64 {
        2.0 * (self.c * t / (1.0 + t)).exp() * self.y0 / (1.0 + t).powf(self.a)
    }

    /// Solution when only the `Y/(1+t)^2` forcing is kept.
    pub fn linear_solution(&self, t: f64) -> f64 {
        0.5 * self.bound(t)
    }

    /// Smallness level that the bootstrap argument itself guarantees:
    /// the largest `Z0` with
    /// `4Ce^C Z0/(a-1) + C sum_j 2^(m_j+1) C e^(C m_j) Z0^(m_j) / (m_j a - m'_j) <= 1`.
    pub fn sufficient_threshold(&self) -> f64 {
        let c = self.c;
        let lhs = |z: f64| {
            let mut v = 4.0 * c * c.exp() * z / (self.a - 1.0);
            for (&m, &mp) in self.m.iter().zip(&self.m_prime) {
                v += c * 2f64.powf(m + 1.0) * c * (c * m).exp() * z.powf(m) / (m * self.a - mp);
            }
            v
        };
        let mut hi = 1.0;
        while lhs(hi) < 1.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lhs(mid) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl OdeTolerance {
    pub fn relative(rtol: f64) -> Self {
        Self { rtol, atol: 0.0 }
    }
}

/// Integration is abandoned once `Y` exceeds this value.
pub const BLOWUP_CAP: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeReport {
    pub y0: f64,
    pub holds: bool,
    /// `max_t Y(t) / bound(t)` over accepted steps.
    pub max_ratio: f64,
    pub blew_up: bool,
    pub t_reached: f64,
    pub y_final: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub report: OdeReport,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand-Prince integration on `[0, T]`. With `stop_on_violation`
/// the run ends at the first accepted step above the bound.
pub fn integrate(spec: &OdeSpec, tol: OdeTolerance, stop_on_violation: bool) -> Result<Trajectory> {
    spec.validate()?;
    let f = |t: f64, y: f64| spec.rhs(t, y);
    let mut t = 0.0;
    let mut y = spec.y0;
    let mut times = vec![t];
    let mut values = vec![y];
    let mut max_ratio: f64 = if y > 0.0 { y / spec.bound(0.0) } else { 0.0 };
    let mut blew_up = false;
    let mut steps = 0usize;
    if y == 0.0 {
        return Ok(Trajectory {
            times: vec![0.0, spec.t_end],
            values: vec![0.0, 0.0],
            report: OdeReport {
                y0: 0.0,
                holds: true,
                max_ratio: 0.0,
                blew_up: false,
                t_reached: spec.t_end,
                y_final: 0.0,
                steps: 0,
            },
        });
    }
    let mut h = 1e-3 * tol.rtol.powf(0.2).max(1e-3);
    let mut k1 = f(t, y);
    while t < spec.t_end {
        h = h.min(spec.t_end - t);
        if h <= 1e-14 * (1.0 + t) {
            blew_up = true;
            break;
        }
        let k2 = f(t + C2 * h, y + h * A21 * k1);
        let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(t + h, y_new);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = tol.atol + tol.rtol * y.abs().max(y_new.abs());
        let ratio = if scale > 0.0 { err.abs() / scale } else { 0.0 };
        if !y_new.is_finite() || ratio > 1.0 {
            let shrink = if ratio.is_finite() {
                (0.9 * ratio.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h *= shrink;
            continue;
        }
        t += h;
        y = y_new;
        k1 = k7;
        steps += 1;
        times.push(t);
        values.push(y);
        max_ratio = max_ratio.max(y / spec.bound(t));
        if y > BLOWUP_CAP {
            blew_up = true;
            break;
        }
        if stop_on_violation && max_ratio > 1.0 {
            break;
        }
        let grow = if ratio > 0.0 {
            (0.9 * ratio.powf(-0.2)).min(5.0)
        } else {
            5.0
        };
        h *= grow;
    }
    Ok(Trajectory {
        report: OdeReport {
            y0: spec.y0,
            holds: !blew_up && max_ratio <= 1.0,
            max_ratio,
            blew_up,
            t_reached: t,
            y_final: y,
            steps,
        },
        times,
        values,
    })
}

pub fn ode_bound_check(spec: &OdeSpec, tol: OdeTolerance) -> Result<OdeReport> {
    Ok(integrate(spec, tol, false)?.report)
}

/// Bracket `[lower, upper]` of the largest admissible `Y0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub lower: f64,
    pub upper: f64,
    pub rtol: f64,
    /// Level guaranteed by the bootstrap inequality; the measured threshold
    /// should lie above it.
    pub sufficient: f64,
    pub evaluations: usize,
}

impl ThresholdReport {
    pub fn midpoint(&self) -> f64 {
        (self.lower * self.upper).sqrt()
    }
}

/// Geometric bisection on `Y0` until `upper / lower < 1 + rel_width`.
pub fn smallness_threshold(spec: &OdeSpec, tol: OdeTolerance, rel_width: f64) -> Result<ThresholdReport> {
    spec.validate()?;
    if !(rel_width > 0.0) {
        return Err(Error::InvalidParameter("bisection width must be positive".into()));
    }
    let mut evaluations = 0usize;
    let mut holds = |y0: f64| -> Result<bool> {
        evaluations += 1;
        Ok(integrate(&spec.with_y0(y0), tol, true)?.report.holds)
    };
    let (mut lo, mut hi);
    let mut y = 1.0;
    if holds(y)? {
        lo = y;
        loop {
            y *= 4.0;
            if y > BLOWUP_CAP {
                return Err(Error::InvalidParameter(
                    "bound holds for every tested initial value".into(),
                ));
            }
            if !holds(y)? {
                hi = y;
                break;
            }
            lo = y;
        }
    } else {
        hi = y;
        loop {
            y *= 0.25;
            if y < 1e-300 {
                return Err(Error::InvalidParameter("no admissible initial value found".into()));
            }
            if holds(y)? {
                lo = y;
                break;
            }
            hi = y;
        }
    }
    while hi / lo > 1.0 + rel_width {
        let mid = (lo * hi).sqrt();
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdReport {
        lower: lo,
        upper: hi,
        rtol: tol.rtol,
        sufficient: spec.sufficient_threshold(),
        evaluations,
    })
}
