//! Executable checks of the auxiliary estimates: the bootstrap ODE, the
//! first- and second-order commutator bounds and the interpolation bounds.
//!
//! The bounds only assert that some constant exists, so the checks measure
//! ensemble maxima of the ratio "left side / right side" and compare them
//! across resolutions.

pub mod commutator;
pub mod ensemble;
pub mod interpolation;
pub mod ode;

pub use commutator::{
    commutator_apply, kato_ponce_measure, kato_ponce_ratio, second_order_measure,
    second_order_ratio, second_order_remainder, CommutatorMeasure,
};
pub use ensemble::{
    commutator_pair, graded_field, kato_ponce_ensemble, second_order_ensemble, state_member,
    EnsembleSpec, EnsembleStat,
};
pub use interpolation::{interpolation_ensemble, interpolation_ratios, InterpolationRatios};
pub use ode::{
    integrate, ode_bound_check, smallness_threshold, OdeReport, OdeSpec, OdeTolerance,
    ThresholdReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::Backend;
use crate::spectral::ops::pad;
use crate::spectral::{laplacian, sobolev_norm, Grid, SpectralField};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteConfig {
    pub ensemble: EnsembleSpec,
    pub orders: Vec<f64>,
    pub resolutions: [usize; 2],
    pub ode: OdeSpec,
    /// The first tolerance is the working one, the second the tightened one.
    pub ode_rtol: [f64; 2],
    /// Relative width at which the threshold bisection stops.
    pub threshold_width: f64,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            ensemble: EnsembleSpec::default(),
            orders: vec![1.5, 2.5, 5.5],
            resolutions: [256, 512],
            ode: OdeSpec::default(),
            ode_rtol: [1e-8, 1e-11],
            threshold_width: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSection {
    /// Largest relative deviation from the closed form with only the
    /// `Y/(1+t)^2` forcing kept.
    pub linear_rel_error: f64,
    pub small_data: OdeReport,
    pub large_data: OdeReport,
    pub thresholds: [ThresholdReport; 2],
    /// `|c(tight) / c(working) - 1|`.
    pub threshold_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderSection {
    pub s: f64,
    pub kato_ponce: [EnsembleStat; 2],
    pub kato_ponce_drift: Option<f64>,
    /// Present for `s > 1`.
    pub second_order: Option<[EnsembleStat; 2]>,
    pub second_order_drift: Option<f64>,
    /// Present for `s > d/2`; per resolution, the sup, gradient and
    /// intermediate-norm ratios.
    pub interpolation: Option<[[EnsembleStat; 3]; 2]>,
    pub interpolation_drift: Option<[Option<f64>; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub members: usize,
    pub resolutions: [usize; 2],
    pub ode: OdeSection,
    /// Coefficient error of `[e^{ix}, Lambda^2] e^{2ix} = -5 e^{3ix}`.
    pub two_mode_error: f64,
    /// Relative L2 size of `[v,Lambda^2]u - 2 grad v . grad u - (Lap v) u`.
    pub leibniz_error: f64,
    pub orders: Vec<OrderSection>,
}

/// `max / min` of two maxima, `None` if either is missing or zero.
pub fn drift(a: &EnsembleStat, b: &EnsembleStat) -> Option<f64> {
    match (a.max_ratio, b.max_ratio) {
        (Some(x), Some(y)) if x > 0.0 && y > 0.0 => Some(x.max(y) / x.min(y)),
        _ => None,
    }
}

fn single_mode(g: &Grid, k: i64) -> Result<SpectralField> {
    let idx = g
        .index_of_mode(&[k])
        .ok_or_else(|| Error::InvalidParameter(format!("mode {k} not on grid")))?;
    let mut f = SpectralField::zeros(g, 1, false);
    f.coeffs_mut(0)[idx] = Complex64::new(1.0, 0.0);
    Ok(f)
}

/// Coefficient error of the two-mode identity on a `points`-point line.
pub fn two_mode_error(points: usize) -> Result<f64> {
    let g = Grid::new(1, points, std::f64::consts::PI)?;
    let c = commutator_apply(&single_mode(&g, 1)?, &single_mode(&g, 2)?, 2.0)?;
    let target = c.grid().index_of_mode(&[3]).expect("mode 3 on the doubled grid");
    Ok(c.coeffs(0)
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let want = if i == target { -5.0 } else { 0.0 };
            (z - want).norm()
        })
        .fold(0.0, f64::max))
}

/// `(Lap v) u` on the doubled grid.
fn laplacian_product(v: &SpectralField, u: &SpectralField) -> Result<SpectralField> {
    let fine = v.grid().refined(2)?;
    let lv = laplacian(&pad(v, &fine)?).to_real_samples().remove(0);
    let uf = pad(u, &fine)?.to_real_samples().remove(0);
    let prod: Vec<f64> = lv.iter().zip(&uf).map(|(a, b)| a * b).collect();
    SpectralField::from_real_samples(&fine, &[prod])
}

pub fn leibniz_error(v: &SpectralField, u: &SpectralField) -> Result<f64> {
    let rem = second_order_remainder(v, u, 2.0)?;
    let exact = laplacian_product(v, u)?;
    let scale = sobolev_norm(&exact, 0.0, true)?;
    let err = sobolev_norm(&rem.sub(&exact), 0.0, true)?;
    Ok(if scale > 0.0 { err / scale } else { err })
}

pub fn run_lemma_suite(cfg: &LemmaSuiteConfig, backend: Backend) -> Result<LemmaReport> {
    let ode = ode_section(cfg)?;
    let coarse = cfg.ensemble.grid(cfg.resolutions[0])?;
    let (v, u) = commutator_pair(&cfg.ensemble, &coarse, 2.0, 0)?;
    let two_mode = two_mode_error(32)?;
    let leibniz = leibniz_error(&v, &u)?;
    let half_d = 0.5 * cfg.ensemble.dim as f64;

    let mut orders = Vec::with_capacity(cfg.orders.len());
    for &s in &cfg.orders {
        let per_res = |f: &dyn Fn(usize) -> Result<EnsembleStat>| -> Result<[EnsembleStat; 2]> {
            Ok([f(cfg.resolutions[0])?, f(cfg.resolutions[1])?])
        };
        let kp = per_res(&|n| kato_ponce_ensemble(&cfg.ensemble, n, s, backend))?;
        let so = if s > 1.0 {
            Some(per_res(&|n| second_order_ensemble(&cfg.ensemble, n, s, backend))?)
        } else {
            None
        };
        let interp = if s > half_d {
            Some([
                interpolation_ensemble(&cfg.ensemble, cfg.resolutions[0], s, backend)?,
                interpolation_ensemble(&cfg.ensemble, cfg.resolutions[1], s, backend)?,
            ])
        } else {
            None
        };
        orders.push(OrderSection {
            s,
            kato_ponce_drift: drift(&kp[0], &kp[1]),
            kato_ponce: kp,
            second_order_drift: so.as_ref().and_then(|p| drift(&p[0], &p[1])),
            second_order: so,
            interpolation_drift: interp
                .as_ref()
                .map(|p| [0, 1, 2].map(|k| drift(&p[0][k], &p[1][k]))),
            interpolation: interp,
        });
    }
    Ok(LemmaReport {
        seed: cfg.ensemble.seed,
        members: cfg.ensemble.members,
        resolutions: cfg.resolutions,
        ode,
        two_mode_error: two_mode,
        leibniz_error: leibniz,
        orders,
    })
}

fn ode_section(cfg: &LemmaSuiteConfig) -> Result<OdeSection> {
    let tight = OdeTolerance::relative(cfg.ode_rtol[1]);
    let working = OdeTolerance::relative(cfg.ode_rtol[0]);
    let linear = OdeSpec {
        nonlinear: false,
        ..cfg.ode.clone()
    };
    let traj = integrate(&linear, tight, false)?;
    let linear_rel_error = traj
        .times
        .iter()
        .zip(&traj.values)
        .map(|(&t, &y)| {
            let exact = linear.linear_solution(t);
            if exact == 0.0 {
                y.abs()
            } else {
                (y / exact - 1.0).abs()
            }
        })
        .fold(0.0, f64::max);
    let small_data = ode_bound_check(&cfg.ode.with_y0(0.01), working)?;
    let large_data = ode_bound_check(&cfg.ode.with_y0(10.0), working)?;
    let t0 = smallness_threshold(&cfg.ode, working, cfg.threshold_width)?;
    let t1 = smallness_threshold(&cfg.ode, tight, cfg.threshold_width)?;
    Ok(OdeSection {
        linear_rel_error,
        small_data,
        large_data,
        threshold_drift: (t1.midpoint() / t0.midpoint() - 1.0).abs(),
        thresholds: [t0, t1],
    })
}
