//! Weighted Sobolev quantities of the deviation state, decay-exponent fits and
//! the global-bound check.

use serde::{Deserialize, Serialize};

use crate::makino::State;
use crate::params::{DerivedConstants, PhysicalParams};
use crate::spectral::sobolev_norm;
use crate::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares line through `(log(1+t), log value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log values.
    pub residual: f64,
    pub samples: usize,
}

/// Fit `value ~ e^intercept (1+t)^slope` over the samples with `t` inside
/// `window` (inclusive; all samples when `None`).
pub fn fit_decay(times: &[f64], values: &[f64], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, (&t, &v)) in times.iter().zip(values).enumerate() {
        if let Some((lo, hi)) = window {
            if t < lo || t > hi {
                continue;
            }
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveSample { index: i, value: v });
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit window has a single time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(DecayFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        samples: xs.len(),
    })
}

/// `Xdot_sigma = ||(rho~, w, A)||_{Hdot^sigma}`.
pub fn xdot(state: &State, sigma: f64) -> Result<f64> {
    let mut sq = 0.0;
    for f in state.parts() {
        sq += sobolev_norm(f, sigma, true)?.powi(2);
    }
    Ok(sq.sqrt())
}

/// Largest pointwise magnitude of the triple over the points with
/// `max_i |x_i| >= (1 - 2 fraction) L`, i.e. the outer `fraction` of the box
/// width on each side.
pub fn boundary_monitor(state: &State, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "shell fraction must lie in (0, 0.5), got {fraction}"
        )));
    }
    let g = state.grid();
    let edge = (1.0 - 2.0 * fraction) * g.half_length();
    let mags = state.pointwise_magnitude();
    Ok((0..g.len())
        .filter(|&i| {
            let x = g.point(i);
            x[..g.dim()].iter().any(|c| c.abs() >= edge)
        })
        .fold(0.0, |m, i| m.max(mags[i])))
}

/// One recorded time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub dt: f64,
    /// `Xdot_0`, the L2 norm of the triple.
    pub xdot0: f64,
    /// `Xdot_s` at the regularity index.
    pub xdot_s: f64,
    /// `X_s = sqrt(Xdot_0^2 + Xdot_s^2)`.
    pub x_s: f64,
    /// `Xdot_sigma` for each configured order.
    pub xdot: Vec<f64>,
    /// `X_sigma` for each configured order.
    pub x: Vec<f64>,
    /// `Y_sigma = (1+t)^{c_{d,gamma,sigma} - a} Xdot_sigma`.
    pub y: Vec<f64>,
    pub mass: f64,
    pub phi_l1: f64,
    pub min_rho_tilde: f64,
    pub state_sup: f64,
    pub boundary_max: f64,
    pub residual_energy: Option<f64>,
    pub residual_laser: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub sigmas: Vec<f64>,
    pub rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsSeries {
    pub fn new(sigmas: &[f64]) -> Self {
        Self {
            sigmas: sigmas.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Compute and append the row for `state`.
    pub fn record(
        &mut self,
        state: &State,
        dt: f64,
        consts: &DerivedConstants,
        p: &PhysicalParams,
        shell_fraction: f64,
    ) -> Result<&DiagnosticsRow> {
        let t = state.t;
        let xdot0 = xdot(state, 0.0)?;
        let xdot_s = xdot(state, consts.s)?;
        let mut xs = Vec::with_capacity(self.sigmas.len());
        let mut xx = Vec::with_capacity(self.sigmas.len());
        let mut yy = Vec::with_capacity(self.sigmas.len());
        for &sigma in &self.sigmas {
            let v = xdot(state, sigma)?;
            xs.push(v);
            xx.push((xdot0 * xdot0 + v * v).sqrt());
            yy.push(y_weight(t, sigma, consts) * v);
        }
        let rho = &state.rho_tilde.to_real_samples()[0];
        let mags = state.pointwise_magnitude();
        self.rows.push(DiagnosticsRow {
            t,
            dt,
            xdot0,
            xdot_s,
            x_s: (xdot0 * xdot0 + xdot_s * xdot_s).sqrt(),
            xdot: xs,
            x: xx,
            y: yy,
            mass: state.mass(p),
            phi_l1: phi_l1(state),
            min_rho_tilde: rho.iter().copied().fold(f64::INFINITY, f64::min),
            state_sup: mags.iter().fold(0.0, |m, &v| m.max(v)),
            boundary_max: boundary_monitor(state, shell_fraction)?,
            residual_energy: None,
            residual_laser: None,
        });
        Ok(self.rows.last().expect("row just pushed"))
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Series of `Xdot_sigma` for configured order index `i`.
    pub fn xdot_series(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.xdot[i]).collect()
    }

    pub fn xdot0_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.xdot0).collect()
    }

    pub fn xdot_s_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.xdot_s).collect()
    }
}

/// `(1+t)^{c_{d,gamma,sigma} - a}`.
pub fn y_weight(t: f64, sigma: f64, consts: &DerivedConstants) -> f64 {
    (1.0 + t).powf(consts.c_dgs(sigma) - consts.a)
}

/// Smallest `C >= 0` with
/// `sqrt((1+t)^{2s} Xdot_s^2 + Xdot_0^2) <= 2 e^{Ct/(1+t)} (1+t)^{-c_dg} X_s(0)`
/// along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub c_min: f64,
    pub initial_hs: f64,
    pub lhs: Vec<f64>,
    pub finite: bool,
}

pub fn check_hs_bound(
    times: &[f64],
    xdot0: &[f64],
    xdot_s: &[f64],
    consts: &DerivedConstants,
    initial_hs: f64,
) -> BoundReport {
    let s = consts.s;
    let lhs: Vec<f64> = times
        .iter()
        .zip(xdot0.iter().zip(xdot_s))
        .map(|(&t, (&a, &b))| ((1.0 + t).powf(2.0 * s) * b * b + a * a).sqrt())
        .collect();
    let mut c_min: f64 = 0.0;
    for (&t, &l) in times.iter().zip(&lhs) {
        if t <= 0.0 || l == 0.0 {
            continue;
        }
        let ratio = l * (1.0 + t).powf(consts.c_dg) / (2.0 * initial_hs);
        c_min = c_min.max((1.0 + t) / t * ratio.ln());
    }
    BoundReport {
        finite: c_min.is_finite(),
        c_min,
        initial_hs,
        lhs,
    }
}

/// Fitted slope against the target exponents for one order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub sigma: f64,
    pub fit: Option<DecayFit>,
    /// `d/2 - sigma - min(1, d(gamma-1)/2)`.
    pub decay_floor: f64,
    /// `-(c_dg + sigma)`.
    pub energy_exponent: f64,
    /// Weaker of the two.
    pub target: f64,
    /// `target - slope`; positive means the measured decay is faster.
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub window: (f64, f64),
    pub slopes: Vec<SlopeReport>,
    pub slopes_monotone: bool,
    pub bound: BoundReport,
}

/// Default fitting window `[t_end / 5, t_end]`.
pub fn default_window(t_end: f64) -> (f64, f64) {
    (t_end / 5.0, t_end)
}

pub fn decay_report(
    series: &DiagnosticsSeries,
    consts: &DerivedConstants,
    window: (f64, f64),
) -> DecayReport {
    let times = series.times();
    let slopes: Vec<SlopeReport> = series
        .sigmas
        .iter()
        .enumerate()
        .map(|(i, &sigma)| {
            let fit = fit_decay(&times, &series.xdot_series(i), Some(window)).ok();
            let target = consts.safe_decay_exponent(sigma);
            SlopeReport {
                sigma,
                margin: fit.map(|f| target - f.slope),
                fit,
                decay_floor: consts.decay_floor(sigma),
                energy_exponent: consts.energy_decay_exponent(sigma),
                target,
            }
        })
        .collect();
    let fitted: Vec<f64> = slopes.iter().filter_map(|r| r.fit.map(|f| f.slope)).collect();
    let slopes_monotone =
        fitted.len() == slopes.len() && fitted.windows(2).all(|w| w[1] < w[0]);
    let initial = series.rows.first().map_or(0.0, |r| r.x_s);
    let bound = check_hs_bound(
        &times,
        &series.xdot0_series(),
        &series.xdot_s_series(),
        consts,
        initial,
    );
    DecayReport {
        window,
        slopes,
        slopes_monotone,
        bound,
    }
}

/// `||phi||_{L1} = integral sum_j |A_j|^2 dx`.
pub fn phi_l1(state: &State) -> f64 {
    let phi = crate::dynamics::intensity(&state.a);
    state.grid().cell_volume() * crate::spectral::pairwise_sum(&phi)
}
