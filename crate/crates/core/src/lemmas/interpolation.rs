use serde::{Deserialize, Serialize};

use super::ensemble::{state_member, EnsembleSpec, EnsembleStat};
use crate::diagnostics::xdot;
use crate::exec::{try_map_indexed, Backend};
use crate::makino::State;
use crate::spectral::norms::pointwise_magnitude;
use crate::spectral::{partial, sobolev_norm};
use crate::{Error, Result};

/// The three interpolation ratios of one triple. `None` marks a degenerate
/// sample, or the gradient bound when `s <= d/2 + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRatios {
    /// `||z||_inf / (X0^{1-d/2s} Xs^{d/2s})`.
    pub sup: Option<f64>,
    /// `||Dz||_inf / (X0^{1-(d/2+1)/s} Xs^{(d/2+1)/s})`.
    pub gradient: Option<f64>,
    /// `||z||_{Hdot^{s-1}} / (X0^{1/s} Xs^{1-1/s})`.
    pub intermediate: Option<f64>,
}

fn quotient(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && den.is_finite()).then(|| num / den)
}

pub fn interpolation_ratios(state: &State, s: f64) -> Result<InterpolationRatios> {
    let d = state.grid().dim() as f64;
    if !(s > d / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "interpolation needs s > d/2, got s = {s}"
        )));
    }
    let x0 = xdot(state, 0.0)?;
    let xs = xdot(state, s)?;
    let sup = state.pointwise_magnitude().into_iter().fold(0.0, f64::max);
    let theta = d / (2.0 * s);
    let r_sup = quotient(sup, x0.powf(1.0 - theta) * xs.powf(theta));

    let r_grad = if s > d / 2.0 + 1.0 {
        let mut samples = Vec::new();
        for f in state.parts() {
            for j in 0..state.grid().dim() {
                samples.extend(partial(f, j)?.to_complex_samples());
            }
        }
        let dsup = pointwise_magnitude(&samples).into_iter().fold(0.0, f64::max);
        let th = (d / 2.0 + 1.0) / s;
        quotient(dsup, x0.powf(1.0 - th) * xs.powf(th))
    } else {
        None
    };

    let mut sq = 0.0;
    for f in state.parts() {
        sq += sobolev_norm(f, s - 1.0, true)?.powi(2);
    }
    let r_mid = quotient(sq.sqrt(), x0.powf(1.0 / s) * xs.powf(1.0 - 1.0 / s));
    Ok(InterpolationRatios {
        sup: r_sup,
        gradient: r_grad,
        intermediate: r_mid,
    })
}

/// Ensemble maxima of the three ratios, in field order.
pub fn interpolation_ensemble(
    spec: &EnsembleSpec,
    points: usize,
    s: f64,
    backend: Backend,
) -> Result<[EnsembleStat; 3]> {
    let grid = spec.grid(points)?;
    let all = try_map_indexed(backend, spec.members, |i| {
        interpolation_ratios(&state_member(spec, &grid, s, i)?, s)
    })?;
    let pick = |f: fn(&InterpolationRatios) -> Option<f64>| {
        EnsembleStat::from_ratios(points, &all.iter().map(f).collect::<Vec<_>>())
    };
    Ok([pick(|r| r.sup), pick(|r| r.gradient), pick(|r| r.intermediate)])
}
