use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::InitialVelocity;
use crate::exec::{map_slice, Backend};

/// Distance from `mu` to the closed negative real half-line.
pub fn h0_distance(mu: Complex<f64>) -> f64 {
    if mu.re >= 0.0 {
        mu.norm()
    } else {
        mu.im.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub samples: usize,
    /// `min_x dist(Sp(Dv0(x)), (-inf, 0])`.
    pub min_distance: f64,
    pub argmin: [f64; 3],
    pub epsilon: f64,
    pub pass: bool,
}

/// Spectral-gap check of `Dv0` over the given sample points. A zero
/// `epsilon` still demands a strictly positive gap.
pub fn verify_h0(v0: &InitialVelocity, samples: &[[f64; 3]], backend: Backend) -> GapReport {
    let d = v0.dim;
    let dists = map_slice(backend, samples, |x| {
        let jet = v0.jet(&nalgebra::Vector3::from(*x));
        let m = DMatrix::from_fn(d, d, |i, j| jet.jacobian[(i, j)]);
        m.complex_eigenvalues()
            .iter()
            .map(|&mu| h0_distance(mu))
            .fold(f64::INFINITY, f64::min)
    });
    let (idx, min) = dists
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    GapReport {
        samples: samples.len(),
        min_distance: min,
        argmin: samples.get(idx).copied().unwrap_or([0.0; 3]),
        epsilon: v0.epsilon,
        pass: !samples.is_empty() && min > 0.0 && min >= v0.epsilon,
    }
}
