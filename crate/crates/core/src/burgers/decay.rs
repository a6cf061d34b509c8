use serde::{Deserialize, Serialize};

use super::BurgersFlow;
use crate::diagnostics::fit_decay;
use crate::exec::{try_map_indexed, Backend};
use crate::spectral::{sobolev_norm, Grid, GridSpec, SpectralField};
use crate::{Error, Result};

/// Box on which `F(t, .)` is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayGrid {
    Fixed(GridSpec),
    /// Half length `base_half_length (1 + rate t)`. For `v0 = rate x + p` with
    /// `p` periodic of period `2 base_half_length / m`, `F(t, .)` is periodic
    /// on this box, so norms over one box measure the growth of a single
    /// spatial period as the flow spreads it out.
    Comoving {
        points: usize,
        base_half_length: f64,
        rate: f64,
    },
}

impl DecayGrid {
    pub fn at(&self, dim: usize, t: f64) -> Result<Grid> {
        match *self {
            DecayGrid::Fixed(spec) => Grid::from_spec(spec),
            DecayGrid::Comoving {
                points,
                base_half_length,
                rate,
            } => Grid::new(dim, points, base_half_length * (1.0 + rate * t)),
        }
    }
}

/// `||F(t)||_{Hdot^sigma}` and `||D^2 v(t)||_inf` over a list of times, with
/// log-log slopes against `1 + t` and the implied constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub sigmas: Vec<f64>,
    pub times: Vec<f64>,
    /// `f_norms[i][j]`: order `sigmas[i]` at `times[j]`.
    pub f_norms: Vec<Vec<f64>>,
    pub d2v_sup: Vec<f64>,
    /// `None` when the series is not strictly positive (e.g. `F = 0`).
    pub f_slopes: Vec<Option<f64>>,
    pub d2v_slope: Option<f64>,
    /// `max_t ||F(t)||_{Hdot^sigma} (1+t)^{sigma - d/2}`.
    pub k_sigma: Vec<f64>,
    /// `max_t ||D^2 v(t)||_inf (1+t)^3`.
    pub c_d2v: f64,
    /// Largest Frobenius norm of `F` over all sampled points and times.
    pub f_sup: f64,
}

pub fn measure_background_decay(
    flow: &BurgersFlow,
    sigmas: &[f64],
    times: &[f64],
    grid: &DecayGrid,
    backend: Backend,
) -> Result<DecayTable> {
    let d = flow.dim();
    let dd = d as f64;
    let mut f_norms = vec![Vec::with_capacity(times.len()); sigmas.len()];
    let mut d2v_sup = Vec::with_capacity(times.len());
    let mut f_sup: f64 = 0.0;
    for &t in times {
        let g = grid.at(d, t)?;
        let pts = try_map_indexed(backend, g.len(), |i| {
            let x = g.point(i);
            let p = flow.evaluate(&x[..d], t)?;
            let d2 = flow.second_derivative(&x[..d], t)?;
            let d2n = d2.iter().flatten().flatten().map(|v| v * v).sum::<f64>().sqrt();
            Ok::<_, Error>((p.f, d2n))
        })?;
        let mut comps = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                comps.push(pts.iter().map(|(f, _)| f[(i, j)]).collect::<Vec<f64>>());
            }
        }
        f_sup = pts
            .iter()
            .fold(f_sup, |m, (f, _)| m.max(f.norm()));
        d2v_sup.push(pts.iter().fold(0.0f64, |m, (_, s)| m.max(*s)));
        let field = SpectralField::from_real_samples(&g, &comps)?;
        for (row, &sigma) in f_norms.iter_mut().zip(sigmas) {
            row.push(sobolev_norm(&field, sigma, true)?);
        }
    }
    let slope = |vals: &[f64]| fit_decay(times, vals, None).ok().map(|f| f.slope);
    let f_slopes = f_norms.iter().map(|r| slope(r)).collect();
    let k_sigma = sigmas
        .iter()
        .zip(&f_norms)
        .map(|(&s, r)| {
            times
                .iter()
                .zip(r)
                .map(|(&t, &v)| v * (1.0 + t).powf(s - dd / 2.0))
                .fold(0.0, f64::max)
        })
        .collect();
    let c_d2v = times
        .iter()
        .zip(&d2v_sup)
        .map(|(&t, &v)| v * (1.0 + t).powi(3))
        .fold(0.0, f64::max);
    Ok(DecayTable {
        sigmas: sigmas.to_vec(),
        times: times.to_vec(),
        d2v_slope: slope(&d2v_sup),
        f_norms,
        d2v_sup,
        f_slopes,
        k_sigma,
        c_d2v,
        f_sup,
    })
}

/// `M = sup |F(t, x)|` (Frobenius) over the given points and times.
pub fn sup_f_bound(
    flow: &BurgersFlow,
    points: &[[f64; 3]],
    times: &[f64],
    backend: Backend,
) -> Result<f64> {
    let d = flow.dim();
    let per_time = times
        .iter()
        .map(|&t| {
            let vals = try_map_indexed(backend, points.len(), |i| {
                flow.evaluate(&points[i][..d], t).map(|p| p.f.norm())
            })?;
            Ok(vals.into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_time.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burgers::InitialVelocity;
    use std::f64::consts::PI;

    fn log_times(n: usize, t0: f64, t1: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                (1.0 + t0) * ((1.0 + t1) / (1.0 + t0)).powf(s) - 1.0
            })
            .collect()
    }

    #[test]
    fn identity_flow_has_no_structure() {
        let flow = BurgersFlow::new(InitialVelocity::identity(1)).unwrap();
        let grid = DecayGrid::Fixed(GridSpec {
            dim: 1,
            points: 32,
            half_length: 5.0,
        });
        let tab =
            measure_background_decay(&flow, &[0.0, 1.0], &log_times(12, 0.0, 10.0), &grid, Backend::default())
                .unwrap();
        assert!(tab.f_norms.iter().flatten().all(|&v| v == 0.0));
        assert!(tab.d2v_sup.iter().all(|&v| v == 0.0));
        assert_eq!(tab.f_slopes, vec![None, None]);
        assert_eq!(tab.f_sup, 0.0);
    }

    #[test]
    fn comoving_box_scaling() {
        let flow = BurgersFlow::new(InitialVelocity::sine_1d(1.0, &[0.1], &[1.0])).unwrap();
        let grid = DecayGrid::Comoving {
            points: 64,
            base_half_length: PI,
            rate: 1.0,
        };
        let tab = measure_background_decay(&flow, &[1.0], &log_times(12, 1.0, 100.0), &grid, Backend::default())
            .unwrap();
        assert!(tab.f_slopes[0].unwrap() <= -0.35);
        assert!(tab.d2v_slope.unwrap() <= -2.85);
        assert!(tab.f_sup.is_finite() && tab.f_sup > 0.0);
    }
}
