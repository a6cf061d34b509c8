use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::ops::require_mean_free;
use crate::{Error, Result};

/// Tree reduction with a fixed split order, so the result depends only on the
/// input values and not on how the caller produced them.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `Hdot^sigma` norm (homogeneous) or `H^sigma` norm
/// `sqrt(||z||_{L2}^2 + ||z||_{Hdot^sigma}^2)`, summed over components.
///
/// Normalized so that `sigma = 0` reproduces the grid-quadrature L2 norm.
/// Negative orders require a mean-free field.
pub fn sobolev_norm(z: &SpectralField, sigma: f64, homogeneous: bool) -> Result<f64> {
    if !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite order {sigma}")));
    }
    if sigma < 0.0 {
        require_mean_free(z, sigma)?;
    }
    let hom = sobolev_sum(z, sigma);
    let total = if homogeneous || sigma == 0.0 {
        hom
    } else {
        hom + sobolev_sum(z, 0.0)
    };
    Ok((z.grid().volume() * total).sqrt())
}

fn sobolev_sum(z: &SpectralField, sigma: f64) -> f64 {
    let xs = z.grid().xi_sq_all();
    let terms: Vec<f64> = z
        .all_coeffs()
        .iter()
        .flat_map(|c| {
            c.iter().zip(xs).map(move |(v, &x2)| {
                let w = if sigma == 0.0 {
                    1.0
                } else if x2 == 0.0 {
                    0.0
                } else {
                    x2.powf(sigma)
                };
                w * v.norm_sqr()
            })
        })
        .collect();
    pairwise_sum(&terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpExponent {
    One,
    Two,
    Infinity,
}

/// Grid-quadrature `L^p` norm of physical samples, using the pointwise
/// Euclidean length across components.
pub fn lp_norm(z: &SpectralField, p: LpExponent) -> f64 {
    let samples = z.to_complex_samples();
    lp_norm_samples(&samples, z.grid().cell_volume(), p)
}

pub fn lp_norm_samples(samples: &[Vec<Complex64>], cell_volume: f64, p: LpExponent) -> f64 {
    let mags = pointwise_magnitude(samples);
    match p {
        LpExponent::One => cell_volume * pairwise_sum(&mags),
        LpExponent::Two => {
            let sq: Vec<f64> = mags.iter().map(|m| m * m).collect();
            (cell_volume * pairwise_sum(&sq)).sqrt()
        }
        LpExponent::Infinity => mags.iter().fold(0.0, |m, &x| m.max(x)),
    }
}

/// `sqrt(sum_c |z_c(x)|^2)` at every grid point.
pub fn pointwise_magnitude(samples: &[Vec<Complex64>]) -> Vec<f64> {
    let len = samples.first().map_or(0, |s| s.len());
    (0..len)
        .map(|i| samples.iter().map(|s| s[i].norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Real L2 inner product `Re integral sum_c u_c conj(v_c)`.
pub fn inner_product(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    u.same_grid(v)?;
    if u.components() != v.components() {
        return Err(Error::GridMismatch("component counts differ".into()));
    }
    let terms: Vec<f64> = u
        .all_coeffs()
        .iter()
        .zip(v.all_coeffs())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x * y.conj()).re))
        .collect();
    Ok(u.grid().volume() * pairwise_sum(&terms))
}
