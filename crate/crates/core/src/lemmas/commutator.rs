use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::norms::pointwise_magnitude;
use crate::spectral::ops::pad;
use crate::spectral::{lambda_pow, partial, sobolev_norm, SpectralField};
use crate::{Error, Result};

/// Pointwise product of a scalar with every component of `u`, on the grid of
/// the inputs. Real inputs give a real result.
fn multiply(v: &SpectralField, u: &SpectralField) -> Result<SpectralField> {
    v.same_grid(u)?;
    if v.components() != 1 {
        return Err(Error::GridMismatch("multiplier must be scalar".into()));
    }
    let g = v.grid();
    if v.is_real() && u.is_real() {
        let vs = v.to_real_samples().remove(0);
        let prod: Vec<Vec<f64>> = u
            .to_real_samples()
            .iter()
            .map(|c| c.iter().zip(&vs).map(|(a, b)| a * b).collect())
            .collect();
        SpectralField::from_real_samples(g, &prod)
    } else {
        let vs = v.to_complex_samples().remove(0);
        let prod: Vec<Vec<Complex64>> = u
            .to_complex_samples()
            .iter()
            .map(|c| c.iter().zip(&vs).map(|(a, b)| a * b).collect())
            .collect();
        SpectralField::from_complex_samples(g, &prod)
    }
}

fn padded(v: &SpectralField, u: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    v.same_grid(u)?;
    let fine = v.grid().refined(2)?;
    Ok((pad(v, &fine)?, pad(u, &fine)?))
}

/// `(v Lambda^s u, Lambda^s (v u))` with the mean of `v` removed; the mean
/// commutes with every multiplier and drops out of the commutator.
fn commutator_parts(v: &SpectralField, u: &SpectralField, s: f64) -> Result<(SpectralField, SpectralField)> {
    let mut v = v.clone();
    let zero = v.grid().index_of_mode(&vec![0; v.grid().dim()]).expect("zero mode");
    v.coeffs_mut(0)[zero] = Complex64::new(0.0, 0.0);
    let left = multiply(&v, &lambda_pow(u, s)?)?;
    let right = lambda_pow(&multiply(&v, u)?, s)?;
    Ok((left, right))
}

fn commutator_fine(v: &SpectralField, u: &SpectralField, s: f64) -> Result<SpectralField> {
    let (left, right) = commutator_parts(v, u, s)?;
    Ok(left.sub(&right))
}

/// `s sum_j d_j v Lambda^{s-2} d_j u`.
fn correction_fine(v: &SpectralField, u: &SpectralField, s: f64) -> Result<SpectralField> {
    let d = v.grid().dim();
    let mut out = SpectralField::zeros(v.grid(), u.components(), v.is_real() && u.is_real());
    for j in 0..d {
        let dv = partial(v, j)?;
        let du = lambda_pow(&partial(u, j)?, s - 2.0)?;
        out.axpy(s, &multiply(&dv, &du)?);
    }
    Ok(out)
}

/// `[v, Lambda^s] u = v Lambda^s u - Lambda^s (v u)` for scalar `v`.
///
/// Both inputs are padded to the doubled grid first, so products of
/// band-limited inputs are resolved exactly; the result lives on that grid.
pub fn commutator_apply(v: &SpectralField, u: &SpectralField, s: f64) -> Result<SpectralField> {
    let (vf, uf) = padded(v, u)?;
    commutator_fine(&vf, &uf, s)
}

/// `[v, Lambda^s] u - s grad v . Lambda^{s-2} grad u`, on the doubled grid.
pub fn second_order_remainder(v: &SpectralField, u: &SpectralField, s: f64) -> Result<SpectralField> {
    let (vf, uf) = padded(v, u)?;
    Ok(commutator_fine(&vf, &uf, s)?.sub(&correction_fine(&vf, &uf, s)?))
}

/// Relative size below which a commutator counts as zero.
pub const CANCELLATION_FLOOR: f64 = 1e-12;

/// Left and right side of one commutator estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorMeasure {
    pub numerator: f64,
    pub denominator: f64,
    /// `||v Lambda^s u||_2 + ||Lambda^s(v u)||_2`, the size of the two terms
    /// that cancel in the commutator.
    pub scale: f64,
}

impl CommutatorMeasure {
    /// Zero when the numerator is roundoff relative to `scale`; `None` for
    /// a degenerate sample (zero denominator, nonzero numerator).
    pub fn ratio(&self) -> Option<f64> {
        if self.numerator <= CANCELLATION_FLOOR * self.scale {
            Some(0.0)
        } else if self.denominator > 0.0 && self.denominator.is_finite() {
            Some(self.numerator / self.denominator)
        } else {
            None
        }
    }
}

fn sup(f: &SpectralField) -> f64 {
    pointwise_magnitude(&f.to_complex_samples())
        .into_iter()
        .fold(0.0, f64::max)
}

fn sup_of_derivatives(f: &SpectralField, order: usize) -> Result<f64> {
    let d = f.grid().dim();
    let mut layer = vec![f.clone()];
    for _ in 0..order {
        let mut next = Vec::with_capacity(layer.len() * d);
        for g in &layer {
            for j in 0..d {
                next.push(partial(g, j)?);
            }
        }
        layer = next;
    }
    let mut all = Vec::new();
    for g in &layer {
        all.extend(g.to_complex_samples());
    }
    Ok(pointwise_magnitude(&all).into_iter().fold(0.0, f64::max))
}

/// `||[v,Lambda^s]u||_2` against
/// `||v||_{Hdot^s} ||u||_inf + ||grad v||_inf ||u||_{Hdot^{s-1}}`.
pub fn kato_ponce_measure(v: &SpectralField, u: &SpectralField, s: f64) -> Result<CommutatorMeasure> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("first-order estimate needs s > 0, got {s}")));
    }
    let (vf, uf) = padded(v, u)?;
    let (left, right) = commutator_parts(&vf, &uf, s)?;
    let numerator = sobolev_norm(&left.sub(&right), 0.0, true)?;
    let denominator = sobolev_norm(&vf, s, true)? * sup(&uf)
        + sup_of_derivatives(&vf, 1)? * sobolev_norm(&uf, s - 1.0, true)?;
    Ok(CommutatorMeasure {
        numerator,
        denominator,
        scale: sobolev_norm(&left, 0.0, true)? + sobolev_norm(&right, 0.0, true)?,
    })
}

/// Remainder after the first-order correction against
/// `||v||_{Hdot^s} ||u||_inf + ||D^2 v||_inf ||u||_{Hdot^{s-2}}`.
pub fn second_order_measure(v: &SpectralField, u: &SpectralField, s: f64) -> Result<CommutatorMeasure> {
    if !(s > 1.0) {
        return Err(Error::InvalidParameter(format!("second-order estimate needs s > 1, got {s}")));
    }
    let (vf, uf) = padded(v, u)?;
    let (left, right) = commutator_parts(&vf, &uf, s)?;
    let corr = correction_fine(&vf, &uf, s)?;
    let numerator = sobolev_norm(&left.sub(&right).sub(&corr), 0.0, true)?;
    let denominator = sobolev_norm(&vf, s, true)? * sup(&uf)
        + sup_of_derivatives(&vf, 2)? * sobolev_norm(&uf, s - 2.0, true)?;
    Ok(CommutatorMeasure {
        numerator,
        denominator,
        scale: sobolev_norm(&left, 0.0, true)?
            + sobolev_norm(&right, 0.0, true)?
            + sobolev_norm(&corr, 0.0, true)?,
    })
}

pub fn kato_ponce_ratio(v: &SpectralField, u: &SpectralField, s: f64) -> Result<Option<f64>> {
    Ok(kato_ponce_measure(v, u, s)?.ratio())
}

pub fn second_order_ratio(v: &SpectralField, u: &SpectralField, s: f64) -> Result<Option<f64>> {
    Ok(second_order_measure(v, u, s)?.ratio())
}
