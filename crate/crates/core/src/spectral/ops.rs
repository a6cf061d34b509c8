//! Fourier multipliers on [`SpectralField`]s.
//!
//! Odd symbols (`i xi_j` and friends) are zeroed on the unpaired Nyquist
//! plane of the axes they involve, so real fields stay real.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative threshold below which a zero-mode coefficient counts as zero.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// `Lambda^sigma`: multiply by `|xi|^sigma`, sending the zero mode to 0 for
/// every `sigma != 0`.
pub fn lambda_pow(z: &SpectralField, sigma: f64) -> Result<SpectralField> {
    if !sigma.is_finite() || sigma < -2.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda_pow supports sigma >= -2, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(z.clone());
    }
    if sigma < 0.0 {
        require_mean_free(z, sigma)?;
    }
    let g = z.grid().clone();
    let half = 0.5 * sigma;
    Ok(z.map_symbol(|k| {
        let x2 = g.xi_sq(k);
        if x2 == 0.0 {
            ZERO
        } else {
            Complex64::new(x2.powf(half), 0.0)
        }
    }))
}

/// `Lambda^-2 d_j d_k`: multiply by `-xi_j xi_k / |xi|^2`.
pub fn riesz_second(z: &SpectralField, j: usize, k: usize) -> Result<SpectralField> {
    let g = z.grid().clone();
    check_axis(&g, j)?;
    check_axis(&g, k)?;
    require_mean_free(z, -2.0)?;
    Ok(z.map_symbol(|m| {
        let x2 = g.xi_sq(m);
        if x2 == 0.0 || (j != k && (g.is_nyquist(m, j) || g.is_nyquist(m, k))) {
            return ZERO;
        }
        let xi = g.xi(m);
        Complex64::new(-xi[j] * xi[k] / x2, 0.0)
    }))
}

/// `d_axis` applied to every component.
pub fn partial(z: &SpectralField, axis: usize) -> Result<SpectralField> {
    let g = z.grid().clone();
    check_axis(&g, axis)?;
    Ok(z.map_symbol(|m| {
        if g.is_nyquist(m, axis) {
            ZERO
        } else {
            Complex64::new(0.0, g.xi(m)[axis])
        }
    }))
}

/// Gradient of a scalar field: a `d`-component field.
pub fn gradient(z: &SpectralField) -> Result<SpectralField> {
    if z.components() != 1 {
        return Err(Error::GridMismatch("gradient expects a scalar field".into()));
    }
    let g = z.grid().clone();
    let comps = (0..g.dim())
        .map(|a| partial(z, a).map(|f| f.into_coeffs().remove(0)))
        .collect::<Result<Vec<_>>>()?;
    SpectralField::from_coeffs(&g, comps, z.is_real())
}

/// Divergence of a `d`-component field.
pub fn divergence(z: &SpectralField) -> Result<SpectralField> {
    let g = z.grid().clone();
    if z.components() != g.dim() {
        return Err(Error::GridMismatch(format!(
            "divergence expects {} components, got {}",
            g.dim(),
            z.components()
        )));
    }
    let mut out = vec![ZERO; g.len()];
    for a in 0..g.dim() {
        let c = z.coeffs(a);
        for (m, o) in out.iter_mut().enumerate() {
            if !g.is_nyquist(m, a) {
                *o += Complex64::new(0.0, g.xi(m)[a]) * c[m];
            }
        }
    }
    SpectralField::from_coeffs(&g, vec![out], z.is_real())
}

pub fn laplacian(z: &SpectralField) -> SpectralField {
    let g = z.grid().clone();
    z.map_symbol(|m| Complex64::new(-g.xi_sq(m), 0.0))
}

/// Friedrichs projector `J_n`: keep `|xi| < n`, zero the rest.
pub fn friedrichs_project(z: &SpectralField, n: f64) -> SpectralField {
    let mut out = z.clone();
    friedrichs_project_in_place(&mut out, n);
    out
}

pub fn friedrichs_project_in_place(z: &mut SpectralField, n: f64) {
    let n2 = n * n;
    let g = z.grid().clone();
    let xs = g.xi_sq_all();
    for c in 0..z.components() {
        for (m, v) in z.coeffs_mut(c).iter_mut().enumerate() {
            if xs[m] >= n2 {
                *v = ZERO;
            }
        }
    }
}

/// Whether every coefficient with `|xi| >= n` is exactly zero.
pub fn is_band_limited(z: &SpectralField, n: f64) -> bool {
    let n2 = n * n;
    let xs = z.grid().xi_sq_all();
    z.all_coeffs()
        .iter()
        .all(|c| c.iter().zip(xs).all(|(v, &x2)| x2 < n2 || *v == Complex64::new(0.0, 0.0)))
}

/// Embed a field into a grid with `fine.points()` a multiple of the field's
/// resolution on the same box. The coarse Nyquist coefficient is split evenly
/// between `+N/2` and `-N/2`, which keeps real data real and represents the
/// same trigonometric interpolant.
pub fn pad(z: &SpectralField, fine: &Grid) -> Result<SpectralField> {
    let g = z.grid();
    if fine.dim() != g.dim()
        || fine.half_length() != g.half_length()
        || fine.points() < g.points()
        || !fine.points().is_multiple_of(g.points())
    {
        return Err(Error::GridMismatch(format!(
            "cannot pad {g:?} into {fine:?}"
        )));
    }
    let d = g.dim();
    let half = (g.points() / 2) as i64;
    let mut comps = vec![vec![ZERO; fine.len()]; z.components()];
    for m in 0..g.len() {
        let mode = g.mode(m);
        let nyq: Vec<usize> = (0..d).filter(|&a| mode[a] == -half).collect();
        let share = 0.5f64.powi(nyq.len() as i32);
        for mask in 0..(1usize << nyq.len()) {
            let mut target = mode;
            for (bit, &a) in nyq.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    target[a] = half;
                }
            }
            let idx = if fine.points() == g.points() {
                m
            } else {
                fine.index_of_mode(&target[..d]).expect("fine lattice contains mode")
            };
            for (c, out) in comps.iter_mut().enumerate() {
                out[idx] += share * z.coeffs(c)[m];
            }
        }
    }
    SpectralField::from_coeffs(fine, comps, z.is_real())
}

/// Restrict to a coarser grid on the same box, folding the `+N/2` modes onto
/// the coarse Nyquist slot. Left inverse of [`pad`].
pub fn truncate(z: &SpectralField, coarse: &Grid) -> Result<SpectralField> {
    let g = z.grid();
    if coarse.dim() != g.dim()
        || coarse.half_length() != g.half_length()
        || coarse.points() > g.points()
    {
        return Err(Error::GridMismatch(format!(
            "cannot truncate {g:?} to {coarse:?}"
        )));
    }
    let d = g.dim();
    let half = (coarse.points() / 2) as i64;
    let mut comps = vec![vec![ZERO; coarse.len()]; z.components()];
    for m in 0..g.len() {
        let mut mode = g.mode(m);
        if mode[..d].iter().any(|&k| k < -half || k > half) {
            continue;
        }
        for k in mode[..d].iter_mut() {
            if *k == half {
                *k = -half;
            }
        }
        let idx = coarse.index_of_mode(&mode[..d]).expect("mode folded into range");
        for (c, out) in comps.iter_mut().enumerate() {
            out[idx] += z.coeffs(c)[m];
        }
    }
    SpectralField::from_coeffs(coarse, comps, z.is_real())
}

pub(crate) fn require_mean_free(z: &SpectralField, order: f64) -> Result<()> {
    let scale = z.max_abs_coeff();
    for mean in z.means() {
        if mean.norm() > MEAN_TOLERANCE * scale {
            return Err(Error::NonzeroMean {
                order,
                mean: mean.norm(),
            });
        }
    }
    Ok(())
}

fn check_axis(g: &Grid, axis: usize) -> Result<()> {
    if axis >= g.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for dimension {}",
            g.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.all_coeffs()
            .iter()
            .zip(b.all_coeffs())
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn lambda_half_on_sine() {
        let g = Grid::new(1, 32, PI).unwrap();
        let z = SpectralField::from_real_fn(&g, |x| (2.0 * x[0]).sin());
        let want = SpectralField::from_real_fn(&g, |x| 2f64.sqrt() * (2.0 * x[0]).sin());
        assert!(max_diff(&lambda_pow(&z, 0.5).unwrap(), &want) < 1e-15);
        assert_eq!(lambda_pow(&z, 0.0).unwrap(), z);
    }

    #[test]
    fn lambda_two_is_minus_laplacian() {
        let g = Grid::new(1, 32, PI).unwrap();
        let z = SpectralField::from_real_fn(&g, |x| x[0].cos() + (3.0 * x[0]).sin());
        let want = SpectralField::from_real_fn(&g, |x| x[0].cos() + 9.0 * (3.0 * x[0]).sin());
        let got = lambda_pow(&z, 2.0).unwrap();
        let err = max_diff(&got, &want);
        assert!(err < 1e-12 * want.max_abs_coeff(), "{err}");
        assert!(max_diff(&got, &laplacian(&z).scaled(-1.0)) < 1e-15);
    }

    #[test]
    fn negative_order_needs_zero_mean() {
        let g = Grid::new(1, 16, PI).unwrap();
        let z = SpectralField::from_real_fn(&g, |x| 1.0 + x[0].sin());
        assert!(matches!(lambda_pow(&z, -1.0), Err(Error::NonzeroMean { .. })));
        assert!(lambda_pow(&z, 1.0).is_ok());
    }

    #[test]
    fn riesz_examples() {
        let g1 = Grid::new(1, 16, PI).unwrap();
        let z = SpectralField::from_real_fn(&g1, |x| (2.0 * x[0]).sin() + 0.3 * x[0].cos());
        assert!(max_diff(&riesz_second(&z, 0, 0).unwrap(), &z.scaled(-1.0)) < 1e-15);

        let g2 = Grid::new(2, 16, PI).unwrap();
        let e1 = SpectralField::from_complex_samples(
            &g2,
            &[g2.points_iter().map(|x| Complex64::from_polar(1.0, x[0])).collect()],
        )
        .unwrap();
        assert!(riesz_second(&e1, 1, 1).unwrap().max_abs_coeff() < 1e-15);

        let e12 = SpectralField::from_complex_samples(
            &g2,
            &[g2.points_iter()
                .map(|x| Complex64::from_polar(1.0, x[0] + x[1]))
                .collect()],
        )
        .unwrap();
        let got = riesz_second(&e12, 0, 1).unwrap();
        assert!(max_diff(&got, &e12.scaled(-0.5)) < 1e-15);
    }

    #[test]
    fn sharp_cutoff_between_modes() {
        let g = Grid::new(1, 32, PI).unwrap();
        let z = SpectralField::from_real_fn(&g, |x| x[0].sin() + (5.0 * x[0]).sin());
        let want = SpectralField::from_real_fn(&g, |x| x[0].sin());
        assert!(max_diff(&friedrichs_project(&z, 3.0), &want) < 1e-15);
        // |xi| = n is removed.
        let at = SpectralField::from_real_fn(&g, |x| (3.0 * x[0]).cos());
        assert!(friedrichs_project(&at, 3.0).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn gradient_and_divergence() {
        let g = Grid::new(2, 32, PI).unwrap();
        let z = SpectralField::from_real_fn(&g, |x| (2.0 * x[0]).sin() * x[1].cos());
        let gr = gradient(&z).unwrap();
        let s = gr.to_real_samples();
        for (i, x) in g.points_iter().enumerate() {
            assert!((s[0][i] - 2.0 * (2.0 * x[0]).cos() * x[1].cos()).abs() < 1e-13);
            assert!((s[1][i] + (2.0 * x[0]).sin() * x[1].sin()).abs() < 1e-13);
        }
        let div = divergence(&gr).unwrap();
        assert!(max_diff(&div, &laplacian(&z)) < 1e-13);
    }

    #[test]
    fn odd_symbols_drop_nyquist() {
        let g = Grid::new(1, 8, PI).unwrap();
        let z = SpectralField::from_real_fn(&g, |x| (4.0 * x[0]).cos());
        assert!(partial(&z, 0).unwrap().is_zero());
    }

    #[test]
    fn pad_then_truncate_is_identity() {
        let g = Grid::new(2, 8, 2.0).unwrap();
        let fine = g.refined(2).unwrap();
        let z = SpectralField::from_real_fn(&g, |x| (x[0] * 1.3).sin() + (x[1] - 0.2).exp().cos());
        let p = pad(&z, &fine).unwrap();
        assert!(p.conjugate_symmetry_defect() < 1e-15);
        let back = truncate(&p, &g).unwrap();
        assert!(max_diff(&back, &z) < 1e-15);
        // Padded samples interpolate the coarse data at shared points.
        let sp = p.to_real_samples();
        let sc = z.to_real_samples();
        for i in 0..8 {
            for j in 0..8 {
                let coarse = i * 8 + j;
                let finei = (2 * i) * 16 + 2 * j;
                assert!((sp[0][finei] - sc[0][coarse]).abs() < 1e-13);
            }
        }
    }
}
