use num_complex::Complex64;

use super::grid::Grid;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier coefficients of one or more field components on a shared grid.
///
/// `real` marks fields that represent real-valued data. Such fields keep
/// conjugate-symmetric coefficients and convert back to real samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: Vec<Vec<Complex64>>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, components: usize, real: bool) -> Self {
        Self {
            grid: grid.clone(),
            comps: vec![vec![ZERO; grid.len()]; components],
            real,
        }
    }

    pub fn from_coeffs(grid: &Grid, comps: Vec<Vec<Complex64>>, real: bool) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::GridMismatch("field needs at least one component".into()));
        }
        for (i, c) in comps.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component {i} has {} coefficients, grid has {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            comps,
            real,
        })
    }

    pub fn from_real_samples(grid: &Grid, samples: &[Vec<f64>]) -> Result<Self> {
        let comps = samples
            .iter()
            .map(|s| {
                check_len(grid, s.len())?;
                let mut buf: Vec<Complex64> = s.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                grid.forward(&mut buf);
                Ok(buf)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut f = Self::from_coeffs(grid, comps, true)?;
        f.symmetrize();
        Ok(f)
    }

    pub fn from_complex_samples(grid: &Grid, samples: &[Vec<Complex64>]) -> Result<Self> {
        let comps = samples
            .iter()
            .map(|s| {
                check_len(grid, s.len())?;
                let mut buf = s.clone();
                grid.forward(&mut buf);
                Ok(buf)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(grid, comps, false)
    }

    /// Sample a real scalar function at the grid points.
    pub fn from_real_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let s: Vec<f64> = grid.points_iter().map(f).collect();
        Self::from_real_samples(grid, &[s]).expect("sample length matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn components(&self) -> usize {
        self.comps.len()
    }
    pub fn is_real(&self) -> bool {
        self.real
    }
    pub fn coeffs(&self, component: usize) -> &[Complex64] {
        &self.comps[component]
    }
    pub fn coeffs_mut(&mut self, component: usize) -> &mut [Complex64] {
        &mut self.comps[component]
    }
    pub fn all_coeffs(&self) -> &[Vec<Complex64>] {
        &self.comps
    }
    pub fn into_coeffs(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Single-component field holding component `i`.
    pub fn component(&self, i: usize) -> SpectralField {
        Self {
            grid: self.grid.clone(),
            comps: vec![self.comps[i].clone()],
            real: self.real,
        }
    }

    /// Mean value (zero-mode coefficient) of each component.
    pub fn means(&self) -> Vec<Complex64> {
        self.comps.iter().map(|c| c[0]).collect()
    }

    pub fn to_complex_samples(&self) -> Vec<Vec<Complex64>> {
        self.comps
            .iter()
            .map(|c| {
                let mut buf = c.clone();
                self.grid.inverse(&mut buf);
                buf
            })
            .collect()
    }

    /// Real parts of the physical samples. For real fields the imaginary part
    /// is round-off only.
    pub fn to_real_samples(&self) -> Vec<Vec<f64>> {
        self.to_complex_samples()
            .into_iter()
            .map(|s| s.into_iter().map(|z| z.re).collect())
            .collect()
    }

    /// Enforce `z(-k) = conj z(k)` on real fields by averaging each pair.
    pub fn symmetrize(&mut self) {
        if !self.real {
            return;
        }
        let g = &self.grid;
        for c in &mut self.comps {
            for k in 0..c.len() {
                let p = g.partner(k);
                if p < k {
                    continue;
                }
                if p == k {
                    c[k] = Complex64::new(c[k].re, 0.0);
                } else {
                    let avg = 0.5 * (c[k] + c[p].conj());
                    c[k] = avg;
                    c[p] = avg.conj();
                }
            }
        }
    }

    /// Largest `|z(-k) - conj z(k)|` relative to the largest coefficient.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for c in &self.comps {
            for (k, z) in c.iter().enumerate() {
                scale = scale.max(z.norm());
                let p = self.grid.partner(k);
                worst = worst.max((c[p] - z.conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|z| *z == ZERO))
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.comps {
            for z in c.iter_mut() {
                *z *= a;
            }
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.comps.len(), other.comps.len(), "component count mismatch");
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            for (z, w) in c.iter_mut().zip(o) {
                *z += a * w;
            }
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Multiply every coefficient by `symbol(flat index)`.
    pub fn map_symbol(&self, symbol: impl Fn(usize) -> Complex64) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.comps {
            for (k, z) in c.iter_mut().enumerate() {
                *z *= symbol(k);
            }
        }
        out
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{len} samples for a grid of {} points",
            grid.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_has_two_coefficients() {
        let g = Grid::new(1, 16, PI).unwrap();
        let f = SpectralField::from_real_fn(&g, |x| (3.0 * x[0]).sin());
        let c = f.coeffs(0);
        let i3 = g.index_of_mode(&[3]).unwrap();
        let im3 = g.index_of_mode(&[-3]).unwrap();
        assert!((c[i3] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((c[im3] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let others: f64 = (0..16)
            .filter(|&k| k != i3 && k != im3)
            .map(|k| c[k].norm())
            .sum();
        assert!(others < 1e-14);
    }

    #[test]
    fn real_roundtrip_and_symmetry() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = SpectralField::from_real_fn(&g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp());
        assert_eq!(f.conjugate_symmetry_defect(), 0.0);
        let back = f.to_real_samples();
        for (i, x) in g.points_iter().enumerate() {
            let want = (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp();
            assert!((back[0][i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert!(SpectralField::from_real_samples(&g, &[vec![0.0; 7]]).is_err());
    }
}
