use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape of a periodic box `[-L, L)^d` sampled at `N` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub half_length: f64,
}

struct Lattice {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed integer mode per axis for every flat index.
    modes: Vec<[i64; 3]>,
    xi_sq: Vec<f64>,
    /// `(-1)^(k_1 + ... + k_d)`, the phase taking the FFT origin at `x = -L`
    /// to coefficients of `e^{i xi.x}`.
    odd: Vec<bool>,
}

/// Periodic grid plus its cached FFT plans and wavenumber lattice.
///
/// Flat indices are row-major with the last axis contiguous. Along each axis
/// index `i` carries the mode `k = i` for `i < N/2` and `k = i - N` otherwise,
/// so the lattice is `{-N/2, ..., N/2 - 1}` and `xi = (pi/L) k`.
#[derive(Clone)]
pub struct Grid {
    spec: GridSpec,
    lattice: Arc<Lattice>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.spec.dim)
            .field("points", &self.spec.points)
            .field("half_length", &self.spec.half_length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_length: f64) -> Result<Self> {
        Self::from_spec(GridSpec {
            dim,
            points,
            half_length,
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        if !(1..=3).contains(&spec.dim) {
            return Err(Error::InvalidParameter(format!(
                "grid dimension must be 1, 2 or 3, got {}",
                spec.dim
            )));
        }
        if spec.points < 2 || !spec.points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be a power of two >= 2, got {}",
                spec.points
            )));
        }
        if !(spec.half_length > 0.0 && spec.half_length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half length must be positive, got {}",
                spec.half_length
            )));
        }
        let n = spec.points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = n.pow(spec.dim as u32);
        let unit = std::f64::consts::PI / spec.half_length;
        let mut modes = Vec::with_capacity(len);
        let mut xi_sq = Vec::with_capacity(len);
        let mut odd = Vec::with_capacity(len);
        for flat in 0..len {
            let mut m = [0i64; 3];
            let mut rest = flat;
            for axis in (0..spec.dim).rev() {
                let i = rest % n;
                rest /= n;
                m[axis] = signed_mode(i, n);
            }
            let k2: f64 = m.iter().map(|&k| (k as f64 * unit).powi(2)).sum();
            odd.push(m.iter().sum::<i64>().rem_euclid(2) == 1);
            modes.push(m);
            xi_sq.push(k2);
        }
        Ok(Self {
            spec,
            lattice: Arc::new(Lattice {
                forward,
                inverse,
                modes,
                xi_sq,
                odd,
            }),
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn dim(&self) -> usize {
        self.spec.dim
    }
    pub fn points(&self) -> usize {
        self.spec.points
    }
    pub fn half_length(&self) -> f64 {
        self.spec.half_length
    }
    /// Total number of grid points, `N^d`.
    pub fn len(&self) -> usize {
        self.lattice.modes.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.spec.half_length / self.spec.points as f64
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.spec.dim as i32)
    }
    pub fn volume(&self) -> f64 {
        (2.0 * self.spec.half_length).powi(self.spec.dim as i32)
    }
    /// Lattice spacing in wavenumber, `pi / L`.
    pub fn wavenumber_unit(&self) -> f64 {
        std::f64::consts::PI / self.spec.half_length
    }
    /// Largest representable wavenumber component, `(pi/L)(N/2)`.
    pub fn max_wavenumber(&self) -> f64 {
        self.wavenumber_unit() * (self.spec.points / 2) as f64
    }
    /// Projector radius of the two-thirds dealiasing rule.
    pub fn two_thirds_cutoff(&self) -> f64 {
        2.0 / 3.0 * self.max_wavenumber()
    }

    pub fn mode(&self, flat: usize) -> [i64; 3] {
        self.lattice.modes[flat]
    }
    pub fn xi(&self, flat: usize) -> [f64; 3] {
        let u = self.wavenumber_unit();
        let m = self.lattice.modes[flat];
        [m[0] as f64 * u, m[1] as f64 * u, m[2] as f64 * u]
    }
    pub fn xi_sq(&self, flat: usize) -> f64 {
        self.lattice.xi_sq[flat]
    }
    pub(crate) fn xi_sq_all(&self) -> &[f64] {
        &self.lattice.xi_sq
    }
    /// Whether the mode along `axis` is the unpaired Nyquist mode `-N/2`.
    pub fn is_nyquist(&self, flat: usize, axis: usize) -> bool {
        self.lattice.modes[flat][axis] == -((self.spec.points / 2) as i64)
    }
    /// Flat index of the mode `-k` (the conjugate partner for real data).
    pub fn partner(&self, flat: usize) -> usize {
        let n = self.spec.points as i64;
        let m = self.lattice.modes[flat];
        let mut idx = 0usize;
        for &k in m.iter().take(self.spec.dim) {
            let i = (-k).rem_euclid(n) as usize;
            idx = idx * self.spec.points + i;
        }
        idx
    }
    /// Flat index of a signed mode, if it lies on the lattice.
    pub fn index_of_mode(&self, mode: &[i64]) -> Option<usize> {
        let n = self.spec.points as i64;
        let mut idx = 0usize;
        for &k in mode.iter().take(self.spec.dim) {
            if k < -n / 2 || k >= n / 2 {
                return None;
            }
            idx = idx * self.spec.points + k.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Physical coordinates of a grid point, `x_i = -L + i dx` per axis.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let n = self.spec.points;
        let dx = self.spacing();
        let mut x = [0.0; 3];
        let mut rest = flat;
        for axis in (0..self.spec.dim).rev() {
            let i = rest % n;
            rest /= n;
            x[axis] = -self.spec.half_length + i as f64 * dx;
        }
        x
    }

    pub fn points_iter(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Same box, `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Grid> {
        Grid::new(self.dim(), self.points() * factor, self.half_length())
    }

    /// In-place forward transform normalized so that coefficients are
    /// `z_hat(k) = N^-d sum_x z(x) e^{-i xi.x}` (grid mean of the mode).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.lattice.forward);
        let scale = 1.0 / self.len() as f64;
        for (z, &odd) in data.iter_mut().zip(&self.lattice.odd) {
            *z *= if odd { -scale } else { scale };
        }
    }

    /// Inverse of [`Grid::forward`].
    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        for (z, &odd) in data.iter_mut().zip(&self.lattice.odd) {
            if odd {
                *z = -*z;
            }
        }
        self.transform(data, &self.lattice.inverse);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        let n = self.spec.points;
        let d = self.spec.dim;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // Last axis: contiguous lines.
        for line in data.chunks_exact_mut(n) {
            fft.process_with_scratch(line, &mut scratch);
        }
        // Remaining axes: gather strided lines.
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for axis in (0..d.saturating_sub(1)).rev() {
            let stride = n.pow((d - 1 - axis) as u32);
            let outer = self.len() / (stride * n);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * stride * n + inner;
                    for (j, b) in buf.iter_mut().enumerate() {
                        *b = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for (j, b) in buf.iter().enumerate() {
                        data[base + j * stride] = *b;
                    }
                }
            }
        }
    }
}

fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
