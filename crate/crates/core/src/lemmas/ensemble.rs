use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::commutator::{kato_ponce_measure, second_order_measure, CommutatorMeasure};
use crate::exec::{try_map_indexed, Backend};
use crate::makino::State;
use crate::spectral::{Grid, SpectralField};
use crate::{Error, Result};

/// Random band-limited fields with `|z_hat(xi)| = (1 + |xi|)^-r`, uniformly
/// random phases and zero mean. Member `i` draws from stream `i` of the
/// seeded generator, so members are independent of evaluation order and of
/// the grid they are placed on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub half_length: f64,
    /// Modes with every `|k_i| <= max_mode` are populated.
    pub max_mode: i64,
    pub members: usize,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            half_length: std::f64::consts::PI,
            max_mode: 24,
            members: 50,
            seed: 2024,
        }
    }
}

impl EnsembleSpec {
    pub fn grid(&self, points: usize) -> Result<Grid> {
        let g = Grid::new(self.dim, points, self.half_length)?;
        if self.max_mode >= (points / 2) as i64 {
            return Err(Error::InvalidParameter(format!(
                "ensemble mode {} does not fit below the Nyquist mode of {points} points",
                self.max_mode
            )));
        }
        Ok(g)
    }

    pub fn rng(&self, member: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(member as u64);
        rng
    }
}

/// Decay exponents are drawn from `[s + 1, s + 3]`.
pub fn decay_range(s: f64) -> (f64, f64) {
    (s + 1.0, s + 3.0)
}

fn lattice(dim: usize, k: i64) -> Vec<[i64; 3]> {
    let side: Vec<i64> = (-k..=k).collect();
    let mut out = Vec::new();
    for &a in &side {
        for &b in if dim > 1 { &side[..] } else { &[0][..] } {
            for &c in if dim > 2 { &side[..] } else { &[0][..] } {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn canonical(m: &[i64; 3]) -> bool {
    m.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

pub fn graded_field(
    grid: &Grid,
    rng: &mut ChaCha8Rng,
    r: f64,
    max_mode: i64,
    components: usize,
    real: bool,
) -> Result<SpectralField> {
    let d = grid.dim();
    let unit = grid.wavenumber_unit();
    let mut f = SpectralField::zeros(grid, components, real);
    for c in 0..components {
        for m in lattice(d, max_mode) {
            if m == [0, 0, 0] || (real && !canonical(&m)) {
                continue;
            }
            let xi = unit * m.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar((1.0 + xi).powf(-r), theta);
            let idx = grid.index_of_mode(&m[..d]).ok_or_else(|| {
                Error::InvalidParameter(format!("mode {m:?} not on the grid"))
            })?;
            f.coeffs_mut(c)[idx] = z;
            if real {
                let neg = [-m[0], -m[1], -m[2]];
                let j = grid.index_of_mode(&neg[..d]).expect("partner mode on grid");
                f.coeffs_mut(c)[j] = z.conj();
            }
        }
    }
    Ok(f)
}

/// `(v, u)` pair for commutator member `member` at order `s`.
pub fn commutator_pair(
    spec: &EnsembleSpec,
    grid: &Grid,
    s: f64,
    member: usize,
) -> Result<(SpectralField, SpectralField)> {
    let mut rng = spec.rng(member);
    let (lo, hi) = decay_range(s);
    let rv = rng.random_range(lo..hi);
    let ru = rng.random_range(lo..hi);
    let v = graded_field(grid, &mut rng, rv, spec.max_mode, 1, true)?;
    let u = graded_field(grid, &mut rng, ru, spec.max_mode, 1, true)?;
    Ok((v, u))
}

/// Triple `(rho~, w, A)` for interpolation member `member` at order `s`.
pub fn state_member(spec: &EnsembleSpec, grid: &Grid, s: f64, member: usize) -> Result<State> {
    let mut rng = spec.rng(member);
    let (lo, hi) = decay_range(s);
    let d = grid.dim();
    let mut r = || rng.random_range(lo..hi);
    let (r1, r2, r3) = (r(), r(), r());
    let rho = graded_field(grid, &mut rng, r1, spec.max_mode, 1, true)?;
    let w = graded_field(grid, &mut rng, r2, spec.max_mode, d, true)?;
    let a = graded_field(grid, &mut rng, r3, spec.max_mode, d, false)?;
    State::new(rho, w, a, 0.0)
}

/// Maximum ratio over an ensemble evaluated at one resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStat {
    pub points: usize,
    pub max_ratio: Option<f64>,
    pub evaluated: usize,
    /// Degenerate samples (zero denominator).
    pub skipped: usize,
}

impl EnsembleStat {
    pub fn from_ratios(points: usize, ratios: &[Option<f64>]) -> Self {
        let max_ratio = ratios.iter().flatten().copied().reduce(f64::max);
        let evaluated = ratios.iter().flatten().count();
        Self {
            points,
            max_ratio,
            evaluated,
            skipped: ratios.len() - evaluated,
        }
    }
}

fn commutator_ensemble(
    spec: &EnsembleSpec,
    points: usize,
    s: f64,
    backend: Backend,
    measure: fn(&SpectralField, &SpectralField, f64) -> Result<CommutatorMeasure>,
) -> Result<EnsembleStat> {
    let grid = spec.grid(points)?;
    let ratios = try_map_indexed(backend, spec.members, |i| {
        let (v, u) = commutator_pair(spec, &grid, s, i)?;
        Ok::<_, Error>(measure(&v, &u, s)?.ratio())
    })?;
    Ok(EnsembleStat::from_ratios(points, &ratios))
}

pub fn kato_ponce_ensemble(spec: &EnsembleSpec, points: usize, s: f64, backend: Backend) -> Result<EnsembleStat> {
    commutator_ensemble(spec, points, s, backend, kato_ponce_measure)
}

pub fn second_order_ensemble(spec: &EnsembleSpec, points: usize, s: f64, backend: Backend) -> Result<EnsembleStat> {
    commutator_ensemble(spec, points, s, backend, second_order_measure)
}
