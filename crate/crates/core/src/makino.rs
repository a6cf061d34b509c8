//! Sound-speed variable `rho~ = (2 sqrt(K gamma)/(gamma-1)) rho^((gamma-1)/2)`,
//! the pressure law, and the simulation [`State`].

use num_complex::Complex64;

use crate::params::PhysicalParams;
use crate::spectral::norms::{pairwise_sum, pointwise_magnitude};
use crate::spectral::ops::{friedrichs_project_in_place, is_band_limited};
use crate::spectral::{Grid, SpectralField};
use crate::{Error, Result};

fn coefficient(p: &PhysicalParams) -> f64 {
    2.0 * (p.pressure_k * p.gamma).sqrt() / (p.gamma - 1.0)
}

fn first_negative(values: &[f64], threshold: f64) -> Result<()> {
    match values.iter().position(|&v| v < threshold) {
        Some(index) => Err(Error::NegativeValue {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Pointwise density to sound-speed variable.
pub fn to_makino(rho: &[f64], p: &PhysicalParams) -> Result<Vec<f64>> {
    first_negative(rho, 0.0)?;
    let k = coefficient(p);
    let e = 0.5 * (p.gamma - 1.0);
    Ok(rho.iter().map(|&r| k * r.powf(e)).collect())
}

/// Inverse of [`to_makino`]. Values below `-neg_tol * max|rho~|` are
/// rejected; smaller negative excursions are mapped through `|rho~|`.
pub fn from_makino(rho_tilde: &[f64], p: &PhysicalParams, neg_tol: f64) -> Result<Vec<f64>> {
    let sup = rho_tilde.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    first_negative(rho_tilde, -neg_tol * sup)?;
    let f = p.makino_density_factor();
    let e = 2.0 / (p.gamma - 1.0);
    Ok(rho_tilde.iter().map(|&r| f * r.abs().powf(e)).collect())
}

pub fn pressure(rho: &[f64], p: &PhysicalParams) -> Result<Vec<f64>> {
    first_negative(rho, 0.0)?;
    Ok(rho.iter().map(|&r| p.pressure_k * r.powf(p.gamma)).collect())
}

/// `|rho~|^(2/(gamma-1))` with the minimum of `rho~` kept for monitoring.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPower {
    pub values: Vec<f64>,
    pub min_rho_tilde: f64,
}

pub fn nonlinear_density_power(rho_tilde: &[f64], p: &PhysicalParams) -> DensityPower {
    let e = 2.0 / (p.gamma - 1.0);
    let values = if e == 1.0 {
        rho_tilde.iter().map(|r| r.abs()).collect()
    } else {
        rho_tilde.iter().map(|r| r.abs().powf(e)).collect()
    };
    DensityPower {
        values,
        min_rho_tilde: rho_tilde.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Deviation state `(rho~, w, A)` at time `t`.
///
/// `rho_tilde` is a real scalar field, `w` a real `d`-vector field (velocity
/// minus the background flow) and `a` the complex `d`-vector laser envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub rho_tilde: SpectralField,
    pub w: SpectralField,
    pub a: SpectralField,
    pub t: f64,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            rho_tilde: SpectralField::zeros(grid, 1, true),
            w: SpectralField::zeros(grid, grid.dim(), true),
            a: SpectralField::zeros(grid, grid.dim(), false),
            t: 0.0,
        }
    }

    pub fn new(rho_tilde: SpectralField, w: SpectralField, a: SpectralField, t: f64) -> Result<Self> {
        let g = rho_tilde.grid();
        w.same_grid(&rho_tilde)?;
        a.same_grid(&rho_tilde)?;
        let d = g.dim();
        let shape_ok = rho_tilde.components() == 1
            && rho_tilde.is_real()
            && w.components() == d
            && w.is_real()
            && a.components() == d
            && !a.is_real();
        if !shape_ok {
            return Err(Error::GridMismatch(format!(
                "state needs a real scalar, a real {d}-vector and a complex {d}-vector"
            )));
        }
        Ok(Self { rho_tilde, w, a, t })
    }

    pub fn grid(&self) -> &Grid {
        self.rho_tilde.grid()
    }

    /// The three parts in a fixed order, for reductions over the triple.
    pub fn parts(&self) -> [&SpectralField; 3] {
        [&self.rho_tilde, &self.w, &self.a]
    }

    pub fn project(&mut self, n: f64) {
        friedrichs_project_in_place(&mut self.rho_tilde, n);
        friedrichs_project_in_place(&mut self.w, n);
        friedrichs_project_in_place(&mut self.a, n);
    }

    pub fn is_band_limited(&self, n: f64) -> bool {
        self.parts().iter().all(|f| is_band_limited(f, n))
    }

    pub fn is_zero(&self) -> bool {
        self.parts().iter().all(|f| f.is_zero())
    }

    /// Pointwise Euclidean magnitude of the whole triple at each grid point.
    pub fn pointwise_magnitude(&self) -> Vec<f64> {
        let mut all: Vec<Vec<Complex64>> = Vec::new();
        for f in self.parts() {
            all.extend(f.to_complex_samples());
        }
        pointwise_magnitude(&all)
    }

    /// `integral rho dx` with `rho` recovered from `rho~`.
    pub fn mass(&self, p: &PhysicalParams) -> f64 {
        let s = &self.rho_tilde.to_real_samples()[0];
        let rho = nonlinear_density_power(s, p).values;
        let f = p.makino_density_factor();
        f * self.grid().cell_volume() * pairwise_sum(&rho)
    }

    pub fn all_finite(&self) -> bool {
        self.parts()
            .iter()
            .all(|f| f.all_coeffs().iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}
