//! The Fourier-truncated deviation system and its time integration.
//!
//! With `U = v^n + w`, `v^n = chi(x/n) v` and `J_n` the sharp projector onto
//! `|xi| < n`:
//!
//! ```text
//! d_t rho~ = -J_n( U . grad rho~ + (g-1)/2 rho~ div U )
//! d_t w    = -J_n( U . grad w + (g-1)/2 rho~ grad rho~ + w . grad v^n ) - g_p grad J_n |A|^2
//! d_t A    = (ic/2)(Delta/k0 + zeta) A - (ic/2) zeta' J_n( |rho~|^(2/(g-1)) A )
//! ```
//!
//! Products are formed on the grid and projected afterwards. The linear part
//! of the `A` equation is propagated exactly (Lawson integrating factor); the
//! remainder uses classical RK4 stages.

mod energy;
mod model;
mod run;

pub use energy::{energy_residuals, energy_snapshot, EnergySnapshot, ResidualPair};
pub use model::{FlowCache, Model, Tendency};
pub use run::{run, MonitorFailure, MonitorKind, NullObserver, Observer, Outcome, RunOutput};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{Grid, SpectralField};
use crate::{Error, Result};

/// Radius of the Friedrichs projector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum DealiasRule {
    /// `n = (2/3) (pi/L) (N/2)`.
    TwoThirds,
    /// User-chosen `n` in wavenumber units.
    Sharp(f64),
}

impl DealiasRule {
    pub fn radius(&self, grid: &Grid) -> Result<f64> {
        let n = match *self {
            DealiasRule::TwoThirds => grid.two_thirds_cutoff(),
            DealiasRule::Sharp(n) => n,
        };
        if !(n > 0.0) || n > grid.max_wavenumber() * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "cutoff {n} must lie in (0, {}]",
                grid.max_wavenumber()
            )));
        }
        Ok(n)
    }
}

/// Aborting thresholds checked at every recorded step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    /// Fail if `min rho~ < -neg_tol ||rho~||_inf`.
    pub neg_tol: f64,
    /// Fail if the boundary-shell maximum exceeds `boundary_tol ||state||_inf`.
    pub boundary_tol: f64,
    pub shell_fraction: f64,
    /// Allowed relative increase of `||phi||_{L1}` between records.
    pub phi_increase_tol: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            neg_tol: 1e-6,
            boundary_tol: 1e-8,
            shell_fraction: 0.1,
            phi_increase_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dealias: DealiasRule,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Steps between recorded diagnostics rows.
    pub output_stride: usize,
    /// Propagate `A` at all. When false `A` is frozen at its initial value.
    pub evolve_laser: bool,
    /// Keep the `zeta'` density feedback in the `A` equation.
    pub density_feedback: bool,
    /// Multiply `v` by `chi(x/n)`.
    pub mollify_background: bool,
    pub monitors: MonitorConfig,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            dealias: DealiasRule::TwoThirds,
            cfl: 0.4,
            dt_max: 1e-3,
            t_end: 1.0,
            output_stride: 1,
            evolve_laser: true,
            density_feedback: true,
            mollify_background: true,
            monitors: MonitorConfig::default(),
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.cfl > 0.0
            && self.dt_max > 0.0
            && self.t_end >= 0.0
            && self.t_end.is_finite()
            && self.output_stride >= 1
            && self.monitors.neg_tol >= 0.0
            && self.monitors.boundary_tol >= 0.0
            && self.monitors.shell_fraction > 0.0
            && self.monitors.shell_fraction < 0.5;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "inconsistent scheme settings: {self:?}"
            )))
        }
    }
}

/// `phi = sum_j |A_j|^2` at every grid point.
pub fn intensity(a: &SpectralField) -> Vec<f64> {
    intensity_samples(&a.to_complex_samples())
}

pub(crate) fn intensity_samples(a: &[Vec<Complex64>]) -> Vec<f64> {
    let len = a.first().map_or(0, |c| c.len());
    (0..len).map(|i| a.iter().map(|c| c[i].norm_sqr()).sum()).collect()
}
