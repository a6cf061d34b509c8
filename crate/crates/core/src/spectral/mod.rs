//! Periodic grids, Fourier multipliers, the Friedrichs projector and norms.
//!
//! The box is `[-L, L)^d`. Whole-space behavior is approximated by keeping
//! the data well inside the box; see the boundary monitor in
//! [`crate::diagnostics`].

pub mod field;
pub mod grid;
pub mod io;
pub mod mollifier;
pub mod norms;
pub mod ops;

pub use field::SpectralField;
pub use grid::{Grid, GridSpec};
pub use norms::{inner_product, lp_norm, pairwise_sum, sobolev_norm, LpExponent};
pub use ops::{
    divergence, friedrichs_project, gradient, is_band_limited, lambda_pow, laplacian, partial,
    riesz_second,
};
