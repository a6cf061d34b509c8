//! Pseudo-spectral simulation of the barotropic Euler system coupled to a
//! damped vector Schrödinger equation (laser-plasma interaction).
//!
//! The fluid is written in sound-speed (Makino) variables and split into a
//! global Burgers background flow plus a small deviation. The deviation system
//! is integrated on a periodic box under a sharp Fourier truncation, and the
//! crate provides the diagnostics used to check its energy balances, Sobolev
//! decay rates and the commutator/bootstrap estimates the analysis relies on.
//!
//! Module map:
//! - [`params`]: physical coefficients, derived constants, regularity gate.
//! - [`spectral`]: grids, Fourier multipliers, projector, norms, field files.
//! - [`burgers`]: background flow by characteristics, spectral-gap check.
//! - [`makino`]: sound-speed change of variables and the [`makino::State`].
//! - [`dynamics`]: right-hand side, integrating-factor RK4, the run loop.
//! - [`diagnostics`]: weighted norms, decay fits, global-bound check.
//! - [`lemmas`]: executable checks of the auxiliary estimates.
//! - [`exec`]: sequential / rayon backends for the data-parallel loops.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod burgers;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod lemmas;
pub mod makino;
pub mod params;
pub mod spectral;

pub use error::{Error, Result};
