//! Run configuration, read from TOML.
//!
//! Top-level keys: `mode`, `seed`, `output_dir`, `strict_gate`. Sections:
//! `[physical]`, `[grid]`, `[scheme]`, `[monitors]`, `[background]`,
//! `[initial.rho]`, `[initial.w]`, `[initial.a]`, `[diagnostics]`,
//! `[burgers]`, `[lemmas]`, `[sweep]`, `[report]`. Unknown keys are errors.
//! `grid.dim`, `grid.points` and `grid.half_length` are required in every
//! mode that builds a grid, and `physical.K` and `physical.gamma` in the modes
//! that integrate the coupled system; all other keys have defaults.

use std::path::PathBuf;

use es_core::burgers::{InitialVelocity, Perturbation};
use es_core::dynamics::{DealiasRule, MonitorConfig, SchemeConfig};
use es_core::lemmas::{EnsembleSpec, LemmaSuiteConfig, OdeSpec};
use es_core::params::PhysicalParams;
use es_core::spectral::GridSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    VerifyBurgers,
    VerifyLemmas,
    Sweep,
    Report,
}

impl Mode {
    fn needs_grid(self) -> bool {
        matches!(self, Mode::Simulate | Mode::VerifyBurgers | Mode::Sweep)
    }

    fn needs_physics(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Sweep)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    #[serde(rename = "K")]
    pub k: f64,
    pub gamma: f64,
    #[serde(default = "d::gamma_p")]
    pub gamma_p: f64,
    #[serde(default = "d::k0")]
    pub k0: f64,
    #[serde(default = "d::one")]
    pub c: f64,
    #[serde(default = "d::eta0")]
    pub eta0: f64,
    #[serde(default = "d::nu0")]
    pub nu0: f64,
    #[serde(default = "d::one")]
    pub rho_c: f64,
}

impl PhysicalSection {
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            pressure_k: self.k,
            gamma: self.gamma,
            gamma_p: self.gamma_p,
            k0: self.k0,
            c: self.c,
            eta0: self.eta0,
            nu0: self.nu0,
            rho_c: self.rho_c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub points: usize,
    pub half_length: f64,
}

impl GridSection {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            points: self.points,
            half_length: self.half_length,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    /// Projector radius in wavenumber units; absent means the two-thirds rule.
    pub cutoff: Option<f64>,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub evolve_laser: bool,
    pub density_feedback: bool,
    pub mollify_background: bool,
    /// Regularity index `s` of the weighted norms.
    pub regularity: f64,
    /// Write a checkpoint every this many records; 0 writes only the first
    /// and last state.
    pub checkpoint_every: usize,
}

impl Default for SchemeSection {
    fn default() -> Self {
        let s = SchemeConfig::default();
        Self {
            cutoff: None,
            cfl: s.cfl,
            dt_max: s.dt_max,
            t_end: s.t_end,
            output_stride: s.output_stride,
            evolve_laser: s.evolve_laser,
            density_feedback: s.density_feedback,
            mollify_background: s.mollify_background,
            regularity: 5.5,
            checkpoint_every: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSection {
    pub neg_tol: f64,
    pub boundary_tol: f64,
    pub shell_fraction: f64,
    pub phi_increase_tol: f64,
}

impl Default for MonitorSection {
    fn default() -> Self {
        let m = MonitorConfig::default();
        Self {
            neg_tol: m.neg_tol,
            boundary_tol: m.boundary_tol,
            shell_fraction: m.shell_fraction,
            phi_increase_tol: m.phi_increase_tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    None,
    /// Term `j` adds `amplitudes[j] sin(modes[j] x_i)` to every component `i`.
    Trig,
    /// Term `j` adds `amplitudes[j] h(|x| / modes[j])` to every component.
    Bump,
}

/// `v0(x) = lambda x + p(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackgroundSection {
    pub lambda: f64,
    pub kind: PerturbationKind,
    pub amplitudes: Vec<f64>,
    pub modes: Vec<f64>,
    /// Required spectral-gap margin.
    pub epsilon: f64,
    /// Full linear part, overriding `lambda`.
    pub linear: Option<[[f64; 3]; 3]>,
    /// Extra perturbation terms in the library's own form.
    pub terms: Vec<Perturbation>,
}

impl Default for BackgroundSection {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            kind: PerturbationKind::None,
            amplitudes: Vec::new(),
            modes: Vec::new(),
            epsilon: 0.0,
            linear: None,
            terms: Vec::new(),
        }
    }
}

impl BackgroundSection {
    pub fn initial_velocity(&self, dim: usize) -> CliResult<InitialVelocity> {
        if self.amplitudes.len() != self.modes.len() {
            return Err(CliError::Config(format!(
                "background: {} amplitudes but {} modes",
                self.amplitudes.len(),
                self.modes.len()
            )));
        }
        if self.kind == PerturbationKind::None && !self.amplitudes.is_empty() {
            return Err(CliError::Config("background: amplitudes given with kind = \"none\"".into()));
        }
        let mut v0 = match self.linear {
            Some(m) => InitialVelocity::with_linear(dim, m),
            None => InitialVelocity::scaled_identity(dim, self.lambda),
        }
        .with_epsilon(self.epsilon);
        for (&a, &k) in self.amplitudes.iter().zip(&self.modes) {
            match self.kind {
                PerturbationKind::None => {}
                PerturbationKind::Trig => {
                    for i in 0..dim {
                        let mut amplitude = [0.0; 3];
                        let mut wave = [0.0; 3];
                        amplitude[i] = a;
                        wave[i] = k;
                        v0 = v0.with_term(Perturbation::Trig {
                            amplitude,
                            wave,
                            phase: 0.0,
                        });
                    }
                }
                PerturbationKind::Bump => {
                    let mut amplitude = [0.0; 3];
                    amplitude[..dim].fill(a);
                    v0 = v0.with_term(Perturbation::Bump {
                        amplitude,
                        center: [0.0; 3],
                        radius: k,
                    });
                }
            }
        }
        for t in &self.terms {
            v0 = v0.with_term(t.clone());
        }
        v0.validate()?;
        Ok(v0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Zero,
    /// `amplitude exp(-|x - center|^2 / width^2)`.
    Gaussian,
    /// `amplitude h(|x - center| / width)`, supported in `|x - center| < 4 width / 3`.
    Bump,
    /// Random band-limited field with `|z_hat(xi)| = (1+|xi|)^{-decay}` on the
    /// modes `|k_i| <= max_mode`, scaled to sup norm `amplitude`.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub family: Family,
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
    /// Vector fields: the unit direction (normalized on use).
    pub direction: Vec<f64>,
    /// Laser only: carrier wave vector, `A = profile * e^{i k.x}`.
    pub wavenumber: Vec<f64>,
    pub max_mode: i64,
    pub decay: f64,
    /// Added to the run seed for this field's generator stream.
    pub stream: u64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            family: Family::Zero,
            amplitude: 0.0,
            width: 1.0,
            center: Vec::new(),
            direction: Vec::new(),
            wavenumber: Vec::new(),
            max_mode: 8,
            decay: 6.0,
            stream: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub rho: FieldSpec,
    pub w: FieldSpec,
    pub a: FieldSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub sigmas: Vec<f64>,
    /// Fitting window; absent means `[t_end / 5, t_end]`.
    pub window: Option<[f64; 2]>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 1.0, 2.0],
            window: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BurgersGrid {
    /// The `[grid]` box at every time.
    Fixed,
    /// Half length `grid.half_length (1 + lambda t)`.
    Comoving,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BurgersSection {
    pub sigmas: Vec<f64>,
    pub t_start: f64,
    pub t_end: f64,
    /// Log-spaced sample times in `[t_start, t_end]`.
    pub samples: usize,
    pub grid: BurgersGrid,
    /// Points per axis at which the spectral gap of `Dv0` is checked.
    pub gap_points: usize,
}

impl Default for BurgersSection {
    fn default() -> Self {
        Self {
            sigmas: vec![1.0, 2.0],
            t_start: 1.0,
            t_end: 100.0,
            samples: 40,
            grid: BurgersGrid::Comoving,
            gap_points: 64,
        }
    }
}

impl BurgersSection {
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        let (a, b) = ((1.0 + self.t_start).ln(), (1.0 + self.t_end).ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp() - 1.0)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmasSection {
    pub members: usize,
    pub max_mode: i64,
    pub half_length: f64,
    pub orders: Vec<f64>,
    pub resolutions: [usize; 2],
    pub ode_rtol: [f64; 2],
    pub threshold_width: f64,
    pub ode: OdeSpec,
}

impl Default for LemmasSection {
    fn default() -> Self {
        let c = LemmaSuiteConfig::default();
        Self {
            members: c.ensemble.members,
            max_mode: c.ensemble.max_mode,
            half_length: c.ensemble.half_length,
            orders: c.orders,
            resolutions: c.resolutions,
            ode_rtol: c.ode_rtol,
            threshold_width: c.threshold_width,
            ode: c.ode,
        }
    }
}

impl LemmasSection {
    pub fn suite(&self, seed: u64) -> LemmaSuiteConfig {
        LemmaSuiteConfig {
            ensemble: EnsembleSpec {
                dim: 1,
                half_length: self.half_length,
                max_mode: self.max_mode,
                members: self.members,
                seed,
            },
            orders: self.orders.clone(),
            resolutions: self.resolutions,
            ode: self.ode.clone(),
            ode_rtol: self.ode_rtol,
            threshold_width: self.threshold_width,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub gammas: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            gammas: vec![1.5, 2.0, 3.0],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Directory of an earlier simulate run.
    pub input: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "d::mode")]
    pub mode: Mode,
    #[serde(default = "d::seed")]
    pub seed: u64,
    /// Not part of the manifest: it does not affect results.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub strict_gate: bool,
    pub physical: Option<PhysicalSection>,
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub monitors: MonitorSection,
    #[serde(default)]
    pub background: BackgroundSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub burgers: BurgersSection,
    #[serde(default)]
    pub lemmas: LemmasSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub report: ReportSection,
}

mod d {
    use super::Mode;
    pub fn mode() -> Mode {
        Mode::Simulate
    }
    pub fn seed() -> u64 {
        2024
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn gamma_p() -> f64 {
        1.0
    }
    pub fn k0() -> f64 {
        10.0
    }
    pub fn eta0() -> f64 {
        2.0
    }
    pub fn nu0() -> f64 {
        0.1
    }
}

const REQUIRED: [(&str, &str); 5] = [
    ("physical", "K"),
    ("physical", "gamma"),
    ("grid", "dim"),
    ("grid", "points"),
    ("grid", "half_length"),
];

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    parse_config_as(text, None)
}

/// As [`parse_config`], with `mode` replacing the file's mode.
pub fn parse_config_as(text: &str, mode: Option<Mode>) -> CliResult<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let mode = match (mode, table.get("mode")) {
        (Some(m), _) => m,
        (None, Some(v)) => Mode::deserialize(v.clone()).map_err(|e| CliError::Config(format!("mode: {e}")))?,
        (None, None) => d::mode(),
    };
    if mode.needs_grid() {
        let missing: Vec<String> = REQUIRED
            .iter()
            .filter(|(sec, _)| *sec == "grid" || mode.needs_physics())
            .filter(|(sec, key)| {
                table
                    .get(*sec)
                    .and_then(|s| s.as_table())
                    .is_none_or(|s| !s.contains_key(*key))
            })
            .map(|(sec, key)| format!("{sec}.{key}"))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Config(format!("missing required fields: {}", missing.join(", "))));
        }
    }
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.mode = mode;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn physical(&self) -> CliResult<&PhysicalSection> {
        self.physical.as_ref().ok_or_else(|| CliError::Config("missing [physical]".into()))
    }

    pub fn grid(&self) -> CliResult<&GridSection> {
        self.grid.as_ref().ok_or_else(|| CliError::Config("missing [grid]".into()))
    }

    pub fn scheme_config(&self) -> CliResult<SchemeConfig> {
        let s = &self.scheme;
        let cfg = SchemeConfig {
            dealias: s.cutoff.map_or(DealiasRule::TwoThirds, DealiasRule::Sharp),
            cfl: s.cfl,
            dt_max: s.dt_max,
            t_end: s.t_end,
            output_stride: s.output_stride,
            evolve_laser: s.evolve_laser,
            density_feedback: s.density_feedback,
            mollify_background: s.mollify_background,
            monitors: MonitorConfig {
                neg_tol: self.monitors.neg_tol,
                boundary_tol: self.monitors.boundary_tol,
                shell_fraction: self.monitors.shell_fraction,
                phi_increase_tol: self.monitors.phi_increase_tol,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn window(&self) -> (f64, f64) {
        self.diagnostics
            .window
            .map_or_else(|| es_core::diagnostics::default_window(self.scheme.t_end), |[a, b]| (a, b))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.mode.needs_physics() {
            let p = self.physical()?;
            p.params().validate().map_err(|e| CliError::Config(format!("physical: {e}")))?;
        }
        if self.mode.needs_grid() {
            let g = self.grid()?;
            es_core::spectral::Grid::from_spec(g.spec()).map_err(|e| CliError::Config(format!("grid: {e}")))?;
            self.background.initial_velocity(g.dim)?;
            self.scheme_config()?;
            if let Some(n) = self.scheme.cutoff {
                let g = es_core::spectral::Grid::from_spec(g.spec())?;
                DealiasRule::Sharp(n).radius(&g)?;
            }
            if !(self.scheme.regularity > 0.0) {
                return Err(CliError::Config("scheme.regularity must be > 0".into()));
            }
            for (name, f) in [("rho", &self.initial.rho), ("w", &self.initial.w), ("a", &self.initial.a)] {
                f.validate(name, g.dim)?;
            }
            if self.initial.rho.family == Family::Random {
                return Err(CliError::Config(
                    "initial.rho: the random family is signed and cannot describe a density".into(),
                ));
            }
            if self.initial.rho.amplitude < 0.0 {
                return Err(CliError::Config("initial.rho: amplitude must be >= 0".into()));
            }
            if self.diagnostics.sigmas.is_empty() || self.diagnostics.sigmas.iter().any(|s| !(*s >= 0.0)) {
                return Err(CliError::Config("diagnostics.sigmas must be a nonempty list of orders >= 0".into()));
            }
            if let Some([a, b]) = self.diagnostics.window {
                if !(a >= 0.0 && b > a) {
                    return Err(CliError::Config(format!("diagnostics.window [{a}, {b}] is empty")));
                }
            }
        }
        match self.mode {
            Mode::VerifyBurgers => {
                let b = &self.burgers;
                if !(b.t_start >= 0.0 && b.t_end > b.t_start) || b.samples < 2 || b.gap_points == 0 {
                    return Err(CliError::Config("burgers: need 0 <= t_start < t_end and samples >= 2".into()));
                }
            }
            Mode::Sweep => {
                if self.sweep.gammas.is_empty() || self.sweep.gammas.iter().any(|g| !(*g > 1.0)) {
                    return Err(CliError::Config("sweep.gammas must be a nonempty list of values > 1".into()));
                }
            }
            Mode::Report if self.report.input.is_none() => {
                return Err(CliError::Config("report.input is required in report mode".into()));
            }
            Mode::VerifyLemmas => {
                self.lemmas.ode.validate()?;
                if self.lemmas.members == 0 {
                    return Err(CliError::Config("lemmas.members must be >= 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl FieldSpec {
    fn validate(&self, name: &str, dim: usize) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(format!("initial.{name}: {m}")));
        if !self.amplitude.is_finite() {
            return bad("amplitude must be finite".into());
        }
        if !(self.width > 0.0) {
            return bad("width must be > 0".into());
        }
        for (key, v) in [("center", &self.center), ("direction", &self.direction), ("wavenumber", &self.wavenumber)] {
            if !v.is_empty() && v.len() != dim {
                return bad(format!("{key} has {} entries, grid dimension is {dim}", v.len()));
            }
        }
        if !self.direction.is_empty() && self.direction.iter().all(|&x| x == 0.0) {
            return bad("direction must be nonzero".into());
        }
        if self.family == Family::Random && (self.max_mode < 1 || !(self.decay >= 0.0)) {
            return bad("random family needs max_mode >= 1 and decay >= 0".into());
        }
        Ok(())
    }
}
