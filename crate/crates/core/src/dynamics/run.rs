use serde::{Deserialize, Serialize};

use super::energy::{energy_residuals, energy_snapshot, EnergySnapshot, ResidualPair};
use super::model::{FlowCache, Model};
use crate::diagnostics::{DiagnosticsRow, DiagnosticsSeries};
use crate::makino::State;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    Negativity,
    Boundary,
    NonFinite,
    LaserEnergyIncrease,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorFailure {
    pub kind: MonitorKind,
    pub t: f64,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Aborted(MonitorFailure),
}

/// Callback at every recorded time, e.g. for checkpoints.
pub trait Observer {
    fn on_record(&mut self, _state: &State, _row: &DiagnosticsRow) -> Result<()> {
        Ok(())
    }
}

pub struct NullObserver;

impl Observer for NullObserver {}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub outcome: Outcome,
    pub series: DiagnosticsSeries,
    pub energy: Vec<EnergySnapshot>,
    pub residuals: Vec<Option<ResidualPair>>,
    /// Last state that passed every monitor.
    pub final_state: State,
    pub steps: usize,
}

impl RunOutput {
    pub fn max_energy_residual(&self) -> Option<f64> {
        self.residuals.iter().flatten().map(|r| r.energy).reduce(f64::max)
    }

    pub fn max_laser_residual(&self) -> Option<f64> {
        self.residuals.iter().flatten().filter_map(|r| r.laser).reduce(f64::max)
    }
}

fn check_monitors(
    model: &Model,
    state: &State,
    row: &DiagnosticsRow,
    prev_phi: Option<f64>,
) -> Option<MonitorFailure> {
    let m = &model.cfg.monitors;
    let t = row.t;
    let fail = |kind, value, threshold| {
        Some(MonitorFailure {
            kind,
            t,
            value,
            threshold,
        })
    };
    let scalars = [row.xdot0, row.xdot_s, row.state_sup, row.phi_l1, row.mass];
    if scalars.iter().any(|v| !v.is_finite()) {
        return fail(MonitorKind::NonFinite, f64::NAN, 0.0);
    }
    let rho_sup = state.rho_tilde.to_real_samples()[0]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    if row.min_rho_tilde < -m.neg_tol * rho_sup {
        return fail(MonitorKind::Negativity, row.min_rho_tilde, -m.neg_tol * rho_sup);
    }
    let bound = m.boundary_tol * row.state_sup;
    if row.boundary_max > bound {
        return fail(MonitorKind::Boundary, row.boundary_max, bound);
    }
    if let Some(prev) = prev_phi {
        let limit = prev * (1.0 + m.phi_increase_tol);
        if row.phi_l1 > limit {
            return fail(MonitorKind::LaserEnergyIncrease, row.phi_l1, limit);
        }
    }
    None
}

/// Integrate `initial` to `cfg.t_end`, recording diagnostics for the orders
/// `sigmas` every `cfg.output_stride` steps and at the final time.
///
/// The initial data is projected first. Monitor trips and non-finite states
/// end the run with [`Outcome::Aborted`]; other failures are errors.
pub fn run(
    model: &Model,
    initial: &State,
    sigmas: &[f64],
    observer: &mut dyn Observer,
) -> Result<RunOutput> {
    let cfg = &model.cfg;
    let n = model.cutoff();
    let mut state = initial.clone();
    state.project(n);
    let mut cache = FlowCache::new();
    let mut series = DiagnosticsSeries::new(sigmas);
    let mut energy = Vec::new();
    let mut outcome = Outcome::Completed;
    let mut steps = 0usize;
    let fraction = cfg.monitors.shell_fraction;

    let mut record = |state: &State,
                      dt: f64,
                      cache: &mut FlowCache,
                      series: &mut DiagnosticsSeries,
                      energy: &mut Vec<EnergySnapshot>|
     -> Result<Option<MonitorFailure>> {
        let prev_phi = series.rows.last().map(|r| r.phi_l1);
        let row = series
            .record(state, dt, &model.consts, &model.params, fraction)?
            .clone();
        if let Some(f) = check_monitors(model, state, &row, prev_phi) {
            return Ok(Some(f));
        }
        let flow = model.flow_at(state.t, cache)?;
        energy.push(energy_snapshot(model, state, &flow)?);
        observer.on_record(state, &row)?;
        Ok(None)
    };

    if let Some(f) = record(&state, 0.0, &mut cache, &mut series, &mut energy)? {
        outcome = Outcome::Aborted(f);
    }

    while outcome == Outcome::Completed && state.t < cfg.t_end {
        let flow = model.flow_at(state.t, &mut cache)?;
        let dt_cfl = model.cfl_dt(&state, &flow);
        let remaining = cfg.t_end - state.t;
        let last = remaining <= dt_cfl * (1.0 + 1e-12);
        let dt = if last {
            remaining
        } else if remaining < 2.0 * dt_cfl {
            0.5 * remaining
        } else {
            dt_cfl
        };
        let mut next = match model.step(&state, dt, &mut cache) {
            Ok(s) => s,
            Err(Error::NonFinite { t, .. }) => {
                outcome = Outcome::Aborted(MonitorFailure {
                    kind: MonitorKind::NonFinite,
                    t,
                    value: f64::NAN,
                    threshold: 0.0,
                });
                break;
            }
            Err(e) => return Err(e),
        };
        if last {
            next.t = cfg.t_end;
        }
        steps += 1;
        if last || steps.is_multiple_of(cfg.output_stride) {
            if let Some(f) = record(&next, dt, &mut cache, &mut series, &mut energy)? {
                outcome = Outcome::Aborted(f);
                break;
            }
        }
        state = next;
    }

    let residuals = energy_residuals(&energy, model.params.c, cfg.evolve_laser);
    for (row, r) in series.rows.iter_mut().zip(&residuals) {
        row.residual_energy = r.map(|r| r.energy);
        row.residual_laser = r.and_then(|r| r.laser);
    }
    Ok(RunOutput {
        outcome,
        series,
        energy,
        residuals,
        final_state: state,
        steps,
    })
}
