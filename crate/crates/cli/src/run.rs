use std::path::{Path, PathBuf};

use es_core::burgers::{measure_background_decay, verify_h0, BurgersFlow, DecayGrid, DecayTable, GapReport};
use es_core::diagnostics::{decay_report, xdot, DecayReport};
use es_core::dynamics::{run, Model, Outcome};
use es_core::exec::{map_slice, Backend};
use es_core::lemmas::run_lemma_suite;
use es_core::params::{derive_constants, regularity_gate, DerivedConstants, GateReport};
use es_core::spectral::Grid;
use serde::{Deserialize, Serialize};

use crate::config::{parse_config_as, BurgersGrid, Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::initial::initial_state;
use crate::output::{
    create_dir, decay_plot_for, read_series_csv, write_decay_svg, write_json, write_series_csv, CheckpointWriter,
    DecayPlot,
};

pub const MANIFEST: &str = "manifest.json";
pub const SERIES: &str = "series.csv";
pub const REPORT: &str = "report.json";
pub const DECAY_PLOT: &str = "decay.svg";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialNorms {
    pub xdot0: f64,
    pub xdot_s: f64,
    pub x_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub backend: &'static str,
    pub config: &'a RunConfig,
    pub derived: Option<DerivedConstants>,
    pub regularity_gate: Option<GateReport>,
    pub spectral_gap: Option<GapReport>,
    pub initial: Option<InitialNorms>,
}

impl<'a> Manifest<'a> {
    fn bare(config: &'a RunConfig, backend: Backend) -> Self {
        Self {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            backend: backend.name(),
            config,
            derived: None,
            regularity_gate: None,
            spectral_gap: None,
            initial: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub outcome: Outcome,
    pub steps: usize,
    pub final_time: f64,
    pub regularity_gate_pass: bool,
    pub initial: InitialNorms,
    pub max_energy_residual: Option<f64>,
    pub max_laser_residual: Option<f64>,
    pub decay: DecayReport,
}

/// What a completed mode produced, for the caller's summary line.
#[derive(Clone, Debug)]
pub struct Summary {
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn gap_samples(grid: &Grid) -> Vec<[f64; 3]> {
    grid.points_iter().collect()
}

fn check_h0(gap: &GapReport) -> CliResult<()> {
    if gap.pass {
        Ok(())
    } else {
        let need = if gap.epsilon > 0.0 {
            format!("at least {:e}", gap.epsilon)
        } else {
            "positive".to_string()
        };
        Err(CliError::Gate(format!(
            "spectral gap of Dv0 is {:e} at {:?}, must be {need}",
            gap.min_distance, gap.argmin
        )))
    }
}

/// Dispatch on the configured mode, writing everything under `out`.
pub fn execute(cfg: &RunConfig, out: &Path, backend: Backend) -> CliResult<Summary> {
    create_dir(out)?;
    let files = match cfg.mode {
        Mode::Simulate => simulate(cfg, out, backend).map(|(f, _)| f)?,
        Mode::VerifyBurgers => verify_burgers(cfg, out, backend)?,
        Mode::VerifyLemmas => verify_lemmas(cfg, out, backend)?,
        Mode::Sweep => sweep(cfg, out, backend)?,
        Mode::Report => report(cfg, out)?,
    };
    Ok(Summary {
        mode: cfg.mode,
        out_dir: out.to_path_buf(),
        files,
    })
}

fn simulate(cfg: &RunConfig, out: &Path, backend: Backend) -> CliResult<(Vec<PathBuf>, Option<SimulationReport>)> {
    let params = cfg.physical()?.params();
    let grid = Grid::from_spec(cfg.grid()?.spec())?;
    let d = grid.dim();
    let s = cfg.scheme.regularity;
    let v0 = cfg.background.initial_velocity(d)?;
    let consts = derive_constants(&params, d, s)?;
    let gate = regularity_gate(d, params.gamma, s)?;
    let gap = verify_h0(&v0, &gap_samples(&grid), backend);
    let initial = initial_state(&cfg.initial, &grid, cfg.seed)?;
    let norms = InitialNorms {
        xdot0: xdot(&initial, 0.0)?,
        xdot_s: xdot(&initial, s)?,
        x_s: xdot(&initial, 0.0)?.hypot(xdot(&initial, s)?),
    };

    let manifest_path = out.join(MANIFEST);
    let mut manifest = Manifest::bare(cfg, backend);
    manifest.derived = Some(consts);
    manifest.regularity_gate = Some(gate.clone());
    manifest.spectral_gap = Some(gap.clone());
    manifest.initial = Some(norms);
    write_json(&manifest_path, &manifest)?;
    let mut files = vec![manifest_path];

    check_h0(&gap)?;
    if cfg.strict_gate && !gate.pass {
        return Err(CliError::Gate(format!(
            "regularity index s = {s} fails {}",
            gate.failures().join(", ")
        )));
    }

    let flow = BurgersFlow::new(v0)?;
    let model = Model::new(params, s, flow, grid, cfg.scheme_config()?)?.with_backend(backend);
    let mut ckpt = CheckpointWriter::new(out.join("checkpoints"), cfg.scheme.checkpoint_every)?;
    let result = run(&model, &initial, &cfg.diagnostics.sigmas, &mut ckpt)?;
    ckpt.write("final.esf", &result.final_state)?;
    files.append(&mut ckpt.written);

    let series_path = out.join(SERIES);
    write_series_csv(&series_path, &result.series)?;
    files.push(series_path);

    let decay = decay_report(&result.series, &model.consts, cfg.window());
    let times = result.series.times();
    let plot_path = out.join(DECAY_PLOT);
    let plottable = result.series.rows.iter().any(|r| r.xdot.iter().any(|v| *v > 0.0 && v.is_finite()));
    if result.series.rows.len() >= 2 && plottable {
        write_decay_svg(&plot_path, &decay_plot_for(&result.series, &decay, &times))?;
        files.push(plot_path);
    }

    let report = SimulationReport {
        outcome: result.outcome,
        steps: result.steps,
        final_time: result.final_state.t,
        regularity_gate_pass: gate.pass,
        initial: norms,
        max_energy_residual: result.max_energy_residual(),
        max_laser_residual: result.max_laser_residual(),
        decay,
    };
    let report_path = out.join(REPORT);
    write_json(&report_path, &report)?;
    files.push(report_path);

    if let Outcome::Aborted(f) = result.outcome {
        return Err(CliError::Monitor(f));
    }
    Ok((files, Some(report)))
}

#[derive(Clone, Debug, Serialize)]
struct BurgersReport<'a> {
    spectral_gap: &'a GapReport,
    table: &'a DecayTable,
    /// `d/2 - sigma` for each order, and `-3` for `D^2 v`.
    target_slopes: Vec<f64>,
    d2v_target_slope: f64,
}

fn verify_burgers(cfg: &RunConfig, out: &Path, backend: Backend) -> CliResult<Vec<PathBuf>> {
    let g = cfg.grid()?;
    let v0 = cfg.background.initial_velocity(g.dim)?;
    let grid = Grid::from_spec(g.spec())?;
    let gap = verify_h0(&v0, &gap_samples(&grid), backend);
    let b = &cfg.burgers;
    let decay_grid = match b.grid {
        BurgersGrid::Fixed => DecayGrid::Fixed(g.spec()),
        BurgersGrid::Comoving => DecayGrid::Comoving {
            points: g.points,
            base_half_length: g.half_length,
            rate: v0.isotropic_rate().ok_or_else(|| {
                CliError::Config("burgers.grid = \"comoving\" needs an isotropic linear part".into())
            })?,
        },
    };
    let manifest_path = out.join(MANIFEST);
    let mut manifest = Manifest::bare(cfg, backend);
    manifest.spectral_gap = Some(gap.clone());
    write_json(&manifest_path, &manifest)?;
    check_h0(&gap)?;

    let flow = BurgersFlow::new(v0)?;
    let times = b.times();
    let table = measure_background_decay(&flow, &b.sigmas, &times, &decay_grid, backend)?;
    let half_d = g.dim as f64 / 2.0;
    let report = BurgersReport {
        spectral_gap: &gap,
        table: &table,
        target_slopes: b.sigmas.iter().map(|s| half_d - s).collect(),
        d2v_target_slope: -3.0,
    };
    let report_path = out.join("burgers.json");
    write_json(&report_path, &report)?;

    let csv_path = out.join("burgers.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Output(e.to_string()))?;
    let mut header = vec!["t".to_string()];
    header.extend(b.sigmas.iter().map(|s| format!("F_hdot_{s}")));
    header.push("d2v_sup".into());
    w.write_record(&header).map_err(|e| CliError::Output(e.to_string()))?;
    for (j, t) in times.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(table.f_norms.iter().map(|r| r[j].to_string()));
        rec.push(table.d2v_sup[j].to_string());
        w.write_record(&rec).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(CliError::io(&csv_path))?;

    let plot_path = out.join("burgers.svg");
    let mut curves: Vec<(String, Vec<f64>)> = b
        .sigmas
        .iter()
        .zip(&table.f_norms)
        .map(|(s, r)| (format!("F in Hdot^{s}"), r.clone()))
        .collect();
    curves.push(("sup |D2 v|".into(), table.d2v_sup.clone()));
    write_decay_svg(
        &plot_path,
        &DecayPlot {
            title: "background flow structure",
            y_label: "norm",
            times: &times,
            curves,
            fits: Vec::new(),
            window: None,
        },
    )?;
    Ok(vec![manifest_path, report_path, csv_path, plot_path])
}

fn verify_lemmas(cfg: &RunConfig, out: &Path, backend: Backend) -> CliResult<Vec<PathBuf>> {
    let manifest_path = out.join(MANIFEST);
    write_json(&manifest_path, &Manifest::bare(cfg, backend))?;
    let report = run_lemma_suite(&cfg.lemmas.suite(cfg.seed), backend)?;
    let path = out.join("lemmas.json");
    write_json(&path, &report)?;
    Ok(vec![manifest_path, path])
}

#[derive(Clone, Debug, Serialize)]
struct SweepRow {
    gamma: f64,
    sigma: f64,
    slope: Option<f64>,
    target: f64,
    margin: Option<f64>,
    c_min: f64,
    status: String,
}

fn sweep(cfg: &RunConfig, out: &Path, backend: Backend) -> CliResult<Vec<PathBuf>> {
    let manifest_path = out.join(MANIFEST);
    write_json(&manifest_path, &Manifest::bare(cfg, backend))?;
    let members: Vec<(f64, PathBuf, RunConfig)> = cfg
        .sweep
        .gammas
        .iter()
        .map(|&g| {
            let mut c = cfg.clone();
            c.mode = Mode::Simulate;
            if let Some(p) = c.physical.as_mut() {
                p.gamma = g;
            }
            (g, out.join(format!("gamma_{g}")), c)
        })
        .collect();
    let results = map_slice(backend, &members, |(_, dir, c)| {
        create_dir(dir).and_then(|_| simulate(c, dir, backend))
    });

    let mut rows = Vec::new();
    let mut first_err = None;
    for ((gamma, _, _), res) in members.iter().zip(results) {
        match res {
            Ok((_, Some(rep))) => {
                for sl in &rep.decay.slopes {
                    rows.push(SweepRow {
                        gamma: *gamma,
                        sigma: sl.sigma,
                        slope: sl.fit.map(|f| f.slope),
                        target: sl.target,
                        margin: sl.margin,
                        c_min: rep.decay.bound.c_min,
                        status: "completed".into(),
                    });
                }
            }
            Ok((_, None)) => {}
            Err(e) => {
                rows.push(SweepRow {
                    gamma: *gamma,
                    sigma: f64::NAN,
                    slope: None,
                    target: f64::NAN,
                    margin: None,
                    c_min: f64::NAN,
                    status: e.to_string(),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    let csv_path = out.join("sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Output(e.to_string()))?;
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(CliError::io(&csv_path))?;
    let json_path = out.join("sweep.json");
    write_json(&json_path, &rows)?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(vec![manifest_path, csv_path, json_path]),
    }
}

fn report(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let input = cfg.report.input.as_ref().expect("validated");
    let manifest_path = input.join(MANIFEST);
    let text = std::fs::read_to_string(&manifest_path).map_err(CliError::io(&manifest_path))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Output(format!("{}: {e}", manifest_path.display())))?;
    let run_cfg: RunConfig = serde_json::from_value(value["config"].clone())
        .map_err(|e| CliError::Config(format!("{}: {e}", manifest_path.display())))?;
    if run_cfg.mode != Mode::Simulate {
        return Err(CliError::Config(format!("{} is not a simulate run", input.display())));
    }
    run_cfg.validate()?;
    let p = run_cfg.physical()?.params();
    let consts = derive_constants(&p, run_cfg.grid()?.dim, run_cfg.scheme.regularity)?;
    let series = read_series_csv(&input.join(SERIES), &run_cfg.diagnostics.sigmas, &consts)?;
    let window = cfg.diagnostics.window.map_or_else(|| run_cfg.window(), |[a, b]| (a, b));
    let decay = decay_report(&series, &consts, window);
    let path = out.join(REPORT);
    write_json(&path, &decay)?;
    let times = series.times();
    let plot = out.join(DECAY_PLOT);
    write_decay_svg(&plot, &decay_plot_for(&series, &decay, &times))?;
    Ok(vec![path, plot])
}

/// Overrides applied on top of the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict_gate: bool,
}

pub fn load(text: &str, ov: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = parse_config_as(text, ov.mode)?;
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if ov.out.is_some() {
        cfg.output_dir = ov.out.clone();
    }
    cfg.strict_gate |= ov.strict_gate;
    Ok(cfg)
}
