use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use es_core::diagnostics::{y_weight, DecayReport, DiagnosticsRow, DiagnosticsSeries};
use es_core::dynamics::Observer;
use es_core::makino::State;
use es_core::params::DerivedConstants;
use es_core::spectral::io::write_field;
use plotters::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

fn sigma_label(s: f64) -> String {
    format!("Xdot_{s}")
}

pub fn series_header(sigmas: &[f64]) -> Vec<String> {
    let mut h: Vec<String> = ["t", "dt", "X_0", "X_s", "Xdot_s"].map(String::from).into();
    h.extend(sigmas.iter().map(|&s| sigma_label(s)));
    h.extend(
        [
            "phi_l1",
            "mass",
            "min_rho_tilde",
            "state_sup",
            "boundary_max",
            "residual_energy",
            "residual_laser",
        ]
        .map(String::from),
    );
    h
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_series_csv(path: &Path, series: &DiagnosticsSeries) -> CliResult<()> {
    let err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(series_header(&series.sigmas)).map_err(err)?;
    for r in &series.rows {
        let mut rec: Vec<String> = [r.t, r.dt, r.xdot0, r.x_s, r.xdot_s].iter().map(f64::to_string).collect();
        rec.extend(r.xdot.iter().map(f64::to_string));
        rec.extend([r.phi_l1, r.mass, r.min_rho_tilde, r.state_sup, r.boundary_max].iter().map(f64::to_string));
        rec.push(opt(r.residual_energy));
        rec.push(opt(r.residual_laser));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Rebuild a series from its CSV file; `x` and `y` are recomputed.
pub fn read_series_csv(path: &Path, sigmas: &[f64], consts: &DerivedConstants) -> CliResult<DiagnosticsSeries> {
    let err = |m: String| CliError::Output(format!("{}: {m}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let want = series_header(sigmas);
    let got: Vec<String> = rd.headers().map_err(|e| err(e.to_string()))?.iter().map(String::from).collect();
    if got != want {
        return Err(err(format!("unexpected header {got:?}")));
    }
    let k = sigmas.len();
    let mut series = DiagnosticsSeries::new(sigmas);
    for rec in rd.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let num = |i: usize| -> CliResult<Option<f64>> {
            let f = &rec[i];
            if f.is_empty() {
                Ok(None)
            } else {
                f.parse().map(Some).map_err(|_| err(format!("bad number {f:?}")))
            }
        };
        let req = |i: usize| num(i)?.ok_or_else(|| err(format!("empty field {}", want[i])));
        let t = req(0)?;
        let xdot0 = req(2)?;
        let xdot: Vec<f64> = (0..k).map(|j| req(5 + j)).collect::<CliResult<_>>()?;
        series.rows.push(DiagnosticsRow {
            t,
            dt: req(1)?,
            xdot0,
            x_s: req(3)?,
            xdot_s: req(4)?,
            x: xdot.iter().map(|v| xdot0.hypot(*v)).collect(),
            y: sigmas.iter().zip(&xdot).map(|(&s, v)| y_weight(t, s, consts) * v).collect(),
            xdot,
            phi_l1: req(5 + k)?,
            mass: req(6 + k)?,
            min_rho_tilde: req(7 + k)?,
            state_sup: req(8 + k)?,
            boundary_max: req(9 + k)?,
            residual_energy: num(10 + k)?,
            residual_laser: num(11 + k)?,
        });
    }
    Ok(series)
}

/// Log-log plot of curves against `1 + t`, with optional fitted power laws
/// `(slope, intercept)` drawn over a window.
pub struct DecayPlot<'a> {
    pub title: &'a str,
    pub y_label: &'a str,
    pub times: &'a [f64],
    pub curves: Vec<(String, Vec<f64>)>,
    pub fits: Vec<Option<(f64, f64)>>,
    pub window: Option<(f64, f64)>,
}

pub fn write_decay_svg(path: &Path, plot: &DecayPlot) -> CliResult<()> {
    let err = |e: String| CliError::Output(format!("{}: {e}", path.display()));
    let xs: Vec<f64> = plot.times.iter().map(|t| 1.0 + t).collect();
    let positive = |v: &&f64| **v > 0.0 && v.is_finite();
    let ys: Vec<f64> = plot.curves.iter().flat_map(|(_, c)| c.iter().filter(positive).copied()).collect();
    let (Some(&x0), Some(&x1)) = (xs.first(), xs.last()) else {
        return Err(err("no samples to plot".into()));
    };
    if ys.is_empty() || x1 <= x0 {
        return Err(err("no positive samples to plot".into()));
    }
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min) * 0.5;
    let hi = ys.iter().copied().fold(0.0, f64::max) * 2.0;

    let root = SVGBackend::new(path, (800, 520)).into_drawing_area();
    let draw = || -> Result<(), Box<dyn std::error::Error + '_>> {
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(plot.title, ("sans-serif", 20))
            .margin(14)
            .x_label_area_size(44)
            .y_label_area_size(72)
            .build_cartesian_2d((x0..x1).log_scale(), (lo..hi).log_scale())?;
        chart
            .configure_mesh()
            .x_desc("1 + t")
            .y_desc(plot.y_label)
            .y_label_formatter(&|v| format!("{v:.0e}"))
            .draw()?;
        for (i, (name, c)) in plot.curves.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            let pts: Vec<(f64, f64)> = xs.iter().copied().zip(c.iter().copied()).filter(|(_, y)| positive(&y)).collect();
            chart
                .draw_series(LineSeries::new(pts, color.stroke_width(2)))?
                .label(name.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
            if let (Some(Some((slope, icpt))), Some((a, b))) = (plot.fits.get(i), plot.window) {
                let line: Vec<(f64, f64)> = [1.0 + a, 1.0 + b]
                    .iter()
                    .map(|&x| (x, (icpt + slope * x.ln()).exp()))
                    .collect();
                chart.draw_series(LineSeries::new(line, BLACK.mix(0.6).stroke_width(1)))?;
            }
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()?;
        root.present()?;
        Ok(())
    };
    draw().map_err(|e| err(e.to_string()))
}

pub fn decay_plot_for<'a>(series: &'a DiagnosticsSeries, report: &DecayReport, times: &'a [f64]) -> DecayPlot<'a> {
    DecayPlot {
        title: "weighted norm decay",
        y_label: "Xdot_sigma",
        times,
        curves: series
            .sigmas
            .iter()
            .enumerate()
            .map(|(i, &s)| (format!("sigma = {s}"), series.xdot_series(i)))
            .collect(),
        fits: report.slopes.iter().map(|r| r.fit.map(|f| (f.slope, f.intercept))).collect(),
        window: Some(report.window),
    }
}

/// All three parts of a state, concatenated in one field file.
pub fn write_state(path: &Path, state: &State) -> CliResult<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    for f in state.parts() {
        write_field(&mut w, f, state.t)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Writes the first record and every `every`-th record after it.
pub struct CheckpointWriter {
    dir: PathBuf,
    every: usize,
    seen: usize,
    pub written: Vec<PathBuf>,
}

impl CheckpointWriter {
    pub fn new(dir: PathBuf, every: usize) -> CliResult<Self> {
        create_dir(&dir)?;
        Ok(Self {
            dir,
            every,
            seen: 0,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, state: &State) -> CliResult<()> {
        let path = self.dir.join(name);
        write_state(&path, state)?;
        self.written.push(path);
        Ok(())
    }
}

impl Observer for CheckpointWriter {
    fn on_record(&mut self, state: &State, _row: &DiagnosticsRow) -> es_core::Result<()> {
        let i = self.seen;
        self.seen += 1;
        if i == 0 || (self.every > 0 && i.is_multiple_of(self.every)) {
            self.write(&format!("record_{i:06}.esf"), state)
                .map_err(|e| es_core::Error::Io(std::io::Error::other(e.to_string())))?;
        }
        Ok(())
    }
}
