//! Benchmark drivers and the files they write.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use hho_core::estimate::{
    fitted_rate, rates, run_eigen, run_source, Abscissa, Column, ConvergenceHistory, EigenRun, HistoryRow, Manufactured, SinSquared, SourceRun,
    Strategy,
};
use hho_core::local::DofLayout;
use hho_core::mesh::{Domain, Mesh, Point};
use hho_core::system::LowerBound;
use hho_core::HhoError;
use thiserror::Error;

use crate::config::{DomainKind, Mode, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("solver failure: {0}")]
    Solver(#[from] HhoError),

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, RunError>;

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub history: ConvergenceHistory,
    /// Bound of the last eigen step.
    pub bound: Option<LowerBound>,
    /// Steps with a mesh snapshot.
    pub snapshots: Vec<usize>,
    pub summary: String,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_mesh(path: &Path, mesh: &Mesh) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    mesh.write_ascii(&mut out).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn initial_mesh(domain: DomainKind) -> Result<Mesh> {
    let d = match domain {
        DomainKind::LShape => Domain::LShape,
        DomainKind::UnitSquare => Domain::UnitSquare,
    };
    Ok(Mesh::build_initial(&d)?)
}

/// Runs the configured driver and writes history.csv, estimator.csv,
/// mesh_<step>.txt snapshots and summary.txt into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let layout = DofLayout::new(cfg.k, Some(cfg.ell()))?;
    let mesh = initial_mesh(cfg.domain)?;
    let strategy = match cfg.mode {
        Mode::SourceAdaptive | Mode::EigenAdaptive => Strategy::Adaptive { theta: cfg.theta },
        Mode::SourceUniform | Mode::Manufactured => Strategy::Uniform,
    };

    // snapshots at step 0 and whenever ndof has doubled since the last one
    let mut snapshots = Vec::new();
    let mut last_snap = 0usize;
    let mut snap_err = None;
    let mut observer = |m: &Mesh, row: &HistoryRow| {
        if snap_err.is_some() || !(row.step == 0 || row.ndof >= 2 * last_snap) {
            return;
        }
        let path = dir.join(format!("mesh_{}.txt", row.step));
        match write_mesh(&path, m) {
            Ok(()) => {
                snapshots.push(row.step);
                last_snap = row.ndof;
            }
            Err(e) => snap_err = Some(e),
        }
    };

    let one = |_: Point| 1.0;
    let manufactured = |p: Point| SinSquared.load(p);
    let (history, bound) = match cfg.mode {
        Mode::EigenAdaptive => {
            let run = EigenRun {
                layout,
                strategy,
                max_ndof: cfg.max_ndof,
                sigma: cfg.sigma,
                index: cfg.eig_index,
            };
            run_eigen(mesh, &run, &mut observer)?
        }
        Mode::Manufactured => {
            let run = SourceRun {
                layout,
                strategy,
                max_ndof: cfg.max_ndof,
                load: &manufactured,
                exact: Some(&SinSquared),
            };
            (run_source(mesh, &run, &mut observer)?, None)
        }
        Mode::SourceUniform | Mode::SourceAdaptive => {
            let run = SourceRun {
                layout,
                strategy,
                max_ndof: cfg.max_ndof,
                load: &one,
                exact: None,
            };
            (run_source(mesh, &run, &mut observer)?, None)
        }
    };
    if let Some(e) = snap_err {
        return Err(e);
    }

    write_file(&dir.join("history.csv"), &history.to_csv(cfg.timing))?;
    write_file(&dir.join("estimator.csv"), &history.components_csv())?;
    let summary = summary(cfg, &history, bound.as_ref());
    write_file(&dir.join("summary.txt"), &summary)?;
    Ok(RunOutput {
        history,
        bound,
        snapshots,
        summary,
    })
}

/// Last consecutive rate and last-decade fit of one column.
fn rate_lines(out: &mut String, name: &str, history: &ConvergenceHistory, column: Column, abscissa: Abscissa) {
    let series = history.series(column, abscissa);
    let tag = match abscissa {
        Abscissa::Ndof => "ndof",
        Abscissa::SqrtNdof => "sqrt_ndof",
        Abscissa::H => "h",
    };
    if let Some(r) = rates(&series).last() {
        writeln!(out, "eoc_{name}_{tag} = {r:.6}").unwrap();
    }
    let Some(&(last, _)) = series.last() else { return };
    let tail: Vec<(f64, f64)> = match abscissa {
        Abscissa::H => series.iter().rev().take(4).rev().copied().collect(),
        _ => series.iter().copied().filter(|p| p.0 >= last / 10.0).collect(),
    };
    if tail.len() >= 2 {
        writeln!(out, "fit_{name}_{tag} = {:.6}", fitted_rate(&tail)).unwrap();
    }
}

pub fn summary(cfg: &RunConfig, history: &ConvergenceHistory, bound: Option<&LowerBound>) -> String {
    let mut s = String::new();
    write!(s, "{cfg}").unwrap();
    writeln!(s, "steps = {}", history.rows.len()).unwrap();
    let Some(last) = history.rows.last() else { return s };
    writeln!(s, "final_ndof = {}", last.ndof).unwrap();
    writeln!(s, "final_hmax = {:.10e}", last.hmax).unwrap();
    if let Some(eta) = last.eta {
        writeln!(s, "final_eta = {eta:.10e}").unwrap();
    }
    rate_lines(&mut s, "eta", history, Column::Eta, Abscissa::Ndof);
    if cfg.mode == Mode::Manufactured {
        writeln!(s, "final_energy_err = {:.10e}", last.energy_err.unwrap_or(f64::NAN)).unwrap();
        writeln!(s, "final_l2_err = {:.10e}", last.l2_err.unwrap_or(f64::NAN)).unwrap();
        rate_lines(&mut s, "energy_err", history, Column::EnergyErr, Abscissa::H);
        rate_lines(&mut s, "l2_err", history, Column::L2Err, Abscissa::H);
    }
    if let (Some(lam), Some(b)) = (last.lambda_h, bound) {
        writeln!(s, "final_lambda_h = {lam:.10e}").unwrap();
        writeln!(s, "final_leb = {:.10e}", b.value).unwrap();
        writeln!(s, "alpha = {:.10e}", b.alpha).unwrap();
        writeln!(s, "beta = {:.10e}", b.beta).unwrap();
    }
    s
}
