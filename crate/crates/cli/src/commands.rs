//! Command implementations. Each returns a summary; the binary maps it to
//! an exit status.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use convexflow::curve::{self, write_polyline_csv, write_profile_csv, CurvatureProfile};
use convexflow::diagnostics::CSV_HEADER;
use convexflow::flow::{evolve, FlowSpec, Termination, Trajectory};
use convexflow::oracle;
use convexflow::{AngleGrid, Point2};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{InitConfig, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(cfg: &RunConfig) -> String {
    Sha256::digest(cfg.to_toml().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn write_run_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{CSV_HEADER}")?;
    for r in &traj.records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshot(dir: &Path, t: f64, p: &CurvatureProfile) -> Result<()> {
    let mut w = create(&dir.join(format!("snap_{t:.6}.csv")))?;
    write_profile_csv(&mut w, p)?;
    w.flush()?;
    match curve::reconstruct(p, Point2::default()) {
        Ok(c) => {
            let mut w = create(&dir.join(format!("curve_{t:.6}.csv")))?;
            write_polyline_csv(&mut w, &c)?;
            w.flush()?;
        }
        Err(e) => eprintln!("warning: no curve at t = {t}: {e}"),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSummary {
    pub termination: Termination,
    pub steps: usize,
    pub records: usize,
    pub t_final: f64,
}

/// Runs the configured flow and writes `run.csv`, `meta.json` and
/// snapshot files into `out`.
pub fn cmd_evolve(cfg: &RunConfig, out: &Path) -> Result<EvolveSummary> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let initial = cfg.initial_profile()?;
    let spec: FlowSpec = cfg.flow.variant.into();
    let start = Instant::now();
    let traj = evolve(&initial, spec, &cfg.solver_config(), &mut |_, _| {})?;
    let wall = start.elapsed().as_secs_f64();

    write_run_csv(&out.join("run.csv"), &traj)?;
    let stride = cfg.output.snapshot_stride;
    let last = traj.snapshots.len() - 1;
    for (i, (t, p)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        if i % stride == 0 || i == last {
            write_snapshot(out, *t, p)?;
        }
    }

    let meta = json!({
        "config": serde_json::to_value(cfg)?,
        "config_hash": config_hash(cfg),
        "n": cfg.grid.n,
        "flow": spec.name(),
        "scheme": cfg.solver_config().scheme.name(),
        "termination": traj.termination.name(),
        "steps": traj.steps,
        "t_final": traj.times[last],
        "wall_seconds": wall,
        "version": VERSION,
    });
    let mut w = create(&out.join("meta.json"))?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    w.flush()?;

    Ok(EvolveSummary {
        termination: traj.termination,
        steps: traj.steps,
        records: traj.records.len(),
        t_final: traj.times[last],
    })
}

/// Tolerance on the maximum Hausdorff distance, relative to the length.
pub const COMPARE_TOL: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub distances: Vec<(f64, f64)>,
    pub max_distance: f64,
    pub tolerance: f64,
    /// `max distance at (n, m) / max distance at (2n, 2m)`, when refined.
    pub refinement_ratio: Option<f64>,
}

impl CompareSummary {
    pub fn passed(&self) -> bool {
        self.max_distance <= self.tolerance
    }
}

fn write_compare_csv(path: &Path, d: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,hausdorff")?;
    for (t, h) in d {
        writeln!(w, "{t:.16e},{h:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Cross-validates the engine against the marker solver; writes
/// `compare.csv` (and `compare_refined.csv` when `refine` is set).
pub fn cmd_compare(cfg: &RunConfig, markers: usize, horizon: f64, out: &Path, refine: bool) -> Result<CompareSummary> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let initial = cfg.initial_profile()?;
    let spec: FlowSpec = cfg.flow.variant.into();
    let n = cfg.grid.n;
    let max = |d: &[(f64, f64)]| d.iter().map(|x| x.1).fold(0.0, f64::max);
    let d = oracle::cross_validate(&initial, spec, horizon, n, markers)?;
    write_compare_csv(&out.join("compare.csv"), &d)?;
    let refinement_ratio = if refine {
        let fine = oracle::cross_validate(&initial, spec, horizon, 2 * n, 2 * markers)?;
        write_compare_csv(&out.join("compare_refined.csv"), &fine)?;
        Some(max(&d) / max(&fine))
    } else {
        None
    };
    Ok(CompareSummary {
        max_distance: max(&d),
        tolerance: COMPARE_TOL * curve::length(&initial),
        distances: d,
        refinement_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateSummary {
    pub length: f64,
    pub area: f64,
    pub deficit: f64,
    pub alpha: f64,
}

/// Writes `profile.csv` and `curve.csv` for an initial curve.
pub fn cmd_generate(init: &InitConfig, n: usize, out: &Path) -> Result<GenerateSummary> {
    let p = init.profile(&AngleGrid::new(n)?)?;
    let c = curve::reconstruct(&p, Point2::default())?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut w = create(&out.join("profile.csv"))?;
    write_profile_csv(&mut w, &p)?;
    w.flush()?;
    let mut w = create(&out.join("curve.csv"))?;
    write_polyline_csv(&mut w, &c)?;
    w.flush()?;
    Ok(GenerateSummary {
        length: curve::length(&p),
        area: curve::area(&p)?,
        deficit: curve::isoperimetric_deficit(&p)?,
        alpha: curve::alpha_of(&p),
    })
}
