//! Command-line front end for the `riscap` experiments.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind, Overrides, Settings};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub kind: ExperimentKind,
    pub config: Option<PathBuf>,
    pub overrides: Overrides,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

/// Paths of the files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub json: PathBuf,
}

fn metadata(s: &Settings) -> serde_json::Value {
    let channels: Vec<_> = s
        .channels
        .iter()
        .map(|c| json!({"name": c.name, "tau": c.eq.tau(), "n_cols": c.eq.n_cols(), "scale": c.scale}))
        .collect();
    json!({
        "experiment": s.kind.file_stem(),
        "seed": s.mc.seed,
        "samples": s.mc.samples,
        "batch": s.mc.batch,
        "snr_grid_db": s.snr_grid_db,
        "dims": s.dims,
        "srr": s.srr,
        "channels": channels,
        "power_db": s.power_db,
        "n_values": s.n_values,
        "n_r": s.n_r,
        "ensemble_count": s.ensemble_count,
        "los_gain_db": s.los_gain_db,
        "permutation_budget": s.permutation_budget,
    })
}

/// Resolves settings without running anything.
pub fn resolve(req: &RunRequest) -> Result<Settings, CliError> {
    let (cfg, base) = match &req.config {
        Some(path) => (ExperimentConfig::load(path)?, path.parent().map(Path::to_path_buf).unwrap_or_default()),
        None => (ExperimentConfig::default(), PathBuf::new()),
    };
    Settings::resolve(req.kind, &cfg, &req.overrides, &base)
}

/// Runs one experiment and writes `<stem>.csv`, `<stem>.svg` and
/// `<stem>.json` into the output directory.
pub fn execute(req: &RunRequest) -> Result<Written, CliError> {
    let settings = resolve(req)?;
    let out = match req.threads {
        Some(0) => return Err(CliError::Config("--threads must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?
            .install(|| experiments::run(&settings))?,
        None => experiments::run(&settings)?,
    };
    let dir = &settings.output_dir;
    std::fs::create_dir_all(dir)?;
    let stem = settings.kind.file_stem();
    let written = Written {
        csv: dir.join(format!("{stem}.csv")),
        svg: dir.join(format!("{stem}.svg")),
        json: dir.join(format!("{stem}.json")),
    };
    std::fs::write(&written.csv, out.table.to_csv())?;
    std::fs::write(&written.svg, out.plot.to_svg())?;
    let meta = serde_json::to_string_pretty(&metadata(&settings)).expect("metadata serializes");
    std::fs::write(&written.json, meta + "\n")?;
    Ok(written)
}
