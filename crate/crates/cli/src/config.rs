//! Experiment configuration: a JSON object with optional keys, merged with
//! per-experiment defaults and command-line overrides, then validated.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use riscap_core::channel_model::io::parse_channel_spec;
use riscap_core::channel_model::{generate_ensemble, scenarios, ChannelEnsembleSpec, EquivalentChannel, Normalization, DEFAULT_RANK_TOL};
use riscap_core::hsm_vgc::MIN_SAMPLES;
use riscap_core::McConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[value(name = "fig2", alias = "fig2_deltas")]
    #[serde(alias = "fig2")]
    Fig2Deltas,
    #[value(name = "fig3", alias = "fig3_hsm_capacity")]
    #[serde(alias = "fig3")]
    Fig3HsmCapacity,
    #[value(name = "fig4", alias = "fig4_rate_vs_snr")]
    #[serde(alias = "fig4")]
    Fig4RateVsSnr,
    #[value(name = "fig5", alias = "fig5_rate_gain_vs_n")]
    #[serde(alias = "fig5")]
    Fig5RateGainVsN,
    #[value(name = "bounds", alias = "custom_bounds")]
    #[serde(alias = "bounds")]
    CustomBounds,
}

impl ExperimentKind {
    /// Stem of the output files.
    pub fn file_stem(&self) -> &'static str {
        match self {
            Self::Fig2Deltas => "fig2_deltas",
            Self::Fig3HsmCapacity => "fig3_hsm_capacity",
            Self::Fig4RateVsSnr => "fig4_rate_vs_snr",
            Self::Fig5RateGainVsN => "fig5_rate_gain_vs_n",
            Self::CustomBounds => "custom_bounds",
        }
    }

    fn uses_monte_carlo(&self) -> bool {
        !matches!(self, Self::CustomBounds)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub batch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NormalizationName {
    GramTraceOne,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSource {
    pub n_r: usize,
    pub n: usize,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub los_gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSource {
    Builtin(String),
    File(PathBuf),
    Ensemble(EnsembleSource),
}

/// Raw configuration file contents; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub dims: Option<Vec<u32>>,
    pub srr: Option<Vec<u32>>,
    pub channels: Option<Vec<ChannelSource>>,
    pub normalization: Option<NormalizationName>,
    pub mc: Option<McSection>,
    pub output_dir: Option<PathBuf>,
    pub power_db: Option<f64>,
    pub n_values: Option<Vec<usize>>,
    pub n_r: Option<usize>,
    pub ensemble_count: Option<usize>,
    pub los_gain_db: Option<f64>,
    pub permutation_budget: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {}", e.line(), e.column(), e))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct NamedChannel {
    pub name: String,
    pub eq: EquivalentChannel,
    /// Factor applied by normalization; `None` when the generator normalized.
    pub scale: Option<f64>,
}

/// Fully resolved and validated settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub kind: ExperimentKind,
    pub snr_grid_db: Vec<f64>,
    pub dims: Vec<u32>,
    pub srr: Vec<u32>,
    pub channels: Vec<NamedChannel>,
    pub normalization: Normalization,
    pub mc: McConfig,
    pub output_dir: PathBuf,
    pub power_db: f64,
    pub n_values: Vec<usize>,
    pub n_r: usize,
    pub ensemble_count: usize,
    pub los_gain_db: f64,
    pub permutation_budget: usize,
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn default_samples(kind: ExperimentKind) -> usize {
    match kind {
        ExperimentKind::Fig2Deltas => 100_000,
        ExperimentKind::Fig3HsmCapacity => 1_000_000,
        ExperimentKind::Fig4RateVsSnr => 200_000,
        ExperimentKind::Fig5RateGainVsN => MIN_SAMPLES,
        ExperimentKind::CustomBounds => MIN_SAMPLES,
    }
}

fn default_grid(kind: ExperimentKind) -> Vec<f64> {
    match kind {
        ExperimentKind::Fig2Deltas => grid(0.0, 38.0, 2.0),
        ExperimentKind::Fig3HsmCapacity => grid(-10.0, 40.0, 2.5),
        ExperimentKind::Fig4RateVsSnr => grid(-20.0, 40.0, 2.5),
        ExperimentKind::Fig5RateGainVsN => vec![20.0],
        ExperimentKind::CustomBounds => grid(-20.0, 40.0, 10.0),
    }
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl Settings {
    /// Merges `cfg` with defaults and `over`; relative paths in `cfg` are
    /// resolved against `base`.
    pub fn resolve(kind: ExperimentKind, cfg: &ExperimentConfig, over: &Overrides, base: &Path) -> Result<Self, CliError> {
        if let Some(k) = cfg.experiment {
            if k != kind {
                return Err(bad("experiment", format!("config is for {} but {} was requested", k.file_stem(), kind.file_stem())));
            }
        }
        let snr_grid_db = cfg.snr_grid_db.clone().unwrap_or_else(|| default_grid(kind));
        if snr_grid_db.is_empty() || snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(bad("snr_grid_db", "must be a nonempty list of finite numbers"));
        }
        if snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("snr_grid_db", "must be strictly increasing"));
        }

        let dims = cfg.dims.clone().unwrap_or_else(|| vec![2, 4, 8]);
        if dims.is_empty() || dims.iter().any(|&m| m < 2) {
            return Err(bad("dims", "dimensions must be >= 2"));
        }
        if kind == ExperimentKind::Fig2Deltas && dims.iter().any(|m| ![2, 3, 4, 6, 8].contains(m)) {
            return Err(bad("dims", "fig2 supports dimensions 2, 3, 4, 6 and 8"));
        }

        let srr = cfg.srr.clone().unwrap_or_else(|| match kind {
            ExperimentKind::Fig4RateVsSnr => vec![1, 2, 8],
            _ => vec![1],
        });
        if srr.is_empty() || srr.contains(&0) {
            return Err(bad("srr", "values must be >= 1"));
        }
        if kind == ExperimentKind::Fig5RateGainVsN && srr != [1] {
            return Err(bad("srr", "fig5 is defined for L = 1"));
        }

        let mcs = cfg.mc.clone().unwrap_or_default();
        let samples = over.samples.or(mcs.samples).unwrap_or_else(|| default_samples(kind));
        let batch = mcs.batch.unwrap_or(65_536).min(samples.max(1));
        let mc = McConfig { seed: over.seed.or(mcs.seed).unwrap_or(McConfig::default().seed), samples, batch };
        mc.validate().map_err(|e| bad("mc", e))?;
        if kind.uses_monte_carlo() && samples < MIN_SAMPLES {
            return Err(bad("mc.samples", format!("must be >= {MIN_SAMPLES}")));
        }

        let normalization = match cfg.normalization {
            Some(NormalizationName::None) => Normalization::None,
            _ => Normalization::GramTraceOne,
        };
        let sources = cfg.channels.clone().unwrap_or_else(|| match kind {
            ExperimentKind::CustomBounds => ["h1", "h2", "h3", "h4"].iter().map(|s| ChannelSource::Builtin(s.to_string())).collect(),
            _ => vec![ChannelSource::Builtin("h1".into())],
        });
        let channels = load_channels(&sources, normalization, base)?;
        if kind == ExperimentKind::Fig4RateVsSnr && channels.len() != 1 {
            return Err(bad("channels", "fig4 takes exactly one channel"));
        }

        let power_db = cfg.power_db.unwrap_or(20.0);
        if !power_db.is_finite() {
            return Err(bad("power_db", "must be finite"));
        }
        let n_values = cfg.n_values.clone().unwrap_or_else(|| (1..=8).collect());
        if n_values.is_empty() || n_values.contains(&0) || n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("n_values", "must be a strictly increasing list of positive integers"));
        }
        let n_r = cfg.n_r.unwrap_or(2);
        if n_r == 0 {
            return Err(bad("n_r", "must be >= 1"));
        }
        let ensemble_count = cfg.ensemble_count.unwrap_or(1000);
        if ensemble_count == 0 {
            return Err(bad("ensemble_count", "must be >= 1"));
        }
        let los_gain_db = cfg.los_gain_db.unwrap_or(0.0);
        if !los_gain_db.is_finite() {
            return Err(bad("los_gain_db", "must be finite"));
        }
        let permutation_budget = cfg.permutation_budget.unwrap_or(5040);
        if permutation_budget == 0 {
            return Err(bad("permutation_budget", "must be >= 1"));
        }
        let output_dir = over
            .out
            .clone()
            .or_else(|| cfg.output_dir.as_ref().map(|p| base.join(p)))
            .unwrap_or_else(|| PathBuf::from("out"));

        Ok(Self {
            kind,
            snr_grid_db,
            dims,
            srr,
            channels,
            normalization,
            mc,
            output_dir,
            power_db,
            n_values,
            n_r,
            ensemble_count,
            los_gain_db,
            permutation_budget,
        })
    }
}

fn finish(name: String, eq: EquivalentChannel, norm: Normalization) -> NamedChannel {
    match norm {
        Normalization::GramTraceOne => {
            let (eq, scale) = eq.normalized();
            NamedChannel { name, eq, scale: Some(scale) }
        }
        Normalization::None => NamedChannel { name, eq, scale: Some(1.0) },
    }
}

fn wrap(m: &riscap_core::CMatrix) -> riscap_core::Result<EquivalentChannel> {
    EquivalentChannel::from_full_row_rank(m.clone(), DEFAULT_RANK_TOL).or_else(|_| EquivalentChannel::from_matrix(m, DEFAULT_RANK_TOL))
}

fn load_channels(sources: &[ChannelSource], norm: Normalization, base: &Path) -> Result<Vec<NamedChannel>, CliError> {
    if sources.is_empty() {
        return Err(bad("channels", "at least one channel is required"));
    }
    let mut out = Vec::new();
    for (i, src) in sources.iter().enumerate() {
        let field = format!("channels[{i}]");
        match src {
            ChannelSource::Builtin(name) => {
                let m = scenarios::by_name(name).ok_or_else(|| bad(&field, format!("unknown builtin channel `{name}` (h1..h4)")))?;
                let eq = wrap(&m).map_err(|e| bad(&field, e))?;
                out.push(finish(name.clone(), eq, norm));
            }
            ChannelSource::File(path) => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| bad(&field, format!("cannot read {}: {e}", full.display())))?;
                let spec = parse_channel_spec(&text, 1).map_err(|e| bad(&field, format!("{}: {e}", full.display())))?;
                let merged = spec.merge_direct_path().map_err(|e| bad(&field, e))?;
                let eq = wrap(&merged).and_then(|eq| eq.drop_zero_columns()).map_err(|e| bad(&field, e))?;
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| field.clone());
                out.push(finish(name, eq, norm));
            }
            ChannelSource::Ensemble(e) => {
                let spec = ChannelEnsembleSpec {
                    n_r: e.n_r,
                    n: e.n,
                    srr: 1,
                    los_gain_db: e.los_gain_db,
                    seed: e.seed,
                    normalization: norm,
                };
                if e.count == 0 {
                    return Err(bad(&field, "count must be >= 1"));
                }
                let members = generate_ensemble(&spec, e.count).map_err(|err| bad(&field, err))?;
                for (j, eq) in members.into_iter().enumerate() {
                    out.push(NamedChannel { name: format!("ensemble{i}_{j}"), eq, scale: None });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(kind: ExperimentKind, json: &str) -> Result<Settings, CliError> {
        Settings::resolve(kind, &ExperimentConfig::parse(json)?, &Overrides::default(), Path::new("."))
    }

    #[test]
    fn defaults_resolve() {
        let s = resolve(ExperimentKind::Fig4RateVsSnr, "{}").unwrap();
        assert_eq!(s.snr_grid_db.len(), 25);
        assert_eq!(s.srr, vec![1, 2, 8]);
        assert_eq!(s.channels[0].name, "h1");
        assert!((s.channels[0].eq.frobenius_sq() - 1.0).abs() < 1e-12);
        let s = resolve(ExperimentKind::Fig2Deltas, "{}").unwrap();
        assert_eq!(s.snr_grid_db.len(), 20);
        assert_eq!(s.mc.samples, 100_000);
    }

    #[test]
    fn unknown_field_reports_position() {
        let err = resolve(ExperimentKind::Fig3HsmCapacity, "{\n  \"dims\": [2],\n  \"bogus\": 1\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("bogus"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn validation_errors_name_the_field() {
        let cases = [
            (ExperimentKind::Fig3HsmCapacity, r#"{"snr_grid_db": [1, 1]}"#, "snr_grid_db"),
            (ExperimentKind::Fig3HsmCapacity, r#"{"mc": {"samples": 100, "batch": 10}}"#, "mc.samples"),
            (ExperimentKind::Fig2Deltas, r#"{"dims": [5]}"#, "dims"),
            (ExperimentKind::Fig4RateVsSnr, r#"{"srr": [0]}"#, "srr"),
            (ExperimentKind::Fig4RateVsSnr, r#"{"channels": [{"builtin": "h9"}]}"#, "channels[0]"),
            (ExperimentKind::Fig3HsmCapacity, r#"{"experiment": "fig2_deltas"}"#, "experiment"),
            (ExperimentKind::Fig5RateGainVsN, r#"{"mc": {"samples": 20000, "batch": 0}}"#, "mc"),
        ];
        for (kind, json, field) in cases {
            let msg = resolve(kind, json).unwrap_err().to_string();
            assert!(msg.contains(field), "{json}: {msg}");
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg = ExperimentConfig::parse(r#"{"mc": {"seed": 1, "samples": 50000}}"#).unwrap();
        let over = Overrides { seed: Some(9), samples: Some(20_000), out: Some("x".into()) };
        let s = Settings::resolve(ExperimentKind::Fig3HsmCapacity, &cfg, &over, Path::new(".")).unwrap();
        assert_eq!((s.mc.seed, s.mc.samples), (9, 20_000));
        assert_eq!(s.output_dir, PathBuf::from("x"));
    }

    #[test]
    fn experiment_aliases() {
        let a = ExperimentConfig::parse(r#"{"experiment": "fig4"}"#).unwrap();
        let b = ExperimentConfig::parse(r#"{"experiment": "fig4_rate_vs_snr"}"#).unwrap();
        assert_eq!(a.experiment, b.experiment);
    }
}
