//! Subcommand implementations and the arguments they share.

pub mod bench;
pub mod capture;
pub mod eval;
pub mod pilot;
pub mod pipeline;
pub mod rank;
pub mod reconstruct;
pub mod synth;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Serialize;
use sve_core::experiment::{ExperimentConfig, Reconstructor};
use sve_core::risk::{Estimator, RankReport};
use sve_core::sensor_sim::{scene_peak, synth_scene, SceneKind, SceneParams};
use sve_core::{CanonicalPattern, LevelSet, RadianceMap};

use crate::error::{CliError, CliResult};
use crate::io::{read_json, read_levels, CsvOut};
use crate::manifest::RunManifest;

/// Experiment configuration, level set and seed.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Experiment configuration JSON; missing fields take their defaults.
    #[arg(long, value_name = "JSON")]
    pub config: Option<PathBuf>,

    /// Level set JSON, either `{"levels": [...]}` or a bare list of
    /// `{"tau": .., "alpha": ..}` objects. Overrides the configuration's set.
    #[arg(long, value_name = "JSON")]
    pub levels: Option<PathBuf>,

    /// Root seed; every random stream is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Replace shot and read noise by their means.
    #[arg(long)]
    pub no_noise: bool,
}

impl ConfigArgs {
    pub fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_json::<ExperimentConfig>(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &self.levels {
            cfg.levels = read_levels(path)?;
        }
        if self.no_noise {
            cfg.noise = false;
        }
        cfg.validate().map_err(|e| CliError::Precondition(format!("invalid configuration: {e}")))?;
        Ok(cfg)
    }

    pub fn manifest(&self, command: &str, cfg: &ExperimentConfig, output: &Path) -> RunManifest {
        let mut m = RunManifest::new(command, self.seed, cfg, output);
        m.config_path = self.config.clone();
        m.levels_path = self.levels.clone();
        m
    }
}

/// `N` for a square or `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{s}' is not N or WxH"));
        let (width, height) = match s.split_once(['x', 'X']) {
            Some((w, h)) => (num(w)?, num(h)?),
            None => {
                let n = num(s)?;
                (n, n)
            }
        };
        if width == 0 || height == 0 {
            return Err(format!("'{s}' has a zero dimension"));
        }
        Ok(Size { width, height })
    }
}

impl std::fmt::Display for Size {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

pub fn parse_estimator(s: &str) -> Result<Estimator, String> {
    s.parse().map_err(|e: sve_core::Error| e.to_string())
}

pub fn parse_reconstructor(s: &str) -> Result<Reconstructor, String> {
    s.parse().map_err(|e: sve_core::Error| e.to_string())
}

pub fn parse_kind(s: &str) -> Result<SceneKind, String> {
    s.parse().map_err(|e: sve_core::Error| e.to_string())
}

/// Synthetic scene options shared by `eval`, `bench` and `pipeline`.
#[derive(Debug, Clone, Args)]
pub struct SyntheticArgs {
    /// Scene generator for synthetic inputs.
    #[arg(long, value_parser = parse_kind, default_value = "hdr-composite")]
    pub kind: SceneKind,

    /// Decades of radiance spanned by composite scenes.
    #[arg(long, default_value_t = SceneParams::default().decades)]
    pub decades: f64,
}

impl SyntheticArgs {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SceneKind::Flat => "flat",
            SceneKind::TwoLevel => "two-level",
            SceneKind::Ramp => "ramp",
            SceneKind::HdrComposite => "hdr-composite",
        }
    }

    /// Scene `seed` of the configured kind; composites are scaled to the
    /// configured sensor and level set.
    pub fn scene(&self, size: Size, seed: u64, cfg: &ExperimentConfig) -> CliResult<RadianceMap> {
        let params = SceneParams {
            seed,
            decades: self.decades,
            peak: scene_peak(&cfg.sensor, &cfg.levels),
            ..SceneParams::default()
        };
        synth_scene(self.kind, size.width, size.height, &params).map_err(CliError::from)
    }
}

pub fn require_even(size: (usize, usize)) -> CliResult<()> {
    if !size.0.is_multiple_of(2) || !size.1.is_multiple_of(2) {
        return Err(CliError::Precondition(format!(
            "{}x{} does not tile with 2x2 cells; both dimensions must be even",
            size.0, size.1
        )));
    }
    Ok(())
}

/// Index of each canonical element in the level set.
pub fn level_indices(levels: &LevelSet, pattern: &CanonicalPattern) -> [usize; 4] {
    pattern.elements().map(|e| levels.levels().iter().position(|l| *l == e).unwrap_or(usize::MAX))
}

/// Canonical elements as dash-joined level indices, e.g. `0-3-5-8`.
pub fn pattern_label(levels: &LevelSet, pattern: &CanonicalPattern) -> String {
    level_indices(levels, pattern).map(|i| i.to_string()).join("-")
}

#[derive(Serialize)]
struct RankRow<'a> {
    seed: u64,
    estimator: &'a str,
    rank: usize,
    pattern_id: usize,
    levels: String,
    tau: String,
    alpha: String,
    recoverable: f64,
    nonrecoverable: f64,
    total: f64,
}

/// Row-major slot values joined with `;`.
fn slots(values: [f64; 4]) -> String {
    values.map(|v| v.to_string()).join(";")
}

pub fn write_rank_csv(path: &Path, report: &RankReport, levels: &LevelSet, seed: u64) -> CliResult<()> {
    let mut out = CsvOut::create(path)?;
    for row in &report.rows {
        let p = row.pattern.pattern();
        out.row(RankRow {
            seed,
            estimator: report.estimator.name(),
            rank: row.rank,
            pattern_id: row.id,
            levels: pattern_label(levels, &row.pattern),
            tau: slots(p.tau()),
            alpha: slots(p.alpha()),
            recoverable: row.risk.recoverable,
            nonrecoverable: row.risk.nonrecoverable,
            total: row.risk.total,
        })?;
    }
    out.finish()
}

/// Histogram document written by `pilot` and `pipeline`.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct HistogramFile {
    pub seed: u64,
    pub pilot_downsample: usize,
    pub histogram: sve_core::histogramming::RadianceHistogram,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_forms() {
        assert_eq!("64".parse::<Size>().unwrap(), Size { width: 64, height: 64 });
        assert_eq!("896x512".parse::<Size>().unwrap(), Size { width: 896, height: 512 });
        assert!("0x4".parse::<Size>().is_err());
        assert!("4x".parse::<Size>().is_err());
    }

    #[test]
    fn default_set_labels_use_level_indices() {
        let levels = LevelSet::default_levels();
        let top = levels.levels()[8];
        let c = sve_core::Pattern::uniform(top).canonicalize();
        assert_eq!(pattern_label(&levels, &c), "8-8-8-8");
    }
}
