use std::path::PathBuf;

use clap::Args;
use sve_core::experiment::scene_histogram;
use sve_core::patterns::enumerate_classes;
use sve_core::risk::{rank_patterns, Estimator, RiskInput};
use sve_core::CanonicalPattern;
use tracing::info;

use super::{parse_estimator, pattern_label, write_rank_csv, ConfigArgs, HistogramFile};
use crate::error::{CliError, CliResult};
use crate::io::{manifest_path, read_json, read_scene};

#[derive(Debug, Args)]
pub struct RankArgs {
    /// sve, sve-wo, snr or snr-mse.
    #[arg(long, value_parser = parse_estimator, default_value = "sve")]
    pub estimator: Estimator,

    /// Histogram JSON from `pilot` (SVE estimators).
    #[arg(long)]
    pub histogram: Option<PathBuf>,

    /// Radiance PFM. SNR estimators read it directly; SVE estimators take a
    /// pilot of it when no histogram is given.
    #[arg(long)]
    pub scene: Option<PathBuf>,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Ranking CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &RankArgs) -> CliResult<()> {
    let cfg = args.common.load()?;
    let table = cfg.table()?;
    let candidates: Vec<CanonicalPattern> = enumerate_classes(&cfg.levels).collect();
    let scene = args.scene.as_deref().map(read_scene).transpose()?;

    let report = if args.estimator.uses_histogram() {
        let histogram = match (&args.histogram, &scene) {
            (Some(path), _) => read_json::<HistogramFile>(path)?.histogram,
            (None, Some(scene)) => scene_histogram(scene, &cfg, args.common.seed)?,
            (None, None) => {
                return Err(CliError::Precondition(format!(
                    "estimator {} needs --histogram or --scene",
                    args.estimator
                )))
            }
        };
        rank_patterns(args.estimator, RiskInput::Histogram(&histogram), candidates, &cfg.sensor, &table)?
    } else {
        let scene = scene
            .as_ref()
            .ok_or_else(|| CliError::Precondition(format!("estimator {} needs --scene", args.estimator)))?;
        rank_patterns(args.estimator, RiskInput::Radiance(scene), candidates, &cfg.sensor, &table)?
    };

    write_rank_csv(&args.out, &report, &cfg.levels, args.common.seed)?;
    let mut manifest = args.common.manifest("rank", &cfg, &args.out);
    manifest.estimators = vec![args.estimator];
    manifest.scenes.extend(args.scene.iter().chain(&args.histogram).map(|p| p.display().to_string()));
    manifest.write(&manifest_path(&args.out))?;
    info!(
        estimator = %args.estimator,
        patterns = report.rows.len(),
        top = %pattern_label(&cfg.levels, &report.top().pattern),
        "ranking written"
    );
    Ok(())
}
