use std::path::PathBuf;

use clap::Args;
use sve_core::experiment::scene_histogram;
use tracing::info;

use super::{ConfigArgs, HistogramFile};
use crate::error::CliResult;
use crate::io::{manifest_path, read_scene, write_json};

#[derive(Debug, Args)]
pub struct PilotArgs {
    /// Ground-truth radiance PFM.
    #[arg(long)]
    pub scene: PathBuf,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Histogram JSON.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &PilotArgs) -> CliResult<()> {
    let cfg = args.common.load()?;
    let scene = read_scene(&args.scene)?;
    let histogram = scene_histogram(&scene, &cfg, args.common.seed)?;
    info!(
        bins = histogram.bins(),
        saturated = histogram.saturated_fraction(),
        status = ?histogram.status(),
        "pilot histogram"
    );
    write_json(
        &args.out,
        &HistogramFile { seed: args.common.seed, pilot_downsample: cfg.pilot_downsample, histogram },
    )?;
    let mut manifest = args.common.manifest("pilot", &cfg, &args.out);
    manifest.scenes.push(args.scene.display().to_string());
    manifest.write(&manifest_path(&args.out))
}
