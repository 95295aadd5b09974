use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sve_core::experiment::bench;
use sve_core::risk::Estimator;
use sve_core::seed::{derive_indexed, TAG_SCENE};
use tracing::info;

use super::{parse_estimator, require_even, ConfigArgs, Size, SyntheticArgs};
use crate::error::{CliError, CliResult};
use crate::io::{manifest_path, CsvOut};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated scene sizes, e.g. `896x512,1792x1024`.
    #[arg(long, value_delimiter = ',', default_value = "896x512,1792x1024")]
    pub resolutions: Vec<Size>,

    #[arg(long, default_value_t = 100)]
    pub repetitions: usize,

    /// Estimators to time (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator, default_value = "sve,snr")]
    pub estimators: Vec<Estimator>,

    #[command(flatten)]
    pub synth: SyntheticArgs,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Timing CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    seed: u64,
    estimator: &'a str,
    width: usize,
    height: usize,
    patterns: usize,
    repetitions: usize,
    mean_seconds: f64,
    std_seconds: f64,
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let cfg = args.common.load()?;
    if args.repetitions == 0 {
        return Err(CliError::Precondition("--repetitions must be positive".into()));
    }
    let scenes = args
        .resolutions
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            require_even((size.width, size.height))?;
            args.synth.scene(size, derive_indexed(args.common.seed, TAG_SCENE, i as u64), &cfg)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rows = bench(&scenes, &args.estimators, &cfg, args.repetitions, args.common.seed)?;

    let mut out = CsvOut::create(&args.out)?;
    for row in &rows {
        info!(
            estimator = %row.estimator,
            width = row.width,
            height = row.height,
            mean_seconds = row.mean_seconds,
            std_seconds = row.std_seconds,
            "timed"
        );
        out.row(TimingRow {
            seed: args.common.seed,
            estimator: row.estimator.name(),
            width: row.width,
            height: row.height,
            patterns: row.patterns,
            repetitions: row.repetitions,
            mean_seconds: row.mean_seconds,
            std_seconds: row.std_seconds,
        })?;
    }
    out.finish()?;

    let mut manifest = args.common.manifest("bench", &cfg, &args.out);
    manifest.estimators = args.estimators.clone();
    manifest.scenes = args.resolutions.iter().map(|s| format!("{}:{s}", args.synth.kind_name())).collect();
    manifest.write(&manifest_path(&args.out))
}
