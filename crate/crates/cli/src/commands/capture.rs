use std::path::PathBuf;

use clap::Args;
use sve_core::seed::{derive, TAG_CAPTURE};
use sve_core::sensor_sim::simulate_capture;
use sve_core::{LevelSet, Pattern};
use tracing::info;

use super::{require_even, ConfigArgs};
use crate::error::{CliError, CliResult};
use crate::io::{read_scene, write_capture};

#[derive(Debug, Args)]
pub struct CaptureArgs {
    /// Ground-truth radiance PFM.
    #[arg(long)]
    pub scene: PathBuf,

    /// Four level-set indices for the slots in row-major order, e.g. `0,3,5,8`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub pattern: Vec<usize>,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Output PFM of ADC codes; metadata goes to a `.json` sidecar.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn pattern_from_indices(levels: &LevelSet, indices: &[usize]) -> CliResult<Pattern> {
    let picked = indices
        .iter()
        .map(|&i| {
            levels.get(i).ok_or_else(|| {
                CliError::Precondition(format!("level index {i} is outside the {}-level set", levels.len()))
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let picked: [_; 4] = picked
        .try_into()
        .map_err(|_| CliError::Precondition("a pattern needs exactly four levels".into()))?;
    Ok(Pattern::from_levels(picked)?)
}

pub fn run(args: &CaptureArgs) -> CliResult<()> {
    let cfg = args.common.load()?;
    let pattern = pattern_from_indices(&cfg.levels, &args.pattern)?;
    let scene = read_scene(&args.scene)?;
    require_even((scene.width(), scene.height()))?;
    let seed = derive(args.common.seed, TAG_CAPTURE);
    let capture = simulate_capture(&scene, &pattern, &cfg.sensor, seed, cfg.noise)?;

    let mut manifest = args.common.manifest("capture", &cfg, &args.out);
    manifest.scenes.push(args.scene.display().to_string());
    write_capture(&args.out, &capture, cfg.noise, &manifest)?;
    let saturated = capture.codes.iter().filter(|&&c| c == cfg.sensor.max_code()).count();
    info!(out = %args.out.display(), saturated, "capture written");
    Ok(())
}
