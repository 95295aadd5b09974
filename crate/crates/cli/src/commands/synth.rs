use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sve_core::sensor_sim::{scene_peak, synth_scene, SceneKind, SceneParams};
use tracing::info;

use super::{parse_kind, require_even, ConfigArgs, Size};
use crate::error::CliResult;
use crate::io::{sidecar_path, write_json, write_scene};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: SceneKind,

    /// `N` or `WxH`; both dimensions must be even.
    #[arg(long)]
    pub size: Size,

    /// `flat`: constant radiance.
    #[arg(long)]
    pub level: Option<f64>,

    /// `two-level`: left radiance.
    #[arg(long)]
    pub left: Option<f64>,

    /// `two-level`: right radiance.
    #[arg(long)]
    pub right: Option<f64>,

    /// `two-level`: fraction of columns taking the left radiance.
    #[arg(long)]
    pub split: Option<f64>,

    /// `ramp`: radiance at the first column.
    #[arg(long)]
    pub ramp_start: Option<f64>,

    /// `ramp`: radiance at the last column.
    #[arg(long)]
    pub ramp_end: Option<f64>,

    /// `hdr-composite`: decades of radiance before normalization.
    #[arg(long)]
    pub decades: Option<f64>,

    /// `hdr-composite`: target 99th-percentile radiance. Defaults to the
    /// largest radiance the shortest unit-gain level records unclipped.
    #[arg(long)]
    pub peak: Option<f64>,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Output PFM; parameters go to a `.json` sidecar next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    kind: SceneKind,
    width: usize,
    height: usize,
    seed: u64,
    params: SceneParams,
    manifest: &'a RunManifest,
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    require_even((args.size.width, args.size.height))?;
    let cfg = args.common.load()?;
    let d = SceneParams::default();
    let params = SceneParams {
        level: args.level.unwrap_or(d.level),
        levels: (args.left.unwrap_or(d.levels.0), args.right.unwrap_or(d.levels.1)),
        split: args.split.unwrap_or(d.split),
        ramp: (args.ramp_start.unwrap_or(d.ramp.0), args.ramp_end.unwrap_or(d.ramp.1)),
        seed: args.common.seed,
        decades: args.decades.unwrap_or(d.decades),
        peak: args.peak.unwrap_or_else(|| scene_peak(&cfg.sensor, &cfg.levels)),
    };
    let scene = synth_scene(args.kind, args.size.width, args.size.height, &params)?;
    write_scene(&args.out, &scene)?;

    let manifest = args.common.manifest("synth", &cfg, &args.out);
    write_json(
        &sidecar_path(&args.out),
        &Sidecar {
            kind: args.kind,
            width: scene.width(),
            height: scene.height(),
            seed: args.common.seed,
            params,
            manifest: &manifest,
        },
    )?;
    info!(kind = ?args.kind, size = %args.size, out = %args.out.display(), "scene written");
    Ok(())
}
