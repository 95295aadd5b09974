use std::path::PathBuf;

use clap::Args;
use sve_core::experiment::{rank_scene, reconstruct, scene_histogram, Reconstructor};
use sve_core::metrics::{mu_psnr, mu_ssim, quantile, NORMALIZATION_QUANTILE};
use sve_core::patterns::enumerate_classes;
use sve_core::reconstruct::admm_tv_reconstruct;
use sve_core::risk::Estimator;
use sve_core::seed::{derive, derive_indexed, TAG_CAPTURE, TAG_SCENE};
use sve_core::sensor_sim::simulate_capture;
use sve_core::CanonicalPattern;
use tracing::info;

use super::reconstruct::Metrics;
use super::{
    parse_estimator, parse_reconstructor, pattern_label, require_even, write_rank_csv, ConfigArgs,
    HistogramFile, Size, SyntheticArgs,
};
use crate::error::{CliError, CliResult, StageExt};
use crate::io::{create_dir, read_scene, write_capture, write_json, write_png, write_scene};

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Ground-truth radiance PFM.
    #[arg(long, conflicts_with = "synthetic")]
    pub scene: Option<PathBuf>,

    /// Generate the scene instead of reading one.
    #[arg(long)]
    pub synthetic: bool,

    /// Size of a generated scene.
    #[arg(long, default_value = "128")]
    pub size: Size,

    #[command(flatten)]
    pub synth: SyntheticArgs,

    #[arg(long, value_parser = parse_estimator, default_value = "sve")]
    pub estimator: Estimator,

    #[arg(long, value_parser = parse_reconstructor, default_value = "lpa")]
    pub reconstructor: Reconstructor,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &PipelineArgs) -> CliResult<()> {
    let cfg = args.common.load().stage("config")?;
    let seed = args.common.seed;
    let (scene, scene_name) = match (&args.scene, args.synthetic) {
        (Some(path), _) => (read_scene(path).stage("load")?, path.display().to_string()),
        (None, true) => (
            args.synth.scene(args.size, derive_indexed(seed, TAG_SCENE, 0), &cfg).stage("load")?,
            format!("{}:{}", args.synth.kind_name(), args.size),
        ),
        (None, false) => {
            return Err(CliError::Precondition("pass --scene or --synthetic".into())).stage("load")
        }
    };
    require_even((scene.width(), scene.height())).stage("load")?;
    create_dir(&args.out).stage("write")?;

    let histogram = scene_histogram(&scene, &cfg, seed).stage("pilot")?;
    write_json(
        &args.out.join("histogram.json"),
        &HistogramFile { seed, pilot_downsample: cfg.pilot_downsample, histogram: histogram.clone() },
    )
    .stage("write")?;

    let table = cfg.table().stage("rank")?;
    let candidates: Vec<CanonicalPattern> = enumerate_classes(&cfg.levels).collect();
    let report = rank_scene(args.estimator, &scene, &histogram, &candidates, &cfg, &table).stage("rank")?;
    write_rank_csv(&args.out.join("rank.csv"), &report, &cfg.levels, seed).stage("write")?;
    let top = report.top();
    info!(
        estimator = %args.estimator,
        patterns = report.rows.len(),
        top = %pattern_label(&cfg.levels, &top.pattern),
        tau = ?top.pattern.pattern().tau(),
        alpha = ?top.pattern.pattern().alpha(),
        risk = top.risk.total,
        "top-1 pattern"
    );

    let capture =
        simulate_capture(&scene, top.pattern.pattern(), &cfg.sensor, derive(seed, TAG_CAPTURE), cfg.noise)
            .stage("capture")?;

    let (image, iterations) = match args.reconstructor {
        Reconstructor::AdmmTv => {
            let o = admm_tv_reconstruct(&capture, &cfg.admm).stage("reconstruct")?;
            (o.image, Some(o.iterations))
        }
        r => (reconstruct(&capture, r, &cfg.admm).stage("reconstruct")?, None),
    };

    let mu = cfg.mu();
    let metrics = Metrics {
        seed,
        reconstructor: args.reconstructor,
        mu,
        mu_psnr: mu_psnr(&scene, &image, mu).stage("metrics")?,
        mu_ssim: mu_ssim(&scene, &image, mu).stage("metrics")?,
        iterations,
    };
    info!(mu_psnr = metrics.mu_psnr, mu_ssim = metrics.mu_ssim, "metrics");

    let mut manifest = args.common.manifest("pipeline", &cfg, &args.out);
    manifest.estimators = vec![args.estimator];
    manifest.reconstructors = vec![args.reconstructor];
    manifest.scenes = vec![scene_name];
    (|| {
        write_capture(&args.out.join("capture.pfm"), &capture, cfg.noise, &manifest)?;
        write_scene(&args.out.join("reconstruction.pfm"), &image)?;
        let scale = quantile(scene.values(), NORMALIZATION_QUANTILE);
        write_png(&args.out.join("reconstruction.png"), &image, Some(scale), mu)?;
        write_json(&args.out.join("metrics.json"), &metrics)?;
        manifest.write(&args.out.join("manifest.json"))
    })()
    .stage("write")
}
