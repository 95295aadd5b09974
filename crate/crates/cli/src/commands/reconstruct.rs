use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sve_core::experiment::Reconstructor;
use sve_core::metrics::{mu_psnr, mu_ssim, quantile, NORMALIZATION_QUANTILE};
use sve_core::reconstruct::{admm_tv_reconstruct, lpa_reconstruct};
use tracing::info;

use super::{parse_reconstructor, ConfigArgs};
use crate::error::{CliError, CliResult};
use crate::io::{manifest_path, read_capture, read_scene, write_json, write_png, write_scene};

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Code PFM written by `capture` (its `.json` sidecar must sit next to it).
    #[arg(long)]
    pub capture: PathBuf,

    /// lpa or admm-tv.
    #[arg(long, value_parser = parse_reconstructor, default_value = "lpa")]
    pub method: Reconstructor,

    /// Ground truth; enables the metrics output.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    /// Metrics JSON (requires --reference).
    #[arg(long, requires = "reference")]
    pub metrics: Option<PathBuf>,

    /// Tone-mapped 8-bit preview.
    #[arg(long)]
    pub png: Option<PathBuf>,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Reconstructed radiance PFM.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
pub struct Metrics {
    pub seed: u64,
    pub reconstructor: Reconstructor,
    pub mu: f64,
    pub mu_psnr: f64,
    pub mu_ssim: f64,
    /// ADMM iterations; absent for LPA.
    pub iterations: Option<usize>,
}

pub fn run(args: &ReconstructArgs) -> CliResult<()> {
    let cfg = args.common.load()?;
    let capture = read_capture(&args.capture)?;
    let (image, iterations) = match args.method {
        Reconstructor::Lpa => (lpa_reconstruct(&capture)?, None),
        Reconstructor::AdmmTv => {
            let o = admm_tv_reconstruct(&capture, &cfg.admm)?;
            (o.image, Some(o.iterations))
        }
    };
    write_scene(&args.out, &image)?;

    let reference = args.reference.as_deref().map(read_scene).transpose()?;
    if let Some(png) = &args.png {
        let scale = reference.as_ref().map(|r| quantile(r.values(), NORMALIZATION_QUANTILE));
        write_png(png, &image, scale, cfg.mu())?;
    }
    if let Some(reference) = &reference {
        if (reference.width(), reference.height()) != (image.width(), image.height()) {
            return Err(CliError::Precondition(format!(
                "reference is {}x{} but the capture is {}x{}",
                reference.width(),
                reference.height(),
                image.width(),
                image.height()
            )));
        }
        let metrics = Metrics {
            seed: capture.seed,
            reconstructor: args.method,
            mu: cfg.mu(),
            mu_psnr: mu_psnr(reference, &image, cfg.mu())?,
            mu_ssim: mu_ssim(reference, &image, cfg.mu())?,
            iterations,
        };
        info!(mu_psnr = metrics.mu_psnr, mu_ssim = metrics.mu_ssim, "metrics");
        if let Some(path) = &args.metrics {
            write_json(path, &metrics)?;
        }
    }

    let mut manifest = args.common.manifest("reconstruct", &cfg, &args.out);
    manifest.reconstructors = vec![args.method];
    manifest.scenes.extend(args.reference.iter().map(|p| p.display().to_string()));
    manifest.write(&manifest_path(&args.out))?;
    info!(method = %args.method, ?iterations, out = %args.out.display(), "reconstruction written");
    Ok(())
}
