use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sve_core::experiment::{evaluate_scene, summarize, Reconstructor, SceneEvaluation, METRICS};
use sve_core::metrics::spearman_rho;
use sve_core::risk::Estimator;
use sve_core::seed::{derive_indexed, TAG_SCENE};
use sve_core::RadianceMap;
use tracing::info;

use super::{
    parse_estimator, parse_reconstructor, pattern_label, require_even, ConfigArgs, Size, SyntheticArgs,
};
use crate::error::{CliError, CliResult};
use crate::io::{create_dir, read_scene, resize_short_edge, write_json, CsvOut};

/// Scenes above this many pixels need `--allow-large`.
pub const DEFAULT_MAX_PIXELS: usize = 256 * 256;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Radiance PFMs to evaluate.
    #[arg(long, num_args = 1.., conflicts_with = "synthetic")]
    pub scenes: Vec<PathBuf>,

    /// Evaluate this many generated scenes instead of files.
    #[arg(long)]
    pub synthetic: Option<usize>,

    /// Size of generated scenes.
    #[arg(long, default_value = "128")]
    pub size: Size,

    #[command(flatten)]
    pub synth: SyntheticArgs,

    /// Resize file scenes so their short edge has this many pixels.
    #[arg(long)]
    pub resize_short_edge: Option<usize>,

    /// Restrict the estimators (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator)]
    pub estimators: Vec<Estimator>,

    /// Restrict the reconstructors (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_reconstructor)]
    pub reconstructors: Vec<Reconstructor>,

    /// Pixel count above which a scene is refused.
    #[arg(long, default_value_t = DEFAULT_MAX_PIXELS)]
    pub max_pixels: usize,

    /// Evaluate scenes above --max-pixels anyway.
    #[arg(long)]
    pub allow_large: bool,

    #[command(flatten)]
    pub common: ConfigArgs,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ScoreRow<'a> {
    seed: u64,
    scene: usize,
    pattern_id: usize,
    levels: &'a str,
    reconstructor: &'a str,
    mu_psnr: f64,
    mu_ssim: f64,
}

#[derive(Serialize)]
struct ScatterRow<'a> {
    seed: u64,
    scene: usize,
    estimator: &'a str,
    reconstructor: &'a str,
    rank: usize,
    pattern_id: usize,
    risk: f64,
    mu_psnr: f64,
    mu_ssim: f64,
}

#[derive(Serialize)]
struct StatsRow<'a> {
    seed: u64,
    scenes: usize,
    estimator: &'a str,
    reconstructor: &'a str,
    metric: &'a str,
    delta_1: f64,
    delta_5: f64,
    q_1pct: f64,
    q_5pct: f64,
}

#[derive(Serialize)]
struct CorrelationRow<'a> {
    seed: u64,
    scene: usize,
    first: &'a str,
    second: &'a str,
    metric: &'a str,
    patterns: usize,
    rho: f64,
    p_value: f64,
}

struct Input {
    name: String,
    scene: RadianceMap,
    seed: u64,
}

fn load_inputs(args: &EvalArgs, cfg: &sve_core::experiment::ExperimentConfig) -> CliResult<Vec<Input>> {
    let mut inputs = Vec::new();
    if let Some(n) = args.synthetic {
        for i in 0..n {
            let seed = derive_indexed(args.common.seed, TAG_SCENE, i as u64);
            let scene = args.synth.scene(args.size, seed, cfg)?;
            inputs.push(Input { name: format!("synthetic-{i}"), scene, seed });
        }
    } else {
        for (i, path) in args.scenes.iter().enumerate() {
            let mut scene = read_scene(path)?;
            if let Some(edge) = args.resize_short_edge {
                scene = resize_short_edge(&scene, edge)?;
            }
            let seed = derive_indexed(args.common.seed, TAG_SCENE, i as u64);
            inputs.push(Input { name: path.display().to_string(), scene, seed });
        }
    }
    if inputs.is_empty() {
        return Err(CliError::Precondition("no scenes: pass --scenes or --synthetic".into()));
    }
    for input in &inputs {
        let (w, h) = (input.scene.width(), input.scene.height());
        require_even((w, h))?;
        if w * h > args.max_pixels && !args.allow_large {
            return Err(CliError::ResourceGuard(format!(
                "{} is {w}x{h} ({} pixels, cap {}); every pattern class is captured and reconstructed, \
                 pass --allow-large to proceed",
                input.name,
                w * h,
                args.max_pixels
            )));
        }
    }
    Ok(inputs)
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    let mut cfg = args.common.load()?;
    if !args.estimators.is_empty() {
        cfg.estimators = args.estimators.clone();
    }
    if !args.reconstructors.is_empty() {
        cfg.reconstructors = args.reconstructors.clone();
    }
    let inputs = load_inputs(args, &cfg)?;
    create_dir(&args.out)?;

    let mut evals: Vec<SceneEvaluation> = Vec::with_capacity(inputs.len());
    for (i, input) in inputs.iter().enumerate() {
        info!(scene = %input.name, index = i, of = inputs.len(), "evaluating");
        evals.push(evaluate_scene(&input.scene, &cfg, input.seed)?);
    }
    let summary = summarize(&evals, &cfg)?;
    let seed = args.common.seed;

    let mut scores = CsvOut::create(&args.out.join("scores.csv"))?;
    let mut scatter = CsvOut::create(&args.out.join("scatter.csv"))?;
    let mut correlations = CsvOut::create(&args.out.join("correlations.csv"))?;
    let (psnr_k, ssim_k) = (0, 1);
    debug_assert_eq!(METRICS, ["mu-psnr", "mu-ssim"]);
    for (s, e) in evals.iter().enumerate() {
        let labels: Vec<String> = e.patterns.iter().map(|p| pattern_label(&cfg.levels, p)).collect();
        for (id, label) in labels.iter().enumerate() {
            for (j, r) in cfg.reconstructors.iter().enumerate() {
                scores.row(ScoreRow {
                    seed,
                    scene: s,
                    pattern_id: id,
                    levels: label,
                    reconstructor: r.name(),
                    mu_psnr: e.scores.get(id, j, psnr_k),
                    mu_ssim: e.scores.get(id, j, ssim_k),
                })?;
            }
        }
        for report in &e.rankings {
            for (j, r) in cfg.reconstructors.iter().enumerate() {
                for row in &report.rows {
                    scatter.row(ScatterRow {
                        seed,
                        scene: s,
                        estimator: report.estimator.name(),
                        reconstructor: r.name(),
                        rank: row.rank,
                        pattern_id: row.id,
                        risk: row.risk.total,
                        mu_psnr: e.scores.get(row.id, j, psnr_k),
                        mu_ssim: e.scores.get(row.id, j, ssim_k),
                    })?;
                }
            }
        }
        for (k, metric) in METRICS.iter().enumerate() {
            for a in 0..cfg.reconstructors.len() {
                for b in a + 1..cfg.reconstructors.len() {
                    let sp = spearman_rho(&e.scores.column(a, k), &e.scores.column(b, k))?;
                    correlations.row(CorrelationRow {
                        seed,
                        scene: s,
                        first: cfg.reconstructors[a].name(),
                        second: cfg.reconstructors[b].name(),
                        metric,
                        patterns: sp.n,
                        rho: sp.rho,
                        p_value: sp.p_value,
                    })?;
                }
            }
        }
    }
    scores.finish()?;
    scatter.finish()?;
    correlations.finish()?;

    let mut stats = CsvOut::create(&args.out.join("stats.csv"))?;
    for row in &summary.estimators {
        stats.row(StatsRow {
            seed,
            scenes: summary.scenes,
            estimator: row.estimator.name(),
            reconstructor: row.reconstructor.name(),
            metric: &row.metric,
            delta_1: row.delta_1,
            delta_5: row.delta_5,
            q_1pct: row.q_1pct,
            q_5pct: row.q_5pct,
        })?;
        info!(
            estimator = %row.estimator,
            reconstructor = %row.reconstructor,
            metric = %row.metric,
            delta_1 = row.delta_1,
            q_1pct = row.q_1pct,
            "ranking quality"
        );
    }
    stats.finish()?;

    #[derive(Serialize)]
    struct SummaryDoc<'a> {
        seed: u64,
        scenes: Vec<&'a str>,
        summary: &'a sve_core::experiment::RankingSummary,
    }
    write_json(
        &args.out.join("summary.json"),
        &SummaryDoc { seed, scenes: inputs.iter().map(|i| i.name.as_str()).collect(), summary: &summary },
    )?;

    let mut manifest = args.common.manifest("eval", &cfg, &args.out);
    manifest.scenes = inputs.into_iter().map(|i| i.name).collect();
    manifest.write(&args.out.join("manifest.json"))
}
