//! End-to-end runs: the capture pipeline, the exhaustive ranking evaluation
//! and the risk run-time benchmark.
//!
//! Seeds: the pilot of a scene uses `derive(scene_seed, TAG_PILOT)` and every
//! full-resolution capture of that scene uses `derive(scene_seed,
//! TAG_CAPTURE)`, so all candidate patterns see the same noise streams.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogramming::{
    build_histogram, capture_pilot, RadianceHistogram, DEFAULT_BINS, DEFAULT_PILOT_DOWNSAMPLE,
};
use crate::metrics::{
    default_mu, mu_psnr, mu_ssim, oracle_pattern, q_score, spearman_rho, top_k_delta, ScoreTable,
};
use crate::patterns::{enumerate_classes, CanonicalPattern, LevelSet};
use crate::reconstruct::{admm_tv_reconstruct, lpa_reconstruct, AdmmOptions};
use crate::risk::{
    build_neighbor_table, rank_patterns, Estimator, NeighborCountTable, RankReport, RiskInput,
};
use crate::seed::{derive, TAG_CAPTURE, TAG_PILOT};
use crate::sensor_sim::{simulate_capture, RadianceMap, RawCapture, SensorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reconstructor {
    Lpa,
    AdmmTv,
}

impl Reconstructor {
    pub const ALL: [Reconstructor; 2] = [Reconstructor::Lpa, Reconstructor::AdmmTv];

    pub fn name(self) -> &'static str {
        match self {
            Reconstructor::Lpa => "lpa",
            Reconstructor::AdmmTv => "admm-tv",
        }
    }
}

impl fmt::Display for Reconstructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reconstructor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Reconstructor::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown reconstructor '{s}'")))
    }
}

/// Quality metrics recorded per reconstruction, in score-table order.
pub const METRICS: [&str; 2] = ["mu-psnr", "mu-ssim"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub sensor: SensorConfig,
    pub levels: LevelSet,
    /// Side of the neighborhood used by SVE-Risk.
    pub neighborhood: usize,
    pub bins: usize,
    pub pilot_downsample: usize,
    /// Simulate shot and read noise (pilot and full captures).
    pub noise: bool,
    pub admm: AdmmOptions,
    /// Tone-mapping strength; `None` uses the ADC top reference level.
    pub mu: Option<f64>,
    pub estimators: Vec<Estimator>,
    pub reconstructors: Vec<Reconstructor>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sensor: SensorConfig::default(),
            levels: LevelSet::default_levels(),
            neighborhood: 3,
            bins: DEFAULT_BINS,
            pilot_downsample: DEFAULT_PILOT_DOWNSAMPLE,
            noise: true,
            admm: AdmmOptions::default(),
            mu: None,
            estimators: Estimator::ALL.to_vec(),
            reconstructors: Reconstructor::ALL.to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or_else(|| default_mu(&self.sensor))
    }

    pub fn table(&self) -> Result<NeighborCountTable> {
        build_neighbor_table(self.neighborhood)
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.table()?;
        if self.reconstructors.is_empty() {
            return Err(Error::InvalidArgument("at least one reconstructor is required".into()));
        }
        if self.pilot_downsample == 0 {
            return Err(Error::InvalidArgument("pilot downsample factor must be positive".into()));
        }
        Ok(())
    }
}

pub fn reconstruct(
    capture: &RawCapture,
    reconstructor: Reconstructor,
    admm: &AdmmOptions,
) -> Result<RadianceMap> {
    match reconstructor {
        Reconstructor::Lpa => lpa_reconstruct(capture),
        Reconstructor::AdmmTv => Ok(admm_tv_reconstruct(capture, admm)?.image),
    }
}

/// Pilot capture and histogram of a scene.
pub fn scene_histogram(
    scene: &RadianceMap,
    cfg: &ExperimentConfig,
    scene_seed: u64,
) -> Result<RadianceHistogram> {
    let pilot = capture_pilot(
        scene,
        &cfg.levels,
        &cfg.sensor,
        cfg.pilot_downsample,
        derive(scene_seed, TAG_PILOT),
        cfg.noise,
    )?;
    build_histogram(&pilot, cfg.bins)
}

/// Ranks `candidates` with one estimator: SVE variants read the pilot
/// histogram, SNR variants the ground truth.
pub fn rank_scene(
    estimator: Estimator,
    scene: &RadianceMap,
    histogram: &RadianceHistogram,
    candidates: &[CanonicalPattern],
    cfg: &ExperimentConfig,
    table: &NeighborCountTable,
) -> Result<RankReport> {
    let input =
        if estimator.uses_histogram() { RiskInput::Histogram(histogram) } else { RiskInput::Radiance(scene) };
    rank_patterns(estimator, input, candidates.iter().copied(), &cfg.sensor, table)
}

/// Captures `scene` through `pattern`, reconstructs it and scores it.
pub fn score_pattern(
    scene: &RadianceMap,
    pattern: &CanonicalPattern,
    cfg: &ExperimentConfig,
    scene_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let capture =
        simulate_capture(scene, pattern.pattern(), &cfg.sensor, derive(scene_seed, TAG_CAPTURE), cfg.noise)?;
    let mu = cfg.mu();
    cfg.reconstructors
        .iter()
        .map(|&r| {
            let image = reconstruct(&capture, r, &cfg.admm)?;
            Ok(vec![mu_psnr(scene, &image, mu)?, mu_ssim(scene, &image, mu)?])
        })
        .collect()
}

/// Everything measured for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEvaluation {
    pub seed: u64,
    pub patterns: Vec<CanonicalPattern>,
    pub histogram: RadianceHistogram,
    /// Scores `[pattern][reconstructor][metric]`; pattern ids index `patterns`.
    pub scores: ScoreTable,
    pub rankings: Vec<RankReport>,
}

impl SceneEvaluation {
    pub fn ranking(&self, estimator: Estimator) -> Option<&RankReport> {
        self.rankings.iter().find(|r| r.estimator == estimator)
    }

    /// Best score for reconstructor `j` and metric `k`.
    pub fn oracle_score(&self, j: usize, k: usize) -> Result<f64> {
        let best = oracle_pattern(&self.scores, j, k)?;
        Ok(self.scores.get(best, j, k))
    }

    /// Scores in the order the estimator ranks the patterns.
    pub fn ranked_scores(&self, estimator: Estimator, j: usize, k: usize) -> Result<Vec<f64>> {
        let report = self
            .ranking(estimator)
            .ok_or_else(|| Error::InvalidArgument(format!("estimator {estimator} was not evaluated")))?;
        Ok(report.rows.iter().map(|row| self.scores.get(row.id, j, k)).collect())
    }

    /// Top-K average difference of one estimator on this scene.
    pub fn delta(&self, estimator: Estimator, j: usize, k: usize, top: usize) -> Result<f64> {
        top_k_delta(&[self.oracle_score(j, k)?], &[self.ranked_scores(estimator, j, k)?], top)
    }
}

/// Exhaustively captures, reconstructs and scores every pattern class of
/// `cfg.levels`, and ranks them with every configured estimator.
pub fn evaluate_scene(
    scene: &RadianceMap,
    cfg: &ExperimentConfig,
    scene_seed: u64,
) -> Result<SceneEvaluation> {
    cfg.validate()?;
    let table = cfg.table()?;
    let patterns: Vec<CanonicalPattern> = enumerate_classes(&cfg.levels).collect();
    let histogram = scene_histogram(scene, cfg, scene_seed)?;
    let rankings = cfg
        .estimators
        .iter()
        .map(|&e| rank_scene(e, scene, &histogram, &patterns, cfg, &table))
        .collect::<Result<Vec<_>>>()?;
    let scores =
        patterns.par_iter().map(|p| score_pattern(scene, p, cfg, scene_seed)).collect::<Result<Vec<_>>>()?;
    let scores = ScoreTable::new(
        (0..patterns.len()).collect(),
        cfg.reconstructors.iter().map(|r| r.name().to_string()).collect(),
        METRICS.iter().map(|m| m.to_string()).collect(),
        scores,
    )?;
    Ok(SceneEvaluation { seed: scene_seed, patterns, histogram, scores, rankings })
}

/// Ranking quality of one estimator for one reconstructor and metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    pub reconstructor: Reconstructor,
    pub metric: String,
    pub delta_1: f64,
    pub delta_5: f64,
    pub q_1pct: f64,
    pub q_5pct: f64,
    /// Δ_1 of each scene.
    pub scene_delta_1: Vec<f64>,
}

/// Spearman correlation of two reconstructors' scores over all patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub first: Reconstructor,
    pub second: Reconstructor,
    pub metric: String,
    pub rho: Vec<f64>,
    pub p_value: Vec<f64>,
    pub median_rho: f64,
    /// Largest p-value among scenes.
    pub max_p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSummary {
    pub scenes: usize,
    pub estimators: Vec<EstimatorSummary>,
    pub correlations: Vec<PairCorrelation>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn summarize(evals: &[SceneEvaluation], cfg: &ExperimentConfig) -> Result<RankingSummary> {
    if evals.is_empty() {
        return Err(Error::InvalidArgument("no scenes to summarize".into()));
    }
    let mut estimators = Vec::new();
    let mut correlations = Vec::new();
    for (k, metric) in METRICS.iter().enumerate() {
        for (j, &recon) in cfg.reconstructors.iter().enumerate() {
            let oracle: Vec<f64> = evals.iter().map(|e| e.oracle_score(j, k)).collect::<Result<_>>()?;
            for &estimator in &cfg.estimators {
                let ranked: Vec<Vec<f64>> =
                    evals.iter().map(|e| e.ranked_scores(estimator, j, k)).collect::<Result<_>>()?;
                let top1: Vec<f64> = ranked.iter().map(|r| r[0]).collect();
                let scene_delta_1 = oracle.iter().zip(&top1).map(|(o, t)| o - t).collect();
                estimators.push(EstimatorSummary {
                    estimator,
                    reconstructor: recon,
                    metric: metric.to_string(),
                    delta_1: top_k_delta(&oracle, &ranked, 1)?,
                    delta_5: top_k_delta(&oracle, &ranked, 5.min(ranked[0].len()))?,
                    q_1pct: q_score(&oracle, &top1, 0.01)?,
                    q_5pct: q_score(&oracle, &top1, 0.05)?,
                    scene_delta_1,
                });
            }
        }
        for a in 0..cfg.reconstructors.len() {
            for b in a + 1..cfg.reconstructors.len() {
                let mut rho = Vec::new();
                let mut p_value = Vec::new();
                for e in evals {
                    let s = spearman_rho(&e.scores.column(a, k), &e.scores.column(b, k))?;
                    rho.push(s.rho);
                    p_value.push(s.p_value);
                }
                correlations.push(PairCorrelation {
                    first: cfg.reconstructors[a],
                    second: cfg.reconstructors[b],
                    metric: metric.to_string(),
                    median_rho: median(&rho),
                    max_p_value: p_value.iter().copied().fold(0.0, f64::max),
                    rho,
                    p_value,
                });
            }
        }
    }
    Ok(RankingSummary { scenes: evals.len(), estimators, correlations })
}

/// Mean and standard deviation of one estimator's ranking time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub estimator: Estimator,
    pub width: usize,
    pub height: usize,
    pub patterns: usize,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
}

/// Times scoring every pattern class of `cfg.levels` against each scene.
///
/// SVE timings cover building the histogram from the pilot readout plus the
/// histogram-form risks; the pilot capture itself stands in for sensor
/// hardware and is simulated once, outside the timed region. SNR timings
/// cover the risks on the full-resolution ground truth. Runs on the calling
/// thread only.
pub fn bench(
    scenes: &[RadianceMap],
    estimators: &[Estimator],
    cfg: &ExperimentConfig,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("at least one repetition is required".into()));
    }
    cfg.validate()?;
    let table = cfg.table()?;
    let patterns: Vec<CanonicalPattern> = enumerate_classes(&cfg.levels).collect();
    let mut rows = Vec::new();
    for scene in scenes {
        let pilot = capture_pilot(
            scene,
            &cfg.levels,
            &cfg.sensor,
            cfg.pilot_downsample,
            derive(seed, TAG_PILOT),
            cfg.noise,
        )?;
        for &estimator in estimators {
            let mut times = Vec::with_capacity(repetitions);
            for _ in 0..repetitions {
                let start = Instant::now();
                let hist;
                let input = if estimator.uses_histogram() {
                    hist = build_histogram(&pilot, cfg.bins)?;
                    RiskInput::Histogram(&hist)
                } else {
                    RiskInput::Radiance(scene)
                };
                let mut count = 0;
                for p in &patterns {
                    let risk = crate::risk::evaluate_risk(estimator, input, p, &cfg.sensor, &table)?;
                    count += usize::from(risk.total.is_finite());
                }
                std::hint::black_box(count);
                times.push(start.elapsed().as_secs_f64());
            }
            let mean = times.iter().sum::<f64>() / times.len() as f64;
            let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / times.len() as f64;
            rows.push(BenchRow {
                estimator,
                width: scene.width(),
                height: scene.height(),
                patterns: patterns.len(),
                repetitions,
                mean_seconds: mean,
                std_seconds: var.sqrt(),
            });
        }
    }
    Ok(rows)
}

/// Result of the capture pipeline for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub histogram: RadianceHistogram,
    pub report: RankReport,
    pub capture: RawCapture,
    pub reconstruction: RadianceMap,
    pub mu_psnr: f64,
    pub mu_ssim: f64,
}

/// Pilot, histogram, ranking of all classes, full capture with the top
/// pattern, reconstruction and metrics against the ground truth.
pub fn run_pipeline(
    scene: &RadianceMap,
    cfg: &ExperimentConfig,
    estimator: Estimator,
    reconstructor: Reconstructor,
    seed: u64,
) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let table = cfg.table()?;
    let patterns: Vec<CanonicalPattern> = enumerate_classes(&cfg.levels).collect();
    let histogram = scene_histogram(scene, cfg, seed)?;
    let report = rank_scene(estimator, scene, &histogram, &patterns, cfg, &table)?;
    let capture = simulate_capture(
        scene,
        report.top().pattern.pattern(),
        &cfg.sensor,
        derive(seed, TAG_CAPTURE),
        cfg.noise,
    )?;
    let reconstruction = reconstruct(&capture, reconstructor, &cfg.admm)?;
    let mu = cfg.mu();
    Ok(PipelineOutcome {
        mu_psnr: mu_psnr(scene, &reconstruction, mu)?,
        mu_ssim: mu_ssim(scene, &reconstruction, mu)?,
        histogram,
        report,
        capture,
        reconstruction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor_sim::{synth_scene, SceneKind, SceneParams};

    fn small_cfg() -> ExperimentConfig {
        let levels = LevelSet::cross(&[0.0075, 0.03], &[1.0, 80.0]).unwrap();
        ExperimentConfig { levels, pilot_downsample: 2, bins: 64, ..Default::default() }
    }

    fn scene() -> RadianceMap {
        let p = SceneParams { seed: 3, ..Default::default() };
        synth_scene(SceneKind::HdrComposite, 32, 32, &p).unwrap()
    }

    #[test]
    fn evaluate_and_summarize_small_sweep() {
        let cfg = small_cfg();
        let eval = evaluate_scene(&scene(), &cfg, 5).unwrap();
        // 4 levels, 4 slots: C(7, 4) = 35 classes
        assert_eq!(eval.patterns.len(), 35);
        assert_eq!(eval.scores.len(), 35);
        assert_eq!(eval.rankings.len(), 4);
        let summary = summarize(std::slice::from_ref(&eval), &cfg).unwrap();
        assert_eq!(summary.estimators.len(), 2 * 2 * 4);
        assert_eq!(summary.correlations.len(), 2);
        assert!(summary.estimators.iter().all(|s| s.delta_1 >= 0.0));
        assert_eq!(eval, evaluate_scene(&scene(), &cfg, 5).unwrap());
    }

    #[test]
    fn pipeline_uses_top_ranked_pattern() {
        let cfg = small_cfg();
        let out = run_pipeline(&scene(), &cfg, Estimator::Sve, Reconstructor::Lpa, 1).unwrap();
        assert_eq!(out.report.rows.len(), 35);
        assert_eq!(out.capture.pattern, *out.report.top().pattern.pattern());
        assert!(out.mu_psnr > 10.0);
    }

    #[test]
    fn bench_emits_one_row_per_estimator_and_scene() {
        let cfg = small_cfg();
        let scenes = [scene(), synth_scene(SceneKind::Flat, 16, 16, &SceneParams::default()).unwrap()];
        let rows = bench(&scenes, &[Estimator::Sve, Estimator::Snr], &cfg, 2, 0).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.patterns == 35 && r.mean_seconds >= 0.0));
    }
}
