//! Radiance histograms from pilot captures.
//!
//! Bins are log-spaced and laid out so the smallest and largest observed
//! radiance sit exactly on a bin center. Pixels that saturate every element
//! of their 2×2 pilot cell cannot be placed; they are kept as a separate
//! tail mass located at the lowest-product pilot cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{LevelSet, Pattern};
use crate::sensor_sim::{
    downsample, normalize_readout, simulate_capture, RadianceMap, RawCapture, SensorConfig,
};

pub const DEFAULT_BINS: usize = 512;
pub const MIN_BINS: usize = 16;
pub const DEFAULT_PILOT_DOWNSAMPLE: usize = 4;
/// Floor applied to ground-truth radiance so `1 / theta^2` stays finite.
pub const MIN_RADIANCE: f64 = 1e-3;

/// Half-width, in natural-log units, of the bin used for a constant scene.
const DEGENERATE_HALF_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramStatus {
    Ok,
    /// Every pilot pixel saturated; only the tail mass is populated.
    FullySaturated,
}

/// Fraction of pixels per log-spaced radiance bin, plus a saturated tail.
///
/// `sum(weights) + saturated_fraction == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HistogramDoc", into = "HistogramDoc")]
pub struct RadianceHistogram {
    edges: Vec<f64>,
    weights: Vec<f64>,
    saturated_fraction: f64,
    tail_radiance: f64,
    total_pixels: u64,
    status: HistogramStatus,
}

#[derive(Serialize, Deserialize)]
struct HistogramDoc {
    edges: Vec<f64>,
    weights: Vec<f64>,
    saturated_fraction: f64,
    tail_radiance: f64,
    total_pixels: u64,
    status: HistogramStatus,
}

impl TryFrom<HistogramDoc> for RadianceHistogram {
    type Error = Error;

    fn try_from(d: HistogramDoc) -> Result<Self> {
        let h = RadianceHistogram {
            edges: d.edges,
            weights: d.weights,
            saturated_fraction: d.saturated_fraction,
            tail_radiance: d.tail_radiance,
            total_pixels: d.total_pixels,
            status: d.status,
        };
        h.validate()?;
        Ok(h)
    }
}

impl From<RadianceHistogram> for HistogramDoc {
    fn from(h: RadianceHistogram) -> Self {
        HistogramDoc {
            edges: h.edges,
            weights: h.weights,
            saturated_fraction: h.saturated_fraction,
            tail_radiance: h.tail_radiance,
            total_pixels: h.total_pixels,
            status: h.status,
        }
    }
}

impl RadianceHistogram {
    /// Bins `samples` (radiance values, already floored to a positive value)
    /// and records `saturated` additional pixels in the tail.
    fn from_samples(samples: &[f64], saturated: usize, tail_radiance: f64, bins: usize) -> Result<Self> {
        if bins < MIN_BINS {
            return Err(Error::InvalidArgument(format!("at least {MIN_BINS} bins are required, got {bins}")));
        }
        let total = samples.len() + saturated;
        if total == 0 {
            return Err(Error::InvalidArgument("histogram of zero pixels".into()));
        }
        let total_f = total as f64;
        if samples.is_empty() {
            let edges = vec![
                tail_radiance * (-DEGENERATE_HALF_WIDTH).exp(),
                tail_radiance * DEGENERATE_HALF_WIDTH.exp(),
            ];
            return Ok(RadianceHistogram {
                edges,
                weights: vec![0.0],
                saturated_fraction: 1.0,
                tail_radiance,
                total_pixels: total as u64,
                status: HistogramStatus::FullySaturated,
            });
        }

        let (lo, hi) =
            samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let (log_lo, log_hi) = (lo.ln(), hi.ln());
        let mut counts;
        let edges: Vec<f64>;
        if log_hi - log_lo < 2.0 * DEGENERATE_HALF_WIDTH {
            let center = 0.5 * (log_lo + log_hi);
            edges = vec![(center - DEGENERATE_HALF_WIDTH).exp(), (center + DEGENERATE_HALF_WIDTH).exp()];
            counts = vec![samples.len() as u64];
        } else {
            let step = (log_hi - log_lo) / (bins - 1) as f64;
            edges = (0..=bins).map(|k| (log_lo + (k as f64 - 0.5) * step).exp()).collect();
            counts = vec![0u64; bins];
            for &v in samples {
                let k = ((v.ln() - log_lo) / step + 0.5).floor();
                counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
            }
        }
        let weights = counts.iter().map(|&c| c as f64 / total_f).collect();
        Ok(RadianceHistogram {
            edges,
            weights,
            saturated_fraction: saturated as f64 / total_f,
            tail_radiance,
            total_pixels: total as u64,
            status: HistogramStatus::Ok,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Format(format!("invalid histogram: {m}")));
        if self.weights.is_empty() || self.edges.len() != self.weights.len() + 1 {
            return bad("needs B weights and B+1 edges");
        }
        if !self.edges.iter().all(|e| e.is_finite() && *e > 0.0)
            || !self.edges.windows(2).all(|w| w[0] < w[1])
        {
            return bad("edges must be positive and strictly increasing");
        }
        if !self.weights.iter().all(|w| w.is_finite() && *w >= 0.0) {
            return bad("weights must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.saturated_fraction)
            || !(self.tail_radiance > 0.0 && self.tail_radiance.is_finite())
        {
            return bad("saturated fraction or tail radiance out of range");
        }
        if (self.total_mass() - 1.0).abs() > 1e-9 {
            return bad("weights and saturated fraction must sum to 1");
        }
        Ok(())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    /// Geometric center of bin `k`.
    pub fn center(&self, k: usize) -> f64 {
        (0.5 * (self.edges[k].ln() + self.edges[k + 1].ln())).exp()
    }

    pub fn saturated_fraction(&self) -> f64 {
        self.saturated_fraction
    }

    pub fn tail_radiance(&self) -> f64 {
        self.tail_radiance
    }

    pub fn total_pixels(&self) -> u64 {
        self.total_pixels
    }

    pub fn status(&self) -> HistogramStatus {
        self.status
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.saturated_fraction
    }

    /// Occupied `(radiance, weight)` points: bin centers, then the tail if any.
    pub fn masses(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let tail = (self.saturated_fraction > 0.0).then_some((self.tail_radiance, self.saturated_fraction));
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(k, &w)| (self.center(k), w))
            .chain(tail)
    }

    /// Smallest point radiance whose cumulative mass reaches `q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut points: Vec<(f64, f64)> = self.masses().collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        for &(theta, w) in &points {
            acc += w;
            if acc >= q - 1e-12 {
                return theta;
            }
        }
        points.last().map_or(self.tail_radiance, |p| p.0)
    }
}

/// Total-variation distance between two histograms after re-binning both
/// onto `bins` log-spaced bins over their joint support.
pub fn tv_distance(a: &RadianceHistogram, b: &RadianceHistogram, bins: usize) -> f64 {
    let points = |h: &RadianceHistogram| h.masses().collect::<Vec<_>>();
    let (pa, pb) = (points(a), points(b));
    let (lo, hi) =
        pa.iter().chain(&pb).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.0), h.max(p.0)));
    let bins = bins.max(1);
    let span = (hi.ln() - lo.ln()).max(1e-12);
    let rebin = |pts: &[(f64, f64)]| {
        let mut out = vec![0.0; bins];
        for &(theta, w) in pts {
            let k = ((theta.ln() - lo.ln()) / span * bins as f64).floor() as usize;
            out[k.min(bins - 1)] += w;
        }
        out
    };
    let (ra, rb) = (rebin(&pa), rebin(&pb));
    0.5 * ra.iter().zip(&rb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Fixed pilot pattern: the lowest, highest and two middle levels by product.
///
/// Level ranks are `0`, `round(3(L-1)/8)`, `round((L-1)/2)` and `L-1`, which
/// picks the 1st, 4th, 5th and 9th of nine levels. Small sets repeat levels.
pub fn pilot_pattern(levels: &LevelSet) -> Pattern {
    let top = (levels.len() - 1) as f64;
    let ranks = [0.0, (top * 3.0 / 8.0).round(), (top / 2.0).round(), top];
    let picked = ranks.map(|r| levels.levels()[r as usize]);
    Pattern { levels: picked }.canonicalize().into()
}

/// Downsamples `scene` by `factor` and captures it through the pilot pattern.
pub fn capture_pilot(
    scene: &RadianceMap,
    levels: &LevelSet,
    config: &SensorConfig,
    factor: usize,
    seed: u64,
    noise: bool,
) -> Result<RawCapture> {
    let small = if factor == 1 {
        let w = scene.width() & !1;
        let h = scene.height() & !1;
        if (w, h) == (scene.width(), scene.height()) {
            scene.clone()
        } else {
            RadianceMap::from_fn(w, h, |r, c| scene.get(r, c))?
        }
    } else {
        downsample(scene, factor)?
    };
    simulate_capture(&small, &pilot_pattern(levels), config, seed, noise)
}

/// Per-pixel radiance estimates from a pilot capture.
///
/// Every pixel of a 2×2 cell takes the estimate of the cell's
/// highest-product unsaturated element; `None` marks cells where all four
/// pixels saturated.
pub fn pilot_estimates(pilot: &RawCapture) -> Vec<Option<f64>> {
    let config = &pilot.config;
    let best = pilot.pattern.levels.iter().max().copied().expect("four levels");
    let floor = 0.5 * config.adc_lsb_base / (best.alpha * best.tau * config.qe);
    let mut out = vec![None; pilot.width * pilot.height];
    for r0 in (0..pilot.height).step_by(2) {
        for c0 in (0..pilot.width).step_by(2) {
            let cell = [(r0, c0), (r0, c0 + 1), (r0 + 1, c0), (r0 + 1, c0 + 1)];
            let estimate = cell
                .iter()
                .filter(|&&(r, c)| !pilot.is_saturated(r, c))
                .max_by(|&&(ra, ca), &&(rb, cb)| {
                    pilot.pattern.level_at(ra, ca).cmp(&pilot.pattern.level_at(rb, cb))
                })
                .map(|&(r, c)| {
                    let n = normalize_readout(pilot.code(r, c), pilot.pattern.level_at(r, c), config);
                    n.theta.max(floor)
                });
            for (r, c) in cell {
                out[r * pilot.width + c] = estimate;
            }
        }
    }
    out
}

/// Histogram of a pilot capture.
pub fn build_histogram(pilot: &RawCapture, bins: usize) -> Result<RadianceHistogram> {
    if !pilot.width.is_multiple_of(2)
        || !pilot.height.is_multiple_of(2)
        || pilot.codes.len() != pilot.width * pilot.height
    {
        return Err(Error::Dimensions("pilot capture must tile with 2x2 cells".into()));
    }
    let lowest = pilot.pattern.levels.iter().min().copied().expect("four levels");
    let tail = pilot.config.cutoff(lowest);
    let estimates = pilot_estimates(pilot);
    let samples: Vec<f64> = estimates.iter().flatten().copied().collect();
    RadianceHistogram::from_samples(&samples, estimates.len() - samples.len(), tail, bins)
}

/// Exact histogram of ground-truth radiance.
pub fn histogram_from_radiance(map: &RadianceMap, bins: usize) -> Result<RadianceHistogram> {
    let samples: Vec<f64> = map.values().iter().map(|v| v.max(MIN_RADIANCE)).collect();
    let hi = samples.iter().copied().fold(MIN_RADIANCE, f64::max);
    RadianceHistogram::from_samples(&samples, 0, hi, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor_sim::{synth_scene, SceneKind, SceneParams};

    fn config() -> SensorConfig {
        SensorConfig::default()
    }

    #[test]
    fn pilot_pattern_picks_spread_ranks() {
        let set = LevelSet::default_levels();
        let p = pilot_pattern(&set).canonicalize();
        let l = set.levels();
        assert_eq!(p.elements(), [l[0], l[3], l[4], l[8]]);

        let single = LevelSet::cross(&[0.01], &[1.0]).unwrap();
        let p = pilot_pattern(&single);
        assert!(p.levels.iter().all(|&x| x == single.levels()[0]));

        let two = LevelSet::cross(&[0.01, 0.02], &[1.0]).unwrap();
        let p = pilot_pattern(&two).canonicalize();
        assert_eq!(p.element(0), two.levels()[0]);
        assert_eq!(p.element(3), two.levels()[1]);
    }

    #[test]
    fn flat_scene_single_bin() {
        let map = RadianceMap::filled(8, 8, 1234.5).unwrap();
        let h = histogram_from_radiance(&map, DEFAULT_BINS).unwrap();
        assert_eq!(h.bins(), 1);
        assert_eq!(h.weights(), &[1.0]);
        assert!((h.center(0) - 1234.5).abs() < 1e-9 * 1234.5);
        assert_eq!(h.status(), HistogramStatus::Ok);

        let zero = RadianceMap::filled(4, 4, 0.0).unwrap();
        let h = histogram_from_radiance(&zero, DEFAULT_BINS).unwrap();
        assert_eq!(h.bins(), 1);
        assert!((h.center(0) - MIN_RADIANCE).abs() < 1e-15);
    }

    #[test]
    fn two_levels_land_on_bin_centers() {
        let p = SceneParams { levels: (50.0, 5000.0), split: 0.5, ..Default::default() };
        let map = synth_scene(SceneKind::TwoLevel, 16, 8, &p).unwrap();
        let h = histogram_from_radiance(&map, 64).unwrap();
        let occupied: Vec<_> = h.masses().collect();
        assert_eq!(occupied.len(), 2);
        assert!((occupied[0].0 - 50.0).abs() < 1e-9 * 50.0);
        assert!((occupied[1].0 - 5000.0).abs() < 1e-9 * 5000.0);
        assert_eq!(occupied[0].1, 0.5);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
        assert!(h.edges().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn noise_free_pilot_matches_ground_truth_within_a_bin() {
        let c = config();
        let set = LevelSet::default_levels();
        let theta = 2.0e4;
        let map = RadianceMap::filled(16, 16, theta).unwrap();
        let pilot = capture_pilot(&map, &set, &c, 1, 0, false).unwrap();
        let h = build_histogram(&pilot, 64).unwrap();
        assert_eq!(h.saturated_fraction(), 0.0);
        let got: Vec<_> = h.masses().collect();
        assert_eq!(got.len(), 1);
        // one quantization step of the best unsaturated element
        assert!((got[0].0 - theta).abs() / theta < 0.01, "{}", got[0].0);
    }

    #[test]
    fn saturated_cells_go_to_the_tail() {
        let c = config();
        let set = LevelSet::default_levels();
        let pilot_levels = pilot_pattern(&set);
        let lowest = pilot_levels.levels.iter().min().copied().unwrap();
        let cutoff = c.cutoff(lowest);
        // 10% of the columns (2 of 20 cells per row) above every cutoff
        let map = RadianceMap::from_fn(40, 8, |_, col| if col < 4 { 10.0 * cutoff } else { 100.0 }).unwrap();
        let pilot = capture_pilot(&map, &set, &c, 1, 9, true).unwrap();
        let h = build_histogram(&pilot, 64).unwrap();
        assert!((h.saturated_fraction() - 0.1).abs() < 1e-12);
        assert_eq!(h.tail_radiance(), cutoff);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fully_saturated_pilot_is_flagged() {
        let c = config();
        let set = LevelSet::default_levels();
        let map = RadianceMap::filled(8, 8, 1e12).unwrap();
        let pilot = capture_pilot(&map, &set, &c, 1, 0, false).unwrap();
        let h = build_histogram(&pilot, 32).unwrap();
        assert_eq!(h.status(), HistogramStatus::FullySaturated);
        assert_eq!(h.saturated_fraction(), 1.0);
        assert_eq!(h.masses().count(), 1);
    }

    #[test]
    fn rejects_too_few_bins() {
        let map = RadianceMap::filled(4, 4, 1.0).unwrap();
        assert!(histogram_from_radiance(&map, 8).is_err());
    }

    #[test]
    fn json_round_trip_validates() {
        let map = RadianceMap::from_fn(8, 8, |r, c| 1.0 + (r * 8 + c) as f64).unwrap();
        let h = histogram_from_radiance(&map, 16).unwrap();
        let json = serde_json::to_string(&h).unwrap();
        let back: RadianceHistogram = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        let broken = json.replace("\"saturated_fraction\":0.0", "\"saturated_fraction\":0.5");
        assert!(serde_json::from_str::<RadianceHistogram>(&broken).is_err());
    }

    #[test]
    fn quantiles_and_tv_distance() {
        let map = RadianceMap::from_fn(10, 10, |r, _| if r < 5 { 10.0 } else { 1000.0 }).unwrap();
        let h = histogram_from_radiance(&map, 32).unwrap();
        assert!((h.quantile(0.25) - 10.0).abs() < 1e-9);
        assert!((h.quantile(0.75) - 1000.0).abs() < 1e-6);
        assert_eq!(tv_distance(&h, &h, 16), 0.0);

        let other = histogram_from_radiance(&RadianceMap::filled(10, 10, 10.0).unwrap(), 32).unwrap();
        assert!((tv_distance(&h, &other, 16) - 0.5).abs() < 1e-12);
    }
}
