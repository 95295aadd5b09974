//! Deterministic synthetic scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{RadianceMap, SensorConfig};
use crate::error::{Error, Result};
use crate::patterns::LevelSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneKind {
    Flat,
    TwoLevel,
    Ramp,
    HdrComposite,
}

impl std::str::FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(SceneKind::Flat),
            "two-level" => Ok(SceneKind::TwoLevel),
            "ramp" => Ok(SceneKind::Ramp),
            "hdr-composite" => Ok(SceneKind::HdrComposite),
            other => Err(Error::InvalidArgument(format!("unknown scene kind '{other}'"))),
        }
    }
}

/// Parameters of [`synth_scene`]; each kind reads only the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    /// `flat`: the constant radiance.
    pub level: f64,
    /// `two-level`: left and right radiance.
    pub levels: (f64, f64),
    /// `two-level`: fraction of columns taking the left level.
    pub split: f64,
    /// `ramp`: radiance at the first and last column.
    pub ramp: (f64, f64),
    /// `hdr-composite`: generator seed.
    pub seed: u64,
    /// `hdr-composite`: decades of radiance spanned before normalization.
    pub decades: f64,
    /// `hdr-composite`: radiance the 99th percentile is scaled to.
    pub peak: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            level: 1.0,
            levels: (1.0, 10.0),
            split: 0.5,
            ramp: (1.0, 10.0),
            seed: 0,
            decades: 4.0,
            peak: scene_peak(&SensorConfig::default(), &LevelSet::default_levels()),
        }
    }
}

/// Target for the 99th-percentile radiance of composite scenes: just inside
/// the ADC range at the shortest exposure and unit gain.
pub fn scene_peak(config: &SensorConfig, levels: &LevelSet) -> f64 {
    0.95 * config.v_max / levels.min_exposure()
}

pub fn synth_scene(
    kind: SceneKind,
    width: usize,
    height: usize,
    params: &SceneParams,
) -> Result<RadianceMap> {
    if width == 0 || height == 0 {
        return Err(Error::Dimensions(format!("{width}x{height} scene is empty")));
    }
    match kind {
        SceneKind::Flat => RadianceMap::filled(width, height, params.level),
        SceneKind::TwoLevel => {
            if !(0.0..=1.0).contains(&params.split) {
                return Err(Error::InvalidArgument(format!("split {} must lie in [0, 1]", params.split)));
            }
            let boundary = (params.split * width as f64).round() as usize;
            let (a, b) = params.levels;
            RadianceMap::from_fn(width, height, |_, c| if c < boundary { a } else { b })
        }
        SceneKind::Ramp => {
            let (lo, hi) = params.ramp;
            let span = (width.max(2) - 1) as f64;
            RadianceMap::from_fn(width, height, |_, c| lo + (hi - lo) * c as f64 / span)
        }
        SceneKind::HdrComposite => hdr_composite(width, height, params),
    }
}

const TEXTURE_WAVES: usize = 32;
/// Range of texture periods, pixels.
const TEXTURE_PERIODS: (f64, f64) = (4.0, 64.0);
/// Standard deviation of the texture in log10 radiance.
const TEXTURE_STD_DECADES: f64 = 0.15;

/// Log-radiance built from smooth blobs, a few flat patches (windows, lamps,
/// shadows) and 1/f-like texture, exponentiated and scaled so the
/// 99th percentile lands on `params.peak`.
fn hdr_composite(width: usize, height: usize, params: &SceneParams) -> Result<RadianceMap> {
    if !(params.decades >= 3.0 && params.decades.is_finite()) {
        return Err(Error::InvalidArgument("hdr-composite needs at least 3 decades".into()));
    }
    if !(params.peak > 0.0 && params.peak.is_finite()) {
        return Err(Error::InvalidArgument("hdr-composite peak must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (w, h) = (width as f64, height as f64);
    let size = w.min(h);

    struct Blob {
        x: f64,
        y: f64,
        sigma: f64,
        amp: f64,
    }
    let blobs: Vec<Blob> = (0..rng.random_range(4..9))
        .map(|_| Blob {
            x: rng.random_range(0.0..w),
            y: rng.random_range(0.0..h),
            sigma: rng.random_range(0.12..0.4) * size,
            amp: rng.random_range(-1.0..1.0),
        })
        .collect();
    let grad = (rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));

    struct Patch {
        r0: f64,
        r1: f64,
        c0: f64,
        c1: f64,
        level: f64,
    }
    let patches: Vec<Patch> = (0..rng.random_range(2..5))
        .map(|_| {
            let ph = rng.random_range(0.1..0.35) * h;
            let pw = rng.random_range(0.1..0.35) * w;
            let r0 = rng.random_range(0.0..h - ph);
            let c0 = rng.random_range(0.0..w - pw);
            Patch { r0, r1: r0 + ph, c0, c1: c0 + pw, level: rng.random_range(0.0..1.0) }
        })
        .collect();

    // Texture with a roughly 1/f amplitude spectrum: log-uniform periods,
    // amplitude proportional to the period.
    struct Wave {
        kx: f64,
        ky: f64,
        phase: f64,
        amp: f64,
    }
    let mut waves: Vec<Wave> = (0..TEXTURE_WAVES)
        .map(|_| {
            let period = (rng.random_range(TEXTURE_PERIODS.0.ln()..TEXTURE_PERIODS.1.ln())).exp();
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            Wave {
                kx: angle.cos() * std::f64::consts::TAU / period,
                ky: angle.sin() * std::f64::consts::TAU / period,
                phase: rng.random_range(0.0..std::f64::consts::TAU),
                amp: period,
            }
        })
        .collect();
    // A sum of sinusoids with amplitudes a_k has standard deviation
    // sqrt(sum a_k^2 / 2).
    let norm = (waves.iter().map(|w| w.amp * w.amp).sum::<f64>() / 2.0).sqrt();
    for w in &mut waves {
        w.amp *= TEXTURE_STD_DECADES / norm;
    }

    let mut base: Vec<f64> = (0..height)
        .flat_map(|r| (0..width).map(move |c| (r as f64 + 0.5, c as f64 + 0.5)))
        .map(|(y, x)| {
            let smooth: f64 = blobs
                .iter()
                .map(|b| {
                    let d2 = (x - b.x).powi(2) + (y - b.y).powi(2);
                    b.amp * (-d2 / (2.0 * b.sigma * b.sigma)).exp()
                })
                .sum();
            smooth + grad.0 * x / w + grad.1 * y / h
        })
        .collect();

    // Smooth part spans 75% of the decades; patches and texture fill the rest.
    let (lo, hi) = base.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = (hi - lo).max(1e-12);
    for (i, v) in base.iter_mut().enumerate() {
        let (r, c) = ((i / width) as f64 + 0.5, (i % width) as f64 + 0.5);
        let mut log10 = (*v - lo) / span * 0.75 * params.decades;
        for p in &patches {
            if r >= p.r0 && r < p.r1 && c >= p.c0 && c < p.c1 {
                log10 = p.level * params.decades;
            }
        }
        let texture: f64 = waves.iter().map(|t| t.amp * (t.kx * c + t.ky * r + t.phase).sin()).sum();
        *v = 10f64.powf(log10 + texture);
    }

    let p99 = percentile(&base, 0.99);
    let scale = params.peak / p99;
    for v in &mut base {
        *v *= scale;
    }
    RadianceMap::new(width, height, base)
}

/// Nearest-rank percentile of unsorted values, `q` in [0, 1].
pub(crate) fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Box-averages `factor × factor` blocks; trailing rows/columns that do not
/// fill a block are dropped. The result is trimmed to even dimensions so it
/// can be captured through a 2×2 pattern.
pub fn downsample(map: &RadianceMap, factor: usize) -> Result<RadianceMap> {
    if factor == 0 {
        return Err(Error::InvalidArgument("downsample factor must be positive".into()));
    }
    let w = (map.width() / factor) & !1;
    let h = (map.height() / factor) & !1;
    if w == 0 || h == 0 {
        return Err(Error::Dimensions(format!(
            "{}x{} is too small to downsample by {factor}",
            map.width(),
            map.height()
        )));
    }
    let norm = (factor * factor) as f64;
    RadianceMap::from_fn(w, h, |r, c| {
        let mut acc = 0.0;
        for dr in 0..factor {
            for dc in 0..factor {
                acc += map.get(r * factor + dr, c * factor + dc);
            }
        }
        acc / norm
    })
}
