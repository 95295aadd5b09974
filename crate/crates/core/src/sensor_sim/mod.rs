//! Forward image-formation model of a 2×2 multiplexed sensor.
//!
//! A pixel assigned level `(tau, alpha)` reads out
//!
//! ```text
//! code = ADC( Clip( (Poisson(tau * theta * qe) + tau * dark) * alpha ) + Normal(0, read^2) )
//! ```
//!
//! Clipping happens on the collected charge (at `full_well`) before gain. The
//! ADC has a fixed post-gain range: code `c` covers post-gain values
//! `[adc_lower + c * lsb, adc_lower + (c + 1) * lsb)`. Referred back to the
//! input, both the LSB and the read noise therefore shrink by `alpha`.

mod pfm;
mod scene;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{Level, Pattern, GLOBAL_EXPOSURE_S};

pub use pfm::{read_pfm, read_pfm_from, write_pfm, write_pfm_to};
pub use scene::{downsample, scene_peak, synth_scene, SceneKind, SceneParams};

/// Physical sensor parameters, expressed in electrons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Quantum efficiency in (0, 1].
    pub qe: f64,
    /// Dark charge per unit exposure time, electrons.
    pub dark_current: f64,
    /// Read-noise standard deviation at unit gain (post-gain, fixed), electrons.
    pub read_noise_base: f64,
    /// Clipping level of the collected charge, electrons.
    pub full_well: f64,
    /// ADC code width.
    pub adc_bits: u32,
    /// Post-gain value mapped to code 0.
    pub adc_lower: f64,
    /// Post-gain width of one code.
    pub adc_lsb_base: f64,
    /// Saturation reference: radiance `theta` saturates level `(tau, alpha)`
    /// when `alpha * tau * theta > v_max`.
    pub v_max: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        let qe = 0.8;
        let adc_bits = 10;
        let adc_lower = 1.0;
        let adc_lsb_base = 8.0;
        let adc_upper = adc_lower + f64::from((1u32 << adc_bits) - 1) * adc_lsb_base;
        SensorConfig {
            qe,
            // 0.2 e- over the shortest (0.25x) exposure.
            dark_current: 0.2 / (0.25 * GLOBAL_EXPOSURE_S),
            read_noise_base: 20.0,
            full_well: 8200.0,
            adc_bits,
            adc_lower,
            adc_lsb_base,
            // Radiance is in photons, the ADC range in electrons.
            v_max: adc_upper / qe,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [
            self.qe,
            self.dark_current,
            self.read_noise_base,
            self.full_well,
            self.adc_lower,
            self.adc_lsb_base,
            self.v_max,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite".into());
        }
        if !(self.qe > 0.0 && self.qe <= 1.0) {
            return bad(format!("qe {} must lie in (0, 1]", self.qe));
        }
        if self.dark_current < 0.0 || self.read_noise_base < 0.0 || self.adc_lower < 0.0 {
            return bad("dark current, read noise and ADC lower bound must be non-negative".into());
        }
        if self.full_well <= 0.0 || self.adc_lsb_base <= 0.0 || self.v_max <= 0.0 {
            return bad("full well, ADC LSB and v_max must be positive".into());
        }
        if self.adc_bits == 0 || self.adc_bits > 16 {
            return bad(format!("adc_bits {} must be in 1..=16", self.adc_bits));
        }
        let tolerance = 1e-9 * self.full_well;
        if self.adc_upper() > self.full_well + tolerance {
            return bad(format!(
                "ADC range top {} exceeds the full well {}",
                self.adc_upper(),
                self.full_well
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn max_code(&self) -> u16 {
        ((1u32 << self.adc_bits) - 1) as u16
    }

    /// Post-gain value at the bottom of the top code.
    pub fn adc_upper(&self) -> f64 {
        self.adc_lower + f64::from(self.max_code()) * self.adc_lsb_base
    }

    /// Radiance above which `level` saturates.
    #[inline]
    pub fn cutoff(&self, level: Level) -> f64 {
        self.v_max / level.product()
    }

    /// Maps a post-gain value to an ADC code.
    #[inline]
    pub fn quantize(&self, value: f64) -> u16 {
        let code = ((value - self.adc_lower) / self.adc_lsb_base).floor();
        code.clamp(0.0, f64::from(self.max_code())) as u16
    }
}

/// Scene radiance in photons per unit exposure time, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl RadianceMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions(format!("{width}x{height} map is empty")));
        }
        if values.len() != width * height {
            return Err(Error::Dimensions(format!("{} values for a {width}x{height} map", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidRadiance(format!("value {v} is not a finite non-negative radiance")));
        }
        Ok(RadianceMap { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a map from `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values =
            (0..height).flat_map(|r| (0..width).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect();
        Self::new(width, height, values)
    }

    /// Clamps negatives (and NaN) to zero.
    pub fn from_clamped(width: usize, height: usize, mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            if !(*v >= 0.0) {
                *v = 0.0;
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Raw ADC codes of one multiplexed capture.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCapture {
    pub width: usize,
    pub height: usize,
    pub codes: Vec<u16>,
    pub pattern: Pattern,
    pub config: SensorConfig,
    pub seed: u64,
}

impl RawCapture {
    #[inline]
    pub fn code(&self, row: usize, col: usize) -> u16 {
        self.codes[row * self.width + col]
    }

    pub fn is_saturated(&self, row: usize, col: usize) -> bool {
        self.code(row, col) == self.config.max_code()
    }
}

/// Noise-free post-gain signal, `min(full_well, tau*theta*qe + tau*dark) * alpha`.
pub fn expected_readout(theta: f64, level: Level, config: &SensorConfig) -> f64 {
    let charge = level.tau * theta * config.qe + level.tau * config.dark_current;
    charge.min(config.full_well) * level.alpha
}

/// Input-referred radiance estimate of one ADC code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub theta: f64,
    pub saturated: bool,
}

/// Refers an ADC code back to radiance: undoes the ADC offset, the gain and
/// the dark charge, then divides by `tau * qe`. Saturation is only visible
/// as the top code.
pub fn normalize_readout(code: u16, level: Level, config: &SensorConfig) -> Normalized {
    let post_gain = f64::from(code) * config.adc_lsb_base + config.adc_lower;
    let charge = (post_gain / level.alpha - level.tau * config.dark_current).max(0.0);
    Normalized { theta: charge / (level.tau * config.qe), saturated: code == config.max_code() }
}

/// Simulates one capture of `radiance` through `pattern`.
///
/// Each pixel draws its noise from its own ChaCha8 stream, keyed by its 2×2
/// cell and the rank of its level within the pattern (slot order breaks
/// ties). The result does not depend on evaluation order, and slot
/// permutations of a pattern captured with the same seed reuse the same
/// draws for the same level in every cell. With `noise` off, Poisson and
/// read noise are replaced by their means.
pub fn simulate_capture(
    radiance: &RadianceMap,
    pattern: &Pattern,
    config: &SensorConfig,
    seed: u64,
    noise: bool,
) -> Result<RawCapture> {
    config.validate()?;
    for level in &pattern.levels {
        level.validate()?;
    }
    let (width, height) = (radiance.width(), radiance.height());
    if width % 2 != 0 || height % 2 != 0 {
        return Err(Error::Dimensions(format!("{width}x{height} does not tile with a 2x2 pattern")));
    }

    let base = ChaCha8Rng::seed_from_u64(seed);
    let ranks = slot_ranks(pattern);
    let cells_per_row = width / 2;
    let read = Normal::new(0.0, config.read_noise_base).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut codes = vec![0u16; width * height];
    codes.par_chunks_mut(width).enumerate().for_each(|(row, out)| {
        for (col, code) in out.iter_mut().enumerate() {
            let level = pattern.level_at(row, col);
            let theta = radiance.get(row, col);
            let mean_photo = level.tau * theta * config.qe;
            let value = if noise {
                let mut rng = base.clone();
                let cell = (row / 2) * cells_per_row + col / 2;
                rng.set_stream((4 * cell + ranks[Pattern::slot_at(row, col)]) as u64);
                let photo = if mean_photo > 0.0 {
                    Poisson::new(mean_photo).map(|d| d.sample(&mut rng)).unwrap_or(mean_photo)
                } else {
                    0.0
                };
                let charge = (photo + level.tau * config.dark_current).min(config.full_well);
                charge * level.alpha + read.sample(&mut rng)
            } else {
                expected_readout(theta, level, config)
            };
            *code = config.quantize(value);
        }
    });

    Ok(RawCapture { width, height, codes, pattern: *pattern, config: *config, seed })
}

/// Rank of each slot's level among the four, ties broken by slot index.
fn slot_ranks(pattern: &Pattern) -> [usize; 4] {
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| pattern.levels[a].cmp(&pattern.levels[b]).then(a.cmp(&b)));
    let mut ranks = [0; 4];
    for (rank, &slot) in order.iter().enumerate() {
        ranks[slot] = rank;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(value: f64) -> RadianceMap {
        RadianceMap::filled(8, 6, value).unwrap()
    }

    #[test]
    fn default_config_matches_sensor_table() {
        let c = SensorConfig::default();
        c.validate().unwrap();
        assert_eq!(c.max_code(), 1023);
        assert!((c.adc_upper() - 8185.0).abs() < 1e-9);
        // input-referred ADC figures at the highest gain
        assert!((c.adc_lsb_base / 80.0 - 0.1).abs() < 1e-12);
        assert!((c.adc_lower / 80.0 - 0.0125).abs() < 1e-12);
        assert!((c.read_noise_base / 80.0 - 0.25).abs() < 1e-12);
        assert!((c.dark_current * 0.0075 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_adc_range_above_full_well() {
        let c = SensorConfig { full_well: 8000.0, ..SensorConfig::default() };
        assert!(c.validate().is_err());
        let c = SensorConfig { qe: 1.5, ..SensorConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_scene_reads_code_zero() {
        let config = SensorConfig { dark_current: 0.0, ..SensorConfig::default() };
        let pattern = Pattern::uniform(Level::new(0.03, 80.0).unwrap());
        let cap = simulate_capture(&flat(0.0), &pattern, &config, 1, false).unwrap();
        assert!(cap.codes.iter().all(|&c| c == 0));
    }

    #[test]
    fn bright_scene_saturates_at_top_code() {
        let config = SensorConfig::default();
        let pattern = Pattern::uniform(Level::new(0.0075, 1.0).unwrap());
        let cap = simulate_capture(&flat(1e9), &pattern, &config, 1, false).unwrap();
        assert!(cap.codes.iter().all(|&c| c == 1023));
    }

    #[test]
    fn expected_readout_examples() {
        let config = SensorConfig { dark_current: 0.0, ..SensorConfig::default() };
        let level = Level::new(0.01, 10.0).unwrap();
        assert_eq!(expected_readout(0.0, level, &config), 0.0);
        assert_eq!(expected_readout(1e12, level, &config), config.full_well * 10.0);
        let half = config.full_well / (2.0 * config.qe * level.tau);
        let got = expected_readout(half, level, &config);
        assert!((got - config.full_well * 10.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn normalize_readout_examples() {
        let config = SensorConfig { adc_lower: 0.0, dark_current: 0.0, ..SensorConfig::default() };
        let level = Level::new(0.015, 10.0).unwrap();
        let n = normalize_readout(0, level, &config);
        assert_eq!(n.theta, 0.0);
        assert!(!n.saturated);
        assert!(normalize_readout(1023, level, &config).saturated);
    }

    #[test]
    fn quantize_then_normalize_is_within_one_lsb() {
        let config = SensorConfig::default();
        for level in crate::patterns::LevelSet::default_levels().levels() {
            let cutoff = (config.adc_upper() / level.alpha - level.tau * config.dark_current)
                / (level.tau * config.qe);
            let lsb_theta = config.adc_lsb_base / level.alpha / (level.tau * config.qe);
            for k in 1..50 {
                let theta = cutoff * f64::from(k) / 50.0;
                let code = config.quantize(expected_readout(theta, *level, &config));
                let back = normalize_readout(code, *level, &config).theta;
                assert!((back - theta).abs() <= lsb_theta * (1.0 + 1e-9), "{theta} -> {back}");
            }
        }
    }

    #[test]
    fn rejects_odd_dimensions_and_bad_levels() {
        let config = SensorConfig::default();
        let odd = RadianceMap::filled(5, 4, 1.0).unwrap();
        let p = Pattern::uniform(Level::new(0.03, 1.0).unwrap());
        assert!(matches!(simulate_capture(&odd, &p, &config, 0, true), Err(Error::Dimensions(_))));

        let mut bad = p;
        bad.levels[2].tau = -1.0;
        assert!(simulate_capture(&flat(1.0), &bad, &config, 0, true).is_err());
        assert!(RadianceMap::new(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
        assert!(RadianceMap::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn capture_is_deterministic_per_seed() {
        let config = SensorConfig::default();
        let scene = RadianceMap::from_fn(16, 16, |r, c| 1e4 * (1 + r + c) as f64).unwrap();
        let p = Pattern::uniform(Level::new(0.03, 1.0).unwrap());
        let a = simulate_capture(&scene, &p, &config, 11, true).unwrap();
        let b = simulate_capture(&scene, &p, &config, 11, true).unwrap();
        let c = simulate_capture(&scene, &p, &config, 12, true).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.codes, c.codes);
    }

    #[test]
    fn permuted_patterns_share_noise_per_level() {
        let config = SensorConfig::default();
        let scene = flat(3e4);
        let taus = [0.0075, 0.015, 0.0225, 0.03];
        let p = Pattern::with_unit_gain(taus).unwrap();
        let q = p.permuted([2, 0, 3, 1]);
        let a = simulate_capture(&scene, &p, &config, 4, true).unwrap();
        let b = simulate_capture(&scene, &q, &config, 4, true).unwrap();
        for r0 in (0..scene.height()).step_by(2) {
            for c0 in (0..scene.width()).step_by(2) {
                let codes = |cap: &RawCapture| {
                    let mut v: Vec<(u64, u16)> = [(0, 0), (0, 1), (1, 0), (1, 1)]
                        .iter()
                        .map(|&(dr, dc)| {
                            let level = cap.pattern.level_at(r0 + dr, c0 + dc);
                            (level.tau.to_bits(), cap.code(r0 + dr, c0 + dc))
                        })
                        .collect();
                    v.sort();
                    v
                };
                assert_eq!(codes(&a), codes(&b));
            }
        }
    }

    #[test]
    fn tiling_has_period_two() {
        let config = SensorConfig::default();
        let taus = [0.0075, 0.015, 0.0225, 0.03];
        let p = Pattern::with_unit_gain(taus).unwrap();
        let cap = simulate_capture(&flat(1e5), &p, &config, 0, false).unwrap();
        let expect: Vec<u16> = taus
            .iter()
            .map(|&t| config.quantize(expected_readout(1e5, Level::new(t, 1.0).unwrap(), &config)))
            .collect();
        assert_eq!(expect.iter().collect::<std::collections::HashSet<_>>().len(), 4);
        for r in 0..cap.height {
            for c in 0..cap.width {
                assert_eq!(cap.code(r, c), expect[Pattern::slot_at(r, c)]);
            }
        }
    }
}
