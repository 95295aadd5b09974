//! Full-resolution radiance from a multiplexed capture.
//!
//! Both reconstructors start from an [`ObservationField`]: each pixel's
//! radiance estimate from its own code, its noise variance and whether it is
//! usable (not saturated). [`lpa_reconstruct`] fits a local plane by weighted
//! least squares; [`admm_tv_reconstruct`] solves a variance-weighted data
//! term with a total-variation prior, using Chambolle's projection as the
//! proximal step.

mod admm;
mod lpa;
mod tv;

use crate::patterns::{Level, Pattern};
use crate::sensor_sim::{normalize_readout, RadianceMap, RawCapture, SensorConfig};

pub use admm::{admm_tv_reconstruct, admm_tv_reconstruct_field, AdmmOptions, AdmmOutcome};
pub use lpa::{lpa_reconstruct, lpa_reconstruct_field, LPA_WINDOW};
pub use tv::{chambolle_tv_denoise, total_variation};

/// Per-pixel inputs shared by the reconstructors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationField {
    pub width: usize,
    pub height: usize,
    /// Radiance estimate of each pixel from its own readout.
    pub estimate: Vec<f64>,
    /// Variance of `estimate` (shot, dark, read and quantization noise).
    pub variance: Vec<f64>,
    /// `false` where the pixel saturated.
    pub valid: Vec<bool>,
    /// Radiance at which the pixel's level saturates.
    pub cutoff: Vec<f64>,
}

/// Variance of a radiance estimate `theta` read through `level`.
pub fn estimate_variance(theta: f64, level: Level, config: &SensorConfig) -> f64 {
    let gain_read = config.read_noise_base / level.alpha;
    let gain_lsb = config.adc_lsb_base / level.alpha;
    let charge_var = level.tau * config.qe * theta.max(0.0)
        + level.tau * config.dark_current
        + gain_read * gain_read
        + gain_lsb * gain_lsb / 12.0;
    let scale = level.tau * config.qe;
    charge_var / (scale * scale)
}

impl ObservationField {
    pub fn from_capture(capture: &RawCapture) -> Self {
        let config = &capture.config;
        let n = capture.width * capture.height;
        let mut field = ObservationField {
            width: capture.width,
            height: capture.height,
            estimate: Vec::with_capacity(n),
            variance: Vec::with_capacity(n),
            valid: Vec::with_capacity(n),
            cutoff: Vec::with_capacity(n),
        };
        for r in 0..capture.height {
            for c in 0..capture.width {
                let level = capture.pattern.level_at(r, c);
                let norm = normalize_readout(capture.code(r, c), level, config);
                field.estimate.push(norm.theta);
                field.variance.push(estimate_variance(norm.theta, level, config));
                field.valid.push(!norm.saturated);
                field.cutoff.push(config.cutoff(level));
            }
        }
        field
    }

    /// Noise-free, unquantized observations of known radiance; a pixel is
    /// valid when its radiance does not exceed its cutoff.
    pub fn from_radiance(radiance: &RadianceMap, pattern: &Pattern, config: &SensorConfig) -> Self {
        let (width, height) = (radiance.width(), radiance.height());
        let mut field = ObservationField {
            width,
            height,
            estimate: radiance.values().to_vec(),
            variance: Vec::with_capacity(width * height),
            valid: Vec::with_capacity(width * height),
            cutoff: Vec::with_capacity(width * height),
        };
        for r in 0..height {
            for c in 0..width {
                let level = pattern.level_at(r, c);
                let theta = radiance.get(r, c);
                let cutoff = config.cutoff(level);
                field.variance.push(estimate_variance(theta, level, config));
                field.valid.push(theta <= cutoff);
                field.cutoff.push(cutoff);
            }
        }
        field
    }

    pub fn len(&self) -> usize {
        self.estimate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimate.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}
