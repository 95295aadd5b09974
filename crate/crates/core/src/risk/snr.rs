use super::RiskValue;
use crate::error::{Error, Result};
use crate::patterns::{CanonicalPattern, Pattern};
use crate::sensor_sim::{normalize_readout, simulate_capture, RadianceMap, RawCapture, SensorConfig};

/// Output-referred SNR of one pixel; zero once `alpha * tau * theta` exceeds
/// `v_max`.
#[inline]
fn pixel_snr(theta: f64, tau: f64, alpha: f64, config: &SensorConfig) -> f64 {
    let signal = alpha * tau * theta;
    if signal > config.v_max {
        return 0.0;
    }
    let noise = (alpha * alpha * (tau * theta + tau * config.dark_current)
        + config.read_noise_base * config.read_noise_base)
        .sqrt();
    if noise > 0.0 {
        signal / noise
    } else if signal > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Sum of per-pixel SNR and the number of unsaturated pixels.
fn snr_sum(radiance: &RadianceMap, pattern: &CanonicalPattern, config: &SensorConfig) -> (f64, usize) {
    let levels = pattern.pattern().levels;
    let mut sum = 0.0;
    let mut unsaturated = 0;
    for r in 0..radiance.height() {
        let row = &radiance.values()[r * radiance.width()..(r + 1) * radiance.width()];
        for (c, &theta) in row.iter().enumerate() {
            let l = levels[Pattern::slot_at(r, c)];
            if l.product() * theta <= config.v_max {
                unsaturated += 1;
                sum += pixel_snr(theta, l.tau, l.alpha, config);
            }
        }
    }
    (sum, unsaturated)
}

/// SNR-Risk: `1 / mean_i SNR_i`; infinite when every pixel saturates.
pub fn snr_risk(radiance: &RadianceMap, pattern: &Pattern, config: &SensorConfig) -> RiskValue {
    let canonical = pattern.canonicalize();
    let (sum, _) = snr_sum(radiance, &canonical, config);
    let mean = sum / radiance.len() as f64;
    if mean > 0.0 {
        RiskValue::new(1.0 / mean, 0.0)
    } else {
        RiskValue::infinite()
    }
}

/// SNR-Risk with saturated pixels charged their squared error.
///
/// The result is `1 / mean_i SNR_i` over all pixels (zero when every pixel
/// saturates) plus the mean over all pixels of `(theta_hat_i - theta_i)^2`
/// for saturated `i`, where `theta_hat` is the normalized readout. Without a
/// `readout`, a noise-free capture through the canonical pattern is used.
pub fn snr_mse_risk(
    radiance: &RadianceMap,
    pattern: &Pattern,
    config: &SensorConfig,
    readout: Option<&RawCapture>,
) -> Result<RiskValue> {
    let canonical = pattern.canonicalize();
    let synthesized;
    let readout = match readout {
        Some(r) => {
            if (r.width, r.height) != (radiance.width(), radiance.height()) {
                return Err(Error::Dimensions("readout and radiance sizes differ".into()));
            }
            r
        }
        None => {
            synthesized = simulate_capture(radiance, canonical.pattern(), config, 0, false)?;
            &synthesized
        }
    };

    let (sum, unsaturated) = snr_sum(radiance, &canonical, config);
    let n = radiance.len() as f64;
    let base = if unsaturated > 0 && sum > 0.0 { n / sum } else { 0.0 };

    let mut sq_err = 0.0;
    for r in 0..radiance.height() {
        for c in 0..radiance.width() {
            let theta = radiance.get(r, c);
            let level = readout.pattern.level_at(r, c);
            if level.product() * theta > config.v_max {
                let est = normalize_readout(readout.code(r, c), level, config).theta;
                sq_err += (est - theta) * (est - theta);
            }
        }
    }
    Ok(RiskValue::new(base, sq_err / n))
}
