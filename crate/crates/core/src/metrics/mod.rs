//! Image quality metrics on μ-law tone-mapped radiance and the statistics
//! used to judge a risk estimator's ranking.
//!
//! Images are divided by the 99.9th percentile of the ground truth, clipped
//! to `[0, 1]` and compressed with `log(1 + mu x) / log(1 + mu)` before
//! PSNR or SSIM is taken.

mod stats;

use crate::error::{Error, Result};
use crate::sensor_sim::{RadianceMap, SensorConfig};

pub use stats::{oracle_pattern, q_score, spearman_rho, top_k_delta, ScoreTable, Spearman};

/// Reported PSNR of identical images.
pub const PSNR_CAP_DB: f64 = 99.0;
/// Quantile of the ground truth that maps to 1 before tone mapping.
pub const NORMALIZATION_QUANTILE: f64 = 0.999;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Tone-mapping strength matching the ADC's top reference level.
pub fn default_mu(config: &SensorConfig) -> f64 {
    config.adc_upper()
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Divides by `reference` and clips to `[0, 1]`.
pub fn normalize(values: &[f64], reference: f64) -> Vec<f64> {
    values.iter().map(|v| (v / reference).clamp(0.0, 1.0)).collect()
}

#[inline]
pub fn mu_tonemap(x: f64, mu: f64) -> f64 {
    (x * mu).ln_1p() / mu.ln_1p()
}

pub fn mu_tonemap_image(values: &[f64], mu: f64) -> Vec<f64> {
    values.iter().map(|&x| mu_tonemap(x, mu)).collect()
}

/// PSNR with peak 1, capped at [`PSNR_CAP_DB`].
pub fn psnr(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimensions(format!("PSNR of {} vs {} values", a.len(), b.len())));
    }
    let mse = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((-10.0 * mse.log10()).min(PSNR_CAP_DB))
}

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut taps = [0.0; SSIM_WINDOW];
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - half;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.map(|t| t / sum)
}

/// Separable filtering over fully contained windows only.
fn filter_valid(img: &[f64], width: usize, height: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * height];
    for r in 0..height {
        let line = &img[r * width..(r + 1) * width];
        for c in 0..ow {
            rows[r * ow + c] = taps.iter().zip(&line[c..c + SSIM_WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = taps.iter().enumerate().map(|(k, t)| t * rows[(r + k) * ow + c]).sum();
        }
    }
    out
}

/// Mean SSIM (11×11 Gaussian window, sigma 1.5, dynamic range 1).
pub fn ssim(a: &[f64], b: &[f64], width: usize, height: usize) -> Result<f64> {
    if a.len() != width * height || b.len() != width * height {
        return Err(Error::Dimensions("SSIM inputs do not match the given size".into()));
    }
    if width < SSIM_WINDOW || height < SSIM_WINDOW {
        return Err(Error::Dimensions(format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels")));
    }
    let taps = gaussian_taps();
    let products = |f: fn(f64, f64) -> f64| -> Vec<f64> { a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect() };
    let mu_a = filter_valid(a, width, height, &taps);
    let mu_b = filter_valid(b, width, height, &taps);
    let aa = filter_valid(&products(|x, _| x * x), width, height, &taps);
    let bb = filter_valid(&products(|_, y| y * y), width, height, &taps);
    let ab = filter_valid(&products(|x, y| x * y), width, height, &taps);
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / mu_a.len() as f64)
}

/// Both maps normalized by the reference's 99.9th percentile and tone mapped.
fn tonemapped_pair(reference: &RadianceMap, estimate: &RadianceMap, mu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if (reference.width(), reference.height()) != (estimate.width(), estimate.height()) {
        return Err(Error::Dimensions("reference and estimate sizes differ".into()));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu {mu} must be positive")));
    }
    let scale = quantile(reference.values(), NORMALIZATION_QUANTILE);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok((
        mu_tonemap_image(&normalize(reference.values(), scale), mu),
        mu_tonemap_image(&normalize(estimate.values(), scale), mu),
    ))
}

pub fn mu_psnr(reference: &RadianceMap, estimate: &RadianceMap, mu: f64) -> Result<f64> {
    let (a, b) = tonemapped_pair(reference, estimate, mu)?;
    psnr(&a, &b)
}

pub fn mu_ssim(reference: &RadianceMap, estimate: &RadianceMap, mu: f64) -> Result<f64> {
    let (a, b) = tonemapped_pair(reference, estimate, mu)?;
    ssim(&a, &b, reference.width(), reference.height())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tonemap_examples() {
        assert_eq!(mu_tonemap(0.0, 8185.0), 0.0);
        assert!((mu_tonemap(1.0, 8185.0) - 1.0).abs() < 1e-15);
        assert!((mu_tonemap(0.5, 1.0) - 1.5f64.ln() / 2f64.ln()).abs() < 1e-15);
        assert!((mu_tonemap(0.5, 1.0) - 0.58496).abs() < 1e-5);
        assert_eq!(default_mu(&SensorConfig::default()), 8185.0);
    }

    #[test]
    fn psnr_examples() {
        let a = vec![0.2, 0.4, 0.6, 0.8];
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP_DB);
        let b: Vec<f64> = a.iter().map(|v| v + 0.1).collect();
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&a, &b[..3]).is_err());
    }

    #[test]
    fn psnr_matches_scalar_oracle() {
        let a: Vec<f64> = (0..64).map(|i| ((i * 37) % 64) as f64 / 64.0).collect();
        let b: Vec<f64> = (0..64).map(|i| ((i * 11) % 64) as f64 / 70.0).collect();
        let mut sse = 0.0;
        for i in 0..64 {
            sse += (a[i] - b[i]).powi(2);
        }
        let oracle = 10.0 * (64.0 / sse).log10();
        assert!((psnr(&a, &b).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn ssim_examples() {
        let (w, h) = (24, 20);
        let tex: Vec<f64> = (0..w * h)
            .map(|k| 0.5 + 0.4 * ((k % w) as f64 * 0.9).sin() * ((k / w) as f64 * 0.7).cos())
            .collect();
        assert!((ssim(&tex, &tex, w, h).unwrap() - 1.0).abs() < 1e-12);
        let inv: Vec<f64> = tex.iter().map(|v| 1.0 - v).collect();
        assert!(ssim(&tex, &inv, w, h).unwrap() < 0.5);

        let (c1, c2) = (0.3, 0.5);
        let a = vec![c1; w * h];
        let b = vec![c2; w * h];
        let k1 = SSIM_K1 * SSIM_K1;
        let expect = (2.0 * c1 * c2 + k1) / (c1 * c1 + c2 * c2 + k1);
        assert!((ssim(&a, &b, w, h).unwrap() - expect).abs() < 1e-9);
        assert!(ssim(&a, &b, 10, 48).is_err());
    }

    #[test]
    fn mu_metrics_use_reference_quantile() {
        let gt = RadianceMap::from_fn(16, 16, |r, c| 1.0 + (r * 16 + c) as f64).unwrap();
        assert_eq!(mu_psnr(&gt, &gt, 100.0).unwrap(), PSNR_CAP_DB);
        assert!((mu_ssim(&gt, &gt, 100.0).unwrap() - 1.0).abs() < 1e-12);
        let other = RadianceMap::filled(8, 8, 1.0).unwrap();
        assert!(mu_psnr(&gt, &other, 100.0).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.25), 2.5);
    }
}
