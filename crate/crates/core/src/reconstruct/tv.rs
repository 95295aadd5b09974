//! Chambolle's projection algorithm for total-variation denoising.
//!
//! Follows the widely used n-dimensional implementation: dual field `p`
//! per axis, step `1 / (2 * ndim)`, and a stop once the per-pixel energy
//! changes by less than `eps` times its initial value.

pub const DEFAULT_EPS: f64 = 2e-4;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Denoises a row-major `width × height` image, approximately solving
/// `min_u 0.5 * |u - f|^2 + weight * TV(u)` with isotropic TV.
///
/// A non-positive `weight` returns the input unchanged.
pub fn chambolle_tv_denoise(
    image: &[f64],
    width: usize,
    height: usize,
    weight: f64,
    eps: f64,
    max_iter: usize,
) -> Vec<f64> {
    assert_eq!(image.len(), width * height, "image size mismatch");
    if !(weight > 0.0) || image.is_empty() {
        return image.to_vec();
    }
    let n = image.len();
    let tau = 0.25;
    // p[0] along rows (vertical differences), p[1] along columns.
    let mut py = vec![0.0; n];
    let mut px = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut gx = vec![0.0; n];
    let mut out = image.to_vec();
    let mut d = vec![0.0; n];
    let mut e_init = 0.0;
    let mut e_prev = 0.0;

    for i in 0..max_iter {
        let mut energy = 0.0;
        if i > 0 {
            // d = -div p with backward differences.
            for r in 0..height {
                for c in 0..width {
                    let k = r * width + c;
                    let mut v = -py[k] - px[k];
                    if r > 0 {
                        v += py[k - width];
                    }
                    if c > 0 {
                        v += px[k - 1];
                    }
                    d[k] = v;
                    out[k] = image[k] + v;
                    energy += v * v;
                }
            }
        }

        // Forward differences, zero on the last row/column.
        let mut tv = 0.0;
        for r in 0..height {
            for c in 0..width {
                let k = r * width + c;
                gy[k] = if r + 1 < height { out[k + width] - out[k] } else { 0.0 };
                gx[k] = if c + 1 < width { out[k + 1] - out[k] } else { 0.0 };
                let norm = (gy[k] * gy[k] + gx[k] * gx[k]).sqrt();
                tv += norm;
                let denom = 1.0 + norm * tau / weight;
                py[k] = (py[k] - tau * gy[k]) / denom;
                px[k] = (px[k] - tau * gx[k]) / denom;
            }
        }
        energy = (energy + weight * tv) / n as f64;

        if i == 0 {
            e_init = energy;
            e_prev = energy;
        } else if (e_prev - energy).abs() < eps * e_init {
            break;
        } else {
            e_prev = energy;
        }
    }
    out
}

/// Isotropic total variation with forward differences.
pub fn total_variation(image: &[f64], width: usize, height: usize) -> f64 {
    let mut tv = 0.0;
    for r in 0..height {
        for c in 0..width {
            let k = r * width + c;
            let gy = if r + 1 < height { image[k + width] - image[k] } else { 0.0 };
            let gx = if c + 1 < width { image[k + 1] - image[k] } else { 0.0 };
            tv += (gy * gy + gx * gx).sqrt();
        }
    }
    tv
}
