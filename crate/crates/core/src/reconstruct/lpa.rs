//! Local polynomial approximation.

use rayon::prelude::*;

use super::ObservationField;
use crate::error::Result;
use crate::sensor_sim::{RadianceMap, RawCapture};

/// Side of the square fitting window.
pub const LPA_WINDOW: usize = 7;
/// Scale of the Gaussian spatial weight.
const KERNEL_SCALE: f64 = 1.0;

pub fn lpa_reconstruct(capture: &RawCapture) -> Result<RadianceMap> {
    lpa_reconstruct_field(&ObservationField::from_capture(capture))
}

/// Fits `a + b*dx + c*dy` around each pixel by least squares weighted with a
/// Gaussian of the offset, the inverse noise variance and the validity mask,
/// and keeps `a`. Windows are truncated at the border. With fewer than three
/// valid pixels (or a singular fit) the weighted mean is used; with none,
/// the pixel's cutoff.
pub fn lpa_reconstruct_field(field: &ObservationField) -> Result<RadianceMap> {
    let (w, h) = (field.width, field.height);
    let half = (LPA_WINDOW / 2) as isize;
    let kernel: Vec<f64> = (-half..=half)
        .flat_map(|dy| (-half..=half).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) / (2.0 * KERNEL_SCALE * KERNEL_SCALE)).exp())
        .collect();
    let inv_var: Vec<f64> =
        field.variance.iter().zip(&field.valid).map(|(&v, &ok)| if ok { 1.0 / v } else { 0.0 }).collect();

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
        for (c, value) in row.iter_mut().enumerate() {
            // Normal equations for the basis [1, dx, dy].
            let mut m = [[0.0f64; 3]; 3];
            let mut rhs = [0.0f64; 3];
            let mut count = 0usize;
            for dy in -half..=half {
                let rr = r as isize + dy;
                if rr < 0 || rr >= h as isize {
                    continue;
                }
                for dx in -half..=half {
                    let cc = c as isize + dx;
                    if cc < 0 || cc >= w as isize {
                        continue;
                    }
                    let j = rr as usize * w + cc as usize;
                    if !field.valid[j] {
                        continue;
                    }
                    count += 1;
                    let k = kernel[((dy + half) * LPA_WINDOW as isize + dx + half) as usize];
                    let wt = k * inv_var[j];
                    let phi = [1.0, dx as f64, dy as f64];
                    let y = field.estimate[j];
                    for a in 0..3 {
                        rhs[a] += wt * phi[a] * y;
                        for b in a..3 {
                            m[a][b] += wt * phi[a] * phi[b];
                        }
                    }
                }
            }
            *value = if count == 0 {
                field.cutoff[r * w + c]
            } else {
                let mean = rhs[0] / m[0][0];
                let fit = if count >= 3 { solve_intercept(m, rhs) } else { None };
                fit.unwrap_or(mean)
            }
            .max(0.0);
        }
    });
    RadianceMap::from_clamped(w, h, out)
}

/// Intercept of the symmetric 3×3 system (upper triangle filled), or `None`
/// when it is numerically singular.
fn solve_intercept(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<f64> {
    for a in 0..3 {
        for b in 0..a {
            m[a][b] = m[b][a];
        }
    }
    let scale = m[0][0].abs().max(m[1][1].abs()).max(m[2][2].abs());
    if !(scale > 0.0) {
        return None;
    }
    // Gaussian elimination with partial pivoting.
    let mut order = [0usize, 1, 2];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[order[a]][col].abs().total_cmp(&m[order[b]][col].abs()))?;
        order.swap(col, pivot);
        let p = order[col];
        if m[p][col].abs() <= 1e-12 * scale {
            return None;
        }
        for &row in &order[col + 1..] {
            let f = m[row][col] / m[p][col];
            for k in col..3 {
                m[row][k] -= f * m[p][k];
            }
            rhs[row] -= f * rhs[p];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let p = order[col];
        let mut acc = rhs[p];
        for k in col + 1..3 {
            acc -= m[p][k] * x[k];
        }
        x[col] = acc / m[p][col];
    }
    x[0].is_finite().then_some(x[0])
}
