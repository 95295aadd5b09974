use super::{relative_variance, NeighborCountTable, RiskValue};
use crate::error::{Error, Result};
use crate::histogramming::{HistogramStatus, RadianceHistogram, MIN_RADIANCE};
use crate::patterns::{CanonicalPattern, Pattern};
use crate::sensor_sim::{RadianceMap, SensorConfig};

/// Risk of one radiance value under the histogram form.
///
/// With `u` leading elements unsaturated (`s = 4 - u` saturated), each
/// unsaturated element contributes its relative variance divided by its
/// neighbor count, and each saturated one the worst of those terms. With
/// nothing unsaturated the cost is the squared distance to the largest
/// cutoff. Returns `(recoverable, nonrecoverable)`.
fn point_risk(
    theta: f64,
    pattern: &CanonicalPattern,
    config: &SensorConfig,
    counts: impl Fn(usize, usize) -> f64,
) -> (f64, f64) {
    let elements = pattern.elements();
    let cutoffs = elements.map(|l| config.cutoff(l));
    let unsaturated = cutoffs.iter().take_while(|&&c| theta <= c).count();
    if unsaturated == 0 {
        let d = cutoffs[0] - theta;
        return (0.0, d * d);
    }
    let s = 4 - unsaturated;
    let mut sum = 0.0;
    let mut worst = 0.0f64;
    for (j, &level) in elements.iter().take(unsaturated).enumerate() {
        let term = relative_variance(theta, level, config) / counts(j, s);
        sum += term;
        worst = worst.max(term);
    }
    (0.25 * (sum + s as f64 * worst), 0.0)
}

fn hist_risk(
    hist: &RadianceHistogram,
    pattern: &Pattern,
    config: &SensorConfig,
    counts: impl Fn(usize, usize) -> f64,
) -> RiskValue {
    let canonical = pattern.canonicalize();
    let mut recoverable = 0.0;
    let mut nonrecoverable = 0.0;
    for (theta, w) in hist.masses() {
        let (r, n) = point_risk(theta, &canonical, config, &counts);
        recoverable += w * r;
        nonrecoverable += w * n;
    }
    let mut risk = RiskValue::new(recoverable, nonrecoverable);
    risk.tail_only = hist.status() == HistogramStatus::FullySaturated;
    risk
}

/// SVE-Risk from a radiance histogram, per pixel.
pub fn sve_risk_hist(
    hist: &RadianceHistogram,
    pattern: &Pattern,
    config: &SensorConfig,
    table: &NeighborCountTable,
) -> RiskValue {
    hist_risk(hist, pattern, config, |j, s| f64::from(table.count(j, s)))
}

/// SVE-Risk without the neighbor-count penalty (every count set to 1).
pub fn sve_risk_wo(hist: &RadianceHistogram, pattern: &Pattern, config: &SensorConfig) -> RiskValue {
    hist_risk(hist, pattern, config, |_, _| 1.0)
}

/// Reflect-101 index; keeps the parity of out-of-range indices.
#[inline]
fn reflect(i: isize, len: usize) -> usize {
    let n = len as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Pixel-wise SVE-Risk on ground truth, averaged over pixels.
///
/// Neighborhoods are `table.n()` wide and reflected at the borders, which
/// preserves the 2×2 tiling. A pixel whose whole neighborhood saturates pays
/// the squared distance to the largest cutoff present in it. Radiance is
/// floored at [`MIN_RADIANCE`].
pub fn sve_risk_pixelwise(
    radiance: &RadianceMap,
    pattern: &Pattern,
    config: &SensorConfig,
    table: &NeighborCountTable,
) -> Result<RiskValue> {
    let (w, h) = (radiance.width(), radiance.height());
    let half = table.n() / 2;
    if w <= half || h <= half {
        return Err(Error::Dimensions(format!(
            "{w}x{h} is smaller than the {0}x{0} neighborhood",
            table.n()
        )));
    }
    let canonical = pattern.canonicalize();
    let elements = canonical.elements();
    let cutoffs = elements.map(|l| config.cutoff(l));

    let theta: Vec<f64> = radiance.values().iter().map(|v| v.max(MIN_RADIANCE)).collect();
    let element = |r: usize, c: usize| CanonicalPattern::element_index_at(r, c);
    let unsat: Vec<bool> = (0..w * h).map(|i| theta[i] <= cutoffs[element(i / w, i % w)]).collect();

    let window = |r: usize, c: usize| {
        let (r, c) = (r as isize, c as isize);
        let half = half as isize;
        (-half..=half)
            .flat_map(move |dr| (-half..=half).map(move |dc| (reflect(r + dr, h), reflect(c + dc, w))))
    };

    // Unsaturated-neighbor count and per-pixel term of unsaturated pixels.
    let mut term = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if unsat[i] {
                let count = window(r, c).filter(|&(rr, cc)| unsat[rr * w + cc]).count();
                term[i] = relative_variance(theta[i], elements[element(r, c)], config) / count as f64;
            }
        }
    }

    let mut recoverable = 0.0;
    let mut nonrecoverable = 0.0;
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if unsat[i] {
                recoverable += term[i];
                continue;
            }
            let worst = window(r, c)
                .map(|(rr, cc)| rr * w + cc)
                .filter(|&j| unsat[j])
                .map(|j| term[j])
                .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
            match worst {
                Some(t) => recoverable += t,
                None => {
                    let cutoff = window(r, c).map(|(rr, cc)| cutoffs[element(rr, cc)]).fold(0.0, f64::max);
                    nonrecoverable += (cutoff - theta[i]).powi(2);
                }
            }
        }
    }
    let n = (w * h) as f64;
    Ok(RiskValue::new(recoverable / n, nonrecoverable / n))
}
