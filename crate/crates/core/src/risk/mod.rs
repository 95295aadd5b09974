//! Risk estimators that score a pattern for a scene, and pattern ranking.
//!
//! * SNR-Risk: reciprocal of the mean per-pixel SNR on ground truth.
//! * SNR-MSE: SNR-Risk plus the squared error of saturated pixels' readouts.
//! * SVE-Risk: per-pixel reconstruction variance divided by the number of
//!   usable neighbors; saturated pixels borrow the worst usable neighbor and
//!   fully saturated neighborhoods pay the squared clipping error. It has a
//!   pixel-wise reference form and a histogram form whose cost does not
//!   depend on image size.
//! * SVE-Risk w/o |B|: the histogram form without the neighbor counts.
//!
//! All estimators canonicalize the pattern first, so slot permutations of a
//! pattern produce bit-identical risks. Pixel-wise risks are reported per
//! pixel (the mean over the image) so they are on the same scale as the
//! histogram form.

mod neighbors;
mod rank;
mod snr;
mod sve;

use serde::{Deserialize, Serialize};

use crate::patterns::Level;
use crate::sensor_sim::SensorConfig;

pub use neighbors::{build_neighbor_table, NeighborCountTable};
pub use rank::{evaluate_risk, rank_patterns, Estimator, RankReport, RankedPattern, RiskInput};
pub use snr::{snr_mse_risk, snr_risk};
pub use sve::{sve_risk_hist, sve_risk_pixelwise, sve_risk_wo};

/// Value reported in place of an infinite risk.
pub const INFINITE_RISK: f64 = f64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskValue {
    /// `recoverable + nonrecoverable`, or [`INFINITE_RISK`].
    pub total: f64,
    pub recoverable: f64,
    pub nonrecoverable: f64,
    /// The risk is unbounded (no usable pixel at all).
    pub infinite: bool,
    /// Only the saturated tail of the histogram contributed.
    pub tail_only: bool,
}

impl RiskValue {
    pub fn new(recoverable: f64, nonrecoverable: f64) -> Self {
        RiskValue {
            total: recoverable + nonrecoverable,
            recoverable,
            nonrecoverable,
            infinite: false,
            tail_only: false,
        }
    }

    pub fn infinite() -> Self {
        RiskValue {
            total: INFINITE_RISK,
            recoverable: INFINITE_RISK,
            nonrecoverable: 0.0,
            infinite: true,
            tail_only: false,
        }
    }
}

/// Relative variance of a radiance estimate from one element:
/// `((theta + dark) / tau + read^2 / (alpha^2 tau^2)) / theta^2`.
#[inline]
pub fn relative_variance(theta: f64, level: Level, config: &SensorConfig) -> f64 {
    let read = config.read_noise_base / (level.alpha * level.tau);
    ((theta + config.dark_current) / level.tau + read * read) / (theta * theta)
}
