//! Simulation and pattern selection for 2×2 spatially-varying-exposure (SVE)
//! image sensors.
//!
//! The crate is organised along the capture-to-evaluation pipeline:
//!
//! * [`sensor_sim`]: forward image-formation model, synthetic scenes, PFM I/O.
//! * [`patterns`]: exposure/gain levels, multiplex patterns, canonical forms
//!   and equivalence-class enumeration.
//! * [`histogramming`]: pilot captures and the radiance histogram.
//! * [`risk`]: SNR-Risk, SVE-Risk (pixel-wise and histogram forms), variants
//!   and pattern ranking.
//! * [`reconstruct`]: local polynomial approximation and ADMM with a total
//!   variation prior.
//! * [`metrics`]: μ-law tone mapping, μPSNR, μSSIM, Spearman correlation and
//!   ranking statistics.
//! * [`experiment`]: the end-to-end pipeline, the exhaustive ranking
//!   evaluation and the risk run-time benchmark.

// `!(x > 0.0)` rejects NaN together with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod histogramming;
pub mod metrics;
pub mod patterns;
pub mod reconstruct;
pub mod risk;
pub mod seed;
pub mod sensor_sim;

pub use error::{Error, Result};
pub use patterns::{CanonicalPattern, Level, LevelSet, Pattern};
pub use sensor_sim::{RadianceMap, RawCapture, SensorConfig};
