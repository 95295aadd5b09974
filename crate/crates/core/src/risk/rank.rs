use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{snr_mse_risk, snr_risk, sve_risk_hist, sve_risk_wo, NeighborCountTable, RiskValue};
use crate::error::{Error, Result};
use crate::histogramming::RadianceHistogram;
use crate::patterns::CanonicalPattern;
use crate::sensor_sim::{RadianceMap, SensorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Sve,
    SveWo,
    Snr,
    SnrMse,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [Estimator::Sve, Estimator::SveWo, Estimator::Snr, Estimator::SnrMse];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Sve => "sve",
            Estimator::SveWo => "sve-wo",
            Estimator::Snr => "snr",
            Estimator::SnrMse => "snr-mse",
        }
    }

    /// Whether the estimator reads a histogram (otherwise ground truth).
    pub fn uses_histogram(self) -> bool {
        matches!(self, Estimator::Sve | Estimator::SveWo)
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator '{s}'")))
    }
}

/// What a risk is computed from: SVE variants read a histogram, SNR variants
/// read the ground-truth radiance.
#[derive(Debug, Clone, Copy)]
pub enum RiskInput<'a> {
    Histogram(&'a RadianceHistogram),
    Radiance(&'a RadianceMap),
}

pub fn evaluate_risk(
    estimator: Estimator,
    input: RiskInput<'_>,
    pattern: &CanonicalPattern,
    config: &SensorConfig,
    table: &NeighborCountTable,
) -> Result<RiskValue> {
    let p = pattern.pattern();
    match (estimator, input) {
        (Estimator::Sve, RiskInput::Histogram(h)) => Ok(sve_risk_hist(h, p, config, table)),
        (Estimator::SveWo, RiskInput::Histogram(h)) => Ok(sve_risk_wo(h, p, config)),
        (Estimator::Snr, RiskInput::Radiance(m)) => Ok(snr_risk(m, p, config)),
        (Estimator::SnrMse, RiskInput::Radiance(m)) => snr_mse_risk(m, p, config, None),
        (e, _) => Err(Error::InvalidArgument(format!(
            "estimator {e} needs a {}",
            if e.uses_histogram() { "histogram" } else { "radiance map" }
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPattern {
    /// Position of the pattern in the candidate stream.
    pub id: usize,
    pub pattern: CanonicalPattern,
    pub risk: RiskValue,
    /// 1-based; 1 is the lowest risk.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub estimator: Estimator,
    /// Sorted by rank.
    pub rows: Vec<RankedPattern>,
}

impl RankReport {
    pub fn top(&self) -> &RankedPattern {
        &self.rows[0]
    }

    /// Rank of each candidate id.
    pub fn ranks_by_id(&self) -> Vec<usize> {
        let mut out = vec![0; self.rows.len()];
        for row in &self.rows {
            out[row.id] = row.rank;
        }
        out
    }
}

/// Scores every candidate and sorts ascending by risk; ties go to the
/// smaller canonical pattern, then the smaller id.
pub fn rank_patterns(
    estimator: Estimator,
    input: RiskInput<'_>,
    candidates: impl IntoIterator<Item = CanonicalPattern>,
    config: &SensorConfig,
    table: &NeighborCountTable,
) -> Result<RankReport> {
    let candidates: Vec<CanonicalPattern> = candidates.into_iter().collect();
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate patterns".into()));
    }
    let risks: Vec<RiskValue> = candidates
        .par_iter()
        .map(|p| evaluate_risk(estimator, input, p, config, table))
        .collect::<Result<_>>()?;
    let mut rows: Vec<RankedPattern> = candidates
        .into_iter()
        .zip(risks)
        .enumerate()
        .map(|(id, (pattern, risk))| RankedPattern { id, pattern, risk, rank: 0 })
        .collect();
    rows.sort_by(|a, b| {
        a.risk.total.total_cmp(&b.risk.total).then_with(|| a.pattern.cmp(&b.pattern)).then(a.id.cmp(&b.id))
    });
    for (k, row) in rows.iter_mut().enumerate() {
        row.rank = k + 1;
    }
    Ok(RankReport { estimator, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogramming::histogram_from_radiance;
    use crate::patterns::{enumerate_classes, LevelSet, Pattern};
    use crate::risk::build_neighbor_table;

    #[test]
    fn single_candidate_is_top() {
        let set = LevelSet::default_levels();
        let config = SensorConfig::default();
        let table = build_neighbor_table(3).unwrap();
        let map = RadianceMap::filled(8, 8, 100.0).unwrap();
        let p = Pattern::uniform(set.levels()[3]).canonicalize();
        let report = rank_patterns(Estimator::Snr, RiskInput::Radiance(&map), [p], &config, &table).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.top().pattern, p);
        assert_eq!(report.top().rank, 1);
    }

    #[test]
    fn dark_flat_scene_prefers_highest_level_everywhere() {
        let set = LevelSet::default_levels();
        let config = SensorConfig::default();
        let table = build_neighbor_table(3).unwrap();
        let map = RadianceMap::filled(8, 8, 5.0).unwrap();
        let hist = histogram_from_radiance(&map, 64).unwrap();
        let report = rank_patterns(
            Estimator::Sve,
            RiskInput::Histogram(&hist),
            enumerate_classes(&set),
            &config,
            &table,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 495);
        let best = *set.levels().last().unwrap();
        assert_eq!(report.top().pattern.elements(), [best; 4]);
        assert!(report.rows.windows(2).all(|w| w[0].risk.total <= w[1].risk.total));
    }

    #[test]
    fn input_kind_is_checked() {
        let config = SensorConfig::default();
        let table = build_neighbor_table(3).unwrap();
        let map = RadianceMap::filled(4, 4, 1.0).unwrap();
        let p = Pattern::uniform(LevelSet::default_levels().levels()[0]).canonicalize();
        assert!(evaluate_risk(Estimator::Sve, RiskInput::Radiance(&map), &p, &config, &table).is_err());
        assert!(rank_patterns(Estimator::Snr, RiskInput::Radiance(&map), [], &config, &table).is_err());
        assert_eq!("sve-wo".parse::<Estimator>().unwrap(), Estimator::SveWo);
    }
}
