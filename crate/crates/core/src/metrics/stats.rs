//! Ranking statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    /// Two-sided p-value of the no-association null (t approximation).
    pub p_value: f64,
    pub n: usize,
}

/// 1-based ranks, ties sharing their average rank.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<Spearman> {
    if xs.len() != ys.len() {
        return Err(Error::Dimensions(format!("{} vs {} scores", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InvalidArgument("Spearman needs at least 3 pairs".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("Spearman inputs must be finite".into()));
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mean, b - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("Spearman correlation of a constant list".into()));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Spearman { rho, p_value, n })
}

/// Mean over scenes `n` and the first `k` risk-ranked patterns of
/// `oracle[n] - ranked[n][i]`.
pub fn top_k_delta(oracle: &[f64], ranked: &[Vec<f64>], k: usize) -> Result<f64> {
    if oracle.len() != ranked.len() || oracle.is_empty() {
        return Err(Error::Dimensions("one oracle score per scene is required".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let mut total = 0.0;
    for (best, scores) in oracle.iter().zip(ranked) {
        if k > scores.len() {
            return Err(Error::InvalidArgument(format!("K = {k} exceeds {} candidates", scores.len())));
        }
        total += scores[..k].iter().map(|s| best - s).sum::<f64>();
    }
    Ok(total / (oracle.len() * k) as f64)
}

/// Fraction of scenes whose top-1 score trails the oracle by more than
/// `eta` relative.
pub fn q_score(oracle: &[f64], top1: &[f64], eta: f64) -> Result<f64> {
    if oracle.len() != top1.len() || oracle.is_empty() {
        return Err(Error::Dimensions("one top-1 score per scene is required".into()));
    }
    let exceed = oracle.iter().zip(top1).filter(|(best, s)| (*best - *s) / *best > eta).count();
    Ok(exceed as f64 / oracle.len() as f64)
}

/// Scores `s[i][j][k]` of pattern `i`, algorithm `j`, metric `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub patterns: Vec<usize>,
    pub algorithms: Vec<String>,
    pub metrics: Vec<String>,
    pub scores: Vec<Vec<Vec<f64>>>,
}

impl ScoreTable {
    pub fn new(
        patterns: Vec<usize>,
        algorithms: Vec<String>,
        metrics: Vec<String>,
        scores: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let rectangular = scores.len() == patterns.len()
            && scores
                .iter()
                .all(|row| row.len() == algorithms.len() && row.iter().all(|m| m.len() == metrics.len()));
        if !rectangular {
            return Err(Error::Dimensions("score table is not rectangular".into()));
        }
        if scores.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("score table entries must be finite".into()));
        }
        Ok(ScoreTable { patterns, algorithms, metrics, scores })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.scores[i][j][k]
    }

    /// Scores of every pattern for algorithm `j` and metric `k`.
    pub fn column(&self, j: usize, k: usize) -> Vec<f64> {
        self.scores.iter().map(|row| row[j][k]).collect()
    }

    pub fn algorithm_index(&self, name: &str) -> Option<usize> {
        self.algorithms.iter().position(|a| a == name)
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == name)
    }
}

/// Row index of the best-scoring pattern; ties go to the lower pattern id.
pub fn oracle_pattern(table: &ScoreTable, j: usize, k: usize) -> Result<usize> {
    if table.is_empty() || j >= table.algorithms.len() || k >= table.metrics.len() {
        return Err(Error::InvalidArgument("no such column in the score table".into()));
    }
    let mut best = 0;
    for i in 1..table.len() {
        let (s, b) = (table.get(i, j, k), table.get(best, j, k));
        if s > b || (s == b && table.patterns[i] < table.patterns[best]) {
            best = i;
        }
    }
    Ok(best)
}
