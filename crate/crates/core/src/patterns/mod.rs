//! Exposure/gain levels, 2×2 multiplex patterns and their canonical forms.
//!
//! A [`Pattern`] assigns one [`Level`] (an exposure `tau` and a conversion
//! gain `alpha`) to each of the four slots of the 2×2 tile, stored row-major.
//! Two patterns are equivalent when one is a slot permutation of the other;
//! [`CanonicalPattern`] is the representative of that class. Its layout puts
//! the levels, sorted ascending by `tau * alpha`, at
//!
//! ```text
//! [ l0  l2 ]
//! [ l3  l1 ]
//! ```
//!
//! which alternates small and large products across both axes.

mod enumerate;

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{
    binomial, class_count, combinations, enumerate_assignments, enumerate_classes, Assignments, Combinations,
};

/// Global exposure duration of the default sensor, in seconds.
pub const GLOBAL_EXPOSURE_S: f64 = 0.030;
/// Exposure multipliers of the default level set.
pub const DEFAULT_EXPOSURE_FACTORS: [f64; 3] = [0.25, 0.5, 1.0];
/// Conversion gains of the default level set.
pub const DEFAULT_GAINS: [f64; 3] = [1.0, 10.0, 80.0];

/// Sorted element index at each tile position of a canonical pattern.
pub const CANONICAL_LAYOUT: [[usize; 2]; 2] = [[0, 2], [3, 1]];
/// Row-major slot holding sorted element `l` in a canonical pattern.
pub const CANONICAL_SLOTS: [usize; 4] = [0, 3, 1, 2];

/// One exposure/gain setting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Level {
    pub tau: f64,
    pub alpha: f64,
}

impl Level {
    pub fn new(tau: f64, alpha: f64) -> Result<Self> {
        let level = Level { tau, alpha };
        level.validate()?;
        Ok(level)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidPattern(format!("exposure {} must be positive", self.tau)));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidPattern(format!("gain {} must be positive", self.alpha)));
        }
        Ok(())
    }

    /// Exposure-gain product; it sets the saturation cutoff of the element.
    #[inline]
    pub fn product(&self) -> f64 {
        self.tau * self.alpha
    }

    fn bits(&self) -> (u64, u64) {
        (self.tau.to_bits(), self.alpha.to_bits())
    }
}

impl PartialEq for Level {
    fn eq(&self, other: &Self) -> bool {
        self.bits() == other.bits()
    }
}

impl Eq for Level {}

impl Hash for Level {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits().hash(state);
    }
}

/// Ascending by product, ties broken by exposure then gain.
impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        self.product()
            .total_cmp(&other.product())
            .then(self.tau.total_cmp(&other.tau))
            .then(self.alpha.total_cmp(&other.alpha))
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The allowed levels, sorted ascending.
///
/// Levels with equal products but different exposure/gain are kept apart:
/// their noise differs even though they saturate at the same radiance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelSetDoc", into = "LevelSetDoc")]
pub struct LevelSet {
    levels: Vec<Level>,
}

#[derive(Serialize, Deserialize)]
struct LevelSetDoc {
    levels: Vec<Level>,
}

impl TryFrom<LevelSetDoc> for LevelSet {
    type Error = Error;

    fn try_from(doc: LevelSetDoc) -> Result<Self> {
        LevelSet::new(doc.levels)
    }
}

impl From<LevelSet> for LevelSetDoc {
    fn from(set: LevelSet) -> Self {
        LevelSetDoc { levels: set.levels }
    }
}

impl LevelSet {
    pub fn new(mut levels: Vec<Level>) -> Result<Self> {
        for level in &levels {
            level.validate().map_err(|e| Error::InvalidLevels(e.to_string()))?;
        }
        levels.sort();
        levels.dedup();
        if levels.is_empty() {
            return Err(Error::InvalidLevels("at least one level is required".into()));
        }
        Ok(LevelSet { levels })
    }

    /// Cross product of exposures and gains.
    pub fn cross(exposures: &[f64], gains: &[f64]) -> Result<Self> {
        let levels =
            exposures.iter().flat_map(|&tau| gains.iter().map(move |&alpha| Level { tau, alpha })).collect();
        Self::new(levels)
    }

    /// The nine-level set of the default sensor: exposures of 0.25, 0.5 and
    /// 1 times 30 ms crossed with gains 1, 10 and 80.
    pub fn default_levels() -> Self {
        let exposures: Vec<f64> = DEFAULT_EXPOSURE_FACTORS.iter().map(|f| f * GLOBAL_EXPOSURE_S).collect();
        Self::cross(&exposures, &DEFAULT_GAINS).expect("default levels are valid")
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn get(&self, index: usize) -> Option<Level> {
        self.levels.get(index).copied()
    }

    pub fn contains(&self, level: &Level) -> bool {
        self.levels.binary_search(level).is_ok()
    }

    pub fn min_exposure(&self) -> f64 {
        self.levels.iter().map(|l| l.tau).fold(f64::INFINITY, f64::min)
    }
}

/// A 2×2 exposure/gain assignment, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PatternDoc", into = "PatternDoc")]
pub struct Pattern {
    pub levels: [Level; 4],
}

#[derive(Serialize, Deserialize)]
struct PatternDoc {
    tau: [f64; 4],
    alpha: [f64; 4],
}

impl TryFrom<PatternDoc> for Pattern {
    type Error = Error;

    fn try_from(doc: PatternDoc) -> Result<Self> {
        Pattern::new(doc.tau, doc.alpha)
    }
}

impl From<Pattern> for PatternDoc {
    fn from(p: Pattern) -> Self {
        PatternDoc { tau: p.levels.map(|l| l.tau), alpha: p.levels.map(|l| l.alpha) }
    }
}

impl Pattern {
    pub fn new(tau: [f64; 4], alpha: [f64; 4]) -> Result<Self> {
        let mut levels = [Level { tau: 1.0, alpha: 1.0 }; 4];
        for k in 0..4 {
            levels[k] = Level::new(tau[k], alpha[k])?;
        }
        Ok(Pattern { levels })
    }

    pub fn from_levels(levels: [Level; 4]) -> Result<Self> {
        for l in &levels {
            l.validate()?;
        }
        Ok(Pattern { levels })
    }

    /// Exposure-only pattern at unit gain.
    pub fn with_unit_gain(tau: [f64; 4]) -> Result<Self> {
        Self::new(tau, [1.0; 4])
    }

    pub fn uniform(level: Level) -> Self {
        Pattern { levels: [level; 4] }
    }

    pub fn tau(&self) -> [f64; 4] {
        self.levels.map(|l| l.tau)
    }

    pub fn alpha(&self) -> [f64; 4] {
        self.levels.map(|l| l.alpha)
    }

    /// Checks every level is positive, finite and drawn from `set`.
    pub fn validate_in(&self, set: &LevelSet) -> Result<()> {
        for l in &self.levels {
            l.validate()?;
            if !set.contains(l) {
                return Err(Error::InvalidPattern(format!(
                    "level (tau={}, alpha={}) is not in the level set",
                    l.tau, l.alpha
                )));
            }
        }
        Ok(())
    }

    /// Row-major slot used by pixel `(row, col)` of a tiled sensor.
    #[inline]
    pub fn slot_at(row: usize, col: usize) -> usize {
        2 * (row & 1) + (col & 1)
    }

    #[inline]
    pub fn level_at(&self, row: usize, col: usize) -> Level {
        self.levels[Self::slot_at(row, col)]
    }

    /// Applies a slot permutation: slot `k` of the result takes slot `perm[k]`.
    pub fn permuted(&self, perm: [usize; 4]) -> Pattern {
        Pattern { levels: perm.map(|k| self.levels[k]) }
    }

    pub fn sorted_levels(&self) -> [Level; 4] {
        let mut sorted = self.levels;
        sorted.sort();
        sorted
    }

    pub fn canonicalize(&self) -> CanonicalPattern {
        CanonicalPattern::from_sorted(self.sorted_levels())
    }
}

/// Representative of a pattern equivalence class.
///
/// Ordering is lexicographic on the sorted levels, which gives rankings a
/// deterministic tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Pattern", into = "Pattern")]
pub struct CanonicalPattern {
    pattern: Pattern,
}

impl TryFrom<Pattern> for CanonicalPattern {
    type Error = Error;

    fn try_from(p: Pattern) -> Result<Self> {
        Ok(p.canonicalize())
    }
}

impl From<CanonicalPattern> for Pattern {
    fn from(c: CanonicalPattern) -> Self {
        c.pattern
    }
}

impl CanonicalPattern {
    /// Builds the canonical layout from levels already sorted ascending.
    pub fn from_sorted(sorted: [Level; 4]) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        let mut levels = sorted;
        for (l, &slot) in CANONICAL_SLOTS.iter().enumerate() {
            levels[slot] = sorted[l];
        }
        CanonicalPattern { pattern: Pattern { levels } }
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    /// The `l`-th smallest level (by product).
    #[inline]
    pub fn element(&self, l: usize) -> Level {
        self.pattern.levels[CANONICAL_SLOTS[l]]
    }

    pub fn elements(&self) -> [Level; 4] {
        [0, 1, 2, 3].map(|l| self.element(l))
    }

    /// Sorted element index used by pixel `(row, col)`.
    #[inline]
    pub fn element_index_at(row: usize, col: usize) -> usize {
        CANONICAL_LAYOUT[row & 1][col & 1]
    }
}

impl Ord for CanonicalPattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.elements().cmp(&other.elements())
    }
}

impl PartialOrd for CanonicalPattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
