//! Direct enumeration of pattern equivalence classes.
//!
//! A class is a multiset of `M` levels drawn from `L`. Every multiset uses
//! some `k` distinct levels, each at least once, so it is fixed by a
//! `k`-combination of levels plus a composition of `M` into `k` positive
//! parts (the `k - 1` split points of the `M` slots). Walking both choices
//! yields each class exactly once and gives the count
//! `sum_{k=1}^{min(L,M)} C(L,k) C(M-1,k-1)`.

use crate::error::{Error, Result};

use super::{CanonicalPattern, Level, LevelSet};

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) since acc = C(n, i).
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    u64::try_from(acc).ok()
}

/// Number of equivalence classes of `m`-slot patterns over `l` levels.
pub fn class_count(l: u64, m: u64) -> Result<u64> {
    if l == 0 || m == 0 {
        return Err(Error::InvalidArgument("class_count needs L >= 1 and M >= 1".into()));
    }
    let mut total: u64 = 0;
    for k in 1..=l.min(m) {
        let term = binomial(l, k)
            .zip(binomial(m - 1, k - 1))
            .and_then(|(a, b)| a.checked_mul(b))
            .ok_or(Error::Overflow("class_count"))?;
        total = total.checked_add(term).ok_or(Error::Overflow("class_count"))?;
    }
    Ok(total)
}

/// Index-increasing `k`-combinations of a list, in lexicographic index order.
///
/// Each step returns the current selection, then advances the rightmost
/// index that still has room and re-seats every index to its right directly
/// after its left neighbour.
#[derive(Debug, Clone)]
pub struct Combinations<'a, T> {
    options: &'a [T],
    indices: Vec<usize>,
    remaining: u64,
}

pub fn combinations<T: Clone>(k: usize, options: &[T]) -> Combinations<'_, T> {
    let n = options.len();
    let remaining = if k > n { 0 } else { binomial(n as u64, k as u64).unwrap_or(u64::MAX) };
    Combinations { options, indices: (0..k).collect(), remaining }
}

impl<T: Clone> Iterator for Combinations<'_, T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let selected = self.indices.iter().map(|&i| self.options[i].clone()).collect();

        let n = self.options.len();
        let k = self.indices.len();
        // Indices at or after `reseat` are undetermined and get refilled.
        let mut reseat = 0;
        for i in (0..k).rev() {
            if self.indices[i] < n - k + i {
                self.indices[i] += 1;
                reseat = i + 1;
                break;
            }
        }
        for i in reseat..k {
            self.indices[i] = if i > 0 { self.indices[i - 1] + 1 } else { 0 };
        }
        Some(selected)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, Some(r))
    }
}

/// Stream of level assignments, one per equivalence class of `m` slots.
///
/// Each item lists the `m` levels in ascending order.
pub struct Assignments<'a> {
    levels: &'a [Level],
    m: usize,
    k: usize,
    selections: Combinations<'a, Level>,
    selected: Option<Vec<Level>>,
    splits: Combinations<'static, usize>,
}

static SPLIT_POSITIONS: [usize; 64] = {
    let mut a = [0usize; 64];
    let mut i = 0;
    while i < 64 {
        a[i] = i + 1;
        i += 1;
    }
    a
};

impl<'a> Assignments<'a> {
    fn new(levels: &'a [Level], m: usize) -> Self {
        assert!(m >= 1 && m <= SPLIT_POSITIONS.len(), "unsupported pattern size {m}");
        Assignments {
            levels,
            m,
            k: 1,
            selections: combinations(1, levels),
            selected: None,
            splits: combinations(0, &SPLIT_POSITIONS[..m - 1]),
        }
    }

    fn build(&self, selected: &[Level], splits: &[usize]) -> Vec<Level> {
        let mut assignment = vec![selected[0]; self.m];
        for j in 0..splits.len() {
            let end = splits.get(j + 1).copied().unwrap_or(self.m);
            for slot in &mut assignment[splits[j]..end] {
                *slot = selected[j + 1];
            }
        }
        assignment
    }
}

impl Iterator for Assignments<'_> {
    type Item = Vec<Level>;

    fn next(&mut self) -> Option<Vec<Level>> {
        let max_k = self.levels.len().min(self.m);
        loop {
            if let Some(selected) = &self.selected {
                if let Some(splits) = self.splits.next() {
                    return Some(self.build(selected, &splits));
                }
            }
            if let Some(selected) = self.selections.next() {
                self.selected = Some(selected);
                self.splits = combinations(self.k - 1, &SPLIT_POSITIONS[..self.m - 1]);
                continue;
            }
            if self.k >= max_k {
                return None;
            }
            self.k += 1;
            self.selections = combinations(self.k, self.levels);
            self.selected = None;
        }
    }
}

/// Enumerates the equivalence classes of `m`-slot patterns as sorted level
/// lists. Supports `1 <= m <= 65`.
pub fn enumerate_assignments(levels: &LevelSet, m: usize) -> Assignments<'_> {
    Assignments::new(levels.levels(), m)
}

/// Enumerates all 2×2 pattern equivalence classes in canonical form.
///
/// Order: by number of distinct levels, then level combination, then split
/// positions. The order is stable and pattern ids refer to it.
pub fn enumerate_classes(levels: &LevelSet) -> impl Iterator<Item = CanonicalPattern> + '_ {
    enumerate_assignments(levels, 4).map(|a| CanonicalPattern::from_sorted([a[0], a[1], a[2], a[3]]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_count_examples() {
        assert_eq!(class_count(9, 4).unwrap(), 495);
        assert_eq!(class_count(1, 4).unwrap(), 1);
        assert_eq!(class_count(3, 2).unwrap(), 6);
        assert!(class_count(0, 4).is_err());
    }

    #[test]
    fn class_count_reports_overflow() {
        assert!(matches!(class_count(1 << 40, 1 << 20), Err(Error::Overflow(_))));
    }

    #[test]
    fn combinations_examples() {
        let got: Vec<_> = combinations(2, &['a', 'b', 'c']).collect();
        assert_eq!(got, vec![vec!['a', 'b'], vec!['a', 'c'], vec!['b', 'c']]);

        let got: Vec<_> = combinations(0, &['a', 'b']).collect();
        assert_eq!(got, vec![Vec::<char>::new()]);

        let got: Vec<_> = combinations(3, &[1, 2, 3]).collect();
        assert_eq!(got, vec![vec![1, 2, 3]]);

        assert_eq!(combinations(4, &[1, 2, 3]).count(), 0);
    }

    #[test]
    fn combinations_are_lexicographic() {
        let items: Vec<usize> = (0..7).collect();
        let got: Vec<_> = combinations(3, &items).collect();
        assert_eq!(got.len(), 35);
        assert!(got.windows(2).all(|w| w[0] < w[1]));
        assert!(got.iter().all(|c| c.windows(2).all(|p| p[0] < p[1])));
    }

    #[test]
    fn enumeration_sizes() {
        let set = LevelSet::default_levels();
        assert_eq!(enumerate_classes(&set).count(), 495);

        let single = LevelSet::cross(&[1.0], &[1.0]).unwrap();
        let all: Vec<_> = enumerate_classes(&single).collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].pattern().tau(), [1.0; 4]);
    }

    #[test]
    fn assignments_are_sorted() {
        let set = LevelSet::default_levels();
        for a in enumerate_assignments(&set, 4) {
            assert!(a.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
