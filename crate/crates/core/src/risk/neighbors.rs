//! Non-saturated neighbor counts on the tiled canonical layout.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::patterns::CANONICAL_LAYOUT;

/// `count(l, s)`: unsaturated pixels in the `n × n` window around an
/// element-`l` pixel when the `s` largest-product elements are saturated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeighborCountTable {
    n: usize,
    /// Indexed by saturated-element bitmask (bit `m` = element `m`).
    by_mask: [[u32; 4]; 16],
}

/// Tile position of each sorted element in the canonical layout.
fn element_positions() -> [(usize, usize); 4] {
    let mut pos = [(0, 0); 4];
    for (r, row) in CANONICAL_LAYOUT.iter().enumerate() {
        for (c, &l) in row.iter().enumerate() {
            pos[l] = (r, c);
        }
    }
    pos
}

/// Builds the table by parity counting: of the `n` offsets in `[-h, h]`,
/// `2*floor(h/2) + 1` are even and the rest odd, and the element at offset
/// `(dr, dc)` depends only on the offset parities.
pub fn build_neighbor_table(n: usize) -> Result<NeighborCountTable> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("neighborhood size {n} must be odd and at least 3")));
    }
    let h = n / 2;
    let even = (2 * (h / 2) + 1) as u32;
    let odd = n as u32 - even;
    let per_parity = |p: usize| if p == 0 { even } else { odd };

    let pos = element_positions();
    let mut by_mask = [[0u32; 4]; 16];
    for (mask, row) in by_mask.iter_mut().enumerate() {
        for (l, count) in row.iter_mut().enumerate() {
            let mut removed = 0;
            for (m, &(rm, cm)) in pos.iter().enumerate() {
                if mask & (1 << m) != 0 {
                    removed += per_parity(rm ^ pos[l].0) * per_parity(cm ^ pos[l].1);
                }
            }
            *count = (n * n) as u32 - removed;
        }
    }
    Ok(NeighborCountTable { n, by_mask })
}

impl NeighborCountTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Count for element `l` when the top `s` elements are saturated.
    #[inline]
    pub fn count(&self, l: usize, s: usize) -> u32 {
        let mask = (0b1111 << (4 - s.min(4))) & 0b1111;
        self.by_mask[mask][l]
    }

    /// Count for element `l` for an arbitrary saturated-element set.
    pub fn count_masked(&self, l: usize, mask: usize) -> u32 {
        self.by_mask[mask & 0b1111][l]
    }
}
