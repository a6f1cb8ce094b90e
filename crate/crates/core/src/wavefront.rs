//! Anti-diagonal sweep engine shared by every passage-time routine.
//!
//! Coordinates are local to the sweep origin: cell `(i, j)` sits on level
//! `k = i + j`, and a level is stored as a dense slice over `i ∈ [lo, hi]`.
//! Two rolling buffers are indexed by `i + 1`; index 0 and every entry outside
//! the live range hold `-∞`, which makes the recursion
//!
//! ```text
//! T(i, j) = w(i, j) + max(T(i - 1, j), T(i, j - 1))
//! ```
//!
//! branch-free at region boundaries.

use crate::field::{Environment, LatticePoint};

/// A stored anti-diagonal: values for `i ∈ [lo, lo + values.len())`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Level {
    pub level: u32,
    pub lo: u32,
    pub values: Vec<f64>,
}

impl Level {
    pub fn hi(&self) -> u32 {
        self.lo + self.values.len() as u32 - 1
    }

    pub fn get(&self, i: u32) -> f64 {
        if i < self.lo || i > self.hi() {
            f64::NEG_INFINITY
        } else {
            self.values[(i - self.lo) as usize]
        }
    }
}

#[inline(always)]
fn max2(a: f64, b: f64) -> f64 {
    if a >= b {
        a
    } else {
        b
    }
}

pub(crate) struct Sweeper<V> {
    view: V,
    level: u32,
    lo: u32,
    hi: u32,
    cur: Vec<f64>,
    next: Vec<f64>,
    // Live range of the stale level held in `next`.
    next_lo: u32,
    next_hi: u32,
    next_live: bool,
}

impl<V: Environment> Sweeper<V> {
    /// Starts at level 0 with `T(0, 0) = w(0, 0)`. `max_i` bounds every `hi`
    /// the sweep will be asked for.
    pub fn start(view: V, max_i: u32) -> Self {
        let len = max_i as usize + 2;
        let mut cur = vec![f64::NEG_INFINITY; len];
        cur[1] = view.weight_at(0, 0);
        Sweeper {
            view,
            level: 0,
            lo: 0,
            hi: 0,
            cur,
            next: vec![f64::NEG_INFINITY; len],
            next_lo: 0,
            next_hi: 0,
            next_live: false,
        }
    }

    /// Restarts from a stored level.
    pub fn resume(view: V, max_i: u32, from: &Level) -> Self {
        let len = max_i as usize + 2;
        let mut cur = vec![f64::NEG_INFINITY; len];
        let lo = from.lo as usize;
        cur[lo + 1..lo + 1 + from.values.len()].copy_from_slice(&from.values);
        Sweeper {
            view,
            level: from.level,
            lo: from.lo,
            hi: from.hi(),
            cur,
            next: vec![f64::NEG_INFINITY; len],
            next_lo: 0,
            next_hi: 0,
            next_live: false,
        }
    }

    /// Values of the current level, `i ∈ [lo, hi]`.
    pub fn values(&self) -> &[f64] {
        &self.cur[self.lo as usize + 1..=self.hi as usize + 1]
    }

    /// Value at local column `i` of the current level (`-∞` outside range).
    pub fn get(&self, i: u32) -> f64 {
        if i < self.lo || i > self.hi {
            f64::NEG_INFINITY
        } else {
            self.cur[i as usize + 1]
        }
    }

    pub fn snapshot(&self) -> Level {
        Level {
            level: self.level,
            lo: self.lo,
            values: self.values().to_vec(),
        }
    }

    /// Computes the next level over `i ∈ [lo, hi]`, with `lo ≤ hi ≤ level + 1`.
    pub fn advance(&mut self, lo: u32, hi: u32) {
        debug_assert!(lo <= hi && hi <= self.level + 1);
        debug_assert!((hi as usize) + 1 < self.cur.len());
        let k = self.level + 1;
        if self.next_live {
            let (a, b) = (self.next_lo as usize + 1, self.next_hi as usize + 1);
            let (l, h) = (lo as usize + 1, hi as usize + 1);
            if a < l {
                self.next[a..l.min(b + 1)].fill(f64::NEG_INFINITY);
            }
            if b > h {
                self.next[(h + 1).max(a)..=b].fill(f64::NEG_INFINITY);
            }
        }
        let cur = &self.cur;
        let next = &mut self.next;
        for i in lo..=hi {
            let idx = i as usize;
            next[idx + 1] = self.view.weight_at(i, k - i) + max2(cur[idx], cur[idx + 1]);
        }
        std::mem::swap(&mut self.cur, &mut self.next);
        self.next_lo = self.lo;
        self.next_hi = self.hi;
        self.next_live = true;
        self.level = k;
        self.lo = lo;
        self.hi = hi;
    }
}

/// Column range of level `k` inside the local box `[0, wx] × [0, wy]`.
#[inline]
pub(crate) fn box_range(k: u32, wx: u32, wy: u32) -> (u32, u32) {
    (k.saturating_sub(wy), k.min(wx))
}

/// Local view shifted so that `anchor` becomes the origin.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shifted<E> {
    pub inner: E,
    pub anchor: LatticePoint,
}

impl<E: Environment> Environment for Shifted<E> {
    #[inline(always)]
    fn weight_at(&self, x: u32, y: u32) -> f64 {
        self.inner.weight_at(self.anchor.x + x, self.anchor.y + y)
    }

    fn extent(&self) -> LatticePoint {
        let e = self.inner.extent();
        LatticePoint::new(e.x - self.anchor.x, e.y - self.anchor.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::WeightTable;

    #[test]
    fn stale_cells_are_cleared_when_range_moves() {
        // Strip-like ranges that move right then shrink; compare to a direct
        // evaluation of the recursion on the same ranges.
        let rows: Vec<Vec<f64>> = (0..8).map(|y| (0..8).map(|x| 1.0 + ((x * 7 + y * 3) % 5) as f64).collect()).collect();
        let t = WeightTable::from_rows(&rows).unwrap();
        let ranges = [(0, 1), (1, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)];
        let mut s = Sweeper::start(&t, 7);
        let mut direct = vec![vec![f64::NEG_INFINITY; 9]; 9];
        direct[0][0] = rows[0][0];
        for (step, &(lo, hi)) in ranges.iter().enumerate() {
            let k = step as u32 + 1;
            s.advance(lo, hi);
            for i in lo..=hi {
                let j = k - i;
                let left = if i > 0 { direct[i as usize - 1][j as usize] } else { f64::NEG_INFINITY };
                let below = if j > 0 { direct[i as usize][j as usize - 1] } else { f64::NEG_INFINITY };
                direct[i as usize][j as usize] = rows[j as usize][i as usize] + left.max(below);
            }
            for i in 0..=7u32 {
                let expect = if i >= lo && i <= hi { direct[i as usize][(k - i) as usize] } else { f64::NEG_INFINITY };
                assert_eq!(s.get(i), expect, "level {k} column {i}");
            }
        }
    }

    #[test]
    fn resume_continues_identically() {
        let rows: Vec<Vec<f64>> = (0..6).map(|y| (0..6).map(|x| 0.5 + ((x * 5 + y * 11) % 7) as f64).collect()).collect();
        let t = WeightTable::from_rows(&rows).unwrap();
        let mut a = Sweeper::start(&t, 5);
        for k in 1..=4 {
            let (lo, hi) = box_range(k, 5, 5);
            a.advance(lo, hi);
        }
        let snap = a.snapshot();
        let mut b = Sweeper::resume(&t, 5, &snap);
        for k in 5..=10 {
            let (lo, hi) = box_range(k, 5, 5);
            a.advance(lo, hi);
            b.advance(lo, hi);
            assert_eq!(a.values(), b.values());
        }
    }
}
