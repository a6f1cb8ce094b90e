//! Last passage times by dynamic programming.
//!
//! Passage times include the weights of both endpoints:
//! `T(u, v) = max over up/right paths π from u to v of Σ_{w ∈ π} ω_w`.
//! Whenever two passage times are glued at a shared vertex, that vertex's
//! weight must be subtracted once.

use crate::error::{LppError, Result};
use crate::field::{Environment, LatticePoint, Mirrored};
use crate::wavefront::{box_range, Level, Shifted, Sweeper};

/// Largest box (in cells) that `passage_full` will materialize by default.
pub const DEFAULT_FULL_GRID_BUDGET: u64 = 1 << 24;

/// Default spacing of stored anti-diagonals for checkpointed surfaces.
pub const DEFAULT_CHECKPOINT_STRIDE: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Passage times from the anchor (the source) to each point.
    Forward,
    /// Passage times from each point to the anchor (the sink).
    Backward,
}

#[derive(Debug, Clone)]
enum Storage {
    Full(Vec<f64>),
    Checkpointed { checkpoints: Vec<Level> },
}

/// Passage times over a box with one corner at the anchor.
///
/// The box is `[anchor, far]` for forward surfaces and `[far, anchor]` for
/// backward ones. The surface owns (a copy of) its environment so that
/// checkpointed storage can recompute the levels it did not keep.
#[derive(Debug, Clone)]
pub struct PassageSurface<E> {
    env: E,
    anchor: LatticePoint,
    far: LatticePoint,
    orientation: Orientation,
    storage: Storage,
}

fn cells(a: LatticePoint, b: LatticePoint) -> u64 {
    (b.x - a.x + 1) as u64 * (b.y - a.y + 1) as u64
}

fn check_order(u: LatticePoint, v: LatticePoint) -> Result<()> {
    if u.precedes(v) {
        Ok(())
    } else {
        Err(LppError::Order(format!("{u} is not ⪯ {v}")))
    }
}

fn check_extent<E: Environment>(env: &E, p: LatticePoint) -> Result<()> {
    if env.contains(p) {
        Ok(())
    } else {
        Err(LppError::Range(format!("{p} outside field extent {}", env.extent())))
    }
}

/// Row-major full-grid DP over the local box `[0, wx] × [0, wy]`.
fn fill_full<V: Environment>(view: V, wx: u32, wy: u32) -> Vec<f64> {
    let width = wx as usize + 1;
    let mut t = vec![0.0; width * (wy as usize + 1)];
    let mut acc = f64::NEG_INFINITY;
    for i in 0..=wx {
        acc = view.weight_at(i, 0) + if i == 0 { 0.0 } else { acc };
        t[i as usize] = acc;
    }
    for j in 1..=wy {
        let (done, rest) = t.split_at_mut(j as usize * width);
        let below = &done[(j as usize - 1) * width..];
        let row = &mut rest[..width];
        let mut left = f64::NEG_INFINITY;
        for i in 0..width {
            let b = below[i];
            let best = if left >= b { left } else { b };
            left = view.weight_at(i as u32, j) + best;
            row[i] = left;
        }
    }
    t
}

/// Sweeps the local box keeping every `stride`-th level plus the last one.
fn fill_checkpoints<V: Environment>(view: V, wx: u32, wy: u32, stride: u32) -> Vec<Level> {
    let mut s = Sweeper::start(view, wx);
    let last = wx + wy;
    let mut out = vec![s.snapshot()];
    for k in 1..=last {
        let (lo, hi) = box_range(k, wx, wy);
        s.advance(lo, hi);
        if k % stride == 0 || k == last {
            out.push(s.snapshot());
        }
    }
    out
}

/// Recomputes levels `from.level ..= to_level` of the local box.
fn recompute_block<V: Environment>(view: V, wx: u32, wy: u32, from: &Level, to_level: u32) -> Vec<Level> {
    let mut s = Sweeper::resume(view, wx, from);
    let mut out = Vec::with_capacity((to_level - from.level + 1) as usize);
    out.push(from.clone());
    for k in from.level + 1..=to_level {
        let (lo, hi) = box_range(k, wx, wy);
        s.advance(lo, hi);
        out.push(s.snapshot());
    }
    out
}

impl<E: Environment + Clone> PassageSurface<E> {
    pub fn anchor(&self) -> LatticePoint {
        self.anchor
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_full_grid(&self) -> bool {
        matches!(self.storage, Storage::Full(_))
    }

    pub fn environment(&self) -> &E {
        &self.env
    }

    /// Lower-left and upper-right corners of the surface's scope.
    pub fn scope(&self) -> (LatticePoint, LatticePoint) {
        match self.orientation {
            Orientation::Forward => (self.anchor, self.far),
            Orientation::Backward => (self.far, self.anchor),
        }
    }

    fn local_dims(&self) -> (u32, u32) {
        let (a, b) = self.scope();
        (b.x - a.x, b.y - a.y)
    }

    pub(crate) fn to_local(&self, p: LatticePoint) -> Option<(u32, u32)> {
        let (a, b) = self.scope();
        if !(a.precedes(p) && p.precedes(b)) {
            return None;
        }
        Some(match self.orientation {
            Orientation::Forward => (p.x - a.x, p.y - a.y),
            Orientation::Backward => (b.x - p.x, b.y - p.y),
        })
    }

    pub(crate) fn to_global(&self, i: u32, j: u32) -> LatticePoint {
        match self.orientation {
            Orientation::Forward => LatticePoint::new(self.anchor.x + i, self.anchor.y + j),
            Orientation::Backward => LatticePoint::new(self.anchor.x - i, self.anchor.y - j),
        }
    }

    /// Passage time between the anchor and `p` (in the surface's direction).
    ///
    /// Checkpointed surfaces recompute the enclosing block of levels.
    pub fn value(&self, p: LatticePoint) -> Result<f64> {
        let (i, j) = self
            .to_local(p)
            .ok_or_else(|| LppError::Range(format!("{p} outside surface scope")))?;
        match &self.storage {
            Storage::Full(t) => {
                let width = self.local_dims().0 as usize + 1;
                Ok(t[j as usize * width + i as usize])
            }
            Storage::Checkpointed { checkpoints } => {
                let k = i + j;
                let base = checkpoints.iter().rev().find(|c| c.level <= k).expect("level 0 is stored");
                if base.level == k {
                    return Ok(base.get(i));
                }
                let block = self.recompute(base, k);
                Ok(block.last().expect("nonempty block").get(i))
            }
        }
    }

    fn recompute(&self, from: &Level, to_level: u32) -> Vec<Level> {
        let (wx, wy) = self.local_dims();
        match self.orientation {
            Orientation::Forward => recompute_block(
                Shifted {
                    inner: &self.env,
                    anchor: self.anchor,
                },
                wx,
                wy,
                from,
                to_level,
            ),
            Orientation::Backward => recompute_block(Mirrored::new(&self.env, self.anchor), wx, wy, from, to_level),
        }
    }

    /// Backtracks the maximizing path from local `(i, j)` to the anchor,
    /// returning local coordinates ordered from `(i, j)` down to `(0, 0)`.
    /// On exact ties the step goes to `(i - 1, j)`.
    pub(crate) fn backtrack_local(&self, i: u32, j: u32) -> Vec<(u32, u32)> {
        let mut path = Vec::with_capacity((i + j + 1) as usize);
        let (mut i, mut j) = (i, j);
        path.push((i, j));
        match &self.storage {
            Storage::Full(t) => {
                let width = self.local_dims().0 as usize + 1;
                let at = |i: u32, j: u32| t[j as usize * width + i as usize];
                while i > 0 || j > 0 {
                    if j == 0 || (i > 0 && at(i - 1, j) >= at(i, j - 1)) {
                        i -= 1;
                    } else {
                        j -= 1;
                    }
                    path.push((i, j));
                }
            }
            Storage::Checkpointed { checkpoints } => {
                while i + j > 0 {
                    let k = i + j;
                    let base = checkpoints.iter().rev().find(|c| c.level < k).expect("level 0 is stored");
                    let block = self.recompute(base, k);
                    // block[m] holds level base.level + m
                    while i + j > base.level {
                        let prev = &block[(i + j - 1 - base.level) as usize];
                        let left = if i > 0 { prev.get(i - 1) } else { f64::NEG_INFINITY };
                        let below = if j > 0 { prev.get(i) } else { f64::NEG_INFINITY };
                        if j == 0 || (i > 0 && left >= below) {
                            i -= 1;
                        } else {
                            j -= 1;
                        }
                        path.push((i, j));
                    }
                }
            }
        }
        path
    }
}

/// Forward full-grid surface from `source` over the box `[source, corner]`.
pub fn passage_full<E: Environment + Clone>(env: &E, source: LatticePoint, corner: LatticePoint) -> Result<PassageSurface<E>> {
    passage_full_with_budget(env, source, corner, DEFAULT_FULL_GRID_BUDGET)
}

pub fn passage_full_with_budget<E: Environment + Clone>(
    env: &E,
    source: LatticePoint,
    corner: LatticePoint,
    budget: u64,
) -> Result<PassageSurface<E>> {
    check_order(source, corner)?;
    check_extent(env, corner)?;
    let n = cells(source, corner);
    if n > budget {
        return Err(LppError::Capacity { cells: n, budget });
    }
    let view = Shifted {
        inner: env,
        anchor: source,
    };
    let values = fill_full(view, corner.x - source.x, corner.y - source.y);
    Ok(PassageSurface {
        env: env.clone(),
        anchor: source,
        far: corner,
        orientation: Orientation::Forward,
        storage: Storage::Full(values),
    })
}

/// Forward surface keeping only every `stride`-th anti-diagonal; memory is
/// `O(width · levels / stride)` and lookups recompute at most `stride` levels.
pub fn passage_checkpointed<E: Environment + Clone>(
    env: &E,
    source: LatticePoint,
    corner: LatticePoint,
    stride: u32,
) -> Result<PassageSurface<E>> {
    check_order(source, corner)?;
    check_extent(env, corner)?;
    if stride == 0 {
        return Err(LppError::Contract("checkpoint stride must be positive".into()));
    }
    let view = Shifted {
        inner: env,
        anchor: source,
    };
    let checkpoints = fill_checkpoints(view, corner.x - source.x, corner.y - source.y, stride);
    Ok(PassageSurface {
        env: env.clone(),
        anchor: source,
        far: corner,
        orientation: Orientation::Forward,
        storage: Storage::Checkpointed { checkpoints },
    })
}

/// Full-grid backward surface: the value at `w ∈ [low, sink]` is `T(w, sink)`.
pub fn backward_surface<E: Environment + Clone>(env: &E, sink: LatticePoint, low: LatticePoint) -> Result<PassageSurface<E>> {
    backward_surface_with_budget(env, sink, low, DEFAULT_FULL_GRID_BUDGET)
}

pub fn backward_surface_with_budget<E: Environment + Clone>(
    env: &E,
    sink: LatticePoint,
    low: LatticePoint,
    budget: u64,
) -> Result<PassageSurface<E>> {
    check_order(low, sink)?;
    check_extent(env, sink)?;
    let n = cells(low, sink);
    if n > budget {
        return Err(LppError::Capacity { cells: n, budget });
    }
    let values = fill_full(Mirrored::new(env, sink), sink.x - low.x, sink.y - low.y);
    Ok(PassageSurface {
        env: env.clone(),
        anchor: sink,
        far: low,
        orientation: Orientation::Backward,
        storage: Storage::Full(values),
    })
}

pub fn backward_checkpointed<E: Environment + Clone>(
    env: &E,
    sink: LatticePoint,
    low: LatticePoint,
    stride: u32,
) -> Result<PassageSurface<E>> {
    check_order(low, sink)?;
    check_extent(env, sink)?;
    if stride == 0 {
        return Err(LppError::Contract("checkpoint stride must be positive".into()));
    }
    let checkpoints = fill_checkpoints(Mirrored::new(env, sink), sink.x - low.x, sink.y - low.y, stride);
    Ok(PassageSurface {
        env: env.clone(),
        anchor: sink,
        far: low,
        orientation: Orientation::Backward,
        storage: Storage::Checkpointed { checkpoints },
    })
}

/// Sweeps the box `[source, corner]` once and visits every anti-diagonal as
/// `(level, lo, values)`, where `values[m]` is the passage time from `source`
/// to `source + (lo + m, level - lo - m)`.
pub fn sweep_box<E, F>(env: &E, source: LatticePoint, corner: LatticePoint, mut visit: F) -> Result<()>
where
    E: Environment,
    F: FnMut(u32, u32, &[f64]),
{
    check_order(source, corner)?;
    check_extent(env, corner)?;
    let (wx, wy) = (corner.x - source.x, corner.y - source.y);
    let mut s = Sweeper::start(
        Shifted {
            inner: env,
            anchor: source,
        },
        wx,
    );
    visit(0, 0, s.values());
    for k in 1..=wx + wy {
        let (lo, hi) = box_range(k, wx, wy);
        s.advance(lo, hi);
        visit(k, lo, s.values());
    }
    Ok(())
}

/// Passage times from `source` to each target, from one wavefront sweep of
/// the smallest box containing them all.
pub fn passage_to_targets<E: Environment>(env: &E, source: LatticePoint, targets: &[LatticePoint]) -> Result<Vec<f64>> {
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    for &t in targets {
        check_order(source, t)?;
    }
    let corner = targets
        .iter()
        .fold(source, |c, t| LatticePoint::new(c.x.max(t.x), c.y.max(t.y)));
    check_extent(env, corner)?;
    let (wx, wy) = (corner.x - source.x, corner.y - source.y);
    // Only levels up to the farthest target are needed.
    let last = targets.iter().map(|t| t.level() - source.level()).max().unwrap_or(0);
    let mut by_level: Vec<(u32, u32, usize)> = targets
        .iter()
        .enumerate()
        .map(|(idx, t)| (t.level() - source.level(), t.x - source.x, idx))
        .collect();
    by_level.sort_unstable();
    let mut out = vec![0.0; targets.len()];
    let mut s = Sweeper::start(
        Shifted {
            inner: env,
            anchor: source,
        },
        wx,
    );
    let mut next = 0;
    for k in 0..=last {
        if k > 0 {
            let (lo, hi) = box_range(k, wx, wy);
            s.advance(lo, hi);
        }
        while next < by_level.len() && by_level[next].0 == k {
            let (_, i, idx) = by_level[next];
            out[idx] = s.get(i);
            next += 1;
        }
    }
    Ok(out)
}

/// Passage time between two points, without storing a surface.
pub fn passage_time<E: Environment>(env: &E, u: LatticePoint, v: LatticePoint) -> Result<f64> {
    Ok(passage_to_targets(env, u, &[v])?[0])
}

/// `T(0, (k, k))` for `k = 0..=n`, in one sweep with `O(n)` memory.
pub fn diagonal_profile<E: Environment>(env: &E, n: u32) -> Result<Vec<f64>> {
    let targets: Vec<LatticePoint> = (0..=n).map(LatticePoint::diag).collect();
    passage_to_targets(env, LatticePoint::ORIGIN, &targets)
}

/// Passage times `L[s] = T(0, (n + s, n - s))` for `|s| ≤ s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub n: u32,
    pub s_max: u32,
    values: Vec<f64>,
}

impl Profile {
    /// `L[s]`; panics if `|s| > s_max`.
    pub fn get(&self, s: i64) -> f64 {
        assert!(s.unsigned_abs() <= self.s_max as u64, "offset {s} outside profile");
        self.values[(s + self.s_max as i64) as usize]
    }

    /// Values ordered from `s = -s_max` to `s = s_max`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sup_{|s'| < s} (L[s'] - L[0])` for `s = 1..=s_max`; entry `s - 1`.
    pub fn sup_increments(&self) -> Vec<f64> {
        let center = self.get(0);
        let mut out = Vec::with_capacity(self.s_max as usize);
        let mut best = 0.0f64;
        for s in 1..=self.s_max as i64 {
            // sup over |s'| ≤ s - 1
            if s > 1 {
                best = best.max(self.get(s - 1) - center).max(self.get(1 - s) - center);
            }
            out.push(best);
        }
        out
    }
}

/// Weight profile along the anti-diagonal `x + y = 2n`.
pub fn antidiagonal_profile<E: Environment>(env: &E, n: u32, s_max: u32) -> Result<Profile> {
    if s_max >= n {
        return Err(LppError::Range(format!("s_max = {s_max} must be < n = {n}")));
    }
    let side = n + s_max;
    check_extent(env, LatticePoint::diag(side))?;
    let mut s = Sweeper::start(
        Shifted {
            inner: env,
            anchor: LatticePoint::ORIGIN,
        },
        side,
    );
    for k in 1..=2 * n {
        let (lo, hi) = box_range(k, side, side);
        s.advance(lo, hi);
    }
    let values = (0..=2 * s_max).map(|m| s.get(n - s_max + m)).collect();
    Ok(Profile { n, s_max, values })
}

/// The strip `0 ≤ x + y ≤ 2r, |x − y| ≤ ⌊θ r^{2/3}⌋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripRegion {
    pub r: u32,
    pub theta: f64,
    pub width: u32,
}

impl StripRegion {
    pub fn new(r: u32, theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(LppError::Domain(format!("strip parameter θ = {theta} must be positive")));
        }
        Ok(StripRegion {
            r,
            theta,
            width: strip_width(r, theta),
        })
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        p.level() <= 2 * self.r && p.offset().unsigned_abs() <= self.width as u64
    }
}

/// `⌊θ r^{2/3}⌋`, computed through `cbrt` so that perfect cubes are exact.
pub fn strip_width(r: u32, theta: f64) -> u32 {
    let scale = (r as f64).cbrt().powi(2);
    (theta * scale + 1e-9).floor().max(0.0) as u32
}

/// Best passage time from `u` to `v` over paths that stay in the strip.
pub fn passage_constrained<E: Environment>(env: &E, region: &StripRegion, u: LatticePoint, v: LatticePoint) -> Result<f64> {
    if !u.precedes(v) {
        return Err(LppError::Admissibility(format!("{u} is not ⪯ {v}")));
    }
    if !region.contains(u) || !region.contains(v) {
        return Err(LppError::Admissibility(format!("endpoint outside strip of half-width {}", region.width)));
    }
    check_extent(env, v)?;
    if region.width == 0 && u != v {
        return Err(LppError::Domain("strip of half-width 0 has no connected paths".into()));
    }
    let (wx, wy) = (v.x - u.x, v.y - u.y);
    let w = region.width as i64;
    let off = u.offset();
    let mut s = Sweeper::start(Shifted { inner: env, anchor: u }, wx);
    for k in 1..=wx + wy {
        let (blo, bhi) = box_range(k, wx, wy);
        // |off + 2i - k| ≤ w
        let lo = (k as i64 - off - w + 1).div_euclid(2).max(blo as i64);
        let hi = (k as i64 - off + w).div_euclid(2).min(bhi as i64);
        debug_assert!(lo <= hi, "strip level {k} is empty");
        s.advance(lo as u32, hi as u32);
    }
    Ok(s.get(wx))
}

/// Sweeps every strip vertex reachable from `u` by paths inside `region`,
/// visiting each level as `(level, lo, values)` with coordinates local to `u`:
/// `values[m]` is the constrained passage time to `u + (lo + m, level − lo − m)`.
/// Levels run up to the strip's top `x + y = 2r`.
pub fn sweep_strip<E, F>(env: &E, region: &StripRegion, u: LatticePoint, mut visit: F) -> Result<()>
where
    E: Environment,
    F: FnMut(u32, u32, &[f64]),
{
    if region.width == 0 {
        return Err(LppError::Domain("strip of half-width 0 has no connected paths".into()));
    }
    if !region.contains(u) {
        return Err(LppError::Admissibility(format!("{u} outside strip of half-width {}", region.width)));
    }
    let w = region.width as i64;
    // Largest coordinate of any strip vertex.
    let reach = ((2 * region.r as i64 + w) / 2) as u32;
    check_extent(env, LatticePoint::diag(reach))?;
    let off = u.offset();
    let mut s = Sweeper::start(Shifted { inner: env, anchor: u }, reach - u.x);
    visit(0, 0, s.values());
    for k in 1..=2 * region.r - u.level() {
        let lo = (k as i64 - off - w + 1).div_euclid(2).max(0);
        let hi = (k as i64 - off + w).div_euclid(2).min(k as i64);
        s.advance(lo as u32, hi as u32);
        visit(k, lo as u32, s.values());
    }
    Ok(())
}

/// `(X_θ, X_*)`: best diagonal passage times `0 → (r, r)` inside the strips of
/// parameter `θ` and `2θ`. Always `X_θ ≤ X_* ≤ T_r`.
pub fn constrained_diag<E: Environment>(env: &E, r: u32, theta: f64) -> Result<(f64, f64)> {
    if r == 0 {
        return Err(LppError::Range("r must be ≥ 1".into()));
    }
    let end = LatticePoint::diag(r);
    let narrow = passage_constrained(env, &StripRegion::new(r, theta)?, LatticePoint::ORIGIN, end)?;
    let wide = passage_constrained(env, &StripRegion::new(r, 2.0 * theta)?, LatticePoint::ORIGIN, end)?;
    Ok((narrow, wide))
}

/// Best passage time from the origin to the segment
/// `{(r + s, r − s) : s_lo ≤ s ≤ s_hi}` and the maximizing endpoint.
/// Ties prefer smaller `|s|`, then positive `s`.
pub fn point_to_segment<E: Environment>(env: &E, r: u32, s_lo: i64, s_hi: i64) -> Result<(f64, LatticePoint)> {
    let ri = r as i64;
    if s_lo > s_hi || s_lo < -ri || s_hi > ri {
        return Err(LppError::Range(format!("segment [{s_lo}, {s_hi}] empty or outside [-{r}, {r}]")));
    }
    let wx = (ri + s_hi) as u32;
    let wy = (ri - s_lo) as u32;
    check_extent(env, LatticePoint::new(wx, wy))?;
    let mut s = Sweeper::start(
        Shifted {
            inner: env,
            anchor: LatticePoint::ORIGIN,
        },
        wx,
    );
    for k in 1..=2 * r {
        let (lo, hi) = box_range(k, wx, wy);
        s.advance(lo, hi);
    }
    let mut best: Option<(f64, i64)> = None;
    let order = std::iter::once(0).chain((1..=ri).flat_map(|m| [m, -m]));
    for off in order.filter(|o| (s_lo..=s_hi).contains(o)) {
        let v = s.get((ri + off) as u32);
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, off));
        }
    }
    let (value, off) = best.expect("segment is nonempty");
    Ok((value, LatticePoint::new((ri + off) as u32, (ri - off) as u32)))
}
