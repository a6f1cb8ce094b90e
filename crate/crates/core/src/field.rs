//! Lattice points and the random vertex-weight environment.
//!
//! Weights are produced by a counter-based generator: the value at a vertex
//! is a pure function of `(master_seed, sample_index, x, y)`, so any window of
//! the lattice can be evaluated on demand, in any order, from any thread.
//!
//! Each weight is the Exp(1) inverse CDF `-ln(1 - u)` of a 53-bit uniform,
//! snapped to the midpoint of a `2^-32` grid cell. The snapping keeps every
//! weight strictly positive and makes every path sum an exact `f64` (sums stay
//! far below `2^20`, leaving 53 bits for a `2^-33` resolution), so identities
//! such as junction splitting and superadditivity hold bit for bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LppError, Result};

/// A vertex of the first quadrant of Z².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: u32,
    pub y: u32,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: u32, y: u32) -> Self {
        LatticePoint { x, y }
    }

    /// The point `(k, k)`.
    pub const fn diag(k: u32) -> Self {
        LatticePoint { x: k, y: k }
    }

    /// Anti-diagonal level `x + y`.
    pub fn level(self) -> u32 {
        self.x + self.y
    }

    /// Coordinatewise order `self ⪯ other`.
    pub fn precedes(self, other: LatticePoint) -> bool {
        self.x <= other.x && self.y <= other.y
    }

    /// Signed offset `x - y` from the main diagonal.
    pub fn offset(self) -> i64 {
        self.x as i64 - self.y as i64
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Anything that assigns a weight to every lattice vertex it covers.
///
/// `weight_at` is the unchecked hot-path accessor used by the dynamic
/// programs; callers validate extents once, up front.
pub trait Environment {
    fn weight_at(&self, x: u32, y: u32) -> f64;

    /// Inclusive upper corner of the covered box.
    fn extent(&self) -> LatticePoint;

    fn contains(&self, p: LatticePoint) -> bool {
        p.precedes(self.extent())
    }
}

impl<E: Environment + ?Sized> Environment for &E {
    #[inline(always)]
    fn weight_at(&self, x: u32, y: u32) -> f64 {
        (**self).weight_at(x, y)
    }

    fn extent(&self) -> LatticePoint {
        (**self).extent()
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_SALT: u64 = 0x6A09_E667_F3BC_C908;
const COUNTER_SALT: u64 = 0xBB67_AE85_84CA_A73B;
const STREAM_SALT: u64 = 0x3C6E_F372_FE94_F82B;
const TWO_POW_32: f64 = 4_294_967_296.0;
const INV_TWO_POW_32: f64 = 1.0 / TWO_POW_32;
const INV_TWO_POW_53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// SplitMix64 / MurmurHash3 finalizer: a bijective 64-bit mixer.
#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maps 64 random bits to a dyadic Exp(1) weight.
#[inline(always)]
fn exp_weight(bits: u64) -> f64 {
    // 53-bit values fit in i64, whose conversions are single instructions.
    let u = ((bits >> 11) as i64) as f64 * INV_TWO_POW_53;
    let w = -(1.0 - u).ln();
    // w < 37, so the scaled value fits in i64 and truncation is floor.
    (((w * TWO_POW_32) as i64) as f64 + 0.5) * INV_TWO_POW_32
}

/// Seeded i.i.d. Exp(1) weights on the box `[0, extent.x] × [0, extent.y]`.
///
/// A `WeightField` is a small immutable value; copying it is free and copies
/// describe the same environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightField {
    master_seed: u64,
    sample_index: u64,
    extent: LatticePoint,
    key: u64,
}

impl WeightField {
    pub fn new(master_seed: u64, sample_index: u64, extent: LatticePoint) -> Self {
        let key = mix64(mix64(master_seed ^ SEED_SALT) ^ sample_index.wrapping_mul(GOLDEN_GAMMA));
        WeightField {
            master_seed,
            sample_index,
            extent,
            key,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    /// Weight of vertex `p`; fails if `p` lies outside the extent.
    pub fn weight(&self, p: LatticePoint) -> Result<f64> {
        if !self.contains(p) {
            return Err(LppError::Range(format!(
                "vertex {p} outside field extent {}",
                self.extent
            )));
        }
        Ok(self.weight_at(p.x, p.y))
    }

    /// Same seed and extent, different sample identity.
    pub fn fork_sample(&self, new_index: u64) -> WeightField {
        WeightField::new(self.master_seed, new_index, self.extent)
    }

    /// Same environment with a different extent.
    pub fn with_extent(&self, extent: LatticePoint) -> WeightField {
        WeightField { extent, ..*self }
    }

    /// A uniform stream tied to this sample and `tag`, independent of the
    /// vertex weights, for randomized choices that must be as reproducible as
    /// the environment itself.
    pub fn stream(&self, tag: u64) -> SampleStream {
        SampleStream {
            state: mix64(self.key ^ mix64(tag ^ STREAM_SALT)),
        }
    }
}

/// SplitMix64 sequence returned by [`WeightField::stream`].
#[derive(Debug, Clone)]
pub struct SampleStream {
    state: u64,
}

impl SampleStream {
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform integer in `[0, bound)` (Lemire's multiply-shift; the bias is
    /// below `bound / 2^64`).
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

impl Environment for WeightField {
    #[inline(always)]
    fn weight_at(&self, x: u32, y: u32) -> f64 {
        let counter = ((x as u64) << 32) | y as u64;
        exp_weight(mix64(self.key ^ mix64(counter ^ COUNTER_SALT)))
    }

    fn extent(&self) -> LatticePoint {
        self.extent
    }
}

/// Explicit weights on a small box, row-major (`y` outer). Used for
/// hand-built examples and enumeration oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    width: u32,
    height: u32,
    weights: Vec<f64>,
}

impl WeightTable {
    /// `rows[y][x]` is the weight of `(x, y)`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if height == 0 || width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(LppError::Contract("weight table must be a nonempty rectangle".into()));
        }
        if rows.iter().flatten().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(LppError::Domain("weights must be finite and positive".into()));
        }
        Ok(WeightTable {
            width: width as u32,
            height: height as u32,
            weights: rows.concat(),
        })
    }

    /// Copies the `width × height` window of `env` anchored at the origin.
    pub fn sample<E: Environment>(env: &E, width: u32, height: u32) -> Self {
        let mut weights = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                weights.push(env.weight_at(x, y));
            }
        }
        WeightTable { width, height, weights }
    }
}

impl Environment for WeightTable {
    #[inline(always)]
    fn weight_at(&self, x: u32, y: u32) -> f64 {
        self.weights[(y * self.width + x) as usize]
    }

    fn extent(&self) -> LatticePoint {
        LatticePoint::new(self.width - 1, self.height - 1)
    }
}

/// Point reflection of an environment through `anchor`: vertex `(x, y)` of
/// the view is vertex `anchor - (x, y)` of the inner field. Forward passage
/// times on the view are backward (to-`anchor`) passage times on the inner
/// field.
#[derive(Debug, Clone, Copy)]
pub struct Mirrored<E> {
    inner: E,
    anchor: LatticePoint,
}

impl<E: Environment> Mirrored<E> {
    pub fn new(inner: E, anchor: LatticePoint) -> Self {
        Mirrored { inner, anchor }
    }

    pub fn map(&self, p: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.anchor.x - p.x, self.anchor.y - p.y)
    }
}

impl<E: Environment> Environment for Mirrored<E> {
    #[inline(always)]
    fn weight_at(&self, x: u32, y: u32) -> f64 {
        self.inner.weight_at(self.anchor.x - x, self.anchor.y - y)
    }

    fn extent(&self) -> LatticePoint {
        self.anchor
    }
}
