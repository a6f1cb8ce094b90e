//! Maximizing paths and their geometry.

use serde::{Deserialize, Serialize};

use crate::error::{LppError, Result};
use crate::field::{Environment, LatticePoint};
use crate::passage::{
    self, passage_checkpointed, passage_full, point_to_segment, PassageSurface, DEFAULT_CHECKPOINT_STRIDE,
    DEFAULT_FULL_GRID_BUDGET,
};

/// A directed up/right path with its summed weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    vertices: Vec<LatticePoint>,
    total_weight: f64,
}

impl Geodesic {
    /// Wraps an explicit path; fails if consecutive vertices are not unit
    /// up/right steps.
    pub fn from_vertices<E: Environment>(env: &E, vertices: Vec<LatticePoint>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(LppError::Contract("a path needs at least one vertex".into()));
        }
        if let Some(bad) = vertices.windows(2).find(|w| !is_step(w[0], w[1])) {
            return Err(LppError::Contract(format!("{} -> {} is not a unit up/right step", bad[0], bad[1])));
        }
        let total_weight = vertices.iter().map(|p| env.weight_at(p.x, p.y)).sum();
        Ok(Geodesic { vertices, total_weight })
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn source(&self) -> LatticePoint {
        self.vertices[0]
    }

    pub fn endpoint(&self) -> LatticePoint {
        *self.vertices.last().expect("geodesics are nonempty")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `max |x − y|` over the path.
    pub fn transversal_fluctuation(&self) -> u32 {
        self.vertices.iter().map(|p| p.offset().unsigned_abs() as u32).max().unwrap_or(0)
    }

    /// The unique vertex on the anti-diagonal `x + y = level`.
    pub fn cross_antidiagonal(&self, level: u32) -> Result<LatticePoint> {
        let (lo, hi) = (self.source().level(), self.endpoint().level());
        if level < lo || level > hi {
            return Err(LppError::Range(format!("level {level} outside [{lo}, {hi}]")));
        }
        Ok(self.vertices[(level - lo) as usize])
    }

    /// Sum of the field over the vertices whose level lies in `[from, to]`.
    pub fn segment_weight<E: Environment>(&self, env: &E, from: u32, to: u32) -> f64 {
        let lo = self.source().level();
        self.vertices
            .iter()
            .skip(from.saturating_sub(lo) as usize)
            .take_while(|p| p.level() <= to)
            .map(|p| env.weight_at(p.x, p.y))
            .sum()
    }

    /// Checks unit steps, one vertex per level, and that `total_weight` is
    /// the exact sum of the field along the path.
    pub fn validate<E: Environment>(&self, env: &E) -> std::result::Result<(), String> {
        for w in self.vertices.windows(2) {
            if !is_step(w[0], w[1]) {
                return Err(format!("invalid step {} -> {}", w[0], w[1]));
            }
        }
        let lo = self.source().level();
        for (m, p) in self.vertices.iter().enumerate() {
            if p.level() != lo + m as u32 {
                return Err(format!("vertex {p} is not the unique crossing of level {}", lo + m as u32));
            }
        }
        let sum: f64 = self.vertices.iter().map(|p| env.weight_at(p.x, p.y)).sum();
        if sum != self.total_weight {
            return Err(format!("weight sum {sum} != recorded {}", self.total_weight));
        }
        Ok(())
    }
}

fn is_step(a: LatticePoint, b: LatticePoint) -> bool {
    (b.x == a.x + 1 && b.y == a.y) || (b.x == a.x && b.y == a.y + 1)
}

/// Backtracks the maximizing path between the surface anchor and `endpoint`.
///
/// Forward surfaces yield the path from the source to `endpoint`; backward
/// surfaces yield the path from `endpoint` to the sink. Exact ties step to
/// the left predecessor.
pub fn trace_geodesic<E: Environment + Clone>(surface: &PassageSurface<E>, endpoint: LatticePoint) -> Result<Geodesic> {
    let (i, j) = surface
        .to_local(endpoint)
        .ok_or_else(|| LppError::Range(format!("{endpoint} outside surface scope")))?;
    let local = surface.backtrack_local(i, j);
    let mut vertices: Vec<LatticePoint> = local.into_iter().map(|(i, j)| surface.to_global(i, j)).collect();
    if surface.orientation() == passage::Orientation::Forward {
        vertices.reverse();
    }
    Ok(Geodesic {
        vertices,
        total_weight: surface.value(endpoint)?,
    })
}

/// Number of shared vertices.
pub fn overlap(a: &Geodesic, b: &Geodesic) -> usize {
    let lo = a.source().level().max(b.source().level());
    let hi = a.endpoint().level().min(b.endpoint().level());
    if lo > hi {
        return 0;
    }
    (lo..=hi)
        .filter(|&d| a.cross_antidiagonal(d).ok() == b.cross_antidiagonal(d).ok())
        .count()
}

/// Forward surface over `[0, corner]`, full-grid when it fits the budget and
/// checkpointed otherwise.
pub fn forward_surface<E: Environment + Clone>(env: &E, corner: LatticePoint) -> Result<PassageSurface<E>> {
    let cells = (corner.x as u64 + 1) * (corner.y as u64 + 1);
    if cells <= DEFAULT_FULL_GRID_BUDGET {
        passage_full(env, LatticePoint::ORIGIN, corner)
    } else {
        passage_checkpointed(env, LatticePoint::ORIGIN, corner, DEFAULT_CHECKPOINT_STRIDE)
    }
}

/// Quantities around the crossing of `Γ_n` (the geodesic `0 → (n, n)`) with
/// the anti-diagonal `x + y = 2r`.
///
/// * `x = T(0, (r, r))`, `y = T((r, r), (n, n))`
/// * `v` is where `Γ_n` crosses level `2r`; `z`, `w` are the weights of `Γ_n`
///   before and after `v`, both including `ω_v`, so `z + w − ω_v = T_n`
/// * `x_star` is the point-to-line passage time to level `2r`
/// * `x_theta`, `x_star2` are the strip-constrained diagonal passage times
///   for `θ` and `2θ`
/// * `overlap` counts vertices shared by `Γ_r` and `Γ_n` up to level `2r`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSample {
    pub r: u32,
    pub n: u32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub x_star: f64,
    pub x_theta: f64,
    pub x_star2: f64,
    pub v: LatticePoint,
    pub weight_v: f64,
    pub t_n: f64,
    pub overlap: usize,
}

impl DecompositionSample {
    /// `z + w − ω_v == T_n`, compared exactly.
    pub fn junction_holds(&self) -> bool {
        self.z + self.w - self.weight_v == self.t_n
    }
}

pub fn decompose<E: Environment + Clone>(env: &E, r: u32, n: u32, theta: f64) -> Result<DecompositionSample> {
    if r == 0 || r >= n {
        return Err(LppError::Range(format!("need 0 < r < n, got r = {r}, n = {n}")));
    }
    let surface = forward_surface(env, LatticePoint::diag(n))?;
    let gamma_n = trace_geodesic(&surface, LatticePoint::diag(n))?;
    let gamma_r = trace_geodesic(&surface, LatticePoint::diag(r))?;
    let level = 2 * r;
    let v = gamma_n.cross_antidiagonal(level)?;
    let z = gamma_n.segment_weight(env, 0, level);
    let w = gamma_n.segment_weight(env, level, 2 * n);
    let x = surface.value(LatticePoint::diag(r))?;
    let y = passage::passage_time(env, LatticePoint::diag(r), LatticePoint::diag(n))?;
    let (x_star, _) = point_to_segment(env, r, -(r as i64), r as i64)?;
    let (x_theta, x_star2) = passage::constrained_diag(env, r, theta)?;
    let overlap = gamma_r.vertices().iter().zip(gamma_n.vertices()).filter(|(a, b)| a == b).count();
    Ok(DecompositionSample {
        r,
        n,
        x,
        y,
        z,
        w,
        x_star,
        x_theta,
        x_star2,
        v,
        weight_v: env.weight_at(v.x, v.y),
        t_n: gamma_n.total_weight(),
        overlap,
    })
}
