//! Where geodesics to `(n ± s, n ∓ s)` cross the anti-diagonal at level
//! `2(n − t* s^{3/2})`, `t* = min(t, n / s^{3/2})`, normalized by `t^{2/3} s`.
//! Polymer ordering puts every geodesic to `(n + s', n − s')`, `|s'| < s`,
//! between the two extremes, so the extremes bound the supremum.

use super::config::tol;
use super::{accumulate, identity_check, param, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::Result;
use crate::field::{LatticePoint, WeightField};
use crate::geodesic::{forward_surface, trace_geodesic, Geodesic};
use crate::stats::{batch_estimate, median, quantile};

pub(crate) struct GeodesicLocalization {
    cfg: ExperimentConfig,
    s: u32,
}

impl GeodesicLocalization {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let s = cfg.s.expect("validated");
        GeodesicLocalization { cfg, s }
    }

    /// Crossing level for `t`, clamped at the origin.
    fn level(&self, t: f64) -> u32 {
        let s15 = (self.s as f64).powf(1.5);
        let n = self.cfg.n as f64;
        let t_star = t.min(n / s15);
        (2.0 * (n - t_star * s15)).floor().max(0.0) as u32
    }
}

/// `(x − level/2) / scale` at the crossing of `level`.
pub(crate) fn crossing_offset(g: &Geodesic, level: u32, scale: f64) -> Result<f64> {
    let v = g.cross_antidiagonal(level)?;
    Ok((v.x as f64 - level as f64 / 2.0) / scale)
}

impl Experiment for GeodesicLocalization {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        let mut cols = Vec::new();
        for &t in &self.cfg.t_grid {
            cols.push(format!("offset_plus_t{}", param(t)));
            cols.push(format!("offset_minus_t{}", param(t)));
        }
        cols
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        let (n, s) = (self.cfg.n, self.s);
        let field = WeightField::new(self.cfg.master_seed, index, LatticePoint::diag(n + s));
        let surface = forward_surface(&field, LatticePoint::diag(n + s))?;
        let plus = trace_geodesic(&surface, LatticePoint::new(n + s, n - s))?;
        let minus = trace_geodesic(&surface, LatticePoint::new(n - s, n + s))?;
        let mut row = Vec::with_capacity(2 * self.cfg.t_grid.len());
        for &t in &self.cfg.t_grid {
            let level = self.level(t);
            let scale = t.powf(2.0 / 3.0) * s as f64;
            row.push(crossing_offset(&plus, level, scale)?);
            row.push(crossing_offset(&minus, level, scale)?);
        }
        Ok(row)
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let b = cfg.batches;
        let bound = tol(cfg.tolerances.quantile_bound);
        let mut out = Analysis::default();
        for (i, &t) in cfg.t_grid.iter().enumerate() {
            let (plus, minus) = (table.column(2 * i), table.column(2 * i + 1));
            let dev: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| a.abs().max(b.abs())).collect();
            let label = format!("t={}", param(t));
            let q50 = batch_estimate(&dev, b, median)?;
            let q95 = batch_estimate(&dev, b, |v| quantile(v, 0.95))?;
            let q99 = batch_estimate(&dev, b, |v| quantile(v, 0.99))?;
            out.table.push(GridPoint::new("median_deviation", label.clone(), t, q50.value, q50.stderr));
            out.table.push(GridPoint::new("p95_deviation", label.clone(), t, q95.value, q95.stderr));
            out.table.push(GridPoint::new("p99_deviation", label, t, q99.value, q99.stderr));
            out.checks.push(Check::at_most(&format!("p99_deviation_t{}", param(t)), q99.value, bound));
        }
        out.checks.push(identity_check(&accumulate(table, b)?, tol(cfg.tolerances.identity)));
        Ok(out)
    }
}
