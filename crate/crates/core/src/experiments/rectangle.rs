//! Uniform control of passage times over pairs of points in the thin
//! rectangle `U = {0 ≤ x + y ≤ 2r, |x − y| ≤ ⌊r^{2/3}⌋}`.
//!
//! Sources `u` are drawn from the lower third of `U` (the first is always the
//! origin); targets are all `v ∈ U` with `u ⪯ v`, `v ≠ u`, and the slope of
//! `v − u` in `[1/2, 2]`. Each sample records, per `r`, the sup and inf over
//! those pairs of `(T_{u,v} − 2|d(u) − d(v)|) / r^{1/3}` for unconstrained
//! and in-`U` passage times.

use super::config::tol;
use super::{accumulate, identity_check, relative_spread, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::Result;
use crate::field::{LatticePoint, WeightField};
use crate::passage::{sweep_box, sweep_strip, StripRegion};
use crate::stats::{batch_estimate, median, quantile};

const STATS: [&str; 6] = ["sup", "inf", "sup_con", "inf_con", "diag", "violations"];

struct Rectangle {
    r: u32,
    region: StripRegion,
    /// Largest coordinate of a vertex of `U`.
    reach: u32,
    /// Candidate sources: the lower third of `U`.
    lower: Vec<LatticePoint>,
}

impl Rectangle {
    fn new(r: u32) -> Self {
        let region = StripRegion::new(r, 1.0).expect("θ = 1 is valid");
        let w = region.width;
        let reach = (2 * r + w) / 2;
        let lower = (0..=reach)
            .flat_map(|x| (0..=reach).map(move |y| LatticePoint::new(x, y)))
            .filter(|p| 3 * p.level() <= 2 * r && region.contains(*p))
            .collect();
        Rectangle { r, region, reach, lower }
    }

    /// Local column range of admissible targets at local level `k` from `u`.
    fn targets(&self, u: LatticePoint, k: u32) -> std::ops::RangeInclusive<u32> {
        let w = self.region.width as i64;
        let off = u.offset();
        let k64 = k as i64;
        // slope in [1/2, 2]: k/3 ≤ i ≤ 2k/3; in U: |off + 2i − k| ≤ w
        let lo = ((k64 + 2) / 3).max((k64 - off - w + 1).div_euclid(2));
        let hi = (2 * k64 / 3).min((k64 - off + w).div_euclid(2));
        if k == 0 || lo > hi {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        lo as u32..=hi as u32
    }

    /// `[sup, inf, sup_con, inf_con, diag, violations]` for one environment.
    fn row(&self, field: &WeightField, sources: &[LatticePoint]) -> Result<[f64; 6]> {
        let scale = (self.r as f64).cbrt();
        let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut sup_c, mut inf_c) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut diag = f64::NAN;
        let mut violations = 0u32;
        let mut free = Vec::new();
        for &u in sources {
            let top = 2 * self.r - u.level();
            free.clear();
            sweep_box(field, u, LatticePoint::diag(self.reach), |k, lo, vals| {
                if k > top {
                    return;
                }
                for i in self.targets(u, k) {
                    let t = vals[(i - lo) as usize];
                    free.push(t);
                    let stat = (t - 2.0 * k as f64) / scale;
                    sup = sup.max(stat);
                    inf = inf.min(stat);
                    if u == LatticePoint::ORIGIN && k == 2 * self.r && i == self.r {
                        diag = stat;
                    }
                }
            })?;
            let mut next = 0;
            sweep_strip(field, &self.region, u, |k, lo, vals| {
                for i in self.targets(u, k) {
                    let t = vals[(i - lo) as usize];
                    if t > free[next] {
                        violations += 1;
                    }
                    next += 1;
                    let stat = (t - 2.0 * k as f64) / scale;
                    sup_c = sup_c.max(stat);
                    inf_c = inf_c.min(stat);
                }
            })?;
            debug_assert_eq!(next, free.len());
        }
        Ok([sup, inf, sup_c, inf_c, diag, violations as f64])
    }
}

pub(crate) struct RectanglePairs {
    cfg: ExperimentConfig,
    rects: Vec<Rectangle>,
    sources: u32,
}

impl RectanglePairs {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let rects = cfg.r_grid.iter().map(|&r| Rectangle::new(r)).collect();
        let sources = cfg.sources.expect("validated");
        RectanglePairs { cfg, rects, sources }
    }
}

impl Experiment for RectanglePairs {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        self.cfg
            .r_grid
            .iter()
            .flat_map(|r| STATS.iter().map(move |s| format!("{s}_r{r}")))
            .collect()
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        let reach = self.rects.iter().map(|q| q.reach).max().expect("validated nonempty");
        let field = WeightField::new(self.cfg.master_seed, index, LatticePoint::diag(reach));
        let mut row = Vec::with_capacity(STATS.len() * self.rects.len());
        for q in &self.rects {
            let mut stream = field.stream(q.r as u64);
            let mut sources = vec![LatticePoint::ORIGIN];
            sources.extend((1..self.sources).map(|_| q.lower[stream.below(q.lower.len() as u64) as usize]));
            row.extend_from_slice(&q.row(&field, &sources)?);
        }
        Ok(row)
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let b = cfg.batches;
        let p99 = |v: &[f64]| quantile(v, 0.99);
        let p01 = |v: &[f64]| quantile(v, 0.01);
        let mut out = Analysis::default();
        let mut p99_sup = Vec::new();
        for (j, &r) in cfg.r_grid.iter().enumerate() {
            let col = |s: usize| table.column(j * STATS.len() + s);
            let label = format!("r={r}");
            let rows = [
                ("p99_sup", batch_estimate(&col(0), b, p99)?),
                ("median_sup", batch_estimate(&col(0), b, median)?),
                ("median_inf", batch_estimate(&col(1), b, median)?),
                ("p01_inf", batch_estimate(&col(1), b, p01)?),
                ("p99_sup_con", batch_estimate(&col(2), b, p99)?),
                ("median_inf_con", batch_estimate(&col(3), b, median)?),
                ("p01_inf_con", batch_estimate(&col(3), b, p01)?),
                ("median_diag", batch_estimate(&col(4), b, median)?),
            ];
            for (q, est) in rows {
                out.table.push(GridPoint::new(q, label.clone(), r as f64, est.value, est.stderr));
            }
            p99_sup.push(rows[0].1.value);
            let violations: f64 = col(5).iter().sum();
            out.checks
                .push(Check::at_most(&format!("constrained_exceeds_free_r{r}"), violations, 0.0));
        }
        if cfg.r_grid.len() >= 2 {
            let (lo, hi) = (cfg.r_grid[0], cfg.r_grid[cfg.r_grid.len() - 1]);
            out.checks.push(Check::at_most(
                &format!("stability_p99_sup_r{lo}_vs_r{hi}"),
                relative_spread(p99_sup[0], p99_sup[p99_sup.len() - 1]),
                tol(cfg.tolerances.stability),
            ));
        }
        out.checks.push(identity_check(&accumulate(table, b)?, tol(cfg.tolerances.identity)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::testing::{check, exercise};
    use crate::experiments::ExperimentKind;
    use crate::passage::{passage_constrained, passage_time};

    #[test]
    fn rectangle_report_shape() {
        let mut c = ExperimentConfig::new(ExperimentKind::RectanglePairs, 30, 61);
        c.r_grid = vec![27, 64];
        c.sources = Some(4);
        c.batches = 6;
        let (table, report) = exercise(&c);
        assert_eq!(table.columns.len(), 12);
        assert_eq!(table.columns[0], "sup_r27");
        assert!(check(&report, "constrained_exceeds_free_r27").pass);
        assert!(check(&report, "constrained_exceeds_free_r64").pass);
        for row in &table.rows {
            assert!(row[2] <= row[0] && row[3] <= row[1] && row[1] <= row[4] && row[4] <= row[0]);
        }
    }

    #[test]
    fn single_source_diag_is_the_scaled_passage_time() {
        let q = Rectangle::new(27);
        for index in 0..10 {
            let f = WeightField::new(5, index, LatticePoint::diag(q.reach));
            let row = q.row(&f, &[LatticePoint::ORIGIN]).unwrap();
            let t = passage_time(&f, LatticePoint::ORIGIN, LatticePoint::diag(27)).unwrap();
            assert_eq!(row[4], (t - 108.0) / 3.0);
        }
    }

    #[test]
    fn pair_sets_match_brute_force() {
        let q = Rectangle::new(27);
        assert_eq!(q.region.width, 9);
        let f = WeightField::new(6, 0, LatticePoint::diag(q.reach));
        for u in [LatticePoint::ORIGIN, LatticePoint::new(9, 3), LatticePoint::new(2, 10)] {
            let mut pairs = Vec::new();
            for x in u.x..=q.reach {
                for y in u.y..=q.reach {
                    let v = LatticePoint::new(x, y);
                    let (dx, dy) = (x - u.x, y - u.y);
                    if v != u && q.region.contains(v) && 2 * dy >= dx && 2 * dx >= dy {
                        pairs.push(v);
                    }
                }
            }
            let scale = 3.0;
            let (mut sup, mut inf_c) = (f64::NEG_INFINITY, f64::INFINITY);
            for &v in &pairs {
                let k = (v.level() - u.level()) as f64;
                sup = sup.max((passage_time(&f, u, v).unwrap() - 2.0 * k) / scale);
                inf_c = inf_c.min((passage_constrained(&f, &q.region, u, v).unwrap() - 2.0 * k) / scale);
            }
            let counted: usize = (0..=54 - u.level()).map(|k| q.targets(u, k).count()).sum();
            assert_eq!(counted, pairs.len());
            let row = q.row(&f, &[u]).unwrap();
            assert_eq!(row[0], sup);
            assert_eq!(row[3], inf_c);
            assert_eq!(row[5], 0.0);
        }
    }
}
