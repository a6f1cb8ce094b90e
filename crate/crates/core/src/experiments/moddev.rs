//! First-order means on slope-`h` rays, the variance exponent of `T_n`, and
//! distributional stability of `(T_n − 4n) / n^{1/3}` across `n`.
//!
//! One sweep over `[0, n] × [0, H]` gives every ray endpoint `(n, hn)` and
//! every diagonal `T_k`. The KS comparison needs independent samples, so the
//! smaller size is computed on the disjoint window starting at `(n + 1, 0)`.

use super::config::tol;
use super::{accumulate, fit_and_check, identity_check, param, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::Result;
use crate::field::{LatticePoint, WeightField};
use crate::passage::{passage_time, passage_to_targets};
use crate::stats::ks_two_sample;

pub(crate) struct Moddev {
    cfg: ExperimentConfig,
    /// `round(h n)` per `h`.
    heights: Vec<u32>,
    /// Sorted diagonal sizes: `n_grid ∪ {n}`.
    diag: Vec<u32>,
}

impl Moddev {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let heights = cfg.h_grid.iter().map(|h| (h * cfg.n as f64).round() as u32).collect();
        let mut diag = cfg.n_grid.clone();
        if diag.last() != Some(&cfg.n) {
            diag.push(cfg.n);
        }
        Moddev { cfg, heights, diag }
    }

    fn ks_source(&self) -> LatticePoint {
        LatticePoint::new(self.cfg.n + 1, 0)
    }
}

impl Experiment for Moddev {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.cfg.h_grid.iter().map(|&h| format!("T_h{}", param(h))).collect();
        cols.extend(self.diag.iter().map(|k| format!("T_{k}")));
        if let Some(k) = self.cfg.ks_n {
            cols.push(format!("Tind_{k}"));
        }
        cols
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        let n = self.cfg.n;
        let top = self.heights.iter().copied().chain(std::iter::once(n)).max().expect("nonempty");
        let right = self.cfg.ks_n.map_or(n, |k| n + 1 + k);
        let field = WeightField::new(self.cfg.master_seed, index, LatticePoint::new(right, top));
        let mut targets: Vec<LatticePoint> = self.heights.iter().map(|&m| LatticePoint::new(n, m)).collect();
        targets.extend(self.diag.iter().map(|&k| LatticePoint::diag(k)));
        let mut row = passage_to_targets(&field, LatticePoint::ORIGIN, &targets)?;
        if let Some(k) = self.cfg.ks_n {
            let u = self.ks_source();
            row.push(passage_time(&field, u, LatticePoint::new(u.x + k, k))?);
        }
        Ok(row)
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let n = cfg.n as f64;
        let acc = accumulate(table, cfg.batches)?;
        let mut out = Analysis::default();
        for (i, (&h, &m)) in cfg.h_grid.iter().zip(&self.heights).enumerate() {
            let mean = acc.mean(i)?;
            // first-order constant at the rounded height actually simulated
            let target = (1.0 + (m as f64 / n).sqrt()).powi(2);
            let label = format!("h={}", param(h));
            out.table
                .push(GridPoint::new("mean_over_n", label.clone(), h, mean.value / n, mean.stderr / n));
            out.table.push(GridPoint::new("mean_target", label, h, target, 0.0));
            out.checks.push(Check::at_most(
                &format!("mean_h{}", param(h)),
                (mean.value / n / target - 1.0).abs(),
                tol(cfg.tolerances.mean_rel),
            ));
        }
        let h = cfg.h_grid.len();
        if !cfg.n_grid.is_empty() {
            for (j, &k) in self.diag.iter().enumerate() {
                if !cfg.n_grid.contains(&k) {
                    continue;
                }
                let var = acc.variance(h + j)?;
                out.table
                    .push(GridPoint::new("variance", format!("n={k}"), k as f64, var.value, var.stderr));
            }
            let points = out.table.clone();
            fit_and_check(&points, "slope_variance", "variance", 2.0 / 3.0, tol(cfg.tolerances.slope), &mut out);
        }
        if let Some(k) = cfg.ks_n {
            let big = h + self.diag.len() - 1;
            let scale = |col: Vec<f64>, m: f64| -> Vec<f64> { col.into_iter().map(|t| (t - 4.0 * m) / m.cbrt()).collect() };
            let a = scale(table.column(big + 1), k as f64);
            let b = scale(table.column(big), n);
            let (d, crit) = ks_two_sample(&a, &b)?;
            out.table
                .push(GridPoint::new("ks_statistic", format!("n={k}_vs_n={}", cfg.n), k as f64, d, 0.0));
            out.table
                .push(GridPoint::new("ks_critical_1pct", format!("n={k}_vs_n={}", cfg.n), k as f64, crit, 0.0));
            out.checks.push(Check::below(&format!("ks_n{k}_vs_n{}", cfg.n), d, crit));
        }
        out.checks.push(identity_check(&acc, tol(cfg.tolerances.identity)));
        Ok(out)
    }
}
