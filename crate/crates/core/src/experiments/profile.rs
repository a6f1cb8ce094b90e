//! Fluctuations of the weight profile `L[s] = T(0, (n + s, n − s))` along
//! the anti-diagonal: `M(s) = sup_{|s'| < s} (L[s'] − L[0])` at scale `s^{1/2}`.

use super::config::tol;
use super::{accumulate, fit_and_check, identity_check, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::Result;
use crate::field::{LatticePoint, WeightField};
use crate::passage::antidiagonal_profile;
use crate::stats::{batch_estimate, median, quantile};

pub(crate) struct ProfileFluct {
    cfg: ExperimentConfig,
}

impl ProfileFluct {
    pub fn new(cfg: ExperimentConfig) -> Self {
        ProfileFluct { cfg }
    }
}

impl Experiment for ProfileFluct {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        self.cfg.s_grid.iter().map(|s| format!("M_{s}")).collect()
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        let (n, s_max) = (self.cfg.n, *self.cfg.s_grid.last().expect("validated nonempty"));
        let field = WeightField::new(self.cfg.master_seed, index, LatticePoint::diag(n + s_max));
        let sup = antidiagonal_profile(&field, n, s_max)?.sup_increments();
        Ok(self.cfg.s_grid.iter().map(|&s| sup[s as usize - 1]).collect())
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let mut out = Analysis::default();
        // nonnegative and nondecreasing in s, per sample
        let violations = table
            .rows
            .iter()
            .filter(|r| r[0] < 0.0 || r.windows(2).any(|w| w[1] < w[0]))
            .count();
        out.checks
            .push(Check::at_most("sup_increment_order_violations", violations as f64, 0.0));
        for (i, &s) in cfg.s_grid.iter().enumerate() {
            let col = table.column(i);
            let est = batch_estimate(&col, cfg.batches, median)?;
            out.table
                .push(GridPoint::new("median_sup", format!("s={s}"), s as f64, est.value, est.stderr));
            let root = (s as f64).sqrt();
            let scaled: Vec<f64> = col.iter().map(|m| m / root).collect();
            let p95 = batch_estimate(&scaled, cfg.batches, |v| quantile(v, 0.95))?;
            out.table
                .push(GridPoint::new("p95_scaled_sup", format!("s={s}"), s as f64, p95.value, p95.stderr));
            out.table.push(GridPoint::new(
                "median_scaled_sup",
                format!("s={s}"),
                s as f64,
                est.value / root,
                est.stderr / root,
            ));
        }
        let points = out.table.clone();
        fit_and_check(&points, "slope_median_sup", "median_sup", 0.5, tol(cfg.tolerances.slope), &mut out);
        out.checks.push(identity_check(&accumulate(table, cfg.batches)?, tol(cfg.tolerances.identity)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::testing::{check, exercise};
    use crate::experiments::ExperimentKind;

    #[test]
    fn profile_report_shape() {
        let mut c = ExperimentConfig::new(ExperimentKind::ProfileFluct, 40, 3);
        c.n = 512;
        c.s_grid = vec![2, 4, 8, 16];
        c.batches = 8;
        let (table, report) = exercise(&c);
        assert_eq!(table.columns, vec!["M_2", "M_4", "M_8", "M_16"]);
        assert!(check(&report, "sup_increment_order_violations").pass);
        assert_eq!(report.fits[0].fit.points.len(), 4);
        assert!(table.rows.iter().all(|r| r.iter().all(|&m| m >= 0.0)));
    }

    #[test]
    fn order_violations_are_detected() {
        let mut c = ExperimentConfig::new(ExperimentKind::ProfileFluct, 40, 3);
        c.n = 512;
        c.s_grid = vec![2, 4, 8];
        c.batches = 8;
        let exp = ProfileFluct::new(c.normalized());
        let mut t = SampleTable::new(exp.columns());
        for i in 0..40 {
            let x = 1.0 + i as f64;
            t.push(i, if i == 5 { vec![2.0, 1.0, 3.0] } else { vec![x, 2.0 * x, 3.0 * x] }).unwrap();
        }
        let a = exp.analyze(&t).unwrap();
        let c = a.checks.iter().find(|c| c.name == "sup_increment_order_violations").unwrap();
        assert_eq!(c.value, Some(1.0));
        assert!(!c.pass);
    }
}
