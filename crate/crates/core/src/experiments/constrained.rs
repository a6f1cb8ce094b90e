//! Variance of the strip-constrained diagonal passage time `X_θ` against the
//! strip parameter `θ`, at fixed `r`.

use super::config::tol;
use super::{accumulate, fit_and_check, identity_check, param, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::Result;
use crate::field::{LatticePoint, WeightField};
use crate::passage::{passage_constrained, StripRegion};

pub(crate) struct ConstrainedVariance {
    cfg: ExperimentConfig,
    r: u32,
}

impl ConstrainedVariance {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let r = cfg.r.expect("validated");
        ConstrainedVariance { cfg, r }
    }
}

/// `X_θ` for every `θ`, from one environment.
pub(crate) fn constrained_row(field: &WeightField, r: u32, thetas: &[f64]) -> Result<Vec<f64>> {
    thetas
        .iter()
        .map(|&t| passage_constrained(field, &StripRegion::new(r, t)?, LatticePoint::ORIGIN, LatticePoint::diag(r)))
        .collect()
}

const INNER: &str = "variance_theta_le_1";

impl Experiment for ConstrainedVariance {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        self.cfg.theta_grid.iter().map(|&t| format!("X_theta_{}", param(t))).collect()
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        let field = WeightField::new(self.cfg.master_seed, index, LatticePoint::diag(self.r));
        constrained_row(&field, self.r, &self.cfg.theta_grid)
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let acc = accumulate(table, cfg.batches)?;
        let r = self.r as f64;
        let scale = r.cbrt();
        let mut out = Analysis::default();
        let mut deficits = Vec::new();
        for (i, &theta) in cfg.theta_grid.iter().enumerate() {
            let label = format!("theta={}", param(theta));
            let var = acc.variance(i)?;
            out.table.push(GridPoint::new("variance", label.clone(), theta, var.value, var.stderr));
            let mean = acc.mean(i)?;
            let d = GridPoint::new("mean_deficit", label, theta, (4.0 * r - mean.value) / scale, mean.stderr / scale);
            deficits.push(d.clone());
            out.table.push(d);
        }
        // narrower strips cost more
        let sigmas = tol(cfg.tolerances.monotone_sigmas);
        for w in deficits.windows(2) {
            out.checks.push(Check::at_least(
                &format!("deficit_monotone_{}_{}", w[0].label, w[1].label),
                w[0].value - w[1].value,
                -sigmas * w[0].stderr.hypot(w[1].stderr),
            ));
        }
        let points = out.table.clone();
        fit_and_check(&points, "slope_variance", "variance", -0.5, tol(cfg.tolerances.slope), &mut out);

        // The θ^{-1/2} law is a θ ≤ 1 statement; wider strips stop binding and
        // Var X_θ saturates at Var T_r. When the grid extends past 1, also fit
        // the θ ≤ 1 part alone, for information.
        let inner: Vec<GridPoint> = points
            .iter()
            .filter(|p| p.quantity == "variance" && p.x <= 1.0)
            .map(|p| GridPoint { quantity: INNER.into(), ..p.clone() })
            .collect();
        if inner.len() >= 3 && cfg.theta_grid.iter().any(|&t| t > 1.0) {
            out.table.extend(inner.iter().cloned());
            fit_and_check(&inner, "slope_variance_theta_le_1", INNER, -0.5, tol(cfg.tolerances.slope), &mut out);
            let c = out.checks.pop().expect("just pushed");
            out.checks.push(c.informational());
        }
        out.checks.push(identity_check(&acc, tol(cfg.tolerances.identity)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::testing::{check, exercise};
    use crate::experiments::ExperimentKind;
    use crate::passage::passage_time;

    #[test]
    fn constrained_report_shape() {
        let mut c = ExperimentConfig::new(ExperimentKind::ConstrainedVariance, 40, 21);
        c.r = Some(64);
        c.theta_grid = vec![0.25, 0.5, 1.0, 2.0];
        c.batches = 8;
        let (table, report) = exercise(&c);
        assert_eq!(table.columns, vec!["X_theta_0.25", "X_theta_0.5", "X_theta_1", "X_theta_2"]);
        // wider strips never lose
        assert!(table.rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1])));
        assert!(check(&report, "residual_identity").pass);
        assert_eq!(report.table.iter().filter(|p| p.quantity == "mean_deficit").count(), 4);
        let inner = check(&report, "slope_variance_theta_le_1");
        assert!(!inner.binding);
        assert_eq!(report.table.iter().filter(|p| p.quantity == INNER).count(), 3);

        c.theta_grid = vec![0.25, 0.5, 1.0];
        let (_, report) = exercise(&c);
        assert!(report.check("slope_variance_theta_le_1").is_none());
    }

    #[test]
    fn vacuous_strip_gives_free_passage_time() {
        for index in 0..30 {
            let f = WeightField::new(4, index, LatticePoint::diag(40));
            let row = constrained_row(&f, 40, &[1e6]).unwrap();
            assert_eq!(row[0], passage_time(&f, LatticePoint::ORIGIN, LatticePoint::diag(40)).unwrap());
        }
    }
}
