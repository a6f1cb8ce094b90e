//! Transversal fluctuation `TF_r = max |x − y|` of the diagonal geodesic
//! `Γ_r`, at scale `r^{2/3}`. One surface per sample serves every `r`.

use super::config::tol;
use super::{accumulate, identity_check, param, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::Result;
use crate::field::{LatticePoint, WeightField};
use crate::geodesic::{forward_surface, trace_geodesic};
use crate::stats::{batch_estimate, mean, median};

pub(crate) struct Transversal {
    cfg: ExperimentConfig,
}

impl Transversal {
    pub fn new(cfg: ExperimentConfig) -> Self {
        Transversal { cfg }
    }
}

impl Experiment for Transversal {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        self.cfg.r_grid.iter().map(|r| format!("TF_{r}")).collect()
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        let r_max = *self.cfg.r_grid.last().expect("validated nonempty");
        let field = WeightField::new(self.cfg.master_seed, index, LatticePoint::diag(r_max));
        let surface = forward_surface(&field, LatticePoint::diag(r_max))?;
        self.cfg
            .r_grid
            .iter()
            .map(|&r| Ok(trace_geodesic(&surface, LatticePoint::diag(r))?.transversal_fluctuation() as f64))
            .collect()
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let b = cfg.batches;
        let t = &cfg.tolerances;
        let (tail_k, tail_prob) = (tol(t.tail_k), tol(t.tail_prob));
        let mut out = Analysis::default();
        let min_tf = table.rows.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        out.checks.push(Check::at_least("min_tf", min_tf, 1.0));
        let mut medians = Vec::new();
        for (i, &r) in cfg.r_grid.iter().enumerate() {
            let scale = (r as f64).cbrt().powi(2);
            let scaled: Vec<f64> = table.column(i).into_iter().map(|tf| tf / scale).collect();
            let label = format!("r={r}");
            let med = batch_estimate(&scaled, b, median)?;
            out.table
                .push(GridPoint::new("median_scaled_tf", label.clone(), r as f64, med.value, med.stderr));
            medians.push(med.value);
            let mut ks: Vec<f64> = cfg.k_grid.clone();
            if !ks.contains(&tail_k) {
                ks.push(tail_k);
            }
            for k in ks {
                let exceed: Vec<f64> = scaled.iter().map(|&x| if x > k { 1.0 } else { 0.0 }).collect();
                let p = batch_estimate(&exceed, b, mean)?;
                out.table.push(GridPoint::new(
                    &format!("tail_k{}", param(k)),
                    label.clone(),
                    r as f64,
                    p.value,
                    p.stderr,
                ));
                if k == tail_k {
                    out.checks
                        .push(Check::below(&format!("tail_r{r}_k{}", param(k)), p.value, tail_prob));
                }
            }
        }
        if cfg.r_grid.len() >= 2 {
            let (lo, hi) = (cfg.r_grid[0], cfg.r_grid[cfg.r_grid.len() - 1]);
            out.checks.push(Check::within(
                &format!("median_ratio_r{lo}_vs_r{hi}"),
                medians[0] / medians[medians.len() - 1],
                tol(t.ratio_lo),
                tol(t.ratio_hi),
            ));
        }
        out.checks.push(identity_check(&accumulate(table, b)?, tol(t.identity)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::testing::{check, exercise};
    use crate::experiments::ExperimentKind;

    #[test]
    fn transversal_report_shape() {
        let mut c = ExperimentConfig::new(ExperimentKind::Transversal, 40, 51);
        c.r_grid = vec![32, 64, 128];
        c.k_grid = vec![1.0, 2.0];
        c.batches = 8;
        let (table, report) = exercise(&c);
        assert_eq!(table.columns, vec!["TF_32", "TF_64", "TF_128"]);
        assert!(check(&report, "min_tf").pass);
        assert!(report.check("tail_r64_k3").is_some());
        assert!(report.check("median_ratio_r32_vs_r128").is_some());
        // k = 1, 2 and the tail threshold 3
        assert_eq!(report.table.iter().filter(|p| p.quantity.starts_with("tail_")).count(), 9);
        assert!(table.rows.iter().flatten().all(|&tf| tf >= 1.0 && tf.fract() == 0.0));
    }
}
