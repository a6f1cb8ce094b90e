//! The X/Y/Z/W split of the diagonal geodesic `Γ_n` at level `2r`, compared
//! across `(r, n)` pairs with a common ratio.

use super::config::tol;
use super::{accumulate, identity_check, relative_spread, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::Result;
use crate::field::{LatticePoint, WeightField};
use crate::geodesic::decompose;
use crate::stats::{batch_estimate, mean, median, quantile};

const FIELDS: [&str; 12] = ["X", "Y", "Z", "W", "X_star", "X_theta", "X_star2", "v1", "v2", "omega_v", "T_n", "overlap"];

pub(crate) struct Decomposition {
    cfg: ExperimentConfig,
    pairs: Vec<(u32, u32)>,
    theta: f64,
}

impl Decomposition {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let pairs = cfg.r_grid.iter().copied().zip(cfg.n_grid.iter().copied()).collect();
        let theta = cfg.theta.expect("normalized");
        Decomposition { cfg, pairs, theta }
    }
}

impl Experiment for Decomposition {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        self.pairs
            .iter()
            .flat_map(|(r, n)| FIELDS.iter().map(move |f| format!("{f}_r{r}_n{n}")))
            .collect()
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        let n_max = self.pairs.iter().map(|p| p.1).max().expect("validated nonempty");
        let field = WeightField::new(self.cfg.master_seed, index, LatticePoint::diag(n_max));
        let mut row = Vec::with_capacity(FIELDS.len() * self.pairs.len());
        for &(r, n) in &self.pairs {
            let d = decompose(&field, r, n, self.theta)?;
            row.extend_from_slice(&[
                d.x,
                d.y,
                d.z,
                d.w,
                d.x_star,
                d.x_theta,
                d.x_star2,
                d.v.x as f64,
                d.v.y as f64,
                d.weight_v,
                d.t_n,
                d.overlap as f64,
            ]);
        }
        Ok(row)
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let b = cfg.batches;
        let mut out = Analysis::default();
        let p95 = |v: &[f64]| quantile(v, 0.95);
        // (quantity, p95 per pair) for the stability checks
        let mut stable: Vec<(&str, Vec<f64>)> = vec![("p95_W_minus_Y", vec![]), ("p95_Xstar_minus_X", vec![]), ("p95_abs_v1_offset", vec![])];
        for (p, &(r, n)) in self.pairs.iter().enumerate() {
            let base = p * FIELDS.len();
            let col = |f: usize| table.column(base + f);
            let (x, y, z, w, xs) = (col(0), col(1), col(2), col(3), col(4));
            let (v1, omega, tn, ov) = (col(7), col(9), col(10), col(11));
            let failures = (0..table.len()).filter(|&i| z[i] + w[i] - omega[i] != tn[i]).count();
            out.checks
                .push(Check::at_most(&format!("junction_failures_r{r}_n{n}"), failures as f64, 0.0));
            let rf = r as f64;
            let (s13, s23) = (rf.cbrt(), rf.cbrt().powi(2));
            let scaled = |a: &[f64], c: &[f64], s: f64| -> Vec<f64> { a.iter().zip(c).map(|(a, c)| (a - c) / s).collect() };
            let label = format!("r={r},n={n}");
            let wy = scaled(&w, &y, s13);
            let xsx = scaled(&xs, &x, s13);
            let zx = scaled(&z, &x, s13);
            let off: Vec<f64> = v1.iter().map(|v| (v - rf).abs() / s23).collect();
            let frac: Vec<f64> = ov.iter().map(|o| o / (2 * r + 1) as f64).collect();
            let rows = [
                ("p95_W_minus_Y", batch_estimate(&wy, b, p95)?),
                ("p95_Xstar_minus_X", batch_estimate(&xsx, b, p95)?),
                ("p95_abs_v1_offset", batch_estimate(&off, b, p95)?),
                ("median_W_minus_Y", batch_estimate(&wy, b, median)?),
                ("median_Xstar_minus_X", batch_estimate(&xsx, b, median)?),
                ("median_Z_minus_X", batch_estimate(&zx, b, median)?),
                ("p95_Z_minus_X", batch_estimate(&zx, b, p95)?),
                ("median_abs_v1_offset", batch_estimate(&off, b, median)?),
                ("mean_overlap_fraction", batch_estimate(&frac, b, mean)?),
            ];
            for (q, est) in rows {
                out.table.push(GridPoint::new(q, label.clone(), rf, est.value, est.stderr));
                if let Some(s) = stable.iter_mut().find(|s| s.0 == q) {
                    s.1.push(est.value);
                }
            }
        }
        if self.pairs.len() >= 2 {
            let (first, last) = (self.pairs[0], self.pairs[self.pairs.len() - 1]);
            for (q, vals) in &stable {
                out.checks.push(Check::at_most(
                    &format!("stability_{q}_r{}_vs_r{}", first.0, last.0),
                    relative_spread(vals[0], vals[vals.len() - 1]),
                    tol(cfg.tolerances.stability),
                ));
            }
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

    #[test]
    fn decomposition_report_shape() {
        let mut c = ExperimentConfig::new(ExperimentKind::Decomposition, 40, 8);
        c.r_grid = vec![16, 32];
        c.n_grid = vec![64, 128];
        c.batches = 8;
        let (table, report) = exercise(&c);
        assert_eq!(table.columns.len(), 24);
        assert_eq!(table.columns[0], "X_r16_n64");
        assert_eq!(table.columns[23], "overlap_r32_n128");
        assert!(check(&report, "junction_failures_r16_n64").pass);
        assert!(check(&report, "junction_failures_r32_n128").pass);
        assert!(report.check("stability_p95_W_minus_Y_r16_vs_r32").is_some());
        for row in &table.rows {
            // v sits on level 2r; X ≤ X* and X_θ ≤ X_star2 ≤ X
            assert_eq!(row[7] + row[8], 32.0);
            assert!(row[0] <= row[4] && row[5] <= row[6] && row[6] <= row[0]);
        }
    }

    #[test]
    fn junction_failures_are_counted() {
        let mut c = ExperimentConfig::new(ExperimentKind::Decomposition, 20, 8);
        c.r_grid = vec![8];
        c.n_grid = vec![32];
        c.batches = 4;
        let exp = Decomposition::new(c.normalized());
        let mut t = crate::experiments::sample_range(&exp, 0..20).unwrap();
        t.rows[3][10] += 1.0;
        let a = exp.analyze(&t).unwrap();
        let c = a.checks.iter().find(|c| c.name == "junction_failures_r8_n32").unwrap();
        assert_eq!(c.value, Some(1.0));
    }
}
