//! Two-point correlation of diagonal passage times, `ρ(n, r) = Corr(T_n, T_r)`,
//! in its two regimes: decay for `r << n` and approach to 1 for `r` near `n`.
//! One wavefront sweep per sample gives every `T_r` together with `T_n`.

use super::config::tol;
use super::{accumulate, fit_and_check, identity_check, Analysis, Check, Experiment, ExperimentConfig, GridPoint, SampleTable};
use crate::error::{LppError, Result};
use crate::field::{LatticePoint, WeightField};
use crate::passage::passage_to_targets;
use crate::stats::{Moments, MomentAccumulator};

fn diagonal_row(cfg: &ExperimentConfig, index: u64, rs: &[u32]) -> Result<Vec<f64>> {
    let n = cfg.n;
    let field = WeightField::new(cfg.master_seed, index, LatticePoint::diag(n));
    let targets: Vec<LatticePoint> = rs.iter().chain(std::iter::once(&n)).map(|&k| LatticePoint::diag(k)).collect();
    passage_to_targets(&field, LatticePoint::ORIGIN, &targets)
}

pub(crate) struct CorrDecay {
    cfg: ExperimentConfig,
}

impl CorrDecay {
    pub fn new(cfg: ExperimentConfig) -> Self {
        CorrDecay { cfg }
    }
}

impl Experiment for CorrDecay {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn columns(&self) -> Vec<String> {
        self.cfg
            .r_grid
            .iter()
            .chain(std::iter::once(&self.cfg.n))
            .map(|k| format!("T_{k}"))
            .collect()
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        diagonal_row(&self.cfg, index, &self.cfg.r_grid)
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let acc = accumulate(table, cfg.batches)?;
        let last = cfg.r_grid.len();
        let sigmas = tol(cfg.tolerances.fkg_sigmas);
        let mut out = Analysis::default();
        for (i, &r) in cfg.r_grid.iter().enumerate() {
            let est = acc.correlation(i, last)?;
            out.table
                .push(GridPoint::new("rho", format!("r={r}"), r as f64 / cfg.n as f64, est.value, est.stderr));
            out.checks
                .push(Check::at_least(&format!("fkg_r{r}"), est.value, -sigmas * est.stderr));
        }
        let points = out.table.clone();
        fit_and_check(&points, "slope_rho", "rho", 1.0 / 3.0, tol(cfg.tolerances.slope), &mut out);
        out.checks.push(identity_check(&acc, tol(cfg.tolerances.identity)));
        Ok(out)
    }
}

/// `1 − ρ` from `(σ_n, σ_r, Var(T_n − T_r))`:
/// `(Var D − (σ_n − σ_r)²) / (2 σ_n σ_r)`, which avoids subtracting a
/// near-1 correlation from 1.
pub(crate) fn one_minus_rho(m: &Moments, i_r: usize, i_n: usize, i_d: usize) -> Result<f64> {
    let (sn, sr) = (m.variance(i_n).sqrt(), m.variance(i_r).sqrt());
    if !(sn > 0.0 && sr > 0.0) {
        return Err(LppError::Degenerate("1 − ρ of a constant column".into()));
    }
    Ok((m.variance(i_d) - (sn - sr).powi(2)) / (2.0 * sn * sr))
}

pub(crate) struct CorrClose {
    cfg: ExperimentConfig,
    rs: Vec<u32>,
}

impl CorrClose {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let rs = cfg.gap_grid.iter().map(|g| cfg.n - g).collect();
        CorrClose { cfg, rs }
    }
}

impl Experiment for CorrClose {
    fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    /// `T_{n−g}` for each gap `g`, then `T_n`.
    fn columns(&self) -> Vec<String> {
        self.rs
            .iter()
            .chain(std::iter::once(&self.cfg.n))
            .map(|k| format!("T_{k}"))
            .collect()
    }

    fn sample(&self, index: u64) -> Result<Vec<f64>> {
        diagonal_row(&self.cfg, index, &self.rs)
    }

    fn analyze(&self, table: &SampleTable) -> Result<Analysis> {
        let cfg = &self.cfg;
        let g = self.rs.len();
        // columns: T_r (g of them), T_n, then D_r = T_n − T_r
        let mut aug = MomentAccumulator::with_batches(2 * g + 1, cfg.batches);
        let mut obs = vec![0.0; 2 * g + 1];
        for row in &table.rows {
            obs[..=g].copy_from_slice(row);
            for i in 0..g {
                obs[g + 1 + i] = row[g] - row[i];
            }
            aug.push(&obs)?;
        }
        let mut out = Analysis::default();
        for (i, &gap) in cfg.gap_grid.iter().enumerate() {
            let est = aug.estimate(|m| one_minus_rho(m, i, g, g + 1 + i))?;
            out.table.push(GridPoint::new(
                "one_minus_rho",
                format!("n-r={gap}"),
                gap as f64 / cfg.n as f64,
                est.value,
                est.stderr,
            ));
        }
        // Larger gaps should decorrelate more; reported, not asserted.
        let sigmas = tol(cfg.tolerances.monotone_sigmas);
        for w in out.table.clone().windows(2) {
            let slack = sigmas * w[0].stderr.hypot(w[1].stderr);
            out.checks.push(
                Check::at_least(&format!("monotone_{}_{}", w[0].label, w[1].label), w[1].value - w[0].value, -slack)
                    .informational(),
            );
        }
        let points = out.table.clone();
        fit_and_check(&points, "slope_one_minus_rho", "one_minus_rho", 2.0 / 3.0, tol(cfg.tolerances.slope), &mut out);
        out.checks.push(identity_check(&accumulate(table, cfg.batches)?, tol(cfg.tolerances.identity)));
        Ok(out)
    }
}
