//! Named Monte Carlo experiments.
//!
//! Every experiment splits into two pure pieces:
//!
//! * [`Experiment::sample`] maps a sample index to one row of estimand values,
//!   computed from the environment `WeightField::new(master_seed, index, ..)`;
//! * [`Experiment::analyze`] maps the full table of rows (in index order) to
//!   per-grid-point estimates, exponent fits and pass/fail checks.
//!
//! Rows depend only on `(config, index)`, so any partition of the index range
//! over workers produces the same table, and a report can be recomputed from
//! a saved table without resampling.

mod config;
mod constrained;
mod correlation;
mod decomposition;
mod localization;
mod moddev;
mod profile;
mod rectangle;
mod report;
mod transversal;

pub use config::{ExperimentConfig, ExperimentKind, Regime, Tolerances};
pub use report::{Check, ExperimentReport, GridPoint, NamedFit, SampleTable};

use crate::error::{LppError, Result};
use crate::stats::{self, fit_loglog, ExponentFit, LogLogPoint, MomentAccumulator};

/// One configured experiment.
pub trait Experiment: Send + Sync {
    fn config(&self) -> &ExperimentConfig;

    /// Names of the estimand columns, in row order.
    fn columns(&self) -> Vec<String>;

    /// The row for sample `index`.
    fn sample(&self, index: u64) -> Result<Vec<f64>>;

    /// Estimates, fits and checks from a complete table.
    fn analyze(&self, table: &SampleTable) -> Result<Analysis>;
}

/// What [`Experiment::analyze`] produces; wrapped into an
/// [`ExperimentReport`] by [`report_from_table`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Analysis {
    pub table: Vec<GridPoint>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
}

/// Validates `config` (after filling default tolerances) and builds the
/// experiment it names.
pub fn build(config: &ExperimentConfig) -> Result<Box<dyn Experiment>> {
    let config = config.normalized();
    config.validate()?;
    Ok(match config.experiment {
        ExperimentKind::CorrDecay => Box::new(correlation::CorrDecay::new(config)),
        ExperimentKind::CorrClose => Box::new(correlation::CorrClose::new(config)),
        ExperimentKind::ProfileFluct => Box::new(profile::ProfileFluct::new(config)),
        ExperimentKind::ConstrainedVariance => Box::new(constrained::ConstrainedVariance::new(config)),
        ExperimentKind::Decomposition => Box::new(decomposition::Decomposition::new(config)),
        ExperimentKind::GeodesicLocalization => Box::new(localization::GeodesicLocalization::new(config)),
        ExperimentKind::Moddev => Box::new(moddev::Moddev::new(config)),
        ExperimentKind::Transversal => Box::new(transversal::Transversal::new(config)),
        ExperimentKind::RectanglePairs => Box::new(rectangle::RectanglePairs::new(config)),
    })
}

/// Computes rows `range` serially.
pub fn sample_range(exp: &dyn Experiment, range: std::ops::Range<u64>) -> Result<SampleTable> {
    let mut table = SampleTable::new(exp.columns());
    for index in range {
        table.push(index, exp.sample(index)?)?;
    }
    Ok(table)
}

/// Analyzes a table and assembles the report. `pass` is the conjunction of
/// the binding checks.
pub fn report_from_table(exp: &dyn Experiment, table: &SampleTable, wall_time: f64) -> Result<ExperimentReport> {
    if table.columns != exp.columns() {
        return Err(LppError::Contract(format!(
            "table columns {:?} do not match experiment columns {:?}",
            table.columns,
            exp.columns()
        )));
    }
    let Analysis { table: points, fits, checks } = exp.analyze(table)?;
    let pass = checks.iter().filter(|c| c.binding).all(|c| c.pass);
    Ok(ExperimentReport {
        experiment: exp.config().experiment.name().to_string(),
        config: exp.config().clone(),
        samples: table.len() as u64,
        columns: table.columns.clone(),
        table: points,
        fits,
        checks,
        pass,
        wall_time,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        raw_samples: Vec::new(),
    })
}

/// Builds, samples every index serially, and reports.
pub fn run(config: &ExperimentConfig) -> Result<(SampleTable, ExperimentReport)> {
    let start = std::time::Instant::now();
    let exp = build(config)?;
    let table = sample_range(exp.as_ref(), 0..exp.config().samples)?;
    let report = report_from_table(exp.as_ref(), &table, start.elapsed().as_secs_f64())?;
    Ok((table, report))
}

fn run_kind(kind: ExperimentKind, config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.experiment != kind {
        return Err(LppError::Config(format!(
            "config names experiment {}, expected {}",
            config.experiment.name(),
            kind.name()
        )));
    }
    run(config).map(|(_, report)| report)
}

pub fn run_corr_decay(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::CorrDecay, config)
}

pub fn run_corr_close(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::CorrClose, config)
}

pub fn run_profile_fluct(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::ProfileFluct, config)
}

pub fn run_constrained_variance(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::ConstrainedVariance, config)
}

pub fn run_decomposition(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::Decomposition, config)
}

pub fn run_geodesic_localization(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::GeodesicLocalization, config)
}

pub fn run_moddev(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::Moddev, config)
}

pub fn run_transversal(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::Transversal, config)
}

pub fn run_rectangle_pairs(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_kind(ExperimentKind::RectanglePairs, config)
}

// ---------------------------------------------------------------------------
// shared analysis pieces

/// Formats a grid parameter for column names: `0.5`, `2`, `1000`.
pub(crate) fn param(x: f64) -> String {
    format!("{x}")
}

/// Pushes every row into a batched accumulator.
pub(crate) fn accumulate(table: &SampleTable, batches: usize) -> Result<MomentAccumulator> {
    let mut acc = MomentAccumulator::with_batches(table.columns.len(), batches);
    for row in &table.rows {
        acc.push(row)?;
    }
    Ok(acc)
}

/// Largest `|lhs − rhs| / Var(U)` of the residual-variance identity over all
/// ordered column pairs with a non-constant `U`.
pub(crate) fn identity_check(acc: &MomentAccumulator, tolerance: f64) -> Check {
    let m = acc.pooled();
    let mut worst = 0.0f64;
    for u in 0..m.dim() {
        let var_u = m.variance(u);
        if !(var_u > 0.0) {
            continue;
        }
        for v in (0..m.dim()).filter(|&v| v != u) {
            if let Ok((lhs, rhs)) = stats::residual_identity(m, u, v) {
                worst = worst.max((lhs - rhs).abs() / var_u);
            }
        }
    }
    Check::at_most("residual_identity", worst, tolerance)
}

/// Weighted log-log fit of the table points of `quantity`, recorded with the
/// slope check `|slope − target| ≤ tol`. A fit that cannot be formed (too
/// few positive points) yields a failing check instead of an error.
pub(crate) fn fit_and_check(
    points: &[GridPoint],
    name: &str,
    quantity: &str,
    target: f64,
    tol: f64,
    out: &mut Analysis,
) {
    let fit = fit_quantity(points, quantity);
    match fit {
        Ok(fit) => {
            out.checks.push(Check::within(name, fit.slope, target - tol, target + tol));
            out.fits.push(NamedFit {
                name: name.to_string(),
                quantity: quantity.to_string(),
                target,
                fit,
            });
        }
        Err(e) => out.checks.push(Check::failed(name, &e.to_string())),
    }
}

/// The fit used by [`fit_and_check`], exposed so reports can be re-derived
/// from their tables.
pub(crate) fn fit_quantity(points: &[GridPoint], quantity: &str) -> Result<ExponentFit> {
    let pts: Vec<LogLogPoint> = points
        .iter()
        .filter(|p| p.quantity == quantity)
        .map(|p| LogLogPoint::with_stderr(p.x, p.value, p.stderr))
        .collect();
    fit_loglog(&pts)
}

/// `|a − b| / max(|a|, |b|)`: the relative spread used by stability checks.
pub(crate) fn relative_spread(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
