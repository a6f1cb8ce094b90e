//! Oracle suites: the dynamic programs and streaming estimators against
//! brute-force references that share no code with them.

use std::fmt;

use lpp_core::geodesic::trace_geodesic;
use lpp_core::oracle::{argmax_paths, max_path_weight, two_pass_covariance, NormalStream};
use lpp_core::passage::{backward_surface, passage_constrained, passage_full, passage_time};
use lpp_core::stats::{fit_loglog, residual_identity};
use lpp_core::{LatticePoint, LogLogPoint, MomentAccumulator, StripRegion, WeightField};

const SELFTEST_SEED: u64 = 0x5E1F_7E57;

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checked: u64,
    pub failures: u64,
    pub detail: String,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} checks, {} failures{}{})",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checked,
            self.failures,
            if self.detail.is_empty() { "" } else { "; " },
            self.detail
        )
    }
}

/// Counts of comparisons made by [`path_enumeration`], per engine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumerationCounts {
    pub forward: u64,
    pub backward: u64,
    pub constrained: u64,
    pub geodesic: u64,
    pub mismatches: u64,
}

/// Every pair `u ⪯ v` in a 4×4 box, for `fields` environments: pointwise and
/// full-grid forward passage times, backward surfaces, strip-constrained
/// passage times (half-widths 1 and 2) and traced geodesics, each compared
/// exactly with exhaustive enumeration.
pub fn enumerate_boxes(fields: u64) -> EnumerationCounts {
    let corner = LatticePoint::diag(3);
    let points: Vec<LatticePoint> = (0..=3).flat_map(|x| (0..=3).map(move |y| LatticePoint::new(x, y))).collect();
    let strips = [StripRegion::new(3, 0.5).expect("valid"), StripRegion::new(3, 1.0).expect("valid")];
    let mut c = EnumerationCounts::default();
    for index in 0..fields {
        let f = WeightField::new(SELFTEST_SEED, index, corner);
        for &u in &points {
            let forward = passage_full(&f, u, corner).expect("box fits");
            for &v in points.iter().filter(|v| u.precedes(**v)) {
                let truth = max_path_weight(&f, u, v, |_| true).expect("u ⪯ v");

                c.forward += 1;
                if passage_time(&f, u, v).ok() != Some(truth) || forward.value(v).ok() != Some(truth) {
                    c.mismatches += 1;
                }

                c.backward += 1;
                let backward = backward_surface(&f, v, u).expect("box fits");
                if backward.value(u).ok() != Some(truth) {
                    c.mismatches += 1;
                }

                c.geodesic += 1;
                let traced = trace_geodesic(&forward, v).map(|g| g.vertices().to_vec());
                if !traced.is_ok_and(|g| argmax_paths(&f, u, v).contains(&g)) {
                    c.mismatches += 1;
                }

                for strip in &strips {
                    if !strip.contains(u) || !strip.contains(v) {
                        continue;
                    }
                    c.constrained += 1;
                    let truth = max_path_weight(&f, u, v, |p| strip.contains(p));
                    if passage_constrained(&f, strip, u, v).ok() != truth {
                        c.mismatches += 1;
                    }
                }
            }
        }
    }
    c
}

pub fn path_enumeration(fields: u64) -> SuiteResult {
    let c = enumerate_boxes(fields);
    SuiteResult {
        name: "path_enumeration",
        checked: c.forward + c.backward + c.constrained + c.geodesic,
        failures: c.mismatches,
        detail: format!(
            "{fields} fields: {} forward, {} backward, {} constrained, {} geodesic",
            c.forward, c.backward, c.constrained, c.geodesic
        ),
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Streaming moments on correlated synthetic data against two-pass sums.
pub fn two_pass_moments() -> SuiteResult {
    const DIM: usize = 5;
    let mut g = NormalStream::new(SELFTEST_SEED);
    let mut rows = Vec::new();
    for i in 0..10_007 {
        let z: Vec<f64> = (0..DIM).map(|_| g.normal()).collect();
        let shift = 1e3 * (i % 3) as f64;
        rows.push(vec![
            4000.0 + 30.0 * z[0],
            1000.0 + 10.0 * z[0] + 5.0 * z[1],
            z[2] * 1e-3,
            -z[0] + 0.1 * z[3] + shift,
            7.0,
        ]);
    }
    let mut acc = MomentAccumulator::with_batches(DIM, 50);
    for r in &rows {
        acc.push(r).expect("dimension matches");
    }
    let (mean, cov) = two_pass_covariance(&rows);
    let m = acc.pooled();
    let mut checked = 0;
    let mut failures = 0;
    for i in 0..DIM {
        checked += 1;
        if !rel_close(m.mean(i), mean[i], 1e-12) {
            failures += 1;
        }
        for j in 0..DIM {
            checked += 1;
            if !rel_close(m.covariance(i, j), cov[i][j], 1e-9) {
                failures += 1;
            }
        }
    }
    for (u, v) in [(0, 1), (1, 0), (0, 3), (1, 2)] {
        checked += 1;
        let (lhs, rhs) = residual_identity(m, u, v).expect("nondegenerate");
        let lambda = cov[u][v] / cov[v][v];
        let direct: f64 = rows
            .iter()
            .map(|r| ((r[u] - mean[u]) - lambda * (r[v] - mean[v])).powi(2))
            .sum::<f64>()
            / (rows.len() as f64 - 1.0);
        if !rel_close(lhs, direct, 1e-9) || (lhs - rhs).abs() > 1e-9 * cov[u][u] {
            failures += 1;
        }
    }
    SuiteResult {
        name: "two_pass_moments",
        checked,
        failures,
        detail: format!("{} rows, {DIM} columns", rows.len()),
    }
}

/// Log-log fits recover planted exponents: exactly without noise, and within
/// two standard errors in at least 90% of noisy trials.
pub fn slope_recovery() -> SuiteResult {
    let xs = [250.0, 500.0, 1000.0, 2000.0, 4000.0];
    let mut g = NormalStream::new(SELFTEST_SEED ^ 1);
    let mut checked = 0;
    let mut failures = 0;
    let mut details = Vec::new();
    for &b in &[-0.5, 1.0 / 3.0, 0.5, 2.0 / 3.0] {
        checked += 1;
        let exact: Vec<LogLogPoint> = xs.iter().map(|&x| LogLogPoint::new(x, 3.0 * f64::powf(x, b), 1.0)).collect();
        match fit_loglog(&exact) {
            Ok(fit) if (fit.slope - b).abs() <= 1e-12 => {}
            _ => failures += 1,
        }

        let (trials, sigma) = (200, 0.03);
        let mut covered = 0;
        for _ in 0..trials {
            let pts: Vec<LogLogPoint> = xs
                .iter()
                .map(|&x| {
                    let y = 3.0 * f64::powf(x, b) * (sigma * g.normal()).exp();
                    LogLogPoint::with_stderr(x, y, sigma * y)
                })
                .collect();
            if let Ok(fit) = fit_loglog(&pts) {
                if (fit.slope - b).abs() <= 2.0 * fit.slope_stderr {
                    covered += 1;
                }
            }
        }
        checked += 1;
        if covered * 10 < trials * 9 {
            failures += 1;
        }
        details.push(format!("b={b:.3}: {covered}/{trials} within 2se"));
    }
    SuiteResult {
        name: "slope_recovery",
        checked,
        failures,
        detail: details.join(", "),
    }
}

/// All suites; `fields` sets the number of enumerated environments.
pub fn run_all(fields: u64) -> Vec<SuiteResult> {
    vec![path_enumeration(fields), two_pass_moments(), slope_recovery()]
}
