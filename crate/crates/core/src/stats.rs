//! Streaming moments, batch-means uncertainty, log-log fits and
//! two-sample Kolmogorov–Smirnov tests.

use serde::{Deserialize, Serialize};

use crate::error::{LppError, Result};

/// Default number of interleaved batches used for batch-means errors.
pub const DEFAULT_BATCHES: usize = 50;

/// Single-pass means and centered co-moment sums (Welford / Chan et al.).
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    count: u64,
    means: Vec<f64>,
    // row-major dim × dim, upper and lower triangles both maintained
    comoments: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Moments {
            count: 0,
            means: vec![0.0; dim],
            comoments: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    pub fn comoment(&self, i: usize, j: usize) -> f64 {
        self.comoments[i * self.dim() + j]
    }

    pub(crate) fn push_unchecked(&mut self, obs: &[f64]) {
        let dim = self.dim();
        self.count += 1;
        let n = self.count as f64;
        // deviations from the old means
        let delta: Vec<f64> = obs.iter().zip(&self.means).map(|(x, m)| x - m).collect();
        for (m, d) in self.means.iter_mut().zip(&delta) {
            *m += d / n;
        }
        for i in 0..dim {
            let after_i = obs[i] - self.means[i];
            for j in 0..dim {
                self.comoments[i * dim + j] += delta[j] * after_i;
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let dim = self.dim();
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta: Vec<f64> = other.means.iter().zip(&self.means).map(|(b, a)| b - a).collect();
        for i in 0..dim {
            for j in 0..dim {
                self.comoments[i * dim + j] += other.comoments[i * dim + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for (m, d) in self.means.iter_mut().zip(&delta) {
            *m += d * nb / n;
        }
        self.count += other.count;
    }

    /// Sample covariance (divisor `count − 1`).
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.comoment(i, j) / (self.count - 1) as f64
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.covariance(i, i)
    }

    /// Pearson correlation, clamped to `[-1, 1]`.
    pub fn correlation(&self, i: usize, j: usize) -> Result<f64> {
        let (a, b) = (self.comoment(i, i), self.comoment(j, j));
        if self.count < 2 || !(a > 0.0) || !(b > 0.0) {
            return Err(LppError::Degenerate(format!("zero variance in coordinate {i} or {j}")));
        }
        Ok((self.comoment(i, j) / (a * b).sqrt()).clamp(-1.0, 1.0))
    }
}

/// Pooled [`Moments`] plus `B` interleaved batches: observation number `k`
/// (counting from zero over the whole stream) goes to batch `k mod B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    total: Moments,
    batches: Vec<Moments>,
}

/// An estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl MomentAccumulator {
    pub fn new(dim: usize) -> Self {
        Self::with_batches(dim, DEFAULT_BATCHES)
    }

    pub fn with_batches(dim: usize, batches: usize) -> Self {
        assert!(batches >= 2, "batch means need at least two batches");
        MomentAccumulator {
            total: Moments::new(dim),
            batches: vec![Moments::new(dim); batches],
        }
    }

    pub fn dim(&self) -> usize {
        self.total.dim()
    }

    pub fn count(&self) -> u64 {
        self.total.count
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn pooled(&self) -> &Moments {
        &self.total
    }

    pub fn push(&mut self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.dim() {
            return Err(LppError::Contract(format!(
                "observation has {} coordinates, accumulator expects {}",
                obs.len(),
                self.dim()
            )));
        }
        let b = (self.total.count % self.batches.len() as u64) as usize;
        self.batches[b].push_unchecked(obs);
        self.total.push_unchecked(obs);
        Ok(())
    }

    /// Appends `other`'s stream after this one. Batches are rotated so the
    /// result equals pushing both streams through one accumulator.
    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if other.dim() != self.dim() || other.batches.len() != self.batches.len() {
            return Err(LppError::Contract("merging accumulators of different shape".into()));
        }
        let nb = self.batches.len();
        let shift = (self.total.count % nb as u64) as usize;
        for (k, batch) in other.batches.iter().enumerate() {
            self.batches[(k + shift) % nb].merge(batch);
        }
        self.total.merge(&other.total);
        Ok(())
    }

    fn require_batches(&self) -> Result<()> {
        let need = 2 * self.batches.len() as u64;
        if self.count() < need {
            return Err(LppError::Contract(format!(
                "batch errors need at least {need} observations, have {}",
                self.count()
            )));
        }
        Ok(())
    }

    /// Applies `stat` to the pooled moments and to every batch; the standard
    /// error is the spread of the batch values over `√B`.
    pub fn estimate(&self, stat: impl Fn(&Moments) -> Result<f64>) -> Result<Estimate> {
        self.require_batches()?;
        let value = stat(&self.total)?;
        let per_batch = self.batches.iter().map(&stat).collect::<Result<Vec<f64>>>()?;
        Ok(Estimate {
            value,
            stderr: batch_stderr(&per_batch),
        })
    }

    /// Pearson correlation with batch-means standard error.
    pub fn correlation(&self, i: usize, j: usize) -> Result<Estimate> {
        self.estimate(|m| m.correlation(i, j))
    }

    pub fn variance(&self, i: usize) -> Result<Estimate> {
        self.estimate(|m| Ok(m.variance(i)))
    }

    pub fn mean(&self, i: usize) -> Result<Estimate> {
        self.estimate(|m| Ok(m.mean(i)))
    }

    /// Both sides of `min_λ Var(U − λV) = (1 − ρ²(U, V)) Var(U)` on the pooled
    /// sample moments. The left side is evaluated at the minimizing `λ`.
    pub fn residual_identity(&self, u: usize, v: usize) -> Result<(f64, f64)> {
        residual_identity(&self.total, u, v)
    }
}

/// See [`MomentAccumulator::residual_identity`]. A constant `V` leaves `λ`
/// irrelevant and both sides equal `Var(U)`.
pub fn residual_identity(m: &Moments, u: usize, v: usize) -> Result<(f64, f64)> {
    if m.count < 2 {
        return Err(LppError::Contract("residual identity needs two observations".into()));
    }
    let (var_u, var_v, cov) = (m.variance(u), m.variance(v), m.covariance(u, v));
    if var_u == 0.0 && var_v == 0.0 {
        return Err(LppError::Degenerate("both coordinates are constant".into()));
    }
    if var_v == 0.0 {
        return Ok((var_u, var_u));
    }
    let lambda = cov / var_v;
    let lhs = var_u - 2.0 * lambda * cov + lambda * lambda * var_v;
    let rho2 = if var_u == 0.0 { 0.0 } else { cov * cov / (var_u * var_v) };
    Ok((lhs, (1.0 - rho2) * var_u))
}

/// Standard deviation of per-batch values divided by `√B`.
pub fn batch_stderr(per_batch: &[f64]) -> f64 {
    let b = per_batch.len() as f64;
    let mean = per_batch.iter().sum::<f64>() / b;
    let var = per_batch.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Applies `stat` to `values` and to interleaved batches (`k mod B`).
pub fn batch_estimate(values: &[f64], batches: usize, stat: impl Fn(&[f64]) -> f64) -> Result<Estimate> {
    if values.len() < 2 * batches || batches < 2 {
        return Err(LppError::Contract(format!(
            "batch errors need at least {} values, have {}",
            2 * batches,
            values.len()
        )));
    }
    let per_batch: Vec<f64> = (0..batches)
        .map(|b| {
            let chunk: Vec<f64> = values.iter().skip(b).step_by(batches).copied().collect();
            stat(&chunk)
        })
        .collect();
    Ok(Estimate {
        value: stat(values),
        stderr: batch_stderr(&per_batch),
    })
}

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance (divisor `n − 1`).
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// One point of a log-log fit. `weight` is the inverse variance of `ln y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogPoint {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

impl LogLogPoint {
    pub fn new(x: f64, y: f64, weight: f64) -> Self {
        LogLogPoint { x, y, weight }
    }

    /// Weight from the standard error of `y`: `Var(ln y) ≈ (se / y)²`.
    pub fn with_stderr(x: f64, y: f64, stderr: f64) -> Self {
        let rel = stderr / y;
        let weight = if rel > 0.0 && rel.is_finite() { 1.0 / (rel * rel) } else { 1.0 };
        LogLogPoint { x, y, weight }
    }
}

/// Weighted least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// `sqrt(max(1, χ²/(n−2)) / Σ w (ln x − mean)²)`: the inverse-variance
    /// error, inflated when the scatter exceeds what the weights predict.
    pub slope_stderr: f64,
    pub r_squared: f64,
    /// `(ln x, ln y, weight)`
    pub points: Vec<(f64, f64, f64)>,
}

pub fn fit_loglog(points: &[LogLogPoint]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(LppError::Contract(format!("log-log fit needs ≥ 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.x > 0.0) || !(p.y > 0.0)) {
        return Err(LppError::Domain(format!("log-log fit needs positive coordinates, got ({}, {})", p.x, p.y)));
    }
    if let Some(p) = points.iter().find(|p| !(p.weight > 0.0) || !p.weight.is_finite()) {
        return Err(LppError::Domain(format!("fit weight {} must be positive and finite", p.weight)));
    }
    let pts: Vec<(f64, f64, f64)> = points.iter().map(|p| (p.x.ln(), p.y.ln(), p.weight)).collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(LppError::Degenerate("all x values coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
    let reduced = chi2 / (pts.len() - 2) as f64;
    let r_squared = if syy > 0.0 { 1.0 - chi2 / syy } else { 1.0 };
    Ok(ExponentFit {
        slope,
        intercept,
        slope_stderr: (reduced.max(1.0) / sxx).sqrt(),
        r_squared,
        points: pts,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic 1% critical
/// value `1.628 · sqrt((n + m) / (n m))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(LppError::Contract("KS test needs two nonempty samples".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    // c(α) = sqrt(-ln(α/2) / 2) at α = 0.01
    let c = (-(0.005f64).ln() / 2.0).sqrt();
    Ok((d, c * ((n + m) / (n * m)).sqrt()))
}
