use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LppError, Result};
use crate::passage::strip_width;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CorrDecay,
    CorrClose,
    ProfileFluct,
    ConstrainedVariance,
    Decomposition,
    GeodesicLocalization,
    Moddev,
    Transversal,
    RectanglePairs,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::CorrDecay,
        ExperimentKind::CorrClose,
        ExperimentKind::ProfileFluct,
        ExperimentKind::ConstrainedVariance,
        ExperimentKind::Decomposition,
        ExperimentKind::GeodesicLocalization,
        ExperimentKind::Moddev,
        ExperimentKind::Transversal,
        ExperimentKind::RectanglePairs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CorrDecay => "corr_decay",
            ExperimentKind::CorrClose => "corr_close",
            ExperimentKind::ProfileFluct => "profile_fluct",
            ExperimentKind::ConstrainedVariance => "constrained_variance",
            ExperimentKind::Decomposition => "decomposition",
            ExperimentKind::GeodesicLocalization => "geodesic_localization",
            ExperimentKind::Moddev => "moddev",
            ExperimentKind::Transversal => "transversal",
            ExperimentKind::RectanglePairs => "rectangle_pairs",
        }
    }

    /// One-line description of the estimand.
    pub fn summary(self) -> &'static str {
        match self {
            ExperimentKind::CorrDecay => "slope of ln Corr(T_n, T_r) against ln(r/n) for r << n",
            ExperimentKind::CorrClose => "slope of ln(1 - Corr(T_n, T_r)) against ln((n-r)/n) for r near n",
            ExperimentKind::ProfileFluct => "slope of the median sup-increment of the anti-diagonal profile against s",
            ExperimentKind::ConstrainedVariance => "slope of ln Var(X_theta) against ln theta for strip-constrained passage times",
            ExperimentKind::Decomposition => "tails of the X/Y/Z/W split of the diagonal geodesic at level 2r",
            ExperimentKind::GeodesicLocalization => "crossing deviation of geodesics to (n+-s, n-+s) at level 2(n - t s^1.5)",
            ExperimentKind::Moddev => "means on slope-h rays, variance exponent, and KS stability of (T_n - 4n)/n^(1/3)",
            ExperimentKind::Transversal => "tail of the transversal fluctuation TF_r at scale r^(2/3)",
            ExperimentKind::RectanglePairs => "sup/inf of (T_uv - 2|d(u)-d(v)|)/r^(1/3) over pairs in a thin rectangle",
        }
    }

    /// Configuration fields the experiment reads, beyond the common ones.
    pub fn schema(self) -> &'static str {
        match self {
            ExperimentKind::CorrDecay => "n: int; r_grid: [int] (>= 3 points, max <= regime.corr_max_frac * n); tolerances.slope, fkg_sigmas",
            ExperimentKind::CorrClose => "n: int; gap_grid: [int] of n - r (>= 3 points, max <= regime.corr_max_frac * n); tolerances.slope, monotone_sigmas",
            ExperimentKind::ProfileFluct => "n: int; s_grid: [int] (>= 3 points, max <= regime.profile_s_factor * n^(2/3)); tolerances.slope",
            ExperimentKind::ConstrainedVariance => "r: int; theta_grid: [float] in (0, 4] (>= 3 points, strip half-width >= 2); tolerances.slope, monotone_sigmas",
            ExperimentKind::Decomposition => "r_grid: [int], n_grid: [int] paired elementwise (2r < n); theta: float (default 1); tolerances.stability",
            ExperimentKind::GeodesicLocalization => "n: int; s: int; t_grid: [float] (s^1.5 * max t <= n); tolerances.quantile_bound",
            ExperimentKind::Moddev => "n: int; h_grid: [float] in [0.5, 2]; n_grid: [int] <= n (>= 3 points, optional); ks_n: int < n (optional); tolerances.mean_rel, slope",
            ExperimentKind::Transversal => "r_grid: [int]; k_grid: [float]; tolerances.tail_k, tail_prob, ratio_lo, ratio_hi",
            ExperimentKind::RectanglePairs => "r_grid: [int] each <= 512; sources: int in [1, 64]; tolerances.stability",
        }
    }

    fn default_tolerances(self) -> Tolerances {
        let mut t = Tolerances {
            identity: Some(1e-9),
            ..Tolerances::default()
        };
        match self {
            ExperimentKind::CorrDecay => {
                t.slope = Some(0.10);
                t.fkg_sigmas = Some(3.0);
            }
            ExperimentKind::CorrClose => {
                t.slope = Some(0.12);
                t.monotone_sigmas = Some(3.0);
            }
            ExperimentKind::ProfileFluct => t.slope = Some(0.12),
            ExperimentKind::ConstrainedVariance => {
                t.slope = Some(0.15);
                t.monotone_sigmas = Some(3.0);
            }
            ExperimentKind::Decomposition => t.stability = Some(0.30),
            ExperimentKind::GeodesicLocalization => t.quantile_bound = Some(6.0),
            ExperimentKind::Moddev => {
                t.mean_rel = Some(0.02);
                t.slope = Some(0.12);
            }
            ExperimentKind::Transversal => {
                t.tail_k = Some(3.0);
                t.tail_prob = Some(0.01);
                t.ratio_lo = Some(0.8);
                t.ratio_hi = Some(1.25);
            }
            ExperimentKind::RectanglePairs => t.stability = Some(0.40),
        }
        t
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = LppError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LppError::Config(format!("unknown experiment {s:?}")))
    }
}

/// Pass/fail bounds. Unset fields take the experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed |fitted slope − target exponent|.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    /// Correlations must satisfy ρ ≥ −fkg_sigmas · stderr.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fkg_sigmas: Option<f64>,
    /// Slack, in combined stderrs, for monotonicity checks across a grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_sigmas: Option<f64>,
    /// Relative tolerance on first-order means.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_rel: Option<f64>,
    /// Allowed relative spread |a − b| / max(|a|, |b|) between scales.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_hi: Option<f64>,
    /// Upper bound on the 99th percentile of a normalized deviation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile_bound: Option<f64>,
    /// Residual-variance identity tolerance, relative to Var(U).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
}

impl Tolerances {
    fn or(self, d: Tolerances) -> Tolerances {
        Tolerances {
            slope: self.slope.or(d.slope),
            fkg_sigmas: self.fkg_sigmas.or(d.fkg_sigmas),
            monotone_sigmas: self.monotone_sigmas.or(d.monotone_sigmas),
            mean_rel: self.mean_rel.or(d.mean_rel),
            stability: self.stability.or(d.stability),
            tail_k: self.tail_k.or(d.tail_k),
            tail_prob: self.tail_prob.or(d.tail_prob),
            ratio_lo: self.ratio_lo.or(d.ratio_lo),
            ratio_hi: self.ratio_hi.or(d.ratio_hi),
            quantile_bound: self.quantile_bound.or(d.quantile_bound),
            identity: self.identity.or(d.identity),
        }
    }
}

/// Read a tolerance that normalization guarantees is present.
pub(crate) fn tol(v: Option<f64>) -> f64 {
    v.expect("tolerances are filled by ExperimentConfig::normalized")
}

/// Finite-size stand-ins for the asymptotic regimes (`r << n`, `s << n^{2/3}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    /// Correlation grids need `max(r) ≤ corr_max_frac · n` (and likewise the
    /// gaps `n − r`).
    #[serde(default = "default_corr_frac")]
    pub corr_max_frac: f64,
    /// Profile grids need `max(s) ≤ profile_s_factor · n^{2/3}`.
    #[serde(default = "default_profile_factor")]
    pub profile_s_factor: f64,
}

fn default_corr_frac() -> f64 {
    0.25
}

fn default_profile_factor() -> f64 {
    0.3
}

impl Default for Regime {
    fn default() -> Self {
        Regime {
            corr_max_frac: default_corr_frac(),
            profile_s_factor: default_profile_factor(),
        }
    }
}

fn default_workers() -> usize {
    1
}

fn default_chunk() -> u64 {
    64
}

fn default_batches() -> usize {
    crate::stats::DEFAULT_BATCHES
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// A JSON-serializable experiment configuration. Grids irrelevant to the
/// named experiment must be left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "is_default")]
    pub n: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_grid: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gap_grid: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub s_grid: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_grid: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<u32>,
    pub samples: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_chunk")]
    pub chunk_size: u64,
    #[serde(default = "default_batches")]
    pub batches: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
}

fn config_err(msg: impl Into<String>) -> LppError {
    LppError::Config(msg.into())
}

fn regime_err(msg: impl fmt::Display) -> LppError {
    LppError::Config(format!("regime violation: {msg}"))
}

fn ascending<T: PartialOrd + Copy + fmt::Debug + Into<f64>>(name: &str, grid: &[T]) -> Result<()> {
    if let Some(bad) = grid.iter().find(|&&x| !(x.into() > 0.0) || !x.into().is_finite()) {
        return Err(config_err(format!("{name} entries must be positive and finite, got {bad:?}")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(config_err(format!("{name} must be strictly ascending, got {grid:?}")));
    }
    Ok(())
}

fn require_len<T>(name: &str, grid: &[T], min: usize) -> Result<()> {
    if grid.len() < min {
        return Err(config_err(format!("{name} needs at least {min} points, got {}", grid.len())));
    }
    Ok(())
}

fn require<T: Copy>(name: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| config_err(format!("missing field {name}")))
}

// Keeps every coordinate, level and doubled level inside u32.
const MAX_SIDE: u32 = 1 << 28;

impl ExperimentConfig {
    /// A config with only the common fields set.
    pub fn new(experiment: ExperimentKind, samples: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            n: 0,
            r_grid: Vec::new(),
            gap_grid: Vec::new(),
            s_grid: Vec::new(),
            theta_grid: Vec::new(),
            h_grid: Vec::new(),
            k_grid: Vec::new(),
            t_grid: Vec::new(),
            n_grid: Vec::new(),
            r: None,
            s: None,
            theta: None,
            ks_n: None,
            sources: None,
            samples,
            master_seed,
            workers: default_workers(),
            chunk_size: default_chunk(),
            batches: default_batches(),
            tolerances: Tolerances::default(),
            regime: Regime::default(),
            out_path: None,
        }
    }

    /// Fills unset tolerances and experiment defaults.
    pub fn normalized(&self) -> ExperimentConfig {
        let mut c = self.clone();
        c.tolerances = c.tolerances.or(c.experiment.default_tolerances());
        if c.experiment == ExperimentKind::Decomposition && c.theta.is_none() {
            c.theta = Some(1.0);
        }
        c
    }

    /// Checks field ranges and the regime constraints of the named experiment.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(config_err("workers must be ≥ 1"));
        }
        if self.chunk_size == 0 {
            return Err(config_err("chunk_size must be ≥ 1"));
        }
        if self.batches < 2 {
            return Err(config_err("batches must be ≥ 2"));
        }
        if self.samples < 2 * self.batches as u64 {
            return Err(config_err(format!(
                "samples = {} is fewer than 2 × batches = {}",
                self.samples,
                2 * self.batches
            )));
        }
        if self.n > MAX_SIDE || self.r.is_some_and(|r| r > MAX_SIDE) {
            return Err(config_err(format!("sizes must not exceed {MAX_SIDE}")));
        }
        ascending("r_grid", &self.r_grid)?;
        ascending("gap_grid", &self.gap_grid)?;
        ascending("s_grid", &self.s_grid)?;
        ascending("theta_grid", &self.theta_grid)?;
        ascending("h_grid", &self.h_grid)?;
        ascending("k_grid", &self.k_grid)?;
        ascending("t_grid", &self.t_grid)?;
        ascending("n_grid", &self.n_grid)?;
        if [&self.r_grid, &self.gap_grid, &self.s_grid, &self.n_grid]
            .iter()
            .any(|g| g.iter().any(|&x| x > MAX_SIDE))
        {
            return Err(config_err(format!("grid sizes must not exceed {MAX_SIDE}")));
        }
        let t = &self.tolerances;
        for v in [
            t.slope,
            t.fkg_sigmas,
            t.monotone_sigmas,
            t.mean_rel,
            t.stability,
            t.tail_k,
            t.tail_prob,
            t.ratio_lo,
            t.ratio_hi,
            t.quantile_bound,
            t.identity,
        ]
        .into_iter()
        .flatten()
        {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(config_err(format!("tolerances must be finite and ≥ 0, got {v}")));
            }
        }
        if !(self.regime.corr_max_frac > 0.0) || !(self.regime.profile_s_factor > 0.0) {
            return Err(config_err("regime factors must be positive"));
        }
        self.validate_kind()
    }

    fn unused(&self, allowed: &[&str]) -> Result<()> {
        let present = [
            ("n", self.n != 0),
            ("r_grid", !self.r_grid.is_empty()),
            ("gap_grid", !self.gap_grid.is_empty()),
            ("s_grid", !self.s_grid.is_empty()),
            ("theta_grid", !self.theta_grid.is_empty()),
            ("h_grid", !self.h_grid.is_empty()),
            ("k_grid", !self.k_grid.is_empty()),
            ("t_grid", !self.t_grid.is_empty()),
            ("n_grid", !self.n_grid.is_empty()),
            ("r", self.r.is_some()),
            ("s", self.s.is_some()),
            ("theta", self.theta.is_some()),
            ("ks_n", self.ks_n.is_some()),
            ("sources", self.sources.is_some()),
        ];
        match present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
            Some((name, _)) => Err(config_err(format!("field {name} does not apply to {}", self.experiment))),
            None => Ok(()),
        }
    }

    fn validate_kind(&self) -> Result<()> {
        let n = self.n;
        let need_n = || {
            if n < 2 {
                Err(config_err("n must be ≥ 2"))
            } else {
                Ok(())
            }
        };
        match self.experiment {
            ExperimentKind::CorrDecay => {
                self.unused(&["n", "r_grid"])?;
                need_n()?;
                require_len("r_grid", &self.r_grid, 3)?;
                let max = *self.r_grid.last().expect("nonempty");
                let bound = self.regime.corr_max_frac * n as f64;
                if max as f64 > bound {
                    return Err(regime_err(format!("max(r_grid) = {max} exceeds {} · n = {bound}", self.regime.corr_max_frac)));
                }
            }
            ExperimentKind::CorrClose => {
                self.unused(&["n", "gap_grid"])?;
                need_n()?;
                require_len("gap_grid", &self.gap_grid, 3)?;
                let max = *self.gap_grid.last().expect("nonempty");
                let bound = self.regime.corr_max_frac * n as f64;
                if max as f64 > bound || max >= n {
                    return Err(regime_err(format!("max(gap_grid) = {max} exceeds {} · n = {bound}", self.regime.corr_max_frac)));
                }
            }
            ExperimentKind::ProfileFluct => {
                self.unused(&["n", "s_grid"])?;
                need_n()?;
                require_len("s_grid", &self.s_grid, 3)?;
                let max = *self.s_grid.last().expect("nonempty");
                let bound = self.regime.profile_s_factor * (n as f64).cbrt().powi(2);
                if max as f64 > bound + 1e-9 || max >= n {
                    return Err(regime_err(format!(
                        "max(s_grid) = {max} exceeds {} · n^(2/3) = {bound:.3}",
                        self.regime.profile_s_factor
                    )));
                }
            }
            ExperimentKind::ConstrainedVariance => {
                self.unused(&["r", "theta_grid"])?;
                let r = require("r", self.r)?;
                if r < 1 {
                    return Err(config_err("r must be ≥ 1"));
                }
                require_len("theta_grid", &self.theta_grid, 3)?;
                if let Some(bad) = self.theta_grid.iter().find(|&&t| t > 4.0) {
                    return Err(config_err(format!("theta_grid entries must lie in (0, 4], got {bad}")));
                }
                let w = strip_width(r, self.theta_grid[0]);
                if w < 2 {
                    return Err(config_err(format!(
                        "strip degenerate: half-width {w} < 2 at theta = {}",
                        self.theta_grid[0]
                    )));
                }
            }
            ExperimentKind::Decomposition => {
                self.unused(&["r_grid", "n_grid", "theta"])?;
                require_len("r_grid", &self.r_grid, 1)?;
                if self.r_grid.len() != self.n_grid.len() {
                    return Err(config_err("r_grid and n_grid must pair up elementwise"));
                }
                if let Some((r, n)) = self.r_grid.iter().zip(&self.n_grid).find(|(&r, &n)| 2 * r >= n) {
                    return Err(config_err(format!("decomposition needs r < n/2, got r = {r}, n = {n}")));
                }
                let theta = require("theta", self.theta)?;
                if !(theta > 0.0) || !theta.is_finite() {
                    return Err(config_err("theta must be positive"));
                }
                if let Some(r) = self.r_grid.iter().find(|&&r| strip_width(r, theta) < 1) {
                    return Err(config_err(format!("strip degenerate: half-width 0 at r = {r}, theta = {theta}")));
                }
            }
            ExperimentKind::GeodesicLocalization => {
                self.unused(&["n", "s", "t_grid"])?;
                need_n()?;
                let s = require("s", self.s)?;
                if s < 1 || s >= n {
                    return Err(config_err(format!("s must satisfy 1 ≤ s < n, got {s}")));
                }
                require_len("t_grid", &self.t_grid, 1)?;
                let tmax = *self.t_grid.last().expect("nonempty");
                if (s as f64).powf(1.5) * tmax > n as f64 {
                    return Err(regime_err(format!("s^1.5 · max(t_grid) = {} exceeds n = {n}", (s as f64).powf(1.5) * tmax)));
                }
            }
            ExperimentKind::Moddev => {
                self.unused(&["n", "h_grid", "n_grid", "ks_n"])?;
                need_n()?;
                if let Some(h) = self.h_grid.iter().find(|&&h| !(0.5..=2.0).contains(&h)) {
                    return Err(config_err(format!("h = {h} outside [0.5, 2]")));
                }
                if !self.n_grid.is_empty() {
                    require_len("n_grid", &self.n_grid, 3)?;
                    if *self.n_grid.last().expect("nonempty") > n {
                        return Err(config_err("n_grid entries must not exceed n"));
                    }
                }
                if let Some(k) = self.ks_n {
                    if k < 1 || k >= n {
                        return Err(config_err(format!("ks_n must satisfy 1 ≤ ks_n < n, got {k}")));
                    }
                }
                if self.h_grid.is_empty() && self.n_grid.is_empty() && self.ks_n.is_none() {
                    return Err(config_err("moddev needs at least one of h_grid, n_grid, ks_n"));
                }
            }
            ExperimentKind::Transversal => {
                self.unused(&["r_grid", "k_grid"])?;
                require_len("r_grid", &self.r_grid, 1)?;
                require_len("k_grid", &self.k_grid, 1)?;
            }
            ExperimentKind::RectanglePairs => {
                self.unused(&["r_grid", "sources"])?;
                require_len("r_grid", &self.r_grid, 1)?;
                if let Some(r) = self.r_grid.iter().find(|&&r| r > 512) {
                    return Err(config_err(format!("rectangle_pairs needs r ≤ 512, got {r}")));
                }
                let sources = require("sources", self.sources)?;
                if !(1..=64).contains(&sources) {
                    return Err(config_err(format!("sources must lie in [1, 64], got {sources}")));
                }
            }
        }
        Ok(())
    }
}
