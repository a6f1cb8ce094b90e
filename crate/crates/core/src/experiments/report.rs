use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::fit_quantity;
use crate::error::{LppError, Result};
use crate::stats::ExponentFit;

/// Raw per-sample rows, ordered by sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub columns: Vec<String>,
    pub indices: Vec<u64>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn new(columns: Vec<String>) -> Self {
        SampleTable {
            columns,
            indices: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends a row; indices must increase.
    pub fn push(&mut self, index: u64, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(LppError::Contract(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if self.indices.last().is_some_and(|&last| index <= last) {
            return Err(LppError::Contract(format!("sample index {index} out of order")));
        }
        self.indices.push(index);
        self.rows.push(row);
        Ok(())
    }

    /// Appends all rows of `other`, which must continue this table's indices.
    pub fn extend(&mut self, other: SampleTable) -> Result<()> {
        if other.columns != self.columns {
            return Err(LppError::Contract("joining tables with different columns".into()));
        }
        for (i, r) in other.indices.into_iter().zip(other.rows) {
            self.push(i, r)?;
        }
        Ok(())
    }

    /// Puts `head` in front of this table.
    pub fn prepend(&mut self, mut head: SampleTable) {
        head.extend(std::mem::replace(self, SampleTable::new(Vec::new())))
            .expect("prepended table must precede");
        *self = head;
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| LppError::Contract(format!("no column named {name}")))
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }
}

/// One estimate at one grid point. `x` is the grid coordinate used by fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub quantity: String,
    pub label: String,
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

impl GridPoint {
    pub fn new(quantity: &str, label: impl Into<String>, x: f64, value: f64, stderr: f64) -> Self {
        GridPoint {
            quantity: quantity.to_string(),
            label: label.into(),
            x,
            value,
            stderr,
        }
    }
}

/// An exponent fit over the table points of one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub quantity: String,
    pub target: f64,
    pub fit: ExponentFit,
}

/// A pass/fail test of one number against bounds. Non-binding checks are
/// reported but do not enter the overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when the quantity could not be computed; such checks fail.
    pub value: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Bounds are exclusive.
    pub strict: bool,
    pub binding: bool,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn make(name: &str, value: f64, lower: Option<f64>, upper: Option<f64>, strict: bool) -> Self {
        let mut c = Check {
            name: name.to_string(),
            value: Some(value),
            lower,
            upper,
            strict,
            binding: true,
            pass: false,
            note: None,
        };
        c.pass = c.evaluate();
        c
    }

    /// `lower ≤ value ≤ upper`
    pub fn within(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        Self::make(name, value, Some(lower), Some(upper), false)
    }

    pub fn at_most(name: &str, value: f64, upper: f64) -> Self {
        Self::make(name, value, None, Some(upper), false)
    }

    pub fn at_least(name: &str, value: f64, lower: f64) -> Self {
        Self::make(name, value, Some(lower), None, false)
    }

    /// `value < upper`
    pub fn below(name: &str, value: f64, upper: f64) -> Self {
        Self::make(name, value, None, Some(upper), true)
    }

    /// A check whose quantity could not be computed.
    pub fn failed(name: &str, why: &str) -> Self {
        Check {
            name: name.to_string(),
            value: None,
            lower: None,
            upper: None,
            strict: false,
            binding: true,
            pass: false,
            note: Some(why.to_string()),
        }
    }

    pub fn informational(mut self) -> Self {
        self.binding = false;
        self
    }

    /// Re-evaluates the bounds on the stored value.
    pub fn evaluate(&self) -> bool {
        let Some(v) = self.value else { return false };
        if v.is_nan() {
            return false;
        }
        let lo_ok = self.lower.map_or(true, |l| if self.strict { v > l } else { v >= l });
        let hi_ok = self.upper.map_or(true, |u| if self.strict { v < u } else { v <= u });
        lo_ok && hi_ok
    }
}

/// Output of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// The validated configuration, with defaults filled in.
    pub config: ExperimentConfig,
    pub samples: u64,
    pub columns: Vec<String>,
    pub table: Vec<GridPoint>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time: f64,
    pub library_version: String,
    /// Paths of the raw-sample files this report was computed from.
    pub raw_samples: Vec<String>,
}

impl ExperimentReport {
    /// Re-derives every fit from the table points, every check from its value
    /// and bounds, and the verdict from the checks; true when all agree with
    /// what is recorded.
    pub fn recompute_pass(&self) -> Result<bool> {
        for f in &self.fits {
            let refit = fit_quantity(&self.table, &f.quantity)?;
            if refit != f.fit {
                return Ok(false);
            }
            let Some(check) = self.checks.iter().find(|c| c.name == f.name) else {
                return Ok(false);
            };
            if check.value != Some(refit.slope) {
                return Ok(false);
            }
        }
        if self.checks.iter().any(|c| c.evaluate() != c.pass) {
            return Ok(false);
        }
        let pass = self.checks.iter().filter(|c| c.binding).all(|c| c.pass);
        Ok(pass == self.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of binding checks that failed.
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.binding && !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}
