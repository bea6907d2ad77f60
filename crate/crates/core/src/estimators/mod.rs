//! Estimation suite: OLS with interaction terms, bootstrap confidence
//! intervals, backdoor standardization, potential-outcome contrasts,
//! positivity diagnostics, stabilized IPTW with marginal structural models,
//! the non-parametric g-formula, segmented (interrupted time series)
//! regression, and regression-discontinuity fits.
//!
//! Every estimator is a pure function of `(data, parameters)`. Estimators
//! only see the columns they are handed — callers apply any observability
//! masking before estimation, and a request for a hidden column fails with
//! [`EstimatorError::UnknownColumn`].

use thiserror::Error;

use crate::data::Dataset;

pub mod bootstrap;
pub mod contrasts;
pub mod gformula;
pub mod its;
pub mod msm;
pub mod ols;
pub mod positivity;
pub mod rd;
pub mod report;
pub mod standardize;
pub mod weights;

pub use bootstrap::bootstrap_ci;
pub use contrasts::{po_contrasts, Contrasts};
pub use gformula::{g_formula, g_formula_msm, g_formula_weighted};
pub use its::its_segmented;
pub use msm::fit_msm;
pub use ols::fit_ols;
pub use positivity::{positivity_check, PositivityFlag, PositivityReport, PositivityRow};
pub use rd::rd_estimate;
pub use report::{BootstrapMeta, CoefficientReport, CoefficientRow};
pub use standardize::{standardize, StandardizedMeans};
pub use weights::{iptw_weights, iptw_weights_with, WeightConfig, WeightVector};

// ── Errors ───────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("unknown column {column}")]
    UnknownColumn { column: String },
    #[error("design matrix is rank deficient: column {column} is linearly dependent")]
    RankDeficient { column: String },
    #[error("{rows} rows cannot identify {needed} parameters")]
    InsufficientRows { rows: usize, needed: usize },
    #[error("column {column} must be binary (0/1)")]
    NonBinaryColumn { column: String },
    #[error("bootstrap unstable: only {successes} of {replicates} replicates succeeded")]
    BootstrapUnstable { successes: usize, replicates: usize },
    #[error("{replicates} bootstrap replicates are too few (minimum {minimum})")]
    InsufficientReplicates { replicates: usize, minimum: usize },
    #[error("confidence level {level} is not in (0, 1)")]
    InvalidLevel { level: f64 },
    #[error("positivity violation: no observations in required strata: {}", strata.join("; "))]
    PositivityViolation { strata: Vec<String> },
    #[error("empty subgroup: {which}")]
    EmptySubgroup { which: String },
    #[error("unit {unit} has zero probability of its observed treatment at time {time}")]
    ZeroDenominator { unit: usize, time: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{side} segment has {count} observations; at least 2 required")]
    InsufficientSegment { side: String, count: usize },
    #[error("no units on the {side} side of the cutoff within the bandwidth")]
    EmptyArm { side: String },
    #[error("contrasts are defined for exactly one treatment, got {got}")]
    SingleTreatmentRequired { got: usize },
    #[error("stratum space over {columns} binary columns is too large to enumerate")]
    StratumSpaceTooLarge { columns: usize },
}

// ── Shared column helpers ────────────────────────────────────────────────────

/// Column access that reports estimator-level errors.
pub(crate) fn col<'a>(data: &'a Dataset, name: &str) -> Result<&'a [f64], EstimatorError> {
    data.column(name)
        .map_err(|_| EstimatorError::UnknownColumn { column: name.to_string() })
}

/// Binary column access (0/1 values enforced).
pub(crate) fn binary_col<'a>(
    data: &'a Dataset,
    name: &str,
) -> Result<&'a [f64], EstimatorError> {
    let values = col(data, name)?;
    if values.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(EstimatorError::NonBinaryColumn { column: name.to_string() });
    }
    Ok(values)
}

/// Canonical display name of a product term: column names joined by `*`.
pub(crate) fn term_name(columns: &[String]) -> String {
    columns.join("*")
}

/// Materialize one product term as a row-wise column.
pub(crate) fn term_column(
    data: &Dataset,
    columns: &[String],
) -> Result<Vec<f64>, EstimatorError> {
    let mut out = vec![1.0; data.n_rows()];
    for name in columns {
        for (o, v) in out.iter_mut().zip(col(data, name)?) {
            *o *= v;
        }
    }
    Ok(out)
}

/// A stratum key: the joint value pattern of a column list for one row.
pub(crate) fn stratum_key(
    data: &Dataset,
    columns: &[String],
    row: usize,
) -> Result<Vec<u8>, EstimatorError> {
    columns
        .iter()
        .map(|c| Ok(col(data, c)?[row] as u8))
        .collect()
}

/// Render a stratum pattern for error messages and reports: "L2=1, X1=0".
pub(crate) fn render_stratum(columns: &[String], pattern: &[u8]) -> String {
    if columns.is_empty() {
        return "(marginal)".to_string();
    }
    columns
        .iter()
        .zip(pattern)
        .map(|(c, v)| format!("{c}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}
