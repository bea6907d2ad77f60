//! Backdoor standardization: adjusted means by stratify-average-reweight.
//!
//! The one-step version of the g-formula: E[Y|do(x)] = Σ_z mean(Y|X=x,Z=z)
//! · freq(z). Empty (x, z) strata with freq(z) > 0 are positivity violations
//! and fail loudly — silently dropping them would change the estimand.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{binary_col, col, render_stratum, stratum_key, EstimatorError};
use crate::data::Dataset;

/// Adjusted outcome means per treatment level, plus their difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardizedMeans {
    pub treatment: String,
    pub adjustment: Vec<String>,
    /// E[Y | do(treatment = 0)].
    pub mean_untreated: f64,
    /// E[Y | do(treatment = 1)].
    pub mean_treated: f64,
    /// mean_treated − mean_untreated.
    pub ate: f64,
    pub n: usize,
    pub n_strata: usize,
}

/// Standardize `outcome` over the `adjustment` strata. All treatment and
/// adjustment columns must be binary.
pub fn standardize(
    data: &Dataset,
    treatment: &str,
    outcome: &str,
    adjustment: &[String],
) -> Result<StandardizedMeans, EstimatorError> {
    let x = binary_col(data, treatment)?;
    let y = col(data, outcome)?;
    for a in adjustment {
        binary_col(data, a)?;
    }
    let n = data.n_rows();

    // Stratum pattern → (count, per-level outcome sums and counts).
    #[derive(Default)]
    struct Stratum {
        count: usize,
        sum: [f64; 2],
        level_count: [usize; 2],
    }
    let mut strata: BTreeMap<Vec<u8>, Stratum> = BTreeMap::new();
    for i in 0..n {
        let key = stratum_key(data, adjustment, i)?;
        let s = strata.entry(key).or_default();
        let level = x[i] as usize;
        s.count += 1;
        s.sum[level] += y[i];
        s.level_count[level] += 1;
    }

    let violations: Vec<String> = strata
        .iter()
        .flat_map(|(key, s)| {
            (0..2usize).filter_map(move |level| {
                if s.level_count[level] == 0 {
                    Some(format!(
                        "{treatment}={level} | {}",
                        render_stratum(adjustment, key)
                    ))
                } else {
                    None
                }
            })
        })
        .collect();
    if !violations.is_empty() {
        return Err(EstimatorError::PositivityViolation { strata: violations });
    }

    let mut means = [0.0f64; 2];
    for s in strata.values() {
        let freq = s.count as f64 / n as f64;
        for (level, mean) in means.iter_mut().enumerate() {
            *mean += freq * (s.sum[level] / s.level_count[level] as f64);
        }
    }
    Ok(StandardizedMeans {
        treatment: treatment.to_string(),
        adjustment: adjustment.to_vec(),
        mean_untreated: means[0],
        mean_treated: means[1],
        ate: means[1] - means[0],
        n,
        n_strata: strata.len(),
    })
}

// ── Tests ────────────────────────────────────────────────────────────────────
