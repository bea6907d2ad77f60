//! Nonparametric bootstrap: case resampling with percentile intervals.
//!
//! Replicates are independent and run in parallel; each replicate draws its
//! resampling randomness from a child seed derived from (seed, replicate
//! index), so parallel and sequential runs produce identical intervals.

use rayon::prelude::*;

use super::report::{BootstrapMeta, CoefficientReport};
use super::EstimatorError;
use crate::data::Dataset;
use crate::noise;

/// Fewest replicates for which percentile intervals are offered.
pub const MIN_REPLICATES: usize = 100;

/// Stream tag separating bootstrap resampling from other child-seed users.
const RESAMPLE_STREAM: u64 = 0xB007;

/// Refit `fit` on `replicates` case-resampled copies of `data` (rows drawn
/// with replacement, same n) and attach `level` percentile intervals to the
/// base report. Replicate failures are tolerated up to 5% of B; beyond that
/// the result is [`EstimatorError::BootstrapUnstable`].
pub fn bootstrap_ci<F>(
    data: &Dataset,
    fit: F,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<CoefficientReport, EstimatorError>
where
    F: Fn(&Dataset) -> Result<CoefficientReport, EstimatorError> + Sync,
{
    if replicates < MIN_REPLICATES {
        return Err(EstimatorError::InsufficientReplicates {
            replicates,
            minimum: MIN_REPLICATES,
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(EstimatorError::InvalidLevel { level });
    }
    let mut base = fit(data)?;
    let n = data.n_rows();
    let term_names: Vec<String> = base.rows.iter().map(|r| r.term.clone()).collect();

    let samples: Vec<Option<Vec<f64>>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = noise::child_seed(seed, RESAMPLE_STREAM, rep as u64);
            let rows: Vec<usize> = (0..n)
                .map(|i| {
                    let u = noise::uniform(rep_seed, i as u64, 0, 0);
                    ((u * n as f64) as usize).min(n - 1)
                })
                .collect();
            let report = fit(&data.select_rows(&rows)).ok()?;
            let estimates: Option<Vec<f64>> = term_names
                .iter()
                .map(|t| report.estimate(t).filter(|e| e.is_finite()))
                .collect();
            estimates
        })
        .collect();

    let successes: Vec<&Vec<f64>> = samples.iter().flatten().collect();
    // Interval output requires at least 95% of replicates to succeed.
    if successes.len() * 20 < replicates * 19 {
        return Err(EstimatorError::BootstrapUnstable {
            successes: successes.len(),
            replicates,
        });
    }

    let q_low = (1.0 - level) / 2.0;
    let mut flagged = Vec::new();
    for (j, row) in base.rows.iter_mut().enumerate() {
        let mut draws: Vec<f64> = successes.iter().map(|s| s[j]).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).expect("finite estimates"));
        let lo = percentile(&draws, q_low);
        let hi = percentile(&draws, 1.0 - q_low);
        row.ci = Some((lo, hi));
        if row.estimate < lo || row.estimate > hi {
            flagged.push(row.term.clone());
        }
    }
    base.bootstrap = Some(BootstrapMeta {
        replicates,
        successes: successes.len(),
        level,
        seed,
        flagged_terms: flagged,
    });
    Ok(base)
}

/// Linear-interpolation percentile of a sorted sample (the convention where
/// the h-th order statistic sits at quantile (h−1)/(m−1)).
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= m {
        sorted[m - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

// ── Tests ────────────────────────────────────────────────────────────────────
