//! Sharp regression discontinuity with a local linear fit.
//!
//! Units within `bandwidth` of the cutoff enter a regression of the outcome
//! on the centered running variable, a side indicator, and their product;
//! the side indicator's coefficient is the jump at the cutoff. Treatment is
//! assumed to switch exactly at the cutoff (values at the cutoff count as
//! above), so the jump is the local treatment effect.

use super::ols::fit_core;
use super::report::CoefficientReport;
use super::{col, EstimatorError};
use crate::data::Dataset;

/// Estimate the outcome jump at `cutoff` in the running variable, using
/// units with `|running − cutoff| ≤ bandwidth`. The `Above` row of the
/// report is the discontinuity estimate.
pub fn rd_estimate(
    data: &Dataset,
    running: &str,
    outcome: &str,
    cutoff: f64,
    bandwidth: f64,
) -> Result<CoefficientReport, EstimatorError> {
    let a = col(data, running)?;
    let y = col(data, outcome)?;
    let mut centered = Vec::new();
    let mut above = Vec::new();
    let mut kept_y = Vec::new();
    for (ai, yi) in a.iter().zip(y) {
        if (ai - cutoff).abs() <= bandwidth {
            centered.push(ai - cutoff);
            above.push(if *ai >= cutoff { 1.0 } else { 0.0 });
            kept_y.push(*yi);
        }
    }
    if above.is_empty() {
        // Nothing within the bandwidth; name the side the data is missing
        // from entirely so a far-off cutoff reads sensibly.
        let side = if a.iter().all(|ai| *ai < cutoff) { "above" } else { "below" };
        return Err(EstimatorError::EmptyArm { side: side.to_string() });
    }
    let below_count = above.iter().filter(|v| **v == 0.0).count();
    let above_count = above.len() - below_count;
    if below_count == 0 {
        return Err(EstimatorError::EmptyArm { side: "below".to_string() });
    }
    if above_count == 0 {
        return Err(EstimatorError::EmptyArm { side: "above".to_string() });
    }
    if below_count < 2 || above_count < 2 {
        return Err(EstimatorError::InsufficientRows {
            rows: below_count.min(above_count),
            needed: 2,
        });
    }
    let n = centered.len();
    let names = vec![
        "Intercept".to_string(),
        "Running".to_string(),
        "Above".to_string(),
        "Running*Above".to_string(),
    ];
    let columns = vec![
        vec![1.0; n],
        centered.clone(),
        above.clone(),
        centered.iter().zip(&above).map(|(c, z)| c * z).collect(),
    ];
    let core = fit_core(names, &columns, &kept_y, None)?;
    let se = core.homoskedastic_se();
    Ok(core.report(se))
}

// ── Tests ────────────────────────────────────────────────────────────────────
