//! Potential-outcome contrasts: ATE, ATT, ATU, and subgroup (conditional)
//! effects, computed from a shared-noise potential-outcome table.

use serde::Serialize;

use super::EstimatorError;
use crate::scm::PotentialOutcomeTable;

/// Mean treatment-effect contrasts for a single binary treatment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contrasts {
    /// E[Y₁ − Y₀] over all units.
    pub ate: f64,
    /// E[Y₁ − Y₀ | treated]: the effect among units that factually received
    /// treatment.
    pub att: f64,
    /// E[Y₁ − Y₀ | untreated].
    pub atu: f64,
    /// E[Y₁ − Y₀ | subgroup], when a subgroup predicate was supplied.
    pub cate: Option<f64>,
    pub n: usize,
    pub n_treated: usize,
}

/// Contrasts from a single-treatment potential-outcome table; `subgroup`
/// optionally selects the units whose conditional effect is wanted.
pub fn po_contrasts(
    table: &PotentialOutcomeTable,
    subgroup: Option<&[bool]>,
) -> Result<Contrasts, EstimatorError> {
    if table.treatments.len() != 1 {
        return Err(EstimatorError::SingleTreatmentRequired {
            got: table.treatments.len(),
        });
    }
    let n = table.n_units();
    let diffs: Vec<f64> = (0..n)
        .map(|i| table.outcomes[1][i] - table.outcomes[0][i])
        .collect();

    let subset_mean = |keep: &dyn Fn(usize) -> bool, which: &str| -> Result<f64, EstimatorError> {
        let selected: Vec<f64> = (0..n).filter(|i| keep(*i)).map(|i| diffs[i]).collect();
        if selected.is_empty() {
            return Err(EstimatorError::EmptySubgroup { which: which.to_string() });
        }
        Ok(selected.iter().sum::<f64>() / selected.len() as f64)
    };

    let ate = subset_mean(&|_| true, "all units")?;
    let att = subset_mean(&|i| table.factual_regime[i] == 1, "treated units")?;
    let atu = subset_mean(&|i| table.factual_regime[i] == 0, "untreated units")?;
    let cate = match subgroup {
        Some(mask) => {
            if mask.len() != n {
                return Err(EstimatorError::LengthMismatch { expected: n, got: mask.len() });
            }
            Some(subset_mean(&|i| mask[i], "subgroup")?)
        }
        None => None,
    };
    let n_treated = table.factual_regime.iter().filter(|r| **r == 1).count();
    Ok(Contrasts { ate, att, atu, cate, n, n_treated })
}

// ── Tests ────────────────────────────────────────────────────────────────────
