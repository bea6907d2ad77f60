//! Non-parametric g-formula for sequential treatments.
//!
//! For treatments X₁…X_T with confounder blocks C₁…C_T (block t measured
//! just before treatment t), the mean outcome under a fixed regime x̄ is
//!
//! ```text
//! E[Y | do(x̄)] = Σ_l̄  Π_t P(Cₜ = lₜ | X₍₋ₜ₎ = x₍₋ₜ₎, C₍₋ₜ₎ = l₍₋ₜ₎) · E[Y | x̄, l̄]
//! ```
//!
//! with every conditional estimated by saturated stratified frequencies.
//! A confounder history that never occurs along a regime's branch simply
//! contributes zero probability. What is *not* tolerated is a history that
//! is reachable (positive estimated probability) whose required treatment
//! stratum is empty — that means the regime conditions on data that cannot
//! exist, and the estimator reports every such stratum in a
//! [`EstimatorError::PositivityViolation`] rather than silently dropping
//! probability mass.

use std::collections::{BTreeMap, BTreeSet};

use super::report::{CoefficientReport, CoefficientRow};
use super::{binary_col, col, render_stratum, EstimatorError};
use crate::data::Dataset;
use crate::scm::{mobius_coefficients, saturated_terms};

/// Enumeration guard: strata over more binary columns than this are refused.
const MAX_ENUMERATED_COLUMNS: usize = 20;
/// Regime-enumeration guard for the saturated fit.
const MAX_MSM_TREATMENTS: usize = 12;

// ── Frequency tables ─────────────────────────────────────────────────────────

/// Stratified weight sums supporting the g-formula factorization. Keys pack
/// the treatment-prefix bits and confounder-prefix bits little-endian, in
/// the caller's column order.
struct Tables {
    t_count: usize,
    /// Flattened confounder column names, block order preserved.
    cflat: Vec<String>,
    /// `end[t]`: flattened confounder columns through block t.
    end: Vec<usize>,
    treatments: Vec<String>,
    /// Per time t: weight of rows matching (treatments[..t], blocks[..t]).
    denom: Vec<BTreeMap<(u32, u32), f64>>,
    /// Per time t: weight of rows matching (treatments[..t], blocks[..=t]).
    numer: Vec<BTreeMap<(u32, u32), f64>>,
    /// Full-stratum (weight, weight·outcome) sums.
    outcome: BTreeMap<(u32, u32), (f64, f64)>,
}

fn bit_mask(len: usize) -> u32 {
    if len == 0 {
        0
    } else {
        (1u32 << len) - 1
    }
}

impl Tables {
    fn build(
        data: &Dataset,
        row_weights: Option<&[f64]>,
        treatments: &[String],
        confounders: &[Vec<String>],
        outcome: &str,
    ) -> Result<Tables, EstimatorError> {
        let t_count = treatments.len();
        if confounders.len() != t_count {
            return Err(EstimatorError::LengthMismatch {
                expected: t_count,
                got: confounders.len(),
            });
        }
        let n = data.n_rows();
        if n == 0 {
            return Err(EstimatorError::InsufficientRows { rows: 0, needed: 1 });
        }
        if let Some(w) = row_weights {
            if w.len() != n {
                return Err(EstimatorError::LengthMismatch { expected: n, got: w.len() });
            }
        }
        let mut cflat = Vec::new();
        let mut end = Vec::with_capacity(t_count);
        for block in confounders {
            cflat.extend(block.iter().cloned());
            end.push(cflat.len());
        }
        if cflat.len() > MAX_ENUMERATED_COLUMNS {
            return Err(EstimatorError::StratumSpaceTooLarge { columns: cflat.len() });
        }
        if t_count > MAX_ENUMERATED_COLUMNS {
            return Err(EstimatorError::StratumSpaceTooLarge { columns: t_count });
        }
        let tcols: Vec<&[f64]> = treatments
            .iter()
            .map(|c| binary_col(data, c))
            .collect::<Result<_, _>>()?;
        let ccols: Vec<&[f64]> = cflat
            .iter()
            .map(|c| binary_col(data, c))
            .collect::<Result<_, _>>()?;
        let y = col(data, outcome)?;

        let mut denom = vec![BTreeMap::new(); t_count];
        let mut numer = vec![BTreeMap::new(); t_count];
        let mut outcome_map: BTreeMap<(u32, u32), (f64, f64)> = BTreeMap::new();
        for i in 0..n {
            let w = row_weights.map_or(1.0, |w| w[i]);
            let mut tbits = 0u32;
            for (j, c) in tcols.iter().enumerate() {
                tbits |= (c[i] as u32) << j;
            }
            let mut cbits = 0u32;
            for (j, c) in ccols.iter().enumerate() {
                cbits |= (c[i] as u32) << j;
            }
            for t in 0..t_count {
                let tp = tbits & bit_mask(t);
                let prev = if t == 0 { 0 } else { end[t - 1] };
                *denom[t].entry((tp, cbits & bit_mask(prev))).or_insert(0.0) += w;
                *numer[t].entry((tp, cbits & bit_mask(end[t]))).or_insert(0.0) += w;
            }
            let cell = outcome_map.entry((tbits, cbits)).or_insert((0.0, 0.0));
            cell.0 += w;
            cell.1 += w * y[i];
        }
        Ok(Tables {
            t_count,
            cflat,
            end,
            treatments: treatments.to_vec(),
            denom,
            numer,
            outcome: outcome_map,
        })
    }

    fn pattern(bits: u32, len: usize) -> Vec<u8> {
        (0..len).map(|j| (bits >> j & 1) as u8).collect()
    }

    fn violation_label(&self, regime: u32, t_len: usize, combo: u32, c_len: usize) -> String {
        let left = render_stratum(
            &self.treatments[..t_len],
            &Self::pattern(regime, t_len),
        );
        if c_len == 0 {
            left
        } else {
            format!(
                "{left} | {}",
                render_stratum(&self.cflat[..c_len], &Self::pattern(combo, c_len))
            )
        }
    }

    /// E[outcome | do(regime)], accumulating every reachable-but-unobserved
    /// stratum into `violations` instead of failing fast.
    fn regime_mean(&self, regime: u32, violations: &mut BTreeSet<String>) -> f64 {
        let m = self.cflat.len();
        let mut mean = 0.0;
        'combos: for combo in 0..(1u32 << m) {
            let mut prob = 1.0;
            for t in 0..self.t_count {
                let tp = regime & bit_mask(t);
                let prev = if t == 0 { 0 } else { self.end[t - 1] };
                let d = self.denom[t]
                    .get(&(tp, combo & bit_mask(prev)))
                    .copied()
                    .unwrap_or(0.0);
                if d == 0.0 {
                    // The confounder history so far is reachable, yet no row
                    // carries the treatments the regime has assigned by now.
                    violations.insert(self.violation_label(regime, t, combo, prev));
                    continue 'combos;
                }
                let nu = self.numer[t]
                    .get(&(tp, combo & bit_mask(self.end[t])))
                    .copied()
                    .unwrap_or(0.0);
                if nu == 0.0 {
                    // This confounder value never occurs along the branch —
                    // zero probability, zero contribution.
                    continue 'combos;
                }
                prob *= nu / d;
            }
            match self.outcome.get(&(regime, combo)) {
                Some((wsum, wysum)) => mean += prob * (wysum / wsum),
                None => {
                    violations.insert(self.violation_label(regime, self.t_count, combo, m));
                }
            }
        }
        mean
    }
}

// ── Public estimators ────────────────────────────────────────────────────────

fn regime_bits(treatments: &[String], regime: &[u8]) -> Result<u32, EstimatorError> {
    if regime.len() != treatments.len() {
        return Err(EstimatorError::LengthMismatch {
            expected: treatments.len(),
            got: regime.len(),
        });
    }
    let mut bits = 0u32;
    for (j, (value, name)) in regime.iter().zip(treatments).enumerate() {
        if *value > 1 {
            return Err(EstimatorError::NonBinaryColumn { column: name.clone() });
        }
        bits |= u32::from(*value) << j;
    }
    Ok(bits)
}

/// Mean outcome under `regime` with rows counted by `row_weights` (frequency
/// or probability weights; `None` weighs every row 1). The weighted form
/// turns an exhaustively enumerated stratum table into exact population
/// values.
pub fn g_formula_weighted(
    data: &Dataset,
    row_weights: Option<&[f64]>,
    treatments: &[String],
    confounders: &[Vec<String>],
    outcome: &str,
    regime: &[u8],
) -> Result<f64, EstimatorError> {
    let tables = Tables::build(data, row_weights, treatments, confounders, outcome)?;
    let bits = regime_bits(treatments, regime)?;
    let mut violations = BTreeSet::new();
    let mean = tables.regime_mean(bits, &mut violations);
    if !violations.is_empty() {
        return Err(EstimatorError::PositivityViolation {
            strata: violations.into_iter().collect(),
        });
    }
    Ok(mean)
}

/// Mean outcome under `regime` by the sequential g-formula.
/// `confounders[t]` lists the covariates measured just before
/// `treatments[t]`.
pub fn g_formula(
    data: &Dataset,
    treatments: &[String],
    confounders: &[Vec<String>],
    outcome: &str,
    regime: &[u8],
) -> Result<f64, EstimatorError> {
    g_formula_weighted(data, None, treatments, confounders, outcome, regime)
}

/// Saturated marginal-model coefficients from the g-formula: evaluates every
/// treatment regime, then converts the regime means to coefficients by
/// subset inclusion–exclusion. Rows carry estimates only — resample for
/// uncertainty.
pub fn g_formula_msm(
    data: &Dataset,
    treatments: &[String],
    confounders: &[Vec<String>],
    outcome: &str,
) -> Result<CoefficientReport, EstimatorError> {
    if treatments.len() > MAX_MSM_TREATMENTS {
        return Err(EstimatorError::StratumSpaceTooLarge { columns: treatments.len() });
    }
    let tables = Tables::build(data, None, treatments, confounders, outcome)?;
    let mut violations = BTreeSet::new();
    let means: Vec<f64> = (0..(1u32 << treatments.len()))
        .map(|bits| tables.regime_mean(bits, &mut violations))
        .collect();
    if !violations.is_empty() {
        return Err(EstimatorError::PositivityViolation {
            strata: violations.into_iter().collect(),
        });
    }
    let terms = saturated_terms(treatments);
    let coefficients = mobius_coefficients(&terms, &means);
    let rows = terms
        .iter()
        .map(|t| CoefficientRow {
            term: t.name.clone(),
            estimate: coefficients[&t.name],
            se: None,
            t: None,
            p: None,
            ci: None,
        })
        .collect();
    Ok(CoefficientReport {
        rows,
        n: data.n_rows(),
        df: None,
        residual_variance: None,
        bootstrap: None,
    })
}

// ── Tests ────────────────────────────────────────────────────────────────────
