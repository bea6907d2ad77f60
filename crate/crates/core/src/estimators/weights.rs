//! Inverse-probability-of-treatment weights for longitudinal designs.
//!
//! Probabilities are estimated by saturated stratified frequencies — the
//! treatment and confounder spaces here are binary and low-dimensional, and
//! a parametric link would be misspecified against linear-probability
//! generating processes. The denominator of a unit's weight multiplies, over
//! treatment times, the empirical probability of the treatment the unit
//! actually received given its realized history; the stabilizing numerator
//! does the same under a coarser conditioning set (treatment history only,
//! by default). Both conditioning sets are configurable per time through
//! [`WeightConfig`], since published analyses differ in how much history the
//! numerator keeps.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{binary_col, EstimatorError};
use crate::data::Dataset;

// ── Types ────────────────────────────────────────────────────────────────────

/// Per-unit unstabilized (W) and stabilized (SW) weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub w: Vec<f64>,
    pub sw: Vec<f64>,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.sw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sw.is_empty()
    }

    /// Mean stabilized weight — the standard diagnostic; near 1 when the
    /// weight model matches the data.
    pub fn mean_sw(&self) -> f64 {
        self.sw.iter().sum::<f64>() / self.sw.len() as f64
    }

    /// CSV export of the per-unit weights.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("W,SW\n");
        for (w, sw) in self.w.iter().zip(&self.sw) {
            out.push_str(&format!("{w},{sw}\n"));
        }
        out
    }
}

/// Conditioning sets for the weight probabilities, one entry per treatment
/// time. `denominator_given[t]` and `numerator_given[t]` list the columns
/// whose joint observed values condition P(treatment_t | …) in the
/// denominator and the stabilizing numerator respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    pub treatments: Vec<String>,
    pub denominator_given: Vec<Vec<String>>,
    pub numerator_given: Vec<Vec<String>>,
}

impl WeightConfig {
    /// The standard longitudinal configuration: the denominator at time t
    /// conditions on all earlier treatments and on confounders observed up
    /// to and including t; the numerator conditions on earlier treatments
    /// alone.
    pub fn longitudinal(
        treatments: &[String],
        confounders: &[Vec<String>],
    ) -> Result<WeightConfig, EstimatorError> {
        if confounders.len() != treatments.len() {
            return Err(EstimatorError::LengthMismatch {
                expected: treatments.len(),
                got: confounders.len(),
            });
        }
        let mut denominator_given = Vec::with_capacity(treatments.len());
        let mut numerator_given = Vec::with_capacity(treatments.len());
        for t in 0..treatments.len() {
            let mut denom: Vec<String> = treatments[..t].to_vec();
            for block in &confounders[..=t] {
                denom.extend(block.iter().cloned());
            }
            denominator_given.push(denom);
            numerator_given.push(treatments[..t].to_vec());
        }
        Ok(WeightConfig {
            treatments: treatments.to_vec(),
            denominator_given,
            numerator_given,
        })
    }
}

// ── Estimation ───────────────────────────────────────────────────────────────

/// Empirical P(target = observed | given-pattern) for every unit, from
/// saturated stratified frequencies.
fn stratified_probabilities(
    data: &Dataset,
    target: &str,
    given: &[String],
) -> Result<Vec<f64>, EstimatorError> {
    let x = binary_col(data, target)?;
    let columns: Vec<&[f64]> = given
        .iter()
        .map(|c| binary_col(data, c))
        .collect::<Result<_, _>>()?;
    let n = data.n_rows();
    let mut tally: BTreeMap<Vec<u8>, (f64, f64)> = BTreeMap::new();
    for i in 0..n {
        let key: Vec<u8> = columns.iter().map(|c| c[i] as u8).collect();
        let entry = tally.entry(key).or_insert((0.0, 0.0));
        entry.0 += 1.0;
        entry.1 += x[i];
    }
    Ok((0..n)
        .map(|i| {
            let key: Vec<u8> = columns.iter().map(|c| c[i] as u8).collect();
            let (count, treated) = tally[&key];
            let p1 = treated / count;
            if x[i] == 1.0 {
                p1
            } else {
                1.0 - p1
            }
        })
        .collect())
}

/// IPTW weights under an explicit conditioning configuration. The
/// `stabilized` flag selects whether SW carries the configured numerator
/// (true) or equals W (false).
pub fn iptw_weights_with(
    data: &Dataset,
    config: &WeightConfig,
    stabilized: bool,
) -> Result<WeightVector, EstimatorError> {
    let times = config.treatments.len();
    if config.denominator_given.len() != times || config.numerator_given.len() != times {
        return Err(EstimatorError::LengthMismatch {
            expected: times,
            got: config.denominator_given.len().min(config.numerator_given.len()),
        });
    }
    let n = data.n_rows();
    let mut denom = vec![1.0f64; n];
    let mut numer = vec![1.0f64; n];
    for (t, treatment) in config.treatments.iter().enumerate() {
        let d = stratified_probabilities(data, treatment, &config.denominator_given[t])?;
        for (acc, p) in denom.iter_mut().zip(&d) {
            *acc *= p;
        }
        if stabilized {
            let m = stratified_probabilities(data, treatment, &config.numerator_given[t])?;
            for (acc, p) in numer.iter_mut().zip(&m) {
                *acc *= p;
            }
        }
    }
    for (unit, d) in denom.iter().enumerate() {
        if *d <= 0.0 {
            return Err(EstimatorError::ZeroDenominator { unit, time: 0 });
        }
    }
    let w: Vec<f64> = denom.iter().map(|d| 1.0 / d).collect();
    let sw: Vec<f64> = if stabilized {
        numer.iter().zip(&denom).map(|(m, d)| m / d).collect()
    } else {
        w.clone()
    };
    Ok(WeightVector { w, sw })
}

/// IPTW weights under the standard longitudinal conditioning (see
/// [`WeightConfig::longitudinal`]).
pub fn iptw_weights(
    data: &Dataset,
    treatments: &[String],
    confounders: &[Vec<String>],
    stabilized: bool,
) -> Result<WeightVector, EstimatorError> {
    let config = WeightConfig::longitudinal(treatments, confounders)?;
    iptw_weights_with(data, &config, stabilized)
}

/// IPTW weights from user-supplied propensities instead of saturated
/// empirical frequencies. `denominator_p1[t][i]` (and, when stabilizing,
/// `numerator_p1[t][i]`) give P(treatment_t = 1 | …) for unit i under the
/// caller's model. A unit whose observed treatment has probability 0 is a
/// [`EstimatorError::ZeroDenominator`] — possible here, unlike with
/// saturated empirical estimation.
pub fn iptw_from_propensities(
    data: &Dataset,
    treatments: &[String],
    denominator_p1: &[Vec<f64>],
    numerator_p1: Option<&[Vec<f64>]>,
) -> Result<WeightVector, EstimatorError> {
    let n = data.n_rows();
    let times = treatments.len();
    if denominator_p1.len() != times {
        return Err(EstimatorError::LengthMismatch { expected: times, got: denominator_p1.len() });
    }
    if let Some(num) = numerator_p1 {
        if num.len() != times {
            return Err(EstimatorError::LengthMismatch { expected: times, got: num.len() });
        }
    }
    let observed_prob = |p1: f64, x: f64| if x == 1.0 { p1 } else { 1.0 - p1 };
    let mut denom = vec![1.0f64; n];
    let mut numer = vec![1.0f64; n];
    for (t, treatment) in treatments.iter().enumerate() {
        let x = binary_col(data, treatment)?;
        let dp = &denominator_p1[t];
        if dp.len() != n {
            return Err(EstimatorError::LengthMismatch { expected: n, got: dp.len() });
        }
        for i in 0..n {
            let p = observed_prob(dp[i], x[i]);
            if p <= 0.0 {
                return Err(EstimatorError::ZeroDenominator { unit: i, time: t });
            }
            denom[i] *= p;
        }
        if let Some(num) = numerator_p1 {
            let np = &num[t];
            if np.len() != n {
                return Err(EstimatorError::LengthMismatch { expected: n, got: np.len() });
            }
            for i in 0..n {
                numer[i] *= observed_prob(np[i], x[i]);
            }
        }
    }
    let w: Vec<f64> = denom.iter().map(|d| 1.0 / d).collect();
    let sw: Vec<f64> = if numerator_p1.is_some() {
        numer.iter().zip(&denom).map(|(m, d)| m / d).collect()
    } else {
        w.clone()
    };
    Ok(WeightVector { w, sw })
}

// ── Tests ────────────────────────────────────────────────────────────────────
