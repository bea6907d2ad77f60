//! Positivity diagnostics: does every confounder-history stratum contain
//! both treatment arms? Strata are enumerated over the full cross-product of
//! history values, so structurally impossible strata surface as `empty` and
//! deterministic-treatment strata as `boundary`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{binary_col, render_stratum, EstimatorError};
use crate::data::Dataset;

/// Widest stratum space (in binary columns) enumerated before refusing.
const MAX_STRATUM_COLUMNS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PositivityFlag {
    /// Both treatment arms observed.
    Ok,
    /// Stratum observed but the treatment is deterministic in it.
    Boundary,
    /// Stratum never observed.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityRow {
    pub treatment: String,
    /// Conditioning columns: treatment history, then confounder history.
    pub stratum_columns: Vec<String>,
    pub pattern: Vec<u8>,
    pub count: usize,
    /// Empirical P(treatment = 1 | stratum); absent for empty strata.
    pub probability: Option<f64>,
    pub flag: PositivityFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub rows: Vec<PositivityRow>,
}

impl PositivityReport {
    pub fn violations(&self) -> impl Iterator<Item = &PositivityRow> {
        self.rows.iter().filter(|r| r.flag != PositivityFlag::Ok)
    }

    /// Aligned plain-text table.
    pub fn text_table(&self) -> String {
        let mut out = String::from("treatment  stratum  count  p(treated)  flag\n");
        for row in &self.rows {
            let stratum = render_stratum(&row.stratum_columns, &row.pattern);
            let p = row
                .probability
                .map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
            let flag = match row.flag {
                PositivityFlag::Ok => "ok",
                PositivityFlag::Boundary => "boundary",
                PositivityFlag::Empty => "empty",
            };
            out.push_str(&format!(
                "{}  ({})  {}  {}  {}\n",
                row.treatment, stratum, row.count, p, flag
            ));
        }
        out
    }
}

/// Check positivity for each treatment time t: strata are the joint values
/// of earlier treatments and of confounders observed up to and including t.
/// `confounders[t]` lists the confounder columns that precede `treatments[t]`.
pub fn positivity_check(
    data: &Dataset,
    treatments: &[String],
    confounders: &[Vec<String>],
) -> Result<PositivityReport, EstimatorError> {
    if confounders.len() != treatments.len() {
        return Err(EstimatorError::LengthMismatch {
            expected: treatments.len(),
            got: confounders.len(),
        });
    }
    let n = data.n_rows();
    let mut rows = Vec::new();
    for (t, treatment) in treatments.iter().enumerate() {
        let x = binary_col(data, treatment)?;
        let mut stratum_columns: Vec<String> = treatments[..t].to_vec();
        for block in &confounders[..=t] {
            stratum_columns.extend(block.iter().cloned());
        }
        let m = stratum_columns.len();
        if m > MAX_STRATUM_COLUMNS {
            return Err(EstimatorError::StratumSpaceTooLarge { columns: m });
        }
        let columns: Vec<&[f64]> = stratum_columns
            .iter()
            .map(|c| binary_col(data, c))
            .collect::<Result<_, _>>()?;

        // Tally realized strata, then report the full cross-product.
        let mut tally: BTreeMap<Vec<u8>, (usize, usize)> = BTreeMap::new();
        for i in 0..n {
            let key: Vec<u8> = columns.iter().map(|c| c[i] as u8).collect();
            let entry = tally.entry(key).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += (x[i] == 1.0) as usize;
        }
        for bits in 0u32..(1 << m) {
            let pattern: Vec<u8> = (0..m).map(|j| ((bits >> j) & 1) as u8).collect();
            let (count, treated) = tally.get(&pattern).copied().unwrap_or((0, 0));
            let probability = (count > 0).then(|| treated as f64 / count as f64);
            let flag = match probability {
                None => PositivityFlag::Empty,
                Some(p) if p == 0.0 || p == 1.0 => PositivityFlag::Boundary,
                Some(_) => PositivityFlag::Ok,
            };
            rows.push(PositivityRow {
                treatment: treatment.clone(),
                stratum_columns: stratum_columns.clone(),
                pattern,
                count,
                probability,
                flag,
            });
        }
    }
    Ok(PositivityReport { rows })
}

// ── Tests ────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnKind;

    fn dataset(cols: &[(&str, Vec<f64>)]) -> Dataset {
        let mut d = Dataset::new();
        for (name, values) in cols {
            d.push_column(*name, ColumnKind::Binary, values.clone()).unwrap();
        }
        d
    }

    #[test]
    fn balanced_coin_is_all_ok() {
        let d = dataset(&[("X", vec![0., 1., 0., 1.])]);
        let report = positivity_check(&d, &["X".to_string()], &[vec![]]).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].flag, PositivityFlag::Ok);
        assert_eq!(report.rows[0].probability, Some(0.5));
        assert_eq!(report.violations().count(), 0);
    }

    #[test]
    fn deterministic_stratum_is_boundary() {
        // Every L=1 unit is treated.
        let d = dataset(&[
            ("L", vec![0., 0., 0., 1., 1.]),
            ("X", vec![0., 1., 0., 1., 1.]),
        ]);
        let report =
            positivity_check(&d, &["X".to_string()], &[vec!["L".to_string()]]).unwrap();
        let boundary: Vec<&PositivityRow> = report
            .rows
            .iter()
            .filter(|r| r.flag == PositivityFlag::Boundary)
            .collect();
        assert_eq!(boundary.len(), 1);
        assert_eq!(boundary[0].pattern, vec![1]);
        assert_eq!(boundary[0].probability, Some(1.0));
    }

    #[test]
    fn unrealized_stratum_is_empty() {
        // (A=1, B=1) never occurs.
        let d = dataset(&[
            ("A", vec![0., 0., 1., 1.]),
            ("B", vec![0., 1., 0., 0.]),
            ("X", vec![0., 1., 1., 0.]),
        ]);
        let report = positivity_check(
            &d,
            &["X".to_string()],
            &[vec!["A".to_string(), "B".to_string()]],
        )
        .unwrap();
        let empty: Vec<&PositivityRow> = report
            .rows
            .iter()
            .filter(|r| r.flag == PositivityFlag::Empty)
            .collect();
        assert_eq!(empty.len(), 1);
        assert_eq!(empty[0].pattern, vec![1, 1]);
        assert_eq!(empty[0].count, 0);
        assert_eq!(empty[0].probability, None);
    }

    #[test]
    fn later_treatments_condition_on_earlier_ones() {
        let d = dataset(&[
            ("X1", vec![0., 0., 1., 1.]),
            ("X2", vec![0., 1., 0., 1.]),
        ]);
        let report = positivity_check(
            &d,
            &["X1".to_string(), "X2".to_string()],
            &[vec![], vec![]],
        )
        .unwrap();
        // Time 1: one marginal stratum; time 2: strata over X1 in {0,1}.
        assert_eq!(report.rows.len(), 3);
        let time2: Vec<&PositivityRow> =
            report.rows.iter().filter(|r| r.treatment == "X2").collect();
        assert_eq!(time2.len(), 2);
        assert_eq!(time2[0].stratum_columns, vec!["X1".to_string()]);
        assert!(time2.iter().all(|r| r.flag == PositivityFlag::Ok));
    }

    #[test]
    fn mismatched_confounder_blocks_are_rejected() {
        let d = dataset(&[("X", vec![0., 1.])]);
        let err = positivity_check(&d, &["X".to_string()], &[]).unwrap_err();
        assert!(matches!(err, EstimatorError::LengthMismatch { expected: 1, got: 0 }));
    }
}
