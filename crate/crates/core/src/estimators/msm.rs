//! Marginal structural model fitting by weighted least squares.
//!
//! The design matrix carries the caller's treatment terms (main effects and
//! products); rows are weighted by stabilized IPT weights. Standard errors
//! use the robust (HC0) sandwich — the weighted pseudo-population breaks the
//! homoskedasticity that ordinary least-squares standard errors assume, and
//! estimated weights make the model-based variance anti-conservative.

use super::ols::fit_core;
use super::report::CoefficientReport;
use super::weights::WeightVector;
use super::{col, term_column, term_name, EstimatorError};
use crate::data::Dataset;

/// Fit a linear marginal structural model of `outcome` on `terms`, each term
/// a product of treatment columns, weighted by `weights.sw`.
pub fn fit_msm(
    data: &Dataset,
    weights: &WeightVector,
    outcome: &str,
    terms: &[Vec<String>],
) -> Result<CoefficientReport, EstimatorError> {
    let n = data.n_rows();
    if weights.sw.len() != n {
        return Err(EstimatorError::LengthMismatch { expected: n, got: weights.sw.len() });
    }
    let y = col(data, outcome)?;
    let mut names = vec!["Intercept".to_string()];
    let mut columns = vec![vec![1.0; n]];
    for term in terms {
        names.push(term_name(term));
        columns.push(term_column(data, term)?);
    }
    let core = fit_core(names, &columns, y, Some(&weights.sw))?;
    let se = core.sandwich_se(Some(&weights.sw));
    Ok(core.report(Some(se)))
}

// ── Tests ────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnKind;
    use crate::estimators::fit_ols;

    fn dataset(cols: &[(&str, ColumnKind, Vec<f64>)]) -> Dataset {
        let mut d = Dataset::new();
        for (name, kind, values) in cols {
            d.push_column(*name, *kind, values.clone()).unwrap();
        }
        d
    }

    #[test]
    fn unit_weights_reproduce_ols_estimates() {
        let d = dataset(&[
            ("X", ColumnKind::Binary, vec![0., 0., 1., 1., 0., 1.]),
            ("Y", ColumnKind::Continuous, vec![1.0, 1.4, 3.1, 2.9, 1.2, 3.0]),
        ]);
        let weights = WeightVector { w: vec![1.0; 6], sw: vec![1.0; 6] };
        let terms = vec![vec!["X".to_string()]];
        let msm = fit_msm(&d, &weights, "Y", &terms).unwrap();
        let ols = fit_ols(&d, "Y", &terms).unwrap();
        for (a, b) in msm.rows.iter().zip(&ols.rows) {
            assert_eq!(a.term, b.term);
            assert!((a.estimate - b.estimate).abs() < 1e-9);
        }
    }

    #[test]
    fn weighting_shifts_the_estimate_toward_upweighted_rows() {
        // Without weights the X=1 mean is 3; doubling the weight of the
        // outlying row pulls it toward 4.
        let d = dataset(&[
            ("X", ColumnKind::Binary, vec![0., 0., 1., 1.]),
            ("Y", ColumnKind::Continuous, vec![1.0, 1.0, 2.0, 4.0]),
        ]);
        let flat = WeightVector { w: vec![1.0; 4], sw: vec![1.0; 4] };
        let tilted = WeightVector { w: vec![1.0, 1.0, 1.0, 3.0], sw: vec![1.0, 1.0, 1.0, 3.0] };
        let terms = vec![vec!["X".to_string()]];
        let a = fit_msm(&d, &flat, "Y", &terms).unwrap();
        let b = fit_msm(&d, &tilted, "Y", &terms).unwrap();
        assert!((a.estimate("X").unwrap() - 2.0).abs() < 1e-9);
        assert!((b.estimate("X").unwrap() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn saturated_two_period_terms_are_named_by_products() {
        let d = dataset(&[
            ("X1", ColumnKind::Binary, vec![0., 0., 1., 1., 0., 1., 1., 0.]),
            ("X2", ColumnKind::Binary, vec![0., 1., 0., 1., 1., 1., 0., 0.]),
            (
                "Y",
                ColumnKind::Continuous,
                vec![0.1, 1.0, 2.0, 4.1, 1.1, 3.9, 2.2, 0.0],
            ),
        ]);
        let weights = WeightVector { w: vec![1.0; 8], sw: vec![1.0; 8] };
        let terms = vec![
            vec!["X1".to_string()],
            vec!["X2".to_string()],
            vec!["X1".to_string(), "X2".to_string()],
        ];
        let report = fit_msm(&d, &weights, "Y", &terms).unwrap();
        let names: Vec<&str> = report.rows.iter().map(|r| r.term.as_str()).collect();
        assert_eq!(names, vec!["Intercept", "X1", "X2", "X1*X2"]);
    }

    #[test]
    fn weight_length_mismatch_is_rejected() {
        let d = dataset(&[
            ("X", ColumnKind::Binary, vec![0., 1.]),
            ("Y", ColumnKind::Continuous, vec![0.5, 1.5]),
        ]);
        let weights = WeightVector { w: vec![1.0], sw: vec![1.0] };
        let err = fit_msm(&d, &weights, "Y", &[vec!["X".to_string()]]).unwrap_err();
        assert!(matches!(err, EstimatorError::LengthMismatch { expected: 2, got: 1 }));
    }
}
