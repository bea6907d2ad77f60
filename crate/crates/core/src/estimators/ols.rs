//! Least-squares core: ordinary and weighted fits via QR, with
//! homoskedastic errors, t-tests, and the pieces sandwich estimators need.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::report::{CoefficientReport, CoefficientRow};
use super::{col, term_column, term_name, EstimatorError};
use crate::data::Dataset;

// ── Core fit ─────────────────────────────────────────────────────────────────

/// Everything downstream consumers need from one least-squares fit.
pub(crate) struct FitCore {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub df: usize,
    /// Residual sum of squares in the (possibly weighted) fitting space.
    pub rss: f64,
    /// (XᵀWX)^{-1} — the unscaled coefficient covariance shape.
    pub xtx_inv: DMatrix<f64>,
    /// Raw-space residuals y − Xβ.
    pub residuals: Vec<f64>,
    /// Raw design matrix (unweighted rows).
    pub design: DMatrix<f64>,
}

/// Fit y on named columns (an intercept is the caller's first column when
/// wanted). `weights` turns the fit into weighted least squares by scaling
/// rows with √w. Rank deficiency names the first column that is linearly
/// dependent on its predecessors.
pub(crate) fn fit_core(
    names: Vec<String>,
    columns: &[Vec<f64>],
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<FitCore, EstimatorError> {
    let n = y.len();
    let k = columns.len();
    debug_assert_eq!(names.len(), k);
    if n < k {
        return Err(EstimatorError::InsufficientRows { rows: n, needed: k });
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(EstimatorError::LengthMismatch { expected: n, got: w.len() });
        }
    }

    let design = DMatrix::from_fn(n, k, |i, j| columns[j][i]);
    let (xw, yw) = match weights {
        Some(w) => {
            let sqrt_w: Vec<f64> = w.iter().map(|wi| wi.sqrt()).collect();
            let xw = DMatrix::from_fn(n, k, |i, j| design[(i, j)] * sqrt_w[i]);
            let yw = DVector::from_fn(n, |i, _| y[i] * sqrt_w[i]);
            (xw, yw)
        }
        None => (design.clone(), DVector::from_fn(n, |i, _| y[i])),
    };

    let qr = xw.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|j| r[(j, j)].abs()).fold(0.0f64, f64::max);
    let tol = 1e-10 * max_diag.max(1.0);
    if let Some(j) = (0..k).find(|j| r[(*j, *j)].abs() <= tol) {
        return Err(EstimatorError::RankDeficient { column: names[j].clone() });
    }

    let qty = qr.q().transpose() * &yw;
    let beta_vec = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| EstimatorError::RankDeficient { column: names[k - 1].clone() })?;
    let beta: Vec<f64> = beta_vec.iter().copied().collect();

    let fitted_w = &xw * &beta_vec;
    let rss = (0..n).map(|i| (yw[i] - fitted_w[i]).powi(2)).sum::<f64>();
    let fitted = &design * &beta_vec;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| EstimatorError::RankDeficient { column: names[k - 1].clone() })?;
    let xtx_inv = &r_inv * r_inv.transpose();

    Ok(FitCore {
        names,
        beta,
        n,
        k,
        df: n - k,
        rss,
        xtx_inv,
        residuals,
        design,
    })
}

impl FitCore {
    /// Homoskedastic standard errors: √(s²·(XᵀWX)⁻¹_jj); None when df = 0.
    pub fn homoskedastic_se(&self) -> Option<Vec<f64>> {
        if self.df == 0 {
            return None;
        }
        let s2 = self.rss / self.df as f64;
        Some((0..self.k).map(|j| (s2 * self.xtx_inv[(j, j)]).sqrt()).collect())
    }

    /// HC0 sandwich standard errors:
    /// √diag((XᵀWX)⁻¹ · Σᵢ wᵢ²eᵢ²xᵢxᵢᵀ · (XᵀWX)⁻¹). Valid under
    /// heteroskedasticity and weighting, which plain OLS errors are not.
    pub fn sandwich_se(&self, weights: Option<&[f64]>) -> Vec<f64> {
        let mut meat = DMatrix::zeros(self.k, self.k);
        for i in 0..self.n {
            let w = weights.map_or(1.0, |w| w[i]);
            let scale = (w * self.residuals[i]).powi(2);
            for a in 0..self.k {
                for b in 0..self.k {
                    meat[(a, b)] += scale * self.design[(i, a)] * self.design[(i, b)];
                }
            }
        }
        let cov = &self.xtx_inv * meat * &self.xtx_inv;
        (0..self.k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect()
    }

    /// Assemble a report from the fit plus a standard-error vector.
    pub fn report(&self, se: Option<Vec<f64>>) -> CoefficientReport {
        let t_dist = if self.df > 0 {
            StudentsT::new(0.0, 1.0, self.df as f64).ok()
        } else {
            None
        };
        let rows = self
            .names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let se_j = se.as_ref().map(|s| s[j]);
                let t = se_j.and_then(|s| if s > 0.0 { Some(self.beta[j] / s) } else { None });
                let p = match (&t_dist, t) {
                    (Some(dist), Some(t)) => Some(2.0 * (1.0 - dist.cdf(t.abs()))),
                    _ => None,
                };
                CoefficientRow {
                    term: name.clone(),
                    estimate: self.beta[j],
                    se: se_j,
                    t,
                    p,
                    ci: None,
                }
            })
            .collect();
        CoefficientReport {
            rows,
            n: self.n,
            df: Some(self.df),
            residual_variance: if self.df > 0 {
                Some(self.rss / self.df as f64)
            } else {
                None
            },
            bootstrap: None,
        }
    }
}

// ── Public estimator ─────────────────────────────────────────────────────────

/// Ordinary least squares of `outcome` on an intercept plus one column per
/// term (terms are column subsets; multi-column terms become elementwise
/// products named `A*B`). Homoskedastic standard errors and two-sided t-test
/// p-values with n − k degrees of freedom.
pub fn fit_ols(
    data: &Dataset,
    outcome: &str,
    terms: &[Vec<String>],
) -> Result<CoefficientReport, EstimatorError> {
    let y = col(data, outcome)?;
    let mut names = vec!["Intercept".to_string()];
    let mut columns = vec![vec![1.0; data.n_rows()]];
    for term in terms {
        names.push(term_name(term));
        columns.push(term_column(data, term)?);
    }
    let core = fit_core(names, &columns, y, None)?;
    let se = core.homoskedastic_se();
    Ok(core.report(se))
}

// ── Tests ────────────────────────────────────────────────────────────────────
