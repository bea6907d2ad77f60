//! Coefficient reports: the common output shape of the regression-style
//! estimators, with aligned plain-text and JSON renderings.

use serde::Serialize;

// ── Types ────────────────────────────────────────────────────────────────────

/// One fitted term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub term: String,
    pub estimate: f64,
    /// Absent when the fit leaves no residual degrees of freedom, or when the
    /// producing estimator does not define an analytic standard error.
    pub se: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
    /// Bootstrap percentile interval (lower, upper), when requested.
    pub ci: Option<(f64, f64)>,
}

/// Bootstrap provenance attached to a report that carries intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapMeta {
    pub replicates: usize,
    pub successes: usize,
    pub level: f64,
    pub seed: u64,
    /// Terms whose point estimate fell outside their own percentile interval
    /// (possible under pathological resampling; flagged, never an error).
    pub flagged_terms: Vec<String>,
}

/// Fitted coefficients plus fit metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub rows: Vec<CoefficientRow>,
    pub n: usize,
    /// Residual degrees of freedom of the analytic fit, when defined.
    pub df: Option<usize>,
    /// Residual variance (RSS / df), when df > 0.
    pub residual_variance: Option<f64>,
    pub bootstrap: Option<BootstrapMeta>,
}

impl CoefficientReport {
    pub fn estimate(&self, term: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.term == term).map(|r| r.estimate)
    }

    pub fn row(&self, term: &str) -> Option<&CoefficientRow> {
        self.rows.iter().find(|r| r.term == term)
    }

    /// Aligned fixed-width table with 4 significant decimals.
    pub fn text_table(&self) -> String {
        let headers = ["term", "estimate", "se", "t", "p", "ci_low", "ci_high"];
        let mut cells: Vec<Vec<String>> = vec![headers.iter().map(|h| h.to_string()).collect()];
        for row in &self.rows {
            cells.push(vec![
                row.term.clone(),
                fmt_sig(row.estimate),
                row.se.map_or_else(|| "-".to_string(), fmt_sig),
                row.t.map_or_else(|| "-".to_string(), fmt_sig),
                row.p.map_or_else(|| "-".to_string(), fmt_sig),
                row.ci.map_or_else(|| "-".to_string(), |c| fmt_sig(c.0)),
                row.ci.map_or_else(|| "-".to_string(), |c| fmt_sig(c.1)),
            ]);
        }
        let widths: Vec<usize> = (0..headers.len())
            .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &cells {
            let mut line = String::new();
            for (j, cell) in row.iter().enumerate() {
                if j == 0 {
                    line.push_str(&format!("{:<width$}", cell, width = widths[j]));
                } else {
                    line.push_str(&format!("  {:>width$}", cell, width = widths[j]));
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        if let Some(meta) = &self.bootstrap {
            out.push_str(&format!(
                "bootstrap: B={} (successes {}), level={}, seed={}\n",
                meta.replicates, meta.successes, meta.level, meta.seed
            ));
            if !meta.flagged_terms.is_empty() {
                out.push_str(&format!(
                    "flagged (estimate outside own interval): {}\n",
                    meta.flagged_terms.join(", ")
                ));
            }
        }
        out
    }

    /// Full-precision JSON rendering.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Format with 4 significant decimal digits (values at or above 10^4 print as
/// integers). Matches the reporting precision of the tables this library
/// reproduces.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

// ── Tests ────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_formatting_tracks_magnitude() {
        assert_eq!(fmt_sig(7.03125), "7.031");
        assert_eq!(fmt_sig(41.0132), "41.01");
        assert_eq!(fmt_sig(-2.42), "-2.420");
        assert_eq!(fmt_sig(0.00123456), "0.001235");
        assert_eq!(fmt_sig(123456.0), "123456");
        assert_eq!(fmt_sig(0.0), "0.000");
    }

    #[test]
    fn text_table_aligns_and_fills_missing_cells() {
        let report = CoefficientReport {
            rows: vec![
                CoefficientRow {
                    term: "Intercept".to_string(),
                    estimate: 1.0,
                    se: Some(0.25),
                    t: Some(4.0),
                    p: Some(0.0002),
                    ci: None,
                },
                CoefficientRow {
                    term: "X1*X2".to_string(),
                    estimate: -0.5,
                    se: None,
                    t: None,
                    p: None,
                    ci: Some((-1.0, 0.25)),
                },
            ],
            n: 100,
            df: Some(98),
            residual_variance: Some(0.04),
            bootstrap: None,
        };
        let text = report.text_table();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("term"));
        assert!(lines[1].contains("1.000"));
        assert!(lines[2].contains("-0.5000"));
        assert!(lines[2].contains("-"));
    }

    #[test]
    fn json_carries_full_precision() {
        let report = CoefficientReport {
            rows: vec![CoefficientRow {
                term: "X".to_string(),
                estimate: 0.1 + 0.2,
                se: None,
                t: None,
                p: None,
                ci: None,
            }],
            n: 3,
            df: None,
            residual_variance: None,
            bootstrap: None,
        };
        assert!(report.to_json().contains("0.30000000000000004"));
    }
}
