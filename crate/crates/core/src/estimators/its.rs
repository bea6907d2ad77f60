//! Segmented regression for interrupted time series.
//!
//! A single interruption splits the series into pre and post segments; the
//! fit estimates the pre-period level and slope plus the level jump and
//! slope change at the interruption. Times at the interruption itself count
//! as post — the convention under which the level change is the effect at
//! the moment the intervention starts.

use super::ols::fit_core;
use super::report::CoefficientReport;
use super::EstimatorError;

/// Fit `outcome = Intercept + Slope·t + LevelChange·post + SlopeChange·(t − t₀)·post`
/// to `(time, outcome)` observations with the interruption at `t₀ = interruption`.
/// Each segment needs at least two observations to identify its level and
/// slope.
pub fn its_segmented(
    series: &[(f64, f64)],
    interruption: f64,
) -> Result<CoefficientReport, EstimatorError> {
    let pre = series.iter().filter(|(t, _)| *t < interruption).count();
    let post = series.len() - pre;
    if pre < 2 {
        return Err(EstimatorError::InsufficientSegment { side: "pre".to_string(), count: pre });
    }
    if post < 2 {
        return Err(EstimatorError::InsufficientSegment { side: "post".to_string(), count: post });
    }
    let n = series.len();
    let names = vec![
        "Intercept".to_string(),
        "Slope".to_string(),
        "LevelChange".to_string(),
        "SlopeChange".to_string(),
    ];
    let mut columns = vec![vec![0.0; n]; 4];
    let mut y = Vec::with_capacity(n);
    for (i, (t, value)) in series.iter().enumerate() {
        let after = if *t >= interruption { 1.0 } else { 0.0 };
        columns[0][i] = 1.0;
        columns[1][i] = *t;
        columns[2][i] = after;
        columns[3][i] = (*t - interruption) * after;
        y.push(*value);
    }
    let core = fit_core(names, &columns, &y, None)?;
    let se = core.homoskedastic_se();
    Ok(core.report(se))
}

// ── Tests ────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_noiseless_segmented_trend_exactly() {
        // y = 2 + 0.5 t before t = 10; afterwards the level jumps by 3 and
        // the slope steepens by 0.2.
        let series: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = i as f64;
                let y = if t < 10.0 { 2.0 + 0.5 * t } else { 2.0 + 0.5 * t + 3.0 + 0.2 * (t - 10.0) };
                (t, y)
            })
            .collect();
        let report = its_segmented(&series, 10.0).unwrap();
        assert!((report.estimate("Intercept").unwrap() - 2.0).abs() < 1e-9);
        assert!((report.estimate("Slope").unwrap() - 0.5).abs() < 1e-9);
        assert!((report.estimate("LevelChange").unwrap() - 3.0).abs() < 1e-9);
        assert!((report.estimate("SlopeChange").unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn an_uninterrupted_line_shows_no_changes() {
        let series: Vec<(f64, f64)> = (0..12).map(|i| (i as f64, 4.0 - 0.25 * i as f64)).collect();
        let report = its_segmented(&series, 6.0).unwrap();
        assert!(report.estimate("LevelChange").unwrap().abs() < 1e-9);
        assert!(report.estimate("SlopeChange").unwrap().abs() < 1e-9);
    }

    #[test]
    fn interruption_time_itself_counts_as_post() {
        let series = vec![(0.0, 1.0), (1.0, 2.0), (2.0, 9.0), (3.0, 10.0)];
        // t = 2 is post, so both segments have exactly two points.
        let report = its_segmented(&series, 2.0).unwrap();
        assert!((report.estimate("LevelChange").unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn short_segments_are_rejected_by_side() {
        let series = vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 4.0)];
        let err = its_segmented(&series, 0.5).unwrap_err();
        assert!(matches!(
            err,
            EstimatorError::InsufficientSegment { ref side, count: 1 } if side == "pre"
        ));
        let err = its_segmented(&series, 2.5).unwrap_err();
        assert!(matches!(
            err,
            EstimatorError::InsufficientSegment { ref side, count: 1 } if side == "post"
        ));
    }
}
