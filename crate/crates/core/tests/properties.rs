//! Cross-cutting invariants checked over randomized structures (proptest)
//! and over the built-in scenario models at fixed seeds.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use causal_core::dag::{build_dag, CausalDag, NodeRole};
use causal_core::data::{ColumnKind, Dataset};
use causal_core::estimators::{bootstrap_ci, fit_ols, g_formula, standardize};
use causal_core::scenarios::{catalog, reproduce};
use causal_core::scm::{build_scm, true_msm_coefficients, Equation, StructuralModel, Term};

// ── Random DAG cases ─────────────────────────────────────────────────────────

/// A random DAG (edges only ever point from lower to higher index, so
/// acyclicity holds by construction) plus a query triple.
#[derive(Debug, Clone)]
struct DagCase {
    n: usize,
    edge_mask: Vec<bool>,
    x: usize,
    y: usize,
    given_mask: u8,
}

impl DagCase {
    fn names(&self) -> Vec<String> {
        (0..self.n).map(|i| format!("N{i}")).collect()
    }

    fn dag(&self) -> CausalDag {
        let names = self.names();
        let mut edges = Vec::new();
        let mut k = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.edge_mask[k] {
                    edges.push((names[i].clone(), names[j].clone()));
                }
                k += 1;
            }
        }
        build_dag(names.into_iter().map(|s| (s, NodeRole::Generic)), edges).unwrap()
    }

    fn given(&self) -> BTreeSet<String> {
        (0..self.n)
            .filter(|i| *i != self.x && *i != self.y && self.given_mask >> i & 1 == 1)
            .map(|i| format!("N{i}"))
            .collect()
    }
}

fn arb_dag_case() -> impl Strategy<Value = DagCase> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                proptest::collection::vec(any::<bool>(), pairs),
                0..n,
                0..n,
                any::<u8>(),
            )
                .prop_map(move |(edge_mask, x, y, given_mask)| DagCase {
                    n,
                    edge_mask,
                    x,
                    y,
                    given_mask,
                })
        })
        .prop_filter("endpoints must differ", |c| c.x != c.y)
}

proptest! {
    /// d-separation is symmetric in its endpoints.
    #[test]
    fn d_separation_is_symmetric(case in arb_dag_case()) {
        let dag = case.dag();
        let (x, y) = (format!("N{}", case.x), format!("N{}", case.y));
        let given = case.given();
        prop_assert_eq!(
            dag.d_separated(&x, &y, &given).unwrap(),
            dag.d_separated(&y, &x, &given).unwrap()
        );
    }

    /// The reachability algorithm agrees with explicit path enumeration:
    /// separated exactly when no open path exists.
    #[test]
    fn d_separation_agrees_with_path_enumeration(case in arb_dag_case()) {
        let dag = case.dag();
        let (x, y) = (format!("N{}", case.x), format!("N{}", case.y));
        let given = case.given();
        let separated = dag.d_separated(&x, &y, &given).unwrap();
        let open = dag.open_paths(&x, &y, &given).unwrap();
        prop_assert_eq!(separated, open.is_empty(), "open paths: {:?}", open);
    }

    /// Graph surgery: intervened nodes lose exactly their incoming edges and
    /// nothing else changes.
    #[test]
    fn intervention_removes_exactly_the_incoming_edges(case in arb_dag_case()) {
        let dag = case.dag();
        let targets: BTreeSet<String> = (0..case.n)
            .filter(|i| case.given_mask >> i & 1 == 1)
            .map(|i| format!("N{i}"))
            .collect();
        let removed: usize = targets.iter().map(|t| dag.parents_of(t).unwrap().len()).sum();
        let cut = dag.intervene(&targets).unwrap();
        for t in &targets {
            prop_assert!(cut.parents_of(t).unwrap().is_empty());
        }
        prop_assert_eq!(cut.edge_count(), dag.edge_count() - removed);
        for name in case.names() {
            if !targets.contains(&name) {
                prop_assert_eq!(cut.parents_of(&name).unwrap(), dag.parents_of(&name).unwrap());
            }
        }
    }

    /// Every backdoor path starts with an edge into the treatment and visits
    /// no node twice.
    #[test]
    fn backdoor_paths_are_simple_and_point_into_treatment(case in arb_dag_case()) {
        let dag = case.dag();
        let (x, y) = (format!("N{}", case.x), format!("N{}", case.y));
        for path in dag.backdoor_paths(&x, &y).unwrap() {
            prop_assert!(path.is_backdoor());
            let mut seen = BTreeSet::new();
            for node in &path.nodes {
                prop_assert!(seen.insert(node.clone()), "repeated node in {:?}", path.nodes);
            }
        }
    }
}

// ── Simulation invariants over random seeds ──────────────────────────────────

/// Small fixed model for simulation properties: one confounder, one
/// treatment, one continuous outcome.
fn small_model() -> StructuralModel {
    let dag = build_dag(
        [
            ("L".to_string(), NodeRole::ObservedConfounder),
            ("X".to_string(), NodeRole::Treatment),
            ("Y".to_string(), NodeRole::Outcome),
        ],
        [
            ("L".to_string(), "X".to_string()),
            ("L".to_string(), "Y".to_string()),
            ("X".to_string(), "Y".to_string()),
        ],
    )
    .unwrap();
    let mut equations = BTreeMap::new();
    equations.insert("L".to_string(), Equation::Bernoulli { intercept: 0.4, coefficients: BTreeMap::new() });
    equations.insert(
        "X".to_string(),
        Equation::Bernoulli {
            intercept: 0.3,
            coefficients: [("L".to_string(), 0.4)].into_iter().collect(),
        },
    );
    equations.insert(
        "Y".to_string(),
        Equation::Gaussian {
            intercept: 1.0,
            terms: vec![
                Term { parents: vec!["X".to_string()], coef: 2.0 },
                Term { parents: vec!["L".to_string()], coef: -1.0 },
            ],
            sigma: 0.5,
        },
    );
    build_scm(dag, equations).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Identical (model, n, seed) gives identical data, and each unit's draw
    /// depends only on its own index: a shorter run is a prefix of a longer
    /// one under the same seed.
    #[test]
    fn simulation_is_reproducible_and_unit_indexed(seed in any::<u64>(), m in 1usize..200) {
        let model = small_model();
        let long = model.simulate(200, seed).unwrap();
        let again = model.simulate(200, seed).unwrap();
        prop_assert_eq!(&long, &again);
        let short = model.simulate(m, seed).unwrap();
        for name in ["L", "X", "Y"] {
            prop_assert_eq!(short.column(name).unwrap(), &long.column(name).unwrap()[..m]);
        }
    }

    /// Different seeds genuinely re-randomize the exogenous noise.
    #[test]
    fn different_seeds_differ(seed in any::<u64>()) {
        let model = small_model();
        let a = model.simulate(256, seed).unwrap();
        let b = model.simulate(256, seed.wrapping_add(1)).unwrap();
        // The continuous column collides with probability zero.
        prop_assert_ne!(a.column("Y").unwrap(), b.column("Y").unwrap());
    }

    /// OLS residuals are orthogonal to every design column (including the
    /// intercept), up to floating-point scale.
    #[test]
    fn ols_residuals_are_orthogonal_to_the_design(seed in any::<u64>(), n in 50usize..500) {
        let model = small_model();
        let data = model.simulate(n, seed).unwrap();
        let report = fit_ols(&data, "Y", &[vec!["X".to_string()], vec!["L".to_string()]]).unwrap();
        let b0 = report.estimate("Intercept").unwrap();
        let bx = report.estimate("X").unwrap();
        let bl = report.estimate("L").unwrap();
        let x = data.column("X").unwrap();
        let l = data.column("L").unwrap();
        let y = data.column("Y").unwrap();
        let residuals: Vec<f64> =
            (0..n).map(|i| y[i] - b0 - bx * x[i] - bl * l[i]).collect();
        let y_scale = y.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        for column in [&vec![1.0; n], &x.to_vec(), &l.to_vec()] {
            let c_scale = column.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            let dot: f64 = (0..n).map(|i| residuals[i] * column[i]).sum();
            let bound = 1e-8 * n as f64 * c_scale * y_scale;
            prop_assert!(dot.abs() <= bound, "dot={dot}, bound={bound}");
        }
    }

    /// With a single treatment, the sequential g-formula collapses to
    /// backdoor standardization exactly.
    #[test]
    fn g_formula_equals_standardization_for_one_period(seed in any::<u64>()) {
        let model = small_model();
        let data = model.simulate(600, seed).unwrap();
        let std = standardize(&data, "X", "Y", &["L".to_string()]).unwrap();
        let treatments = ["X".to_string()];
        let blocks = [vec!["L".to_string()]];
        let g1 = g_formula(&data, &treatments, &blocks, "Y", &[1]).unwrap();
        let g0 = g_formula(&data, &treatments, &blocks, "Y", &[0]).unwrap();
        prop_assert!((g1 - std.mean_treated).abs() < 1e-12);
        prop_assert!((g0 - std.mean_untreated).abs() < 1e-12);
    }

    /// Bootstrap intervals are a pure function of (data, fit, B, level, seed).
    #[test]
    fn bootstrap_is_deterministic(seed in any::<u64>()) {
        let model = small_model();
        let data = model.simulate(120, 7).unwrap();
        let fit = |d: &Dataset| fit_ols(d, "Y", &[vec!["X".to_string()], vec!["L".to_string()]]);
        let a = bootstrap_ci(&data, fit, 100, 0.95, seed).unwrap();
        let b = bootstrap_ci(&data, fit, 100, 0.95, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Reproduction is a pure function of (id, methods, n, seed, B).
    #[test]
    fn reproduction_is_deterministic_for_any_seed(seed in any::<u64>()) {
        let a = reproduce("tv-feedback", &[], 400, seed, 0).unwrap();
        let b = reproduce("tv-feedback", &[], 400, seed, 0).unwrap();
        prop_assert_eq!(a, b);
    }
}

// ── Scenario-model invariants at fixed seeds ─────────────────────────────────

/// Every Bernoulli node's empirical conditional frequency tracks its model
/// probability in all well-populated parent strata.
#[test]
fn simulated_laws_match_model_probabilities_on_catalog_models() {
    let n = 20_000;
    for spec in catalog() {
        let data = spec.model.simulate(n, 5).unwrap();
        for node in spec.model.node_order() {
            let Equation::Bernoulli { intercept, coefficients } = spec.model.equation(node).unwrap()
            else {
                continue;
            };
            let parents: Vec<&String> = coefficients.keys().collect();
            // Group rows by the parent-value pattern.
            let mut strata: BTreeMap<Vec<u8>, (usize, usize)> = BTreeMap::new();
            let node_values = data.column(node).unwrap();
            let parent_columns: Vec<&[f64]> =
                parents.iter().map(|p| data.column(p).unwrap()).collect();
            for i in 0..n {
                let key: Vec<u8> = parent_columns.iter().map(|c| c[i] as u8).collect();
                let entry = strata.entry(key).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += (node_values[i] == 1.0) as usize;
            }
            for (key, (count, ones)) in strata {
                if count < 1_000 {
                    continue;
                }
                let p: f64 = intercept
                    + parents
                        .iter()
                        .zip(&key)
                        .map(|(parent, v)| coefficients[*parent] * f64::from(*v))
                        .sum::<f64>();
                let freq = ones as f64 / count as f64;
                let bound = 4.0 * (p * (1.0 - p) / count as f64).sqrt() + 1e-6;
                assert!(
                    (freq - p).abs() <= bound,
                    "{}: node {node}, stratum {key:?}: freq {freq} vs p {p} (bound {bound})",
                    spec.id
                );
            }
        }
    }
}

/// The analytic regime means agree with brute-force Monte Carlo on every
/// catalog model.
#[test]
fn analytic_truth_matches_monte_carlo_on_catalog_models() {
    for spec in catalog() {
        let truth = true_msm_coefficients(&spec.model, &spec.treatments, &spec.outcome).unwrap();
        assert!(truth.analytic, "{}: expected the analytic path", spec.id);
        let table = spec
            .model
            .potential_outcomes(&spec.treatments, &spec.outcome, 1_000_000, 17)
            .unwrap();
        for (regime, analytic) in truth.regime_means.iter().enumerate() {
            let mc = table.regime_mean(regime);
            assert!(
                (mc - analytic).abs() < 0.05,
                "{}: regime {regime}: analytic {analytic} vs MC {mc}",
                spec.id
            );
        }
    }
}

/// Intervening on a node leaves every non-descendant's simulated values
/// untouched — not merely in distribution but value-for-value, because each
/// unit's exogenous noise is indexed by (seed, unit, node) rather than by
/// evaluation order.
#[test]
fn intervention_leaves_nondescendant_columns_identical() {
    let spec = catalog().into_iter().find(|s| s.id == "single-posttest").unwrap();
    let base = spec.model.simulate(50_000, 3).unwrap();
    let intervened_model = spec
        .model
        .apply_intervention(&[("X".to_string(), 1.0)].into_iter().collect())
        .unwrap();
    let intervened = intervened_model.simulate(50_000, 3).unwrap();
    for column in ["W1", "U1", "U2"] {
        assert_eq!(base.column(column).unwrap(), intervened.column(column).unwrap(), "{column}");
    }
    assert!(intervened.column("X").unwrap().iter().all(|v| *v == 1.0));
    assert_ne!(base.column("O1").unwrap(), intervened.column("O1").unwrap());
}

/// Without confounder->treatment edges the g-formula converges to the plain
/// stratified conditional mean.
#[test]
fn g_formula_collapses_to_conditional_mean_without_confounding() {
    let dag = build_dag(
        [
            ("X".to_string(), NodeRole::Treatment),
            ("L".to_string(), NodeRole::Generic),
            ("Y".to_string(), NodeRole::Outcome),
        ],
        [
            ("X".to_string(), "Y".to_string()),
            ("L".to_string(), "Y".to_string()),
        ],
    )
    .unwrap();
    let mut equations = BTreeMap::new();
    equations.insert("X".to_string(), Equation::Bernoulli { intercept: 0.5, coefficients: BTreeMap::new() });
    equations.insert("L".to_string(), Equation::Bernoulli { intercept: 0.4, coefficients: BTreeMap::new() });
    equations.insert(
        "Y".to_string(),
        Equation::Gaussian {
            intercept: 1.0,
            terms: vec![
                Term { parents: vec!["X".to_string()], coef: 2.0 },
                Term { parents: vec!["L".to_string()], coef: 1.0 },
            ],
            sigma: 0.3,
        },
    );
    let model = build_scm(dag, equations).unwrap();
    let data = model.simulate(200_000, 11).unwrap();

    let treatments = ["X".to_string()];
    let blocks = [vec!["L".to_string()]];
    let g1 = g_formula(&data, &treatments, &blocks, "Y", &[1]).unwrap();

    let x = data.column("X").unwrap();
    let y = data.column("Y").unwrap();
    let treated: Vec<f64> =
        (0..data.n_rows()).filter(|i| x[*i] == 1.0).map(|i| y[i]).collect();
    let conditional = treated.iter().sum::<f64>() / treated.len() as f64;
    assert!((g1 - conditional).abs() <= 0.05, "g {g1} vs conditional {conditional}");
}

/// A dataset column added twice is rejected rather than silently shadowed,
/// and simulated columns carry their declared kinds end to end.
#[test]
fn simulated_datasets_expose_declared_column_kinds() {
    let model = small_model();
    let data = model.simulate(100, 1).unwrap();
    assert_eq!(data.kind("X").unwrap(), ColumnKind::Binary);
    assert_eq!(data.kind("Y").unwrap(), ColumnKind::Continuous);
}
