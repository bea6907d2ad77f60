//! Structural causal models: validated equations over a DAG, deterministic
//! forward simulation, intervention surgery, shared-noise potential-outcome
//! tables, and oracle intervention-effect coefficients.
//!
//! Noise is counter-based (see [`crate::noise`]): every random draw is a pure
//! function of `(seed, unit, node, draw)`, where `node` is the node's
//! lexicographic rank among all model nodes. Because the rank ignores edges,
//! interventions never shift another node's noise stream — which is what
//! makes potential outcomes under shared noise exactly consistent — and
//! simulation can be partitioned across workers by unit ranges without
//! changing a single bit of output.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::{CausalDag, DagError};
use crate::data::{ColumnKind, Dataset};
use crate::noise;

// ── Equations ────────────────────────────────────────────────────────────────

/// One multiplicative term of a Gaussian node's mean: `coef · Π parents`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub parents: Vec<String>,
    pub coef: f64,
}

/// Generating equation for one node.
///
/// `Constant` arises from interventions (and may be written in model files);
/// the other two are the forms models are normally built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Equation {
    /// Value in {0,1}; success probability `intercept + Σ coef·parent`.
    Bernoulli {
        intercept: f64,
        coefficients: BTreeMap<String, f64>,
    },
    /// Value `intercept + Σ coef·Π parents + sigma·ε`, ε standard normal.
    Gaussian {
        intercept: f64,
        terms: Vec<Term>,
        sigma: f64,
    },
    /// Degenerate point mass, the post-intervention form.
    Constant { value: f64 },
}

impl Equation {
    /// Parents the equation actually references.
    fn referenced_parents(&self) -> BTreeSet<String> {
        match self {
            Equation::Bernoulli { coefficients, .. } => coefficients.keys().cloned().collect(),
            Equation::Gaussian { terms, .. } => {
                terms.iter().flat_map(|t| t.parents.iter().cloned()).collect()
            }
            Equation::Constant { .. } => BTreeSet::new(),
        }
    }

    /// Whether the node's support is {0,1}.
    pub fn is_binary(&self) -> bool {
        match self {
            Equation::Bernoulli { .. } => true,
            Equation::Gaussian { .. } => false,
            Equation::Constant { value } => *value == 0.0 || *value == 1.0,
        }
    }
}

// ── Errors and warnings ──────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScmError {
    #[error("node {node} has no equation")]
    MissingEquation { node: String },
    #[error("unknown node {node}")]
    UnknownNode { node: String },
    #[error("node {node}: equation parents do not match DAG parents \
             (unused DAG parents: {missing:?}; referenced non-parents: {extra:?})")]
    ParentMismatch {
        node: String,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("node {node}: probability {probability} out of [0,1] at parent pattern {pattern:?}")]
    ProbabilityOutOfRange {
        node: String,
        pattern: Vec<(String, u8)>,
        probability: f64,
    },
    #[error("node {node}: sigma must be positive, got {sigma}")]
    NonPositiveSigma { node: String, sigma: f64 },
    #[error("node {node}: value {value} is outside the node's support")]
    ValueOutOfSupport { node: String, value: f64 },
    #[error("{regimes} regimes exceed the cap of {cap}")]
    RegimeExplosion { regimes: usize, cap: usize },
    #[error("node {node}: unsupported equation form: {detail}")]
    UnsupportedEquationForm { node: String, detail: String },
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// A parent stratum where a Bernoulli probability is exactly 0 or 1. The
/// model is accepted but the stratum can never produce the opposite arm, so
/// stratified estimators will see structural positivity violations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryWarning {
    pub node: String,
    pub pattern: Vec<(String, u8)>,
    pub probability: f64,
}

impl std::fmt::Display for BoundaryWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let stratum: Vec<String> =
            self.pattern.iter().map(|(p, v)| format!("{p}={v}")).collect();
        write!(
            f,
            "node {} has probability exactly {} at ({})",
            self.node,
            self.probability,
            stratum.join(", ")
        )
    }
}

// ── The model ────────────────────────────────────────────────────────────────

/// A validated structural causal model. Immutable after construction.
#[derive(Debug, Clone)]
pub struct StructuralModel {
    dag: CausalDag,
    equations: BTreeMap<String, Equation>,
    warnings: Vec<BoundaryWarning>,
    topo: Vec<String>,
}

impl PartialEq for StructuralModel {
    fn eq(&self, other: &Self) -> bool {
        self.dag == other.dag && self.equations == other.equations
    }
}

/// Probabilities within this distance of 0 or 1 are treated as boundary
/// values (warned, not rejected), absorbing float round-off in sums such as
/// 0.3 + 0.7.
const BOUNDARY_EPS: f64 = 1e-12;

/// Validating constructor; the only way to obtain a [`StructuralModel`].
pub fn build_scm(
    dag: CausalDag,
    equations: BTreeMap<String, Equation>,
) -> Result<StructuralModel, ScmError> {
    for node in equations.keys() {
        if !dag.contains(node) {
            return Err(ScmError::UnknownNode { node: node.clone() });
        }
    }
    let mut warnings = Vec::new();
    for node in dag.node_names() {
        let eq = equations
            .get(node)
            .ok_or_else(|| ScmError::MissingEquation { node: node.clone() })?;

        let referenced = eq.referenced_parents();
        let dag_parents = dag.parents_of(node).expect("node exists");
        if &referenced != dag_parents {
            return Err(ScmError::ParentMismatch {
                node: node.clone(),
                missing: dag_parents.difference(&referenced).cloned().collect(),
                extra: referenced.difference(dag_parents).cloned().collect(),
            });
        }

        match eq {
            Equation::Bernoulli { intercept, coefficients } => {
                let parents: Vec<(&String, f64)> =
                    coefficients.iter().map(|(p, c)| (p, *c)).collect();
                for bits in 0u32..(1 << parents.len()) {
                    let mut p = *intercept;
                    let mut pattern = Vec::with_capacity(parents.len());
                    for (i, (name, coef)) in parents.iter().enumerate() {
                        let bit = (bits >> i) & 1;
                        p += *coef * f64::from(bit);
                        pattern.push(((*name).clone(), bit as u8));
                    }
                    if !(-BOUNDARY_EPS..=1.0 + BOUNDARY_EPS).contains(&p) {
                        return Err(ScmError::ProbabilityOutOfRange {
                            node: node.clone(),
                            pattern,
                            probability: p,
                        });
                    }
                    if p.abs() <= BOUNDARY_EPS || (p - 1.0).abs() <= BOUNDARY_EPS {
                        warnings.push(BoundaryWarning {
                            node: node.clone(),
                            pattern,
                            probability: if p.abs() <= BOUNDARY_EPS { 0.0 } else { 1.0 },
                        });
                    }
                }
            }
            Equation::Gaussian { sigma, .. } => {
                if *sigma <= 0.0 || sigma.is_nan() {
                    return Err(ScmError::NonPositiveSigma {
                        node: node.clone(),
                        sigma: *sigma,
                    });
                }
            }
            Equation::Constant { .. } => {}
        }
    }
    let topo = dag.topological_order();
    Ok(StructuralModel { dag, equations, warnings, topo })
}

impl StructuralModel {
    pub fn dag(&self) -> &CausalDag {
        &self.dag
    }

    pub fn equation(&self, node: &str) -> Result<&Equation, ScmError> {
        self.equations
            .get(node)
            .ok_or_else(|| ScmError::UnknownNode { node: node.to_string() })
    }

    /// Strata where a Bernoulli probability sits exactly on 0 or 1.
    pub fn boundary_warnings(&self) -> &[BoundaryWarning] {
        &self.warnings
    }

    /// Node evaluation/column order: topological, ties lexicographic.
    pub fn node_order(&self) -> &[String] {
        &self.topo
    }

    /// The node's noise-stream index: its lexicographic rank among all model
    /// nodes. Stable under intervention because it ignores edges.
    fn lex_rank(&self, node: &str) -> u32 {
        self.equations
            .keys()
            .position(|k| k == node)
            .expect("rank of validated node") as u32
    }

    // ── Simulation ───────────────────────────────────────────────────────────

    /// Draw `n` independent units. Deterministic in `(self, n, seed)`;
    /// evaluation is partitioned across worker threads by unit ranges, which
    /// cannot affect the result because noise is counter-based.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<Dataset, ScmError> {
        if n == 0 {
            return Err(ScmError::ZeroSamples);
        }
        let plan = self.eval_plan();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|unit| run_unit(&plan, seed, unit as u64, &[]))
            .collect();
        self.dataset_from_rows(&plan, &rows)
    }

    /// Evaluation plan in topological order; `slot` indexes the per-unit
    /// value buffer (by lexicographic rank, matching the noise stream).
    fn eval_plan(&self) -> Vec<NodeStep> {
        self.topo
            .iter()
            .map(|node| {
                let slot = self.lex_rank(node) as usize;
                let op = match &self.equations[node] {
                    Equation::Bernoulli { intercept, coefficients } => NodeOp::Bernoulli {
                        intercept: *intercept,
                        coefs: coefficients
                            .iter()
                            .map(|(p, c)| (self.lex_rank(p) as usize, *c))
                            .collect(),
                    },
                    Equation::Gaussian { intercept, terms, sigma } => NodeOp::Gaussian {
                        intercept: *intercept,
                        terms: terms
                            .iter()
                            .map(|t| {
                                (
                                    t.parents
                                        .iter()
                                        .map(|p| self.lex_rank(p) as usize)
                                        .collect(),
                                    t.coef,
                                )
                            })
                            .collect(),
                        sigma: *sigma,
                    },
                    Equation::Constant { value } => NodeOp::Constant { value: *value },
                };
                NodeStep {
                    name: node.clone(),
                    slot,
                    binary: self.equations[node].is_binary(),
                    op,
                }
            })
            .collect()
    }

    fn dataset_from_rows(
        &self,
        plan: &[NodeStep],
        rows: &[Vec<f64>],
    ) -> Result<Dataset, ScmError> {
        let mut out = Dataset::new();
        for step in plan {
            let kind = if step.binary { ColumnKind::Binary } else { ColumnKind::Continuous };
            let column = rows.iter().map(|r| r[step.slot]).collect();
            out.push_column(step.name.clone(), kind, column)
                .expect("validated plan produces consistent columns");
        }
        Ok(out)
    }

    // ── Intervention ─────────────────────────────────────────────────────────

    /// do(assignment): each assigned node's equation becomes the constant and
    /// its incoming edges are removed. Binary nodes only accept 0 or 1.
    pub fn apply_intervention(
        &self,
        assignment: &BTreeMap<String, f64>,
    ) -> Result<StructuralModel, ScmError> {
        for (node, value) in assignment {
            let eq = self.equation(node)?;
            if !value.is_finite() || (eq.is_binary() && *value != 0.0 && *value != 1.0) {
                return Err(ScmError::ValueOutOfSupport {
                    node: node.clone(),
                    value: *value,
                });
            }
        }
        let targets: BTreeSet<String> = assignment.keys().cloned().collect();
        let dag = self.dag.intervene(&targets)?;
        let equations = self
            .equations
            .iter()
            .map(|(node, eq)| {
                let eq = match assignment.get(node) {
                    Some(v) => Equation::Constant { value: *v },
                    None => eq.clone(),
                };
                (node.clone(), eq)
            })
            .collect();
        build_scm(dag, equations)
    }

    // ── Potential outcomes ───────────────────────────────────────────────────

    /// Shared-noise potential outcomes for every joint regime over
    /// `treatments` (default regime cap [`DEFAULT_REGIME_CAP`]).
    pub fn potential_outcomes(
        &self,
        treatments: &[String],
        outcome: &str,
        n: usize,
        seed: u64,
    ) -> Result<PotentialOutcomeTable, ScmError> {
        self.potential_outcomes_capped(treatments, outcome, n, seed, DEFAULT_REGIME_CAP)
    }

    pub fn potential_outcomes_capped(
        &self,
        treatments: &[String],
        outcome: &str,
        n: usize,
        seed: u64,
        cap: usize,
    ) -> Result<PotentialOutcomeTable, ScmError> {
        if n == 0 {
            return Err(ScmError::ZeroSamples);
        }
        self.check_treatments(treatments)?;
        self.equation(outcome)?;
        let regimes = 1usize
            .checked_shl(treatments.len() as u32)
            .ok_or(ScmError::RegimeExplosion { regimes: usize::MAX, cap })?;
        if regimes > cap {
            return Err(ScmError::RegimeExplosion { regimes, cap });
        }

        let plan = self.eval_plan();
        let outcome_slot = self.lex_rank(outcome) as usize;
        let treatment_slots: Vec<usize> =
            treatments.iter().map(|t| self.lex_rank(t) as usize).collect();

        // Per unit: one factual pass (recording the realized regime), then one
        // forced pass per regime reusing the same noise coordinates.
        let per_unit: Vec<(usize, f64, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|unit| {
                let unit = unit as u64;
                let factual_vals = run_unit(&plan, seed, unit, &[]);
                let mut factual_regime = 0usize;
                for (j, slot) in treatment_slots.iter().enumerate() {
                    if factual_vals[*slot] == 1.0 {
                        factual_regime |= 1 << j;
                    }
                }
                let mut outcomes = Vec::with_capacity(regimes);
                for regime in 0..regimes {
                    let forced: Vec<(usize, f64)> = treatment_slots
                        .iter()
                        .enumerate()
                        .map(|(j, slot)| (*slot, ((regime >> j) & 1) as f64))
                        .collect();
                    outcomes.push(run_unit(&plan, seed, unit, &forced)[outcome_slot]);
                }
                (factual_regime, factual_vals[outcome_slot], outcomes)
            })
            .collect();

        let mut table = PotentialOutcomeTable {
            treatments: treatments.to_vec(),
            outcome: outcome.to_string(),
            outcomes: vec![Vec::with_capacity(n); regimes],
            factual_regime: Vec::with_capacity(n),
            factual_outcome: Vec::with_capacity(n),
        };
        for (regime, outcome_value, regime_outcomes) in per_unit {
            table.factual_regime.push(regime);
            table.factual_outcome.push(outcome_value);
            for (r, v) in regime_outcomes.into_iter().enumerate() {
                table.outcomes[r].push(v);
            }
        }
        Ok(table)
    }

    fn check_treatments(&self, treatments: &[String]) -> Result<(), ScmError> {
        for t in treatments {
            if !self.equation(t)?.is_binary() {
                return Err(ScmError::UnsupportedEquationForm {
                    node: t.clone(),
                    detail: "treatment must be binary-valued".to_string(),
                });
            }
        }
        Ok(())
    }

    // ── Oracle intervention-effect coefficients ──────────────────────────────

    /// E[outcome | do(regime)] for every joint regime over `treatments`,
    /// indexed by regime bitmask (bit j = treatments[j]). Uses exact analytic
    /// propagation when the model permits it, Monte Carlo otherwise; the
    /// returned flag reports which path ran.
    pub fn regime_means(
        &self,
        treatments: &[String],
        outcome: &str,
        options: &MsmTruthOptions,
    ) -> Result<(Vec<f64>, bool), ScmError> {
        self.check_treatments(treatments)?;
        self.equation(outcome)?;
        let regimes = 1usize
            .checked_shl(treatments.len() as u32)
            .ok_or(ScmError::RegimeExplosion {
                regimes: usize::MAX,
                cap: DEFAULT_REGIME_CAP,
            })?;
        if regimes > DEFAULT_REGIME_CAP {
            return Err(ScmError::RegimeExplosion { regimes, cap: DEFAULT_REGIME_CAP });
        }

        let mut means = Vec::with_capacity(regimes);
        let mut analytic = true;
        for regime in 0..regimes {
            let assignment: BTreeMap<String, f64> = treatments
                .iter()
                .enumerate()
                .map(|(j, t)| (t.clone(), ((regime >> j) & 1) as f64))
                .collect();
            match self.analytic_mean(&assignment, outcome) {
                Some(mean) => means.push(mean),
                None => {
                    analytic = false;
                    break;
                }
            }
        }
        if !analytic {
            means.clear();
            for regime in 0..regimes {
                let assignment: BTreeMap<String, f64> = treatments
                    .iter()
                    .enumerate()
                    .map(|(j, t)| (t.clone(), ((regime >> j) & 1) as f64))
                    .collect();
                let sub = self.apply_intervention(&assignment)?;
                let data = sub.simulate(options.mc_samples, options.mc_seed)?;
                let col = data.column(outcome).expect("outcome simulated");
                means.push(col.iter().sum::<f64>() / col.len() as f64);
            }
        }
        Ok((means, analytic))
    }

    /// Exact post-intervention mean of `outcome`, when every product term in
    /// the model has at most one factor that is stochastic under the
    /// assignment. Expectations propagate exactly through linear Bernoulli
    /// probabilities (linearity of expectation needs no independence); only a
    /// product of two or more stochastic parents breaks exactness.
    fn analytic_mean(
        &self,
        assignment: &BTreeMap<String, f64>,
        outcome: &str,
    ) -> Option<f64> {
        let mut mean: BTreeMap<&str, f64> = BTreeMap::new();
        let mut fixed: BTreeSet<&str> = BTreeSet::new();
        for node in &self.topo {
            if let Some(v) = assignment.get(node) {
                mean.insert(node, *v);
                fixed.insert(node);
                continue;
            }
            match &self.equations[node] {
                Equation::Constant { value } => {
                    mean.insert(node, *value);
                    fixed.insert(node);
                }
                Equation::Bernoulli { intercept, coefficients } => {
                    let m = intercept
                        + coefficients
                            .iter()
                            .map(|(p, c)| c * mean[p.as_str()])
                            .sum::<f64>();
                    mean.insert(node, m);
                }
                Equation::Gaussian { intercept, terms, .. } => {
                    let mut m = *intercept;
                    for term in terms {
                        let stochastic =
                            term.parents.iter().filter(|p| !fixed.contains(p.as_str()));
                        if stochastic.count() > 1 {
                            return None;
                        }
                        m += term.coef
                            * term
                                .parents
                                .iter()
                                .map(|p| mean[p.as_str()])
                                .product::<f64>();
                    }
                    mean.insert(node, m);
                }
            }
        }
        Some(mean[outcome])
    }
}

/// Default hard cap on the number of joint treatment regimes (2^12).
pub const DEFAULT_REGIME_CAP: usize = 1 << 12;

// ── Per-unit evaluation machinery ────────────────────────────────────────────

struct NodeStep {
    name: String,
    /// Index into the per-unit value buffer AND the node's noise-stream id:
    /// the lexicographic rank of the node name.
    slot: usize,
    binary: bool,
    op: NodeOp,
}

enum NodeOp {
    Bernoulli {
        intercept: f64,
        coefs: Vec<(usize, f64)>,
    },
    Gaussian {
        intercept: f64,
        terms: Vec<(Vec<usize>, f64)>,
        sigma: f64,
    },
    Constant {
        value: f64,
    },
}

/// Evaluate one unit. `forced` pins slots to values (shared-noise regime
/// passes); forced nodes consume no noise, every other node draws from its
/// own stream regardless of evaluation order.
fn run_unit(plan: &[NodeStep], seed: u64, unit: u64, forced: &[(usize, f64)]) -> Vec<f64> {
    let mut vals = vec![0.0f64; plan.len()];
    for step in plan {
        if let Some((_, v)) = forced.iter().find(|(slot, _)| *slot == step.slot) {
            vals[step.slot] = *v;
            continue;
        }
        vals[step.slot] = match &step.op {
            NodeOp::Bernoulli { intercept, coefs } => {
                let p = intercept
                    + coefs.iter().map(|(j, c)| c * vals[*j]).sum::<f64>();
                let u = noise::uniform(seed, unit, step.slot as u32, 0);
                if u < p { 1.0 } else { 0.0 }
            }
            NodeOp::Gaussian { intercept, terms, sigma } => {
                let mut mu = *intercept;
                for (slots, coef) in terms {
                    mu += coef * slots.iter().map(|j| vals[*j]).product::<f64>();
                }
                mu + sigma * noise::gaussian(seed, unit, step.slot as u32, 0)
            }
            NodeOp::Constant { value } => *value,
        };
    }
    vals
}

// ── Potential outcomes table ─────────────────────────────────────────────────

/// Per-unit outcomes under every joint treatment regime, generated under one
/// shared exogenous noise vector per unit, plus the factual pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOutcomeTable {
    pub treatments: Vec<String>,
    pub outcome: String,
    /// `outcomes[r][i]`: unit i's outcome under the regime whose bitmask is
    /// r (bit j set ⇔ treatments[j] = 1).
    pub outcomes: Vec<Vec<f64>>,
    /// Bitmask of the treatments each unit factually received.
    pub factual_regime: Vec<usize>,
    pub factual_outcome: Vec<f64>,
}

impl PotentialOutcomeTable {
    pub fn n_units(&self) -> usize {
        self.factual_outcome.len()
    }

    pub fn n_regimes(&self) -> usize {
        self.outcomes.len()
    }

    /// The regime bitmask for a full assignment in `treatments` order.
    pub fn regime_mask(&self, values: &[u8]) -> usize {
        values
            .iter()
            .enumerate()
            .fold(0, |acc, (j, v)| acc | ((*v as usize & 1) << j))
    }

    /// Mean outcome under one regime.
    pub fn regime_mean(&self, regime: usize) -> f64 {
        let col = &self.outcomes[regime];
        col.iter().sum::<f64>() / col.len() as f64
    }
}

// ── Saturated treatment terms ────────────────────────────────────────────────

/// One term of a saturated regression in treatment indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturatedTerm {
    /// Bitmask over the treatment list; 0 is the intercept.
    pub mask: usize,
    /// Display name: "Intercept", "X1", "X1*X2", …
    pub name: String,
}

/// The 2^k saturated terms for a treatment list, ordered intercept first,
/// then main effects in treatment order, then interactions by ascending
/// order and position — the order effect tables are conventionally printed.
pub fn saturated_terms(treatments: &[String]) -> Vec<SaturatedTerm> {
    let k = treatments.len();
    let mut masks: Vec<usize> = (0..(1usize << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
        .into_iter()
        .map(|mask| {
            let name = if mask == 0 {
                "Intercept".to_string()
            } else {
                treatments
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| mask >> j & 1 == 1)
                    .map(|(_, t)| t.clone())
                    .collect::<Vec<_>>()
                    .join("*")
            };
            SaturatedTerm { mask, name }
        })
        .collect()
}

// ── Oracle MSM coefficients ──────────────────────────────────────────────────

/// Options for the oracle coefficient computation's Monte Carlo fallback.
#[derive(Debug, Clone)]
pub struct MsmTruthOptions {
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl Default for MsmTruthOptions {
    fn default() -> Self {
        MsmTruthOptions { mc_samples: 1_000_000, mc_seed: 0x0DDB_1A5E_5BAD_5EED }
    }
}

/// Ground-truth coefficients of the saturated marginal structural model.
#[derive(Debug, Clone, PartialEq)]
pub struct MsmTruth {
    /// Terms in display order (intercept, mains, interactions).
    pub terms: Vec<SaturatedTerm>,
    /// Coefficient per term name.
    pub coefficients: BTreeMap<String, f64>,
    /// E[outcome | do(regime)], indexed by regime bitmask.
    pub regime_means: Vec<f64>,
    /// True when the analytic propagation path applied (exact); false means
    /// the means came from Monte Carlo.
    pub analytic: bool,
}

/// True saturated-model coefficients for `outcome` over `treatments`: solves
/// E[outcome | do(regime)] = Σ_{S ⊆ regime} β_S exactly by inclusion–
/// exclusion over the regime lattice.
pub fn true_msm_coefficients(
    model: &StructuralModel,
    treatments: &[String],
    outcome: &str,
) -> Result<MsmTruth, ScmError> {
    true_msm_coefficients_with(model, treatments, outcome, &MsmTruthOptions::default())
}

pub fn true_msm_coefficients_with(
    model: &StructuralModel,
    treatments: &[String],
    outcome: &str,
    options: &MsmTruthOptions,
) -> Result<MsmTruth, ScmError> {
    let (regime_means, analytic) = model.regime_means(treatments, outcome, options)?;
    let terms = saturated_terms(treatments);
    let coefficients = mobius_coefficients(&terms, &regime_means);
    Ok(MsmTruth { terms, coefficients, regime_means, analytic })
}

/// Invert the regime-mean vector into saturated-model coefficients:
/// β_S = Σ_{R ⊆ S} (−1)^{|S\R|} · μ_R, where `means[r]` is the mean under
/// the regime with bitmask `r`. Exact because the saturated design spans
/// every regime contrast.
pub fn mobius_coefficients(terms: &[SaturatedTerm], means: &[f64]) -> BTreeMap<String, f64> {
    let mut coefficients = BTreeMap::new();
    for term in terms {
        let s = term.mask;
        let mut beta = 0.0;
        let mut r = s;
        loop {
            let sign = if (s.count_ones() - r.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            beta += sign * means[r];
            if r == 0 {
                break;
            }
            r = (r - 1) & s;
        }
        coefficients.insert(term.name.clone(), beta);
    }
    coefficients
}

// ── JSON file format ─────────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct ScmFile {
    dag: serde_json::Value,
    equations: BTreeMap<String, Equation>,
}

impl StructuralModel {
    /// Parse the JSON model format: `{"dag": <dag format>, "equations":
    /// {node: {"kind": "bernoulli"|"gaussian"|"constant", …}}}`.
    pub fn from_json(text: &str) -> Result<StructuralModel, String> {
        let file: ScmFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let dag = CausalDag::from_json(&file.dag.to_string())?;
        build_scm(dag, file.equations).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        let file = ScmFile {
            dag: serde_json::from_str(&self.dag.to_json()).expect("emitted DAG parses"),
            equations: self.equations.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
    }
}

// ── Tests ────────────────────────────────────────────────────────────────────
