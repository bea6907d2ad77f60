//! Causal inference on directed acyclic graphs: graph-theoretic
//! identification (d-separation, backdoor adjustment), structural causal
//! models with reproducible counter-based simulation, interventions and
//! exact potential-outcome tables, and an estimation suite spanning OLS,
//! standardization, stabilized IPTW marginal structural models, the
//! sequential g-formula, interrupted time series, and regression
//! discontinuity — plus a catalog of worked scenarios with known ground
//! truth for validating the estimators against each other.

pub mod dag;
pub mod data;
pub mod estimators;
pub mod noise;
pub mod scenarios;
pub mod scm;

pub use dag::{build_dag, CausalDag, DagError, NodeRole, PathWitness};
pub use data::{ColumnKind, DataError, Dataset};
pub use estimators::EstimatorError;
pub use scenarios::{catalog, reproduce, ReproductionReport, ScenarioError, ScenarioSpec};
pub use scm::{build_scm, Equation, ScmError, StructuralModel};
