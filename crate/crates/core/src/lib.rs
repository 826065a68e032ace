//! Simulation and analysis of belief dynamics in sequential binary
//! hypothesis tests.
//!
//! Three coupled belief processes are generated from the same data: the
//! objective belief `p` (true measure pair, true prior), the would-be belief
//! `p_check` (agent's measure pair, true prior) and the agent's belief `pi`
//! (agent's measure pair, agent's prior). On top of these the crate provides
//! diagnostics for when one belief process is an informationally redundant
//! function of another, and the split of the agent's error `p - pi` into a
//! prior-induced bias and a model-induced diffusive part.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod continuous;
pub mod discrete;
pub mod measures;
pub mod rng;
pub mod decomposition;
pub mod export;
pub mod isotonic;
pub mod ito;
pub mod redundancy;
pub mod witness;

pub use belief::{bayes_update, belief_of, odds_of, sigma, Belief, BeliefError, LogLR, Odds};
pub use continuous::{
    drift_integral, misspecified_filter, simulate_loglr_sde, Clock, FilterSpec, Grid, Schedule, SdeError, SdeSpec,
};
pub use decomposition::{
    asset_scenario, bias_term, decompose, rho_of, sign_statistics, AssetScenario, ErrorDecomposition, SignStatistics,
};
pub use discrete::{
    classify_outcome, simulate_paths, small_increment_diagnostic, Decision, Ensemble, OutcomeMode, PathRecord,
    ScenarioSpec, SimError,
};
pub use ito::{ito_ode_check, ItoError};
pub use measures::{adjacency_gap, classify_pair, loglr_increment, MeasureError, MeasurePair, Outcome, TestClass, TestKind};
pub use redundancy::{
    fit_power_law, fit_state_map, redundancy_verdict, BeliefSeries, RedundancyError, RedundancyReport, Tolerances,
    Verdict,
};
pub use witness::{path_dependency_witness, Witness, WitnessSet};
