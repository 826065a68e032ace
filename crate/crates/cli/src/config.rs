//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 42
//! paths = 200
//! true_prior = 0.2
//! agent_prior = 0.1
//! outcome = "drawn_from_prior"   # or "b", "bbar"
//!
//! [scenario]
//! kind = "discrete"
//! horizon = 400
//! truth = { family = "gaussian_iid", mean_b = 0.5, mean_bbar = -0.5, stdev = 1.0 }
//! test = { family = "gaussian_iid", mean_b = 0.5, mean_bbar = -0.5, stdev = 1.0 }
//! ```
//!
//! `kind = "filter"` takes `true_drift`, `agent_drift`, `obs_noise`,
//! `agent_obs_noise` (per unit time), `step` and `steps`. `kind = "sde"` takes
//! `signal_to_noise` (a number or a table of `steps + 1` values), an optional
//! `clock`, `step` and `steps`.

use serde::Deserialize;

use seqbelief::continuous::FilterScenario;
use seqbelief::redundancy::Tolerances;
use seqbelief::{Belief, Clock, FilterSpec, Grid, MeasurePair, Outcome, OutcomeMode, ScenarioSpec, Schedule, SdeSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub true_prior: Option<f64>,
    pub agent_prior: Option<f64>,
    pub outcome: Option<OutcomeChoice>,
    pub scenario: RawScenario,
    #[serde(default)]
    pub tolerances: RawTolerances,
    pub redundancy: Option<RedundancyConfig>,
    pub errors: Option<ErrorsConfig>,
    pub asset: Option<AssetConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeChoice {
    B,
    Bbar,
    DrawnFromPrior,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawScenario {
    Discrete {
        horizon: usize,
        truth: MeasurePair,
        test: MeasurePair,
    },
    Filter {
        true_drift: f64,
        agent_drift: f64,
        obs_noise: f64,
        agent_obs_noise: f64,
        step: f64,
        steps: usize,
    },
    Sde {
        signal_to_noise: Schedule,
        #[serde(default = "identity_clock")]
        clock: Clock,
        step: f64,
        steps: usize,
    },
}

fn identity_clock() -> Clock {
    Clock::Identity
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTolerances {
    pub gamma: Option<f64>,
    pub homogeneity: Option<f64>,
    pub trend_ratio: Option<f64>,
}

/// Which series to compare, and optionally a second ensemble built on the
/// same data with another test pair and agent prior.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedundancyConfig {
    pub series_a: seqbelief::BeliefSeries,
    pub series_b: seqbelief::BeliefSeries,
    pub compare_test: Option<MeasurePair>,
    pub compare_agent_prior: Option<f64>,
    /// Agent-belief tolerance for the witness search.
    pub epsilon: Option<f64>,
    /// Objective-belief gap for the witness search.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorsConfig {
    /// Grid indices at which sign statistics are reported.
    pub steps: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetConfig {
    pub payoff_b: f64,
    pub payoff_bbar: f64,
    pub discount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Discrete(ScenarioSpec),
    Filter(FilterScenario),
    Sde {
        spec: SdeSpec,
        true_prior: Belief,
        agent_prior: Belief,
        paths: usize,
    },
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        match self {
            Scenario::Discrete(s) => s.horizon,
            Scenario::Filter(f) => f.grid.steps,
            Scenario::Sde { spec, .. } => spec.grid.steps,
        }
    }

    pub fn grid(&self) -> Option<Grid> {
        match self {
            Scenario::Discrete(_) => None,
            Scenario::Filter(f) => Some(f.grid),
            Scenario::Sde { spec, .. } => Some(spec.grid),
        }
    }
}

/// Validated configuration with overrides applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: usize,
    pub scenario: Scenario,
    pub tolerances: Tolerances,
    pub redundancy: Option<RedundancyConfig>,
    pub errors: ErrorsConfig,
    pub asset: Option<AssetConfig>,
}

pub fn parse(text: &str) -> Result<RawConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

fn required<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("`{key}` is required")))
}

fn belief(value: f64, key: &str) -> Result<Belief, CliError> {
    Belief::new(value).map_err(|e| CliError::Validation(format!("`{key}`: {e}")))
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

impl RawConfig {
    pub fn resolve(self, seed: Option<u64>, paths: Option<usize>) -> Result<RunConfig, CliError> {
        let seed = required(seed.or(self.seed), "seed")?;
        let paths = required(paths.or(self.paths), "paths")?;
        if paths == 0 {
            return Err(CliError::Validation("`paths` must be at least 1".into()));
        }
        let true_prior = belief(required(self.true_prior, "true_prior")?, "true_prior")?;
        let agent_prior = belief(required(self.agent_prior, "agent_prior")?, "agent_prior")?;
        let outcome = required(self.outcome, "outcome")?;
        let outcome_mode = match outcome {
            OutcomeChoice::B => OutcomeMode::Fixed(Outcome::B),
            OutcomeChoice::Bbar => OutcomeMode::Fixed(Outcome::Bbar),
            OutcomeChoice::DrawnFromPrior => OutcomeMode::DrawnFromPrior,
        };

        let scenario = match self.scenario {
            RawScenario::Discrete { horizon, truth, test } => {
                let spec = ScenarioSpec {
                    truth_pair: truth,
                    test_pair: test,
                    true_prior,
                    agent_prior,
                    outcome_mode,
                    horizon,
                    ensemble_size: paths,
                    master_seed: seed,
                };
                spec.validate().map_err(invalid)?;
                Scenario::Discrete(spec)
            }
            RawScenario::Filter {
                true_drift,
                agent_drift,
                obs_noise,
                agent_obs_noise,
                step,
                steps,
            } => {
                let f = FilterScenario {
                    filter: FilterSpec {
                        true_drift,
                        agent_drift,
                        obs_noise,
                        agent_obs_noise,
                    },
                    grid: Grid::new(step, steps).map_err(invalid)?,
                    outcome_mode,
                    true_prior,
                    agent_prior,
                    ensemble_size: paths,
                    master_seed: seed,
                };
                f.validate().map_err(invalid)?;
                Scenario::Filter(f)
            }
            RawScenario::Sde {
                signal_to_noise,
                clock,
                step,
                steps,
            } => {
                let OutcomeMode::Fixed(outcome) = outcome_mode else {
                    return Err(CliError::Validation("sde scenarios need `outcome` = \"b\" or \"bbar\"".into()));
                };
                let spec = SdeSpec {
                    signal_to_noise,
                    clock,
                    grid: Grid::new(step, steps).map_err(invalid)?,
                    outcome,
                    master_seed: seed,
                };
                spec.validate().map_err(invalid)?;
                Scenario::Sde {
                    spec,
                    true_prior,
                    agent_prior,
                    paths,
                }
            }
        };

        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            gamma: self.tolerances.gamma.unwrap_or(defaults.gamma),
            homogeneity: self.tolerances.homogeneity.unwrap_or(defaults.homogeneity),
            trend_ratio: self.tolerances.trend_ratio.unwrap_or(defaults.trend_ratio),
        };
        for (key, v) in [
            ("tolerances.gamma", tolerances.gamma),
            ("tolerances.homogeneity", tolerances.homogeneity),
            ("tolerances.trend_ratio", tolerances.trend_ratio),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Validation(format!("`{key}` must be positive, got {v}")));
            }
        }
        if let Some(r) = &self.redundancy {
            if let Some(p) = &r.compare_test {
                p.validate().map_err(invalid)?;
            }
            if let Some(pi) = r.compare_agent_prior {
                belief(pi, "redundancy.compare_agent_prior")?;
            }
            if r.epsilon.is_some() != r.delta.is_some() {
                return Err(CliError::Validation("`redundancy.epsilon` and `redundancy.delta` go together".into()));
            }
            for (key, v) in [("redundancy.epsilon", r.epsilon), ("redundancy.delta", r.delta)] {
                if let Some(v) = v {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(CliError::Validation(format!("`{key}` must be non-negative, got {v}")));
                    }
                }
            }
        }
        let errors = self.errors.unwrap_or_default();
        if let Some(steps) = &errors.steps {
            let h = scenario.horizon();
            if let Some(&t) = steps.iter().find(|&&t| t > h) {
                return Err(CliError::Validation(format!("`errors.steps` entry {t} exceeds the horizon {h}")));
            }
        }
        Ok(RunConfig {
            seed,
            paths,
            scenario,
            tolerances,
            redundancy: self.redundancy,
            errors,
            asset: self.asset,
        })
    }
}
