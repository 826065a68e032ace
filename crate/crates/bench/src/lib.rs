//! Fixtures shared by the benchmarks.

use seqbelief::continuous::FilterScenario;
use seqbelief::{Belief, Clock, FilterSpec, Grid, MeasurePair, Outcome, OutcomeMode, ScenarioSpec, Schedule, SdeSpec};

/// Prior-shift ensemble: shared Gaussian pair, `p0 = 0.2`, `pi0 = 0.1`.
pub fn prior_shift(paths: usize, horizon: usize) -> ScenarioSpec {
    let pair = MeasurePair::gaussian_iid(0.5, -0.5, 1.0).unwrap();
    ScenarioSpec {
        truth_pair: pair.clone(),
        test_pair: pair,
        true_prior: Belief::new(0.2).unwrap(),
        agent_prior: Belief::new(0.1).unwrap(),
        outcome_mode: OutcomeMode::DrawnFromPrior,
        horizon,
        ensemble_size: paths,
        master_seed: 42,
    }
}

pub fn unit_sde(steps: usize) -> SdeSpec {
    SdeSpec {
        signal_to_noise: Schedule::Constant(1.0),
        clock: Clock::Identity,
        grid: Grid::new(1.0 / steps as f64, steps).unwrap(),
        outcome: Outcome::B,
        master_seed: 42,
    }
}

pub fn misspecified_filter(paths: usize, steps: usize) -> FilterScenario {
    FilterScenario {
        filter: FilterSpec {
            true_drift: 0.5,
            agent_drift: 0.4,
            obs_noise: 1.0,
            agent_obs_noise: 1.0,
        },
        grid: Grid::new(1.0 / steps as f64, steps).unwrap(),
        outcome_mode: OutcomeMode::Fixed(Outcome::B),
        true_prior: Belief::new(0.5).unwrap(),
        agent_prior: Belief::new(0.3).unwrap(),
        ensemble_size: paths,
        master_seed: 42,
    }
}
