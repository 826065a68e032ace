//! Discrete-time simulation of the three coupled belief processes.
//!
//! Data are drawn from the truth pair's marginal for the realised outcome.
//! The objective belief `p` filters them with the truth pair and the true
//! prior; the would-be belief `p_check` uses the test pair with the true
//! prior; the agent belief `pi` uses the test pair with the agent's prior.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{belief_gap, Belief, LogLR};
use crate::measures::{loglr_increment, MeasureError, MeasurePair, Outcome};
use crate::rng::path_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("ensemble size must be at least 1")]
    EmptyEnsemble,
    #[error("{which} pair: {source}")]
    Pair {
        which: &'static str,
        #[source]
        source: MeasureError,
    },
    #[error("{which} pair schedule covers {len} steps, horizon is {horizon}")]
    ScheduleTooShort {
        which: &'static str,
        len: usize,
        horizon: usize,
    },
    #[error("truth and test pairs must share support (both Gaussian or both Bernoulli)")]
    SupportMismatch,
    #[error("window must be in 1..={horizon}, got {window}")]
    InsufficientData { window: usize, horizon: usize },
    #[error("log threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeMode {
    Fixed(Outcome),
    /// Draw the outcome once per path, `b` with the true prior probability.
    DrawnFromPrior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub truth_pair: MeasurePair,
    pub test_pair: MeasurePair,
    pub true_prior: Belief,
    pub agent_prior: Belief,
    pub outcome_mode: OutcomeMode,
    pub horizon: usize,
    pub ensemble_size: usize,
    pub master_seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon == 0 {
            return Err(SimError::EmptyHorizon);
        }
        if self.ensemble_size == 0 {
            return Err(SimError::EmptyEnsemble);
        }
        for (which, pair) in [("truth", &self.truth_pair), ("test", &self.test_pair)] {
            pair.validate().map_err(|source| SimError::Pair { which, source })?;
            if let Some(len) = pair.schedule_len() {
                if len < self.horizon {
                    return Err(SimError::ScheduleTooShort {
                        which,
                        len,
                        horizon: self.horizon,
                    });
                }
            }
        }
        if matches!(self.truth_pair, MeasurePair::BernoulliIid { .. })
            != matches!(self.test_pair, MeasurePair::BernoulliIid { .. })
        {
            return Err(SimError::SupportMismatch);
        }
        Ok(())
    }
}

/// One simulated trajectory. Every series except `data` has length
/// `horizon + 1`, with index `0` holding the priors and `l_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_index: usize,
    pub outcome: Outcome,
    pub true_prior: Belief,
    pub agent_prior: Belief,
    /// Grid spacing for continuous-time paths; `None` for discrete steps.
    pub time_step: Option<f64>,
    /// `data[k]` is the datum (or observation increment) at step `k + 1`.
    pub data: Vec<f64>,
    pub true_loglr: Vec<f64>,
    pub test_loglr: Vec<f64>,
    pub p: Vec<f64>,
    pub p_check: Vec<f64>,
    pub pi: Vec<f64>,
    pub err: Vec<f64>,
    pub bias: Vec<f64>,
    pub diffusive: Vec<f64>,
}

impl PathRecord {
    /// Builds the belief and error series from the two log-LR series.
    ///
    /// Belief differences are taken on log-odds, so the error components keep
    /// their sign after the beliefs themselves have saturated. `err` is the
    /// sum `bias + diffusive`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_loglr(
        path_index: usize,
        outcome: Outcome,
        true_prior: Belief,
        agent_prior: Belief,
        time_step: Option<f64>,
        data: Vec<f64>,
        true_loglr: Vec<f64>,
        test_loglr: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(true_loglr.len(), test_loglr.len());
        let lp0 = true_prior.log_odds();
        let lpi0 = agent_prior.log_odds();
        let n = test_loglr.len();
        let mut rec = PathRecord {
            path_index,
            outcome,
            true_prior,
            agent_prior,
            time_step,
            data,
            p: Vec::with_capacity(n),
            p_check: Vec::with_capacity(n),
            pi: Vec::with_capacity(n),
            err: Vec::with_capacity(n),
            bias: Vec::with_capacity(n),
            diffusive: Vec::with_capacity(n),
            true_loglr,
            test_loglr,
        };
        for (&lt, &l) in rec.true_loglr.iter().zip(&rec.test_loglr) {
            let x_p = lp0 + lt;
            let x_check = lp0 + l;
            let x_pi = lpi0 + l;
            rec.p.push(Belief::from_log_odds(x_p).value());
            rec.p_check.push(Belief::from_log_odds(x_check).value());
            rec.pi.push(Belief::from_log_odds(x_pi).value());
            let bias = belief_gap(x_check, x_pi);
            let diffusive = belief_gap(x_p, x_check);
            rec.bias.push(bias);
            rec.diffusive.push(diffusive);
            rec.err.push(bias + diffusive);
        }
        rec.p[0] = true_prior.value();
        rec.p_check[0] = true_prior.value();
        rec.pi[0] = agent_prior.value();
        rec
    }

    /// Number of steps after the prior.
    pub fn horizon(&self) -> usize {
        self.test_loglr.len() - 1
    }

    pub fn log_odds_p(&self, n: usize) -> f64 {
        self.true_prior.log_odds() + self.true_loglr[n]
    }

    pub fn log_odds_p_check(&self, n: usize) -> f64 {
        self.true_prior.log_odds() + self.test_loglr[n]
    }

    pub fn log_odds_pi(&self, n: usize) -> f64 {
        self.agent_prior.log_odds() + self.test_loglr[n]
    }
}

/// A simulated ensemble together with the scenario that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub spec: ScenarioSpec,
    pub paths: Vec<PathRecord>,
}

/// Simulates a single path; a pure function of `(spec, path_index)`.
pub fn simulate_path(spec: &ScenarioSpec, path_index: usize) -> Result<PathRecord, SimError> {
    let mut rng = path_rng(spec.master_seed, path_index as u64);
    let outcome = match spec.outcome_mode {
        OutcomeMode::Fixed(o) => o,
        OutcomeMode::DrawnFromPrior => {
            let u: f64 = rng.random();
            if u < spec.true_prior.value() {
                Outcome::B
            } else {
                Outcome::Bbar
            }
        }
    };
    let mut data = Vec::with_capacity(spec.horizon);
    let mut d_true = Vec::with_capacity(spec.horizon);
    let mut d_test = Vec::with_capacity(spec.horizon);
    for step in 1..=spec.horizon {
        let x = spec.truth_pair.sample(step, outcome, &mut rng)?;
        d_true.push(loglr_increment(&spec.truth_pair, step, x)?);
        d_test.push(loglr_increment(&spec.test_pair, step, x)?);
        data.push(x);
    }
    Ok(PathRecord::from_loglr(
        path_index,
        outcome,
        spec.true_prior,
        spec.agent_prior,
        None,
        data,
        LogLR::accumulate(d_true),
        LogLR::accumulate(d_test),
    ))
}

/// Simulates the whole ensemble. Paths run in parallel and are returned in
/// path-index order; the result does not depend on the thread count.
pub fn simulate_paths(spec: &ScenarioSpec) -> Result<Ensemble, SimError> {
    spec.validate()?;
    let paths = (0..spec.ensemble_size)
        .into_par_iter()
        .map(|i| simulate_path(spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ensemble {
        spec: spec.clone(),
        paths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    /// First step (1-based) covered by the window.
    pub start: usize,
    pub mean_increment: f64,
    pub half_second_moment: f64,
    pub half_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallIncrementReport {
    pub outcome: Outcome,
    pub window: usize,
    pub windows: Vec<WindowStat>,
    /// Pooled over all complete windows.
    pub mean_increment: f64,
    pub half_second_moment: f64,
    pub half_variance: f64,
    /// `mean / (±½ E[Δl²])`, sign per outcome. Tends to 1 as increments shrink.
    pub ratio_raw: f64,
    /// `mean / (±½ Var[Δl])`. Exactly 1 in expectation for Gaussian increments
    /// of any size.
    pub ratio_centered: f64,
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let second = xs.iter().map(|x| x * x).sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, 0.5 * second, 0.5 * var)
}

/// Compares the mean log-LR increment with half its second moment over
/// non-overlapping windows of the test log-LR.
pub fn small_increment_diagnostic(record: &PathRecord, window: usize) -> Result<SmallIncrementReport, SimError> {
    let horizon = record.horizon();
    if window == 0 || window > horizon {
        return Err(SimError::InsufficientData { window, horizon });
    }
    let inc: Vec<f64> = record.test_loglr.windows(2).map(|w| w[1] - w[0]).collect();
    let used = (inc.len() / window) * window;
    let windows = inc[..used]
        .chunks_exact(window)
        .enumerate()
        .map(|(k, c)| {
            let (mean_increment, half_second_moment, half_variance) = moments(c);
            WindowStat {
                start: k * window + 1,
                mean_increment,
                half_second_moment,
                half_variance,
            }
        })
        .collect();
    let (mean_increment, half_second_moment, half_variance) = moments(&inc[..used]);
    let sign = record.outcome.drift_sign();
    Ok(SmallIncrementReport {
        outcome: record.outcome,
        window,
        windows,
        mean_increment,
        half_second_moment,
        half_variance,
        ratio_raw: mean_increment / (sign * half_second_moment),
        ratio_centered: mean_increment / (sign * half_variance),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    DecidedB,
    DecidedBbar,
    Undecided,
}

/// Thresholds the final test log-LR symmetrically at `±log_threshold`.
pub fn classify_outcome(record: &PathRecord, log_threshold: f64) -> Result<Decision, SimError> {
    if !(log_threshold > 0.0 && log_threshold.is_finite()) {
        return Err(SimError::InvalidThreshold(log_threshold));
    }
    let l = *record.test_loglr.last().expect("non-empty series");
    Ok(if l >= log_threshold {
        Decision::DecidedB
    } else if l <= -log_threshold {
        Decision::DecidedBbar
    } else {
        Decision::Undecided
    })
}
