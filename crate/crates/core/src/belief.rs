//! Beliefs, odds and log-likelihood ratios for a binary outcome.
//!
//! A belief is the probability assigned to the `b` outcome. Odds-for `b` are
//! `belief / (1 - belief)` and Bayes' rule acts on them multiplicatively:
//! posterior odds are prior odds times the likelihood ratio of the data.
//! Chained updates are carried out additively on log-odds, and beliefs are
//! only materialised at reporting boundaries, since `|l_n|` grows linearly on
//! resolving tests and beliefs saturate in `f64` long before log-odds do.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    #[error("belief must lie strictly inside (0, 1), got {0}")]
    BeliefOutOfRange(f64),
    #[error("odds must be positive and finite, got {0}")]
    InvalidOdds(f64),
    #[error("likelihood ratio must be positive and finite, got {0}")]
    InvalidLikelihoodRatio(f64),
}

/// Largest `f64` strictly below one.
pub const BELIEF_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;
/// Smallest positive normal `f64`.
pub const BELIEF_FLOOR: f64 = f64::MIN_POSITIVE;

/// Probability of the `b` outcome, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Belief(f64);

impl Belief {
    pub fn new(value: f64) -> Result<Self, BeliefError> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(BeliefError::BeliefOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Belief with the given log-odds.
    ///
    /// Log-odds beyond roughly ±37 (upper side) or ±708 (lower side) are not
    /// representable as a probability distinct from 1 or 0; the result is
    /// clamped to the nearest representable interior value instead.
    pub fn from_log_odds(log_odds: f64) -> Self {
        Self(logistic(log_odds).clamp(BELIEF_FLOOR, BELIEF_CEIL))
    }

    /// Natural log of the odds-for `b`.
    pub fn log_odds(self) -> f64 {
        self.0.ln() - (-self.0).ln_1p()
    }

    /// Probability of the complementary outcome.
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Belief {
    type Error = BeliefError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Belief> for f64 {
    fn from(b: Belief) -> f64 {
        b.0
    }
}

/// Odds-for `b`, a positive finite real.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Odds(f64);

impl Odds {
    pub fn new(value: f64) -> Result<Self, BeliefError> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(BeliefError::InvalidOdds(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn ln(self) -> f64 {
        self.0.ln()
    }
}

impl TryFrom<f64> for Odds {
    type Error = BeliefError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Odds> for f64 {
    fn from(o: Odds) -> f64 {
        o.0
    }
}

/// Natural log of a likelihood ratio. `LogLR::default()` is the
/// no-evidence value `l_0 = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogLR(pub f64);

impl LogLR {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Accumulates increments into the cumulative series `l_0 = 0, l_1, ..., l_n`.
    pub fn accumulate<I: IntoIterator<Item = f64>>(increments: I) -> Vec<f64> {
        let iter = increments.into_iter();
        let mut out = Vec::with_capacity(iter.size_hint().0 + 1);
        let mut acc = 0.0;
        out.push(acc);
        for dl in iter {
            acc += dl;
            out.push(acc);
        }
        out
    }
}

pub fn odds_of(b: Belief) -> Odds {
    Odds(b.0 / (1.0 - b.0))
}

pub fn belief_of(o: Odds) -> Belief {
    Belief(o.0 / (1.0 + o.0))
}

/// Bayes' rule in odds form: posterior odds = prior odds × likelihood ratio.
pub fn bayes_update(prior: Odds, lr: f64) -> Result<Odds, BeliefError> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(BeliefError::InvalidLikelihoodRatio(lr));
    }
    Odds::new(prior.0 * lr)
}

/// `sqrt(b (1 - b))`, the geometric mean of a belief and its complement.
pub fn sigma(b: Belief) -> f64 {
    (b.0 * (1.0 - b.0)).sqrt()
}

/// Standard logistic function, accurate in both tails.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `logistic(x) - logistic(y)` without cancellation when both arguments sit
/// in the same tail.
///
/// Returns exactly zero when `x == y`, and keeps the sign of `x - y` as long
/// as the tail mass `exp(-min(|x|, |y|))` does not underflow.
pub fn belief_gap(x: f64, y: f64) -> f64 {
    if x >= 0.0 && y >= 0.0 {
        logistic(-y) - logistic(-x)
    } else {
        logistic(x) - logistic(y)
    }
}
