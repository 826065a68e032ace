//! Empirical checks of informational redundancy between two belief
//! processes driven by the same data.
//!
//! `π̂` is redundant to `π` when it is a continuous, time-homogeneous function
//! of `π` whose log-LR stays adjacent (boundedly close) to that of `π`. On
//! regular tests the only such maps are constant prior-odds factors,
//! `O[π̂] = c·O[π]`. The report checks the three ingredients separately:
//!
//! * adjacency, via the trend of `max |l̂_n - l_n|` over the horizon;
//! * homogeneity, via monotone state-map fits `π ↦ π̂` at several times,
//!   compared on their common support;
//! * linearity, via a power-law fit `O[π̂] = c·O[π]^γ` in log-odds.
//!
//! All fits work in log-odds so that saturated beliefs keep their
//! information.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{logistic, Belief};
use crate::discrete::{Ensemble, PathRecord};
use crate::isotonic::IsotonicFit;
use crate::measures::{adjacency_gap, MeasureError, MeasurePair};

pub const MIN_STATE_SAMPLES: usize = 30;
pub const MIN_STATE_SPAN: f64 = 0.1;
pub const MIN_POWER_PAIRS: usize = 30;
pub const MIN_ENSEMBLE_PATHS: usize = 100;
pub const MIN_ENSEMBLE_TIMES: usize = 100;
/// Number of times at which state maps are fitted.
pub const FITTED_TIMES: usize = 50;
const HOMOGENEITY_GRID: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RedundancyError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("belief range {span:.4} is narrower than the required {needed}")]
    InsufficientSpan { span: f64, needed: f64 },
    #[error("odds span {decades:.3} decades is below the required 1 decade")]
    DegenerateSpan { decades: f64 },
    #[error("non-finite sample ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("ensembles are not coupled: {0}")]
    Coupling(String),
    #[error("ensemble too small: {paths} paths × {times} times, need ≥ {min_paths} × {min_times}")]
    EnsembleTooSmall {
        paths: usize,
        times: usize,
        min_paths: usize,
        min_times: usize,
    },
    #[error("fewer than two times admit a state-map fit")]
    NoComparableTimes,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Which of a record's three belief processes to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefSeries {
    /// `p`: truth pair, true prior.
    Objective,
    /// `p_check`: test pair, true prior.
    WouldBe,
    /// `pi`: test pair, agent prior.
    Agent,
}

impl BeliefSeries {
    pub fn log_odds(self, rec: &PathRecord, n: usize) -> f64 {
        match self {
            BeliefSeries::Objective => rec.log_odds_p(n),
            BeliefSeries::WouldBe => rec.log_odds_p_check(n),
            BeliefSeries::Agent => rec.log_odds_pi(n),
        }
    }

    pub fn values(self, rec: &PathRecord) -> &[f64] {
        match self {
            BeliefSeries::Objective => &rec.p,
            BeliefSeries::WouldBe => &rec.p_check,
            BeliefSeries::Agent => &rec.pi,
        }
    }

    /// The measure pair whose log-LR drives this series.
    pub fn pair(self, ensemble: &Ensemble) -> &MeasurePair {
        match self {
            BeliefSeries::Objective => &ensemble.spec.truth_pair,
            BeliefSeries::WouldBe | BeliefSeries::Agent => &ensemble.spec.test_pair,
        }
    }
}

/// One `(π, π̂)` observation at a fixed time, in log-odds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub x: f64,
    pub y: f64,
}

impl StateSample {
    pub fn from_beliefs(pi: Belief, pi_hat: Belief) -> Self {
        StateSample {
            x: pi.log_odds(),
            y: pi_hat.log_odds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateMapFit {
    pub map: IsotonicFit,
    /// Root-mean-square deviation of the samples from the fitted map, in log-odds.
    pub residual: f64,
    /// Range of `π` (belief units) covered by the samples.
    pub belief_range: (f64, f64),
    pub samples: usize,
}

/// Fits a monotone map `π ↦ π̂` (in log-odds) to samples taken at one time.
pub fn fit_state_map(samples: &[StateSample]) -> Result<StateMapFit, RedundancyError> {
    if samples.len() < MIN_STATE_SAMPLES {
        return Err(RedundancyError::TooFewSamples {
            needed: MIN_STATE_SAMPLES,
            got: samples.len(),
        });
    }
    if let Some(s) = samples.iter().find(|s| !(s.x.is_finite() && s.y.is_finite())) {
        return Err(RedundancyError::NonFinite(s.x, s.y));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.x), hi.max(s.x)));
    let belief_range = (logistic(lo), logistic(hi));
    let span = belief_range.1 - belief_range.0;
    if span < MIN_STATE_SPAN {
        return Err(RedundancyError::InsufficientSpan {
            span,
            needed: MIN_STATE_SPAN,
        });
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.x, s.y)).collect();
    let map = IsotonicFit::fit(&pts);
    let sse: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let d = y - map.eval(x).expect("sample inside fitted range");
            d * d
        })
        .sum();
    Ok(StateMapFit {
        map,
        residual: (sse / pts.len() as f64).sqrt(),
        belief_range,
        samples: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub c: f64,
    /// RMS residual of the line fit in log-odds.
    pub residual: f64,
}

/// Least-squares line `log Ô = γ log O + log c` through `(log O, log Ô)` pairs.
pub fn fit_power_law(log_odds_pairs: &[(f64, f64)]) -> Result<PowerLawFit, RedundancyError> {
    let n = log_odds_pairs.len();
    if n < MIN_POWER_PAIRS {
        return Err(RedundancyError::TooFewSamples {
            needed: MIN_POWER_PAIRS,
            got: n,
        });
    }
    if let Some(&(x, y)) = log_odds_pairs.iter().find(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(RedundancyError::NonFinite(x, y));
    }
    let (lo, hi) = log_odds_pairs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if decades < 1.0 {
        return Err(RedundancyError::DegenerateSpan { decades });
    }
    let nf = n as f64;
    let mx = log_odds_pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = log_odds_pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (sxy, sxx) = log_odds_pairs.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    let gamma = sxy / sxx;
    let intercept = my - gamma * mx;
    let sse: f64 = log_odds_pairs
        .iter()
        .map(|&(x, y)| {
            let r = y - (gamma * x + intercept);
            r * r
        })
        .sum();
    Ok(PowerLawFit {
        gamma,
        c: intercept.exp(),
        residual: (sse / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Maximum `|γ - 1|`.
    pub gamma: f64,
    /// Maximum sup-norm distance (log-odds) between state maps at different times.
    pub homogeneity: f64,
    /// Late-to-early adjacency ratio at or above which the gap counts as growing.
    pub trend_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gamma: 0.02,
            homogeneity: 0.01,
            trend_ratio: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyTrend {
    Bounded,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedCondition {
    Adjacency,
    Homogeneity,
    Linearity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    RedundantLinear { c: f64 },
    NotRedundant { failed: Vec<FailedCondition> },
}

/// Fits at one analysed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeFit {
    pub time: usize,
    pub state_map_residual: f64,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub power_law_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyReport {
    pub series_a: BeliefSeries,
    pub series_b: BeliefSeries,
    /// Running sup over the horizon of `max_paths |l̂_n - l_n|`.
    pub adjacency_sup: f64,
    pub adjacency_early_sup: f64,
    pub adjacency_late_sup: f64,
    pub adjacency_ratio: f64,
    /// Finite-horizon proxy for a uniform bound: late-quarter sup against
    /// early-quarter sup.
    pub adjacency_trend: AdjacencyTrend,
    pub state_map_fits: Vec<TimeFit>,
    pub homogeneity_stat: f64,
    pub gamma: f64,
    pub c: f64,
    pub fit_residual: f64,
    pub tolerances: Tolerances,
    pub verdict: Verdict,
}

fn ensure_coupled(a: &Ensemble, b: &Ensemble) -> Result<(), RedundancyError> {
    if a.paths.len() != b.paths.len() {
        return Err(RedundancyError::Coupling(format!(
            "{} paths vs {} paths",
            a.paths.len(),
            b.paths.len()
        )));
    }
    for (pa, pb) in a.paths.iter().zip(&b.paths) {
        if pa.data != pb.data {
            return Err(RedundancyError::Coupling(format!("path {} has different data", pa.path_index)));
        }
    }
    Ok(())
}

/// Evenly spaced times in `1..=horizon`, at most `FITTED_TIMES` of them.
fn analysed_times(horizon: usize) -> Vec<usize> {
    let k = horizon.min(FITTED_TIMES);
    let mut ts: Vec<usize> = (1..=k).map(|j| (j * horizon).div_ceil(k)).collect();
    ts.dedup();
    ts
}

fn map_distance(f: &IsotonicFit, g: &IsotonicFit) -> Option<f64> {
    let (fl, fh) = f.range();
    let (gl, gh) = g.range();
    let (lo, hi) = (fl.max(gl), fh.min(gh));
    if !(lo <= hi) {
        return None;
    }
    let knots = f.knots().chain(g.knots()).map(|k| k.0).filter(|&x| x >= lo && x <= hi);
    let grid = (0..=HOMOGENEITY_GRID).map(|i| (lo + (hi - lo) * i as f64 / HOMOGENEITY_GRID as f64).clamp(lo, hi));
    grid.chain(knots)
        .map(|x| (f.eval(x).unwrap() - g.eval(x).unwrap()).abs())
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
}

/// Tests whether series `series_b` of ensemble `b` is informationally
/// redundant to series `series_a` of ensemble `a`. Both ensembles must be
/// simulated on the same data; pass the same ensemble twice to compare two
/// series of one ensemble.
pub fn redundancy_verdict(
    a: &Ensemble,
    series_a: BeliefSeries,
    b: &Ensemble,
    series_b: BeliefSeries,
    tol: &Tolerances,
) -> Result<RedundancyReport, RedundancyError> {
    ensure_coupled(a, b)?;
    let paths = a.paths.len();
    let horizon = a.paths.first().map_or(0, |p| p.horizon());
    if paths < MIN_ENSEMBLE_PATHS || horizon < MIN_ENSEMBLE_TIMES {
        return Err(RedundancyError::EnsembleTooSmall {
            paths,
            times: horizon,
            min_paths: MIN_ENSEMBLE_PATHS,
            min_times: MIN_ENSEMBLE_TIMES,
        });
    }

    // Adjacency.
    let (pair_a, pair_b) = (series_a.pair(a), series_b.pair(b));
    let mut max_gap = vec![0.0f64; horizon + 1];
    for rec in &a.paths {
        for (m, g) in max_gap.iter_mut().zip(adjacency_gap(pair_a, pair_b, &rec.data)?) {
            *m = m.max(g.abs());
        }
    }
    let quarter = (horizon / 4).max(1);
    let early = max_gap[1..=quarter].iter().copied().fold(0.0, f64::max);
    let late = max_gap[horizon + 1 - quarter..].iter().copied().fold(0.0, f64::max);
    let adjacency_sup = max_gap.iter().copied().fold(0.0, f64::max);
    let adjacency_ratio = if late == 0.0 {
        1.0
    } else if early == 0.0 {
        f64::INFINITY
    } else {
        late / early
    };
    let adjacency_trend = if adjacency_ratio >= tol.trend_ratio {
        AdjacencyTrend::Growing
    } else {
        AdjacencyTrend::Bounded
    };

    // Per-time state maps and power laws.
    let mut fits = Vec::new();
    let mut maps = Vec::new();
    let mut pooled = Vec::new();
    for n in analysed_times(horizon) {
        let samples: Vec<StateSample> = a
            .paths
            .iter()
            .zip(&b.paths)
            .map(|(ra, rb)| StateSample {
                x: series_a.log_odds(ra, n),
                y: series_b.log_odds(rb, n),
            })
            .collect();
        let Ok(fit) = fit_state_map(&samples) else {
            continue;
        };
        let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.x, s.y)).collect();
        let power = fit_power_law(&pairs).ok();
        pooled.extend_from_slice(&pairs);
        fits.push(TimeFit {
            time: n,
            state_map_residual: fit.residual,
            gamma: power.map(|p| p.gamma),
            c: power.map(|p| p.c),
            power_law_residual: power.map(|p| p.residual),
        });
        maps.push(fit.map);
    }
    if maps.len() < 2 {
        return Err(RedundancyError::NoComparableTimes);
    }
    let mut homogeneity_stat = 0.0f64;
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            if let Some(d) = map_distance(&maps[i], &maps[j]) {
                homogeneity_stat = homogeneity_stat.max(d);
            }
        }
    }
    let power = fit_power_law(&pooled)?;

    let mut failed = Vec::new();
    if adjacency_trend == AdjacencyTrend::Growing {
        failed.push(FailedCondition::Adjacency);
    }
    if !(homogeneity_stat < tol.homogeneity) {
        failed.push(FailedCondition::Homogeneity);
    }
    if !((power.gamma - 1.0).abs() < tol.gamma) {
        failed.push(FailedCondition::Linearity);
    }
    let verdict = if failed.is_empty() {
        Verdict::RedundantLinear { c: power.c }
    } else {
        Verdict::NotRedundant { failed }
    };
    Ok(RedundancyReport {
        series_a,
        series_b,
        adjacency_sup,
        adjacency_early_sup: early,
        adjacency_late_sup: late,
        adjacency_ratio,
        adjacency_trend,
        state_map_fits: fits,
        homogeneity_stat,
        gamma: power.gamma,
        c: power.c,
        fit_residual: power.residual,
        tolerances: *tol,
        verdict,
    })
}
