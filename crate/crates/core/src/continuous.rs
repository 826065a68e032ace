//! Continuous-time log-LR processes on a uniform grid.
//!
//! A regular test with signal-to-noise `σ` has log-LR
//! `dl = ±σ²/2 dt + σ dw`, the sign given by the realised outcome. A clock
//! change `τ(t)` turns this into a time-varying signal-to-noise; the
//! compactifying clock `τ(t) = t / (T - t)` sends `τ(T⁻) = ∞`, so the test
//! resolves at the finite time `T`.
//!
//! The misspecified filter observes `dξ = ±θ dt + σ_obs dW` and forms both
//! the true log-LR `(2θ/σ_obs²) ξ` and the agent's `(2θ̂/σ̂_obs²) ξ` from the
//! same observed path.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{Belief, LogLR};
use crate::discrete::{OutcomeMode, PathRecord};
use crate::measures::Outcome;
use crate::rng::path_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("grid step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("grid must have at least one step")]
    EmptyGrid,
    #[error("signal-to-noise must be positive and finite, got {value} at grid point {index}")]
    InvalidSchedule { index: usize, value: f64 },
    #[error("tabulated schedule has {len} grid points, grid needs {needed}")]
    ScheduleLength { len: usize, needed: usize },
    #[error("grid ends at t = {end}, which reaches the resolution time {resolution_time}")]
    PastResolution { end: f64, resolution_time: f64 },
    #[error("resolution time must be positive and finite, got {0}")]
    InvalidResolutionTime(f64),
    #[error("t = {t} is not a grid point within [0, {end}] (step {step})")]
    GridMismatch { t: f64, step: f64, end: f64 },
    #[error("observation noise must be positive and finite, got {0}")]
    InvalidNoise(f64),
    #[error("drift must be finite, got {0}")]
    InvalidDrift(f64),
    #[error("ensemble size must be at least 1")]
    EmptyEnsemble,
}

/// Uniform time grid `t_k = k·step`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub step: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(step: f64, steps: usize) -> Result<Self, SdeError> {
        let g = Grid { step, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SdeError::InvalidStep(self.step));
        }
        if self.steps == 0 {
            return Err(SdeError::EmptyGrid);
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.time(self.steps)
    }

    /// Index of the grid point at time `t`.
    pub fn index_of(&self, t: f64) -> Result<usize, SdeError> {
        let mismatch = SdeError::GridMismatch {
            t,
            step: self.step,
            end: self.end(),
        };
        if !(t >= 0.0) {
            return Err(mismatch);
        }
        let k = (t / self.step).round();
        if k > self.steps as f64 || (k * self.step - t).abs() > 1e-9 * self.step.max(t) {
            return Err(mismatch);
        }
        Ok(k as usize)
    }
}

/// Signal-to-noise schedule, either constant or tabulated at the grid points
/// `t_0..=t_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Constant(f64),
    Tabulated(Vec<f64>),
}

impl Schedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Schedule::Constant(s) => *s,
            Schedule::Tabulated(v) => v[k],
        }
    }

    /// Checks positivity and that a tabulated schedule covers every grid point.
    pub fn validate(&self, grid: &Grid) -> Result<(), SdeError> {
        let check = |index: usize, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(SdeError::InvalidSchedule { index, value })
            }
        };
        match self {
            Schedule::Constant(s) => check(0, *s),
            Schedule::Tabulated(v) => {
                if v.len() != grid.steps + 1 {
                    return Err(SdeError::ScheduleLength {
                        len: v.len(),
                        needed: grid.steps + 1,
                    });
                }
                v.iter().enumerate().try_for_each(|(i, &s)| check(i, s))
            }
        }
    }

    /// Tabulates `f` at the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Schedule::Tabulated((0..=grid.steps).map(|k| f(grid.time(k))).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clock {
    Identity,
    /// `τ(t) = t / (T - t)` with `T = resolution_time`.
    Compactify { resolution_time: f64 },
}

impl Clock {
    pub fn tau(&self, t: f64) -> f64 {
        match self {
            Clock::Identity => t,
            Clock::Compactify { resolution_time } => t / (resolution_time - t),
        }
    }

    /// Clock-time elapsed over grid cell `k`.
    fn cell(&self, grid: &Grid, k: usize) -> f64 {
        match self {
            Clock::Identity => grid.step,
            Clock::Compactify { .. } => self.tau(grid.time(k + 1)) - self.tau(grid.time(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeSpec {
    /// Base signal-to-noise `σ_l` on the grid.
    pub signal_to_noise: Schedule,
    pub clock: Clock,
    pub grid: Grid,
    pub outcome: Outcome,
    pub master_seed: u64,
}

impl SdeSpec {
    pub fn validate(&self) -> Result<(), SdeError> {
        self.grid.validate()?;
        self.signal_to_noise.validate(&self.grid)?;
        if let Clock::Compactify { resolution_time } = self.clock {
            if !(resolution_time > 0.0 && resolution_time.is_finite()) {
                return Err(SdeError::InvalidResolutionTime(resolution_time));
            }
            if self.grid.end() >= resolution_time {
                return Err(SdeError::PastResolution {
                    end: self.grid.end(),
                    resolution_time,
                });
            }
        }
        Ok(())
    }

    /// Log-LR variance accumulated over grid cell `k`: `σ_k² (τ(t_{k+1}) - τ(t_k))`.
    ///
    /// Under the identity clock this is the Euler–Maruyama `σ_k² Δt`; under a
    /// clock change it uses the exact clock increment over the cell, i.e. the
    /// cell average of `σ² τ'`.
    pub fn cell_variance(&self, k: usize) -> f64 {
        let s = self.signal_to_noise.at(k);
        s * s * self.clock.cell(&self.grid, k)
    }
}

/// Euler–Maruyama path of `l` driven by the given standard normal draws,
/// one per grid cell.
pub fn loglr_from_normals(spec: &SdeSpec, normals: &[f64]) -> Vec<f64> {
    debug_assert_eq!(normals.len(), spec.grid.steps);
    let sign = spec.outcome.drift_sign();
    LogLR::accumulate(normals.iter().enumerate().map(|(k, z)| {
        let v = spec.cell_variance(k);
        sign * 0.5 * v + v.sqrt() * z
    }))
}

fn normals<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Log-LR path `l_{t_0..t_N}` for path index `path_index`.
pub fn simulate_loglr_path(spec: &SdeSpec, path_index: usize) -> Result<Vec<f64>, SdeError> {
    spec.validate()?;
    let mut rng = path_rng(spec.master_seed, path_index as u64);
    Ok(loglr_from_normals(spec, &normals(&mut rng, spec.grid.steps)))
}

/// The first path (index 0) of the spec's ensemble.
pub fn simulate_loglr_sde(spec: &SdeSpec) -> Result<Vec<f64>, SdeError> {
    simulate_loglr_path(spec, 0)
}

/// `paths` log-LR paths in path-index order.
pub fn simulate_loglr_ensemble(spec: &SdeSpec, paths: usize) -> Result<Vec<Vec<f64>>, SdeError> {
    spec.validate()?;
    if paths == 0 {
        return Err(SdeError::EmptyEnsemble);
    }
    (0..paths).into_par_iter().map(|i| simulate_loglr_path(spec, i)).collect()
}

/// Drifted-Brownian observation model and the agent's version of it.
/// Drift is `+θ` under `b` and `-θ` under `bbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub true_drift: f64,
    pub agent_drift: f64,
    pub obs_noise: f64,
    pub agent_obs_noise: f64,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<(), SdeError> {
        for d in [self.true_drift, self.agent_drift] {
            if !d.is_finite() {
                return Err(SdeError::InvalidDrift(d));
            }
        }
        for s in [self.obs_noise, self.agent_obs_noise] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(SdeError::InvalidNoise(s));
            }
        }
        Ok(())
    }

    /// Log-LR per unit observation under the true model, `2θ/σ_obs²`.
    pub fn true_gain(&self) -> f64 {
        2.0 * self.true_drift / (self.obs_noise * self.obs_noise)
    }

    pub fn agent_gain(&self) -> f64 {
        2.0 * self.agent_drift / (self.agent_obs_noise * self.agent_obs_noise)
    }

    /// `σ^𝐥 = 2|θ|/σ_obs`.
    pub fn true_signal_to_noise(&self) -> f64 {
        2.0 * self.true_drift.abs() / self.obs_noise
    }

    /// `σ^l = 2|θ̂|/σ̂_obs`.
    pub fn agent_signal_to_noise(&self) -> f64 {
        2.0 * self.agent_drift.abs() / self.agent_obs_noise
    }

    /// `E[𝐥_t - l_t]` under `outcome`:
    /// `±(σ^𝐥² - σ^𝐥 σ^l σ_obs/σ̂_obs) t / 2`.
    pub fn expected_gap(&self, outcome: Outcome, t: f64) -> f64 {
        outcome.drift_sign() * (self.true_gain() - self.agent_gain()) * self.true_drift * t
    }
}

/// The observation increments together with the true and agent log-LRs they
/// induce, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPath {
    pub observations: Vec<f64>,
    pub true_loglr: Vec<f64>,
    pub agent_loglr: Vec<f64>,
}

pub fn filter_from_normals(filter: &FilterSpec, grid: &Grid, outcome: Outcome, normals: &[f64]) -> FilterPath {
    let drift = outcome.drift_sign() * filter.true_drift * grid.step;
    let scale = filter.obs_noise * grid.step.sqrt();
    let observations: Vec<f64> = normals.iter().map(|z| drift + scale * z).collect();
    let (gt, ga) = (filter.true_gain(), filter.agent_gain());
    FilterPath {
        true_loglr: LogLR::accumulate(observations.iter().map(|x| gt * x)),
        agent_loglr: LogLR::accumulate(observations.iter().map(|x| ga * x)),
        observations,
    }
}

/// True and agent log-LR paths on one shared observation path.
pub fn misspecified_filter(
    filter: &FilterSpec,
    grid: &Grid,
    outcome: Outcome,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), SdeError> {
    let p = misspecified_filter_path(filter, grid, outcome, seed, 0)?;
    Ok((p.true_loglr, p.agent_loglr))
}

pub fn misspecified_filter_path(
    filter: &FilterSpec,
    grid: &Grid,
    outcome: Outcome,
    master_seed: u64,
    path_index: usize,
) -> Result<FilterPath, SdeError> {
    filter.validate()?;
    grid.validate()?;
    let mut rng = path_rng(master_seed, path_index as u64);
    Ok(filter_from_normals(filter, grid, outcome, &normals(&mut rng, grid.steps)))
}

/// An ensemble of misspecified-filter paths turned into belief records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterScenario {
    pub filter: FilterSpec,
    pub grid: Grid,
    pub outcome_mode: OutcomeMode,
    pub true_prior: Belief,
    pub agent_prior: Belief,
    pub ensemble_size: usize,
    pub master_seed: u64,
}

impl FilterScenario {
    pub fn validate(&self) -> Result<(), SdeError> {
        self.filter.validate()?;
        self.grid.validate()?;
        if self.ensemble_size == 0 {
            return Err(SdeError::EmptyEnsemble);
        }
        Ok(())
    }

    pub fn path(&self, path_index: usize) -> PathRecord {
        let mut rng = path_rng(self.master_seed, path_index as u64);
        let outcome = match self.outcome_mode {
            OutcomeMode::Fixed(o) => o,
            OutcomeMode::DrawnFromPrior => {
                let u: f64 = rng.random();
                if u < self.true_prior.value() {
                    Outcome::B
                } else {
                    Outcome::Bbar
                }
            }
        };
        let fp = filter_from_normals(&self.filter, &self.grid, outcome, &normals(&mut rng, self.grid.steps));
        PathRecord::from_loglr(
            path_index,
            outcome,
            self.true_prior,
            self.agent_prior,
            Some(self.grid.step),
            fp.observations,
            fp.true_loglr,
            fp.agent_loglr,
        )
    }

    /// All paths in index order.
    pub fn simulate(&self) -> Result<Vec<PathRecord>, SdeError> {
        self.validate()?;
        Ok((0..self.ensemble_size).into_par_iter().map(|i| self.path(i)).collect())
    }
}

/// Log-LR paths of a plain SDE ensemble wrapped as belief records; the true
/// and test log-LR coincide.
pub fn sde_path_records(
    spec: &SdeSpec,
    true_prior: Belief,
    agent_prior: Belief,
    paths: usize,
) -> Result<Vec<PathRecord>, SdeError> {
    let ls = simulate_loglr_ensemble(spec, paths)?;
    Ok(ls
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let data = l.windows(2).map(|w| w[1] - w[0]).collect();
            PathRecord::from_loglr(i, spec.outcome, true_prior, agent_prior, Some(spec.grid.step), data, l.clone(), l)
        })
        .collect())
}

/// `∫₀ᵗ (σ_true(s)² - σ_agent(s)²) ds` by the trapezoidal rule on the grid.
pub fn drift_integral(sigma_true: &Schedule, sigma_agent: &Schedule, grid: &Grid, t: f64) -> Result<f64, SdeError> {
    grid.validate()?;
    sigma_true.validate(grid)?;
    sigma_agent.validate(grid)?;
    let m = grid.index_of(t)?;
    let f = |k: usize| {
        let (a, b) = (sigma_true.at(k), sigma_agent.at(k));
        a * a - b * b
    };
    if m == 0 {
        return Ok(0.0);
    }
    let interior: f64 = (1..m).map(f).sum();
    Ok(grid.step * (0.5 * (f(0) + f(m)) + interior))
}
