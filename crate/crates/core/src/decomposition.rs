//! Decomposition of the agent's inferential error and the asset-pricing view
//! of it.
//!
//! `Err_n = p_n - π_n` splits into the bias `p̌_n - π_n`, caused only by the
//! agent's prior, and the diffusive part `p_n - p̌_n`, caused only by the
//! agent's measure pair. With `ρ = O[p_0]/O[π_0]` the bias has the closed
//! form
//!
//! ```text
//! p̌ - π = (ρ^½ - ρ^-½) σ(p̌) σ(π) = (ρ^½ - ρ^-½) σ(π)² / (ρ^½ π + ρ^-½ (1 - π))
//! ```
//!
//! and therefore the sign of `ρ - 1` at every step on every path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{belief_of, odds_of, sigma, Belief, BeliefError, Odds};
use crate::continuous::{drift_integral, Grid, Schedule, SdeError};
use crate::discrete::PathRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompositionError {
    #[error("rho must be positive and finite, got {0}")]
    InvalidRho(f64),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("time index {time} beyond horizon {horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("payoffs must be finite, got ({0}, {1})")]
    InvalidPayoff(f64, f64),
    #[error("discount must lie in (0, 1], got {0}")]
    InvalidDiscount(f64),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Sde(#[from] SdeError),
}

/// `ρ = O[p_0] / O[π_0]`.
pub fn rho_of(p0: Belief, pi0: Belief) -> f64 {
    odds_of(p0).value() / odds_of(pi0).value()
}

fn check_rho(rho: f64) -> Result<(), DecompositionError> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(DecompositionError::InvalidRho(rho))
    }
}

/// Bias `p̌ - π` from `π` and `ρ`, second closed form.
pub fn bias_term(pi: Belief, rho: f64) -> Result<f64, DecompositionError> {
    check_rho(rho)?;
    let (r, ir) = (rho.sqrt(), rho.sqrt().recip());
    let s = sigma(pi);
    Ok((r - ir) * s * s / (r * pi.value() + ir * pi.complement()))
}

/// Bias `p̌ - π` from `π` and `ρ`, first closed form `(ρ^½ - ρ^-½) σ(p̌) σ(π)`
/// with `O[p̌] = ρ O[π]`.
pub fn bias_term_product_form(pi: Belief, rho: f64) -> Result<f64, DecompositionError> {
    check_rho(rho)?;
    let p_check = belief_of(Odds::new(rho * odds_of(pi).value())?);
    Ok((rho.sqrt() - rho.sqrt().recip()) * sigma(p_check) * sigma(pi))
}

/// Largest possible `|bias|` for a given `ρ`: `|ρ^½ - ρ^-½| / 4`.
pub fn bias_bound(rho: f64) -> f64 {
    (rho.sqrt() - rho.sqrt().recip()).abs() * 0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    pub path_index: usize,
    pub rho: f64,
    pub bias: Vec<f64>,
    pub diffusive: Vec<f64>,
    pub total: Vec<f64>,
    /// Sign of `ρ - 1`.
    pub bias_sign: i8,
    /// `max_n |bias_n - bias_term(π_n, ρ)|`.
    pub closed_form_residual: f64,
}

pub fn decompose(record: &PathRecord) -> ErrorDecomposition {
    let rho = rho_of(record.true_prior, record.agent_prior);
    let closed_form_residual = record
        .pi
        .iter()
        .zip(&record.bias)
        .map(|(&pi, &b)| {
            let pi = Belief::new(pi).expect("record beliefs are interior");
            (b - bias_term(pi, rho).expect("rho from valid priors")).abs()
        })
        .fold(0.0, f64::max);
    ErrorDecomposition {
        path_index: record.path_index,
        rho,
        bias: record.bias.clone(),
        diffusive: record.diffusive.clone(),
        total: record.err.clone(),
        bias_sign: sign(rho - 1.0),
        closed_form_residual,
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Signal-to-noise schedules used to report the drift integral next to the
/// empirical diffusive error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReference {
    pub sigma_true: Schedule,
    pub sigma_agent: Schedule,
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignRow {
    pub time_index: usize,
    /// Fraction of paths with `diffusive > 0`; exact zeros count one half.
    pub positive_fraction: f64,
    pub mean_diffusive: f64,
    pub mean_bias: f64,
    pub drift_integral: Option<f64>,
    /// Fraction of paths where bias and diffusive error are both nonzero and
    /// of opposite sign, so that they offset each other.
    pub mitigation_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignStatistics {
    pub paths: usize,
    pub rows: Vec<SignRow>,
}

pub fn sign_statistics(
    ensemble: &[ErrorDecomposition],
    times: &[usize],
    drift: Option<&DriftReference>,
) -> Result<SignStatistics, DecompositionError> {
    if ensemble.is_empty() {
        return Err(DecompositionError::EmptyEnsemble);
    }
    let horizon = ensemble.iter().map(|d| d.diffusive.len() - 1).min().unwrap();
    let n = ensemble.len() as f64;
    let rows = times
        .iter()
        .map(|&t| {
            if t > horizon {
                return Err(DecompositionError::TimeOutOfRange { time: t, horizon });
            }
            let mut positive = 0.0;
            let mut mitigating = 0usize;
            let (mut sum_d, mut sum_b) = (0.0, 0.0);
            for d in ensemble {
                let (b, x) = (d.bias[t], d.diffusive[t]);
                positive += match sign(x) {
                    1 => 1.0,
                    0 => 0.5,
                    _ => 0.0,
                };
                if sign(b) * sign(x) < 0 {
                    mitigating += 1;
                }
                sum_d += x;
                sum_b += b;
            }
            let drift_integral = drift
                .map(|r| drift_integral(&r.sigma_true, &r.sigma_agent, &r.grid, r.grid.time(t)))
                .transpose()?;
            Ok(SignRow {
                time_index: t,
                positive_fraction: positive / n,
                mean_diffusive: sum_d / n,
                mean_bias: sum_b / n,
                drift_integral,
                mitigation_fraction: mitigating as f64 / n,
            })
        })
        .collect::<Result<Vec<_>, DecompositionError>>()?;
    Ok(SignStatistics {
        paths: ensemble.len(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetScenario {
    pub path_index: usize,
    pub payoff_b: f64,
    pub payoff_bbar: f64,
    pub discount: f64,
    /// Belief-discounted price `u·v(π_n)`.
    pub x: Vec<f64>,
    /// Realised expected worth `v(p_n)`.
    pub y: Vec<f64>,
    /// Realised risk premium `Y_n - X_n`.
    pub z: Vec<f64>,
}

fn worth(q: f64, payoff_b: f64, payoff_bbar: f64) -> f64 {
    q * payoff_b + (1.0 - q) * payoff_bbar
}

/// Prices a claim paying `payoff_b` under `b` and `payoff_bbar` under `bbar`.
///
/// `Z_n` is evaluated as `(1 - u) v(π_n) + (S_b - S_bbar) Err_n`, which equals
/// `Y_n - X_n` and inherits the saturation-safe error series.
pub fn asset_scenario(
    record: &PathRecord,
    payoff_b: f64,
    payoff_bbar: f64,
    discount: f64,
) -> Result<AssetScenario, DecompositionError> {
    if !(payoff_b.is_finite() && payoff_bbar.is_finite()) {
        return Err(DecompositionError::InvalidPayoff(payoff_b, payoff_bbar));
    }
    if !(discount > 0.0 && discount <= 1.0) {
        return Err(DecompositionError::InvalidDiscount(discount));
    }
    let y = record.p.iter().map(|&q| worth(q, payoff_b, payoff_bbar)).collect();
    let x = record.pi.iter().map(|&q| discount * worth(q, payoff_b, payoff_bbar)).collect();
    let spread = payoff_b - payoff_bbar;
    let z = record
        .pi
        .iter()
        .zip(&record.err)
        .map(|(&q, &e)| (1.0 - discount) * worth(q, payoff_b, payoff_bbar) + spread * e)
        .collect();
    Ok(AssetScenario {
        path_index: record.path_index,
        payoff_b,
        payoff_bbar,
        discount,
        x,
        y,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{simulate_paths, OutcomeMode, ScenarioSpec};
    use crate::measures::{MeasurePair, Outcome};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn b(x: f64) -> Belief {
        Belief::new(x).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_relative_eq!(rho_of(b(0.2), b(0.1)), 2.25, epsilon = 1e-14);
        assert_eq!(rho_of(b(0.37), b(0.37)), 1.0);
        assert_relative_eq!(rho_of(b(0.1), b(0.2)), 1.0 / 2.25, epsilon = 1e-14);
    }

    #[test]
    fn bias_term_examples() {
        assert_relative_eq!(bias_term(b(0.1), 2.25).unwrap(), 0.1, epsilon = 1e-15);
        let p_check = belief_of(Odds::new(2.25 / 9.0).unwrap()).value();
        assert_relative_eq!(p_check, 0.2, epsilon = 1e-15);
        assert_relative_eq!(bias_term_product_form(b(0.1), 2.25).unwrap(), 0.1, epsilon = 1e-15);
        // (1.5 - 2/3)·0.4·0.3
        assert_relative_eq!((1.5 - 2.0 / 3.0) * 0.4 * 0.3, 0.1, epsilon = 1e-15);
        for pi in [0.01, 0.3, 0.9] {
            assert_eq!(bias_term(b(pi), 1.0).unwrap(), 0.0);
        }
        assert!(bias_term(b(0.5), 0.0).is_err());
        assert!(bias_term(b(0.5), f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn closed_forms_agree_with_direct_difference(pi in 0.001f64..0.999, rho in 0.01f64..100.0) {
            let direct = belief_of(Odds::new(rho * odds_of(b(pi)).value()).unwrap()).value() - pi;
            let first = bias_term_product_form(b(pi), rho).unwrap();
            let second = bias_term(b(pi), rho).unwrap();
            prop_assert!((first - direct).abs() < 1e-12);
            prop_assert!((second - direct).abs() < 1e-12);
            prop_assert!(second.abs() <= bias_bound(rho) + 1e-15);
            if rho > 1.0 { prop_assert!(second > 0.0); }
            if rho < 1.0 { prop_assert!(second < 0.0); }
        }
    }

    fn ensemble(truth: MeasurePair, test: MeasurePair, p0: f64, pi0: f64) -> Vec<PathRecord> {
        simulate_paths(&ScenarioSpec {
            truth_pair: truth,
            test_pair: test,
            true_prior: b(p0),
            agent_prior: b(pi0),
            outcome_mode: OutcomeMode::DrawnFromPrior,
            horizon: 200,
            ensemble_size: 50,
            master_seed: 8,
        })
        .unwrap()
        .paths
    }

    fn g(mb: f64, mbb: f64) -> MeasurePair {
        MeasurePair::gaussian_iid(mb, mbb, 1.0).unwrap()
    }

    #[test]
    fn decompose_examples() {
        for rec in ensemble(g(1.0, 0.0), g(1.2, -0.1), 0.3, 0.3) {
            let d = decompose(&rec);
            assert_eq!(d.rho, 1.0);
            assert!(d.bias.iter().all(|&x| x == 0.0));
            assert_eq!(d.total, d.diffusive);
        }
        for rec in ensemble(g(0.5, -0.5), g(0.5, -0.5), 0.2, 0.1) {
            let d = decompose(&rec);
            assert!(d.diffusive.iter().all(|&x| x == 0.0));
            assert!(d.closed_form_residual < 1e-12);
            assert_eq!(d.bias_sign, 1);
            assert!(d.bias.iter().all(|&x| x > 0.0));
        }
        for rec in ensemble(g(1.0, 0.0), g(1.2, -0.1), 0.2, 0.1) {
            let d = decompose(&rec);
            for n in 0..d.total.len() {
                assert_eq!(d.total[n], d.bias[n] + d.diffusive[n]);
            }
            assert!(d.diffusive.iter().any(|&x| x != 0.0));
            assert!(d.bias.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn total_tracks_belief_difference_when_unsaturated() {
        for rec in ensemble(g(0.2, 0.0), g(0.25, -0.05), 0.4, 0.6) {
            for n in 0..rec.err.len() {
                if rec.p[n] < 0.999 && rec.pi[n] < 0.999 {
                    assert!((rec.err[n] - (rec.p[n] - rec.pi[n])).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sign_statistics_tie_rule_and_errors() {
        let ds: Vec<ErrorDecomposition> = ensemble(g(0.5, -0.5), g(0.5, -0.5), 0.2, 0.1).iter().map(decompose).collect();
        let s = sign_statistics(&ds, &[0, 10, 200], None).unwrap();
        for row in &s.rows {
            assert_eq!(row.positive_fraction, 0.5);
            assert_eq!(row.mean_diffusive, 0.0);
            assert_eq!(row.mitigation_fraction, 0.0);
            assert!(row.drift_integral.is_none());
        }
        assert!(matches!(sign_statistics(&ds, &[201], None), Err(DecompositionError::TimeOutOfRange { .. })));
        assert_eq!(sign_statistics(&[], &[0], None), Err(DecompositionError::EmptyEnsemble));
    }

    #[test]
    fn asset_examples() {
        let recs = ensemble(g(0.5, -0.5), g(0.5, -0.5), 0.3, 0.3);
        let a = asset_scenario(&recs[0], 100.0, 50.0, 1.0).unwrap();
        assert!(a.z.iter().all(|&z| z == 0.0));

        let recs = ensemble(g(1.0, 0.0), g(1.2, -0.1), 0.2, 0.1);
        for rec in &recs {
            let a = asset_scenario(rec, 1.0, 0.0, 1.0).unwrap();
            assert_eq!(a.z, rec.err);
            let a = asset_scenario(rec, 100.0, 50.0, 0.95).unwrap();
            for n in 0..a.z.len() {
                assert!((a.z[n] - (a.y[n] - a.x[n])).abs() < 1e-12 * a.y[n].abs().max(1.0));
            }
        }

        // Hand-built record with π = 0.1, p = 0.2.
        let mut rec = recs[0].clone();
        rec.pi = vec![0.1];
        rec.p = vec![0.2];
        rec.err = vec![0.1];
        let a = asset_scenario(&rec, 100.0, 50.0, 0.95).unwrap();
        assert_relative_eq!(a.y[0], 60.0, epsilon = 1e-12);
        assert_relative_eq!(a.x[0], 52.25, epsilon = 1e-12);
        assert_relative_eq!(a.z[0], 7.75, epsilon = 1e-12);

        assert!(asset_scenario(&rec, 1.0, 0.0, 0.0).is_err());
        assert!(asset_scenario(&rec, 1.0, 0.0, 1.5).is_err());
        assert!(asset_scenario(&rec, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn continuous_sign_statistics_with_drift_reference() {
        use crate::continuous::{FilterScenario, FilterSpec};
        let sc = FilterScenario {
            filter: FilterSpec {
                true_drift: 0.5,
                agent_drift: 0.4,
                obs_noise: 1.0,
                agent_obs_noise: 1.0,
            },
            grid: Grid::new(0.01, 400).unwrap(),
            outcome_mode: OutcomeMode::Fixed(Outcome::B),
            true_prior: b(0.5),
            agent_prior: b(0.5),
            ensemble_size: 4000,
            master_seed: 12,
        };
        let ds: Vec<ErrorDecomposition> = sc.simulate().unwrap().iter().map(decompose).collect();
        let reference = DriftReference {
            sigma_true: Schedule::Constant(sc.filter.true_signal_to_noise()),
            sigma_agent: Schedule::Constant(sc.filter.agent_signal_to_noise()),
            grid: sc.grid,
        };
        let s = sign_statistics(&ds, &[100, 400], Some(&reference)).unwrap();
        assert_relative_eq!(s.rows[1].drift_integral.unwrap(), 0.36 * 4.0, epsilon = 1e-12);
        assert!(s.rows[0].mean_diffusive > 0.0);
        assert!(s.rows[1].positive_fraction > s.rows[0].positive_fraction);
        assert!(s.rows[0].positive_fraction > 0.5);
    }
}
