//! Parametric per-datum measure pairs `(q_b, q_bbar)` and their log-LR
//! increments.
//!
//! Increments are evaluated in closed form for every family; no density is
//! ever evaluated numerically.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::LogLR;

/// Default product-affinity threshold below which a tabulated schedule is
/// classified as resolving over its horizon.
pub const DEFAULT_SCHEDULE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("standard deviation must be positive and finite, got {0}")]
    InvalidStdev(f64),
    #[error("mean must be finite, got {0}")]
    InvalidMean(f64),
    #[error("Bernoulli probability must lie strictly inside (0, 1), got {0}")]
    InvalidProbability(f64),
    #[error("schedule columns must have equal, non-zero length (mean_b {mean_b}, mean_bbar {mean_bbar}, stdev {stdev})")]
    ScheduleShape {
        mean_b: usize,
        mean_bbar: usize,
        stdev: usize,
    },
    #[error("step {step} is outside the schedule (length {len}); steps are 1-based")]
    StepOutOfRange { step: usize, len: usize },
    #[error("datum {0} is outside the common support of the pair")]
    OutsideSupport(f64),
    #[error("schedule threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
}

/// The two hypotheses of a binary test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    B,
    Bbar,
}

impl Outcome {
    /// `+1` for `b`, `-1` for `bbar`: the sign of the log-LR drift.
    pub fn drift_sign(self) -> f64 {
        match self {
            Outcome::B => 1.0,
            Outcome::Bbar => -1.0,
        }
    }
}

/// A measure pair over per-datum values.
///
/// Gaussian families share one standard deviation between the hypotheses,
/// so the log-LR increment is affine in the datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MeasurePair {
    GaussianIid {
        mean_b: f64,
        mean_bbar: f64,
        stdev: f64,
    },
    BernoulliIid {
        prob_b: f64,
        prob_bbar: f64,
    },
    /// Per-step Gaussian parameters; entry `k` applies to datum `k + 1`.
    GaussianSchedule {
        mean_b: Vec<f64>,
        mean_bbar: Vec<f64>,
        stdev: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Regular,
    NonResolving,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestClass {
    pub kind: TestKind,
    /// Hellinger (Bhattacharyya) affinity of the per-step marginals. For
    /// schedules this is the geometric mean over the horizon.
    pub hellinger_affinity_per_step: f64,
    /// Product of the per-step affinities over the evaluated horizon.
    pub horizon_affinity: Option<f64>,
    /// True when the classification comes from a finite horizon rather than
    /// the i.i.d. dichotomy.
    pub horizon_limited: bool,
}

impl MeasurePair {
    pub fn gaussian_iid(mean_b: f64, mean_bbar: f64, stdev: f64) -> Result<Self, MeasureError> {
        let p = MeasurePair::GaussianIid {
            mean_b,
            mean_bbar,
            stdev,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn bernoulli_iid(prob_b: f64, prob_bbar: f64) -> Result<Self, MeasureError> {
        let p = MeasurePair::BernoulliIid { prob_b, prob_bbar };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian_schedule(
        mean_b: Vec<f64>,
        mean_bbar: Vec<f64>,
        stdev: Vec<f64>,
    ) -> Result<Self, MeasureError> {
        let p = MeasurePair::GaussianSchedule {
            mean_b,
            mean_bbar,
            stdev,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        fn mean(m: f64) -> Result<(), MeasureError> {
            if m.is_finite() {
                Ok(())
            } else {
                Err(MeasureError::InvalidMean(m))
            }
        }
        fn sd(s: f64) -> Result<(), MeasureError> {
            if s > 0.0 && s.is_finite() {
                Ok(())
            } else {
                Err(MeasureError::InvalidStdev(s))
            }
        }
        match self {
            MeasurePair::GaussianIid {
                mean_b,
                mean_bbar,
                stdev,
            } => {
                mean(*mean_b)?;
                mean(*mean_bbar)?;
                sd(*stdev)
            }
            MeasurePair::BernoulliIid { prob_b, prob_bbar } => {
                for &p in [prob_b, prob_bbar] {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(MeasureError::InvalidProbability(p));
                    }
                }
                Ok(())
            }
            MeasurePair::GaussianSchedule {
                mean_b,
                mean_bbar,
                stdev,
            } => {
                if mean_b.is_empty() || mean_b.len() != mean_bbar.len() || mean_b.len() != stdev.len() {
                    return Err(MeasureError::ScheduleShape {
                        mean_b: mean_b.len(),
                        mean_bbar: mean_bbar.len(),
                        stdev: stdev.len(),
                    });
                }
                mean_b.iter().chain(mean_bbar).try_for_each(|&m| mean(m))?;
                stdev.iter().try_for_each(|&s| sd(s))
            }
        }
    }

    /// Number of steps the pair is defined for; `None` for i.i.d. families.
    pub fn schedule_len(&self) -> Option<usize> {
        match self {
            MeasurePair::GaussianSchedule { mean_b, .. } => Some(mean_b.len()),
            _ => None,
        }
    }

    /// Gaussian parameters `(mean_b, mean_bbar, stdev)` at a 1-based step.
    fn gaussian_at(&self, step: usize) -> Result<Option<(f64, f64, f64)>, MeasureError> {
        match self {
            MeasurePair::GaussianIid {
                mean_b,
                mean_bbar,
                stdev,
            } => Ok(Some((*mean_b, *mean_bbar, *stdev))),
            MeasurePair::BernoulliIid { .. } => Ok(None),
            MeasurePair::GaussianSchedule {
                mean_b,
                mean_bbar,
                stdev,
            } => {
                if step == 0 || step > mean_b.len() {
                    return Err(MeasureError::StepOutOfRange {
                        step,
                        len: mean_b.len(),
                    });
                }
                let k = step - 1;
                Ok(Some((mean_b[k], mean_bbar[k], stdev[k])))
            }
        }
    }

    /// Draws the datum at a 1-based step from the marginal of `outcome`.
    pub fn sample<R: Rng + ?Sized>(&self, step: usize, outcome: Outcome, rng: &mut R) -> Result<f64, MeasureError> {
        if let MeasurePair::BernoulliIid { prob_b, prob_bbar } = self {
            let p = match outcome {
                Outcome::B => *prob_b,
                Outcome::Bbar => *prob_bbar,
            };
            let u: f64 = rng.random();
            return Ok(if u < p { 1.0 } else { 0.0 });
        }
        let (mb, mbb, sd) = self.gaussian_at(step)?.expect("gaussian family");
        let z: f64 = rng.sample(StandardNormal);
        let m = match outcome {
            Outcome::B => mb,
            Outcome::Bbar => mbb,
        };
        Ok(m + sd * z)
    }

    /// Per-step Hellinger affinity `∫ sqrt(q_b q_bbar)` at a 1-based step.
    pub fn affinity_at(&self, step: usize) -> Result<f64, MeasureError> {
        if let MeasurePair::BernoulliIid { prob_b, prob_bbar } = self {
            if prob_b == prob_bbar {
                return Ok(1.0);
            }
            return Ok((prob_b * prob_bbar).sqrt() + ((1.0 - prob_b) * (1.0 - prob_bbar)).sqrt());
        }
        let (mb, mbb, sd) = self.gaussian_at(step)?.expect("gaussian family");
        let d = mb - mbb;
        Ok((-(d * d) / (8.0 * sd * sd)).exp())
    }
}

/// Log-LR increment `log q_b(datum) - log q_bbar(datum)` at a 1-based step.
pub fn loglr_increment(pair: &MeasurePair, step: usize, datum: f64) -> Result<f64, MeasureError> {
    if let MeasurePair::BernoulliIid { prob_b, prob_bbar } = pair {
        return if datum == 1.0 {
            Ok(prob_b.ln() - prob_bbar.ln())
        } else if datum == 0.0 {
            Ok((-prob_b).ln_1p() - (-prob_bbar).ln_1p())
        } else {
            Err(MeasureError::OutsideSupport(datum))
        };
    }
    if !datum.is_finite() {
        return Err(MeasureError::OutsideSupport(datum));
    }
    let (mb, mbb, sd) = pair.gaussian_at(step)?.expect("gaussian family");
    Ok((mb - mbb) / (sd * sd) * (datum - 0.5 * (mb + mbb)))
}

/// Cumulative log-LR series `l_0 = 0, ..., l_n` of `pair` along `data`.
pub fn loglr_path(pair: &MeasurePair, data: &[f64]) -> Result<Vec<f64>, MeasureError> {
    let increments = data
        .iter()
        .enumerate()
        .map(|(k, &x)| loglr_increment(pair, k + 1, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LogLR::accumulate(increments))
}

pub fn classify_pair(pair: &MeasurePair) -> TestClass {
    classify_pair_with_threshold(pair, DEFAULT_SCHEDULE_THRESHOLD).expect("default threshold is valid")
}

/// Kakutani classification of a pair.
///
/// For i.i.d. families the product measures are mutually singular unless the
/// marginals coincide, so a pair is `Regular` iff the per-step affinity is
/// below one. Schedules are classified on their finite horizon: `Regular`
/// when the product of per-step affinities falls below `threshold`.
pub fn classify_pair_with_threshold(pair: &MeasurePair, threshold: f64) -> Result<TestClass, MeasureError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(MeasureError::InvalidThreshold(threshold));
    }
    match pair.schedule_len() {
        None => {
            let identical = match pair {
                MeasurePair::GaussianIid { mean_b, mean_bbar, .. } => mean_b == mean_bbar,
                MeasurePair::BernoulliIid { prob_b, prob_bbar } => prob_b == prob_bbar,
                MeasurePair::GaussianSchedule { .. } => unreachable!(),
            };
            let affinity = if identical { 1.0 } else { pair.affinity_at(1)? };
            Ok(TestClass {
                kind: if identical {
                    TestKind::NonResolving
                } else {
                    TestKind::Regular
                },
                hellinger_affinity_per_step: affinity,
                horizon_affinity: None,
                horizon_limited: false,
            })
        }
        Some(len) => {
            let log_product = (1..=len)
                .map(|s| pair.affinity_at(s).map(f64::ln))
                .sum::<Result<f64, _>>()?;
            let product = log_product.exp();
            Ok(TestClass {
                kind: if product < threshold {
                    TestKind::Regular
                } else {
                    TestKind::NonResolving
                },
                hellinger_affinity_per_step: (log_product / len as f64).exp(),
                horizon_affinity: Some(product),
                horizon_limited: true,
            })
        }
    }
}

/// Running gap `l_B,n - l_A,n` between the log-LRs of two pairs on the same
/// data, starting from `0` at `n = 0`.
pub fn adjacency_gap(pair_a: &MeasurePair, pair_b: &MeasurePair, data: &[f64]) -> Result<Vec<f64>, MeasureError> {
    let la = loglr_path(pair_a, data)?;
    let lb = loglr_path(pair_b, data)?;
    Ok(lb.iter().zip(&la).map(|(b, a)| b - a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(mb: f64, mbb: f64, sd: f64) -> MeasurePair {
        MeasurePair::gaussian_iid(mb, mbb, sd).unwrap()
    }

    /// Log of the normal density, evaluated directly.
    fn log_normal_pdf(x: f64, m: f64, sd: f64) -> f64 {
        -0.5 * ((x - m) / sd).powi(2) - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    #[test]
    fn increment_examples() {
        assert_eq!(loglr_increment(&g(1.0, 0.0, 1.0), 1, 0.5).unwrap(), 0.0);
        assert_relative_eq!(loglr_increment(&g(1.0, 0.0, 1.0), 1, 1.5).unwrap(), 1.0);
        let bern = MeasurePair::bernoulli_iid(0.5, 0.25).unwrap();
        assert_relative_eq!(loglr_increment(&bern, 1, 1.0).unwrap(), std::f64::consts::LN_2, max_relative = 1e-15);
        assert_relative_eq!(loglr_increment(&bern, 1, 0.0).unwrap(), (0.5f64 / 0.75).ln(), max_relative = 1e-15);
    }

    #[test]
    fn gaussian_increment_matches_density_difference() {
        let pair = g(0.3, -1.1, 0.7);
        for x in [-3.0, -0.4, 0.0, 0.9, 2.5] {
            let direct = log_normal_pdf(x, 0.3, 0.7) - log_normal_pdf(x, -1.1, 0.7);
            assert_relative_eq!(loglr_increment(&pair, 1, x).unwrap(), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn bernoulli_rejects_off_support() {
        let bern = MeasurePair::bernoulli_iid(0.5, 0.25).unwrap();
        assert_eq!(loglr_increment(&bern, 1, 0.5), Err(MeasureError::OutsideSupport(0.5)));
    }

    #[test]
    fn construction_rejects_invalid_parameters() {
        assert!(MeasurePair::gaussian_iid(0.0, 1.0, 0.0).is_err());
        assert!(MeasurePair::gaussian_iid(f64::NAN, 1.0, 1.0).is_err());
        assert!(MeasurePair::bernoulli_iid(1.0, 0.5).is_err());
        assert!(MeasurePair::bernoulli_iid(0.5, 0.0).is_err());
        assert!(MeasurePair::gaussian_schedule(vec![1.0], vec![], vec![1.0]).is_err());
        assert!(MeasurePair::gaussian_schedule(vec![], vec![], vec![]).is_err());
        assert!(MeasurePair::gaussian_schedule(vec![1.0], vec![0.0], vec![-1.0]).is_err());
    }

    #[test]
    fn schedule_step_bounds() {
        let s = MeasurePair::gaussian_schedule(vec![1.0; 3], vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(loglr_increment(&s, 3, 0.0).is_ok());
        assert_eq!(
            loglr_increment(&s, 4, 0.0),
            Err(MeasureError::StepOutOfRange { step: 4, len: 3 })
        );
        assert!(loglr_increment(&s, 0, 0.0).is_err());
    }

    #[test]
    fn classification_examples() {
        let c = classify_pair(&g(1.0, 0.0, 1.0));
        assert_eq!(c.kind, TestKind::Regular);
        assert_relative_eq!(c.hellinger_affinity_per_step, 0.882_496_902_584_595, epsilon = 1e-12);
        let c = classify_pair(&g(0.0, 0.0, 1.0));
        assert_eq!((c.kind, c.hellinger_affinity_per_step), (TestKind::NonResolving, 1.0));
        let c = classify_pair(&MeasurePair::bernoulli_iid(0.3, 0.3).unwrap());
        assert_eq!((c.kind, c.hellinger_affinity_per_step), (TestKind::NonResolving, 1.0));
        let c = classify_pair(&MeasurePair::bernoulli_iid(0.3, 0.6).unwrap());
        assert_eq!(c.kind, TestKind::Regular);
        assert!(c.hellinger_affinity_per_step < 1.0 && c.hellinger_affinity_per_step > 0.0);
    }

    #[test]
    fn bernoulli_affinity_matches_direct_sum() {
        let (p, q) = (0.3f64, 0.6f64);
        let direct = (p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt();
        let c = classify_pair(&MeasurePair::bernoulli_iid(p, q).unwrap());
        assert_relative_eq!(c.hellinger_affinity_per_step, direct, epsilon = 1e-15);
    }

    #[test]
    fn schedule_classification_is_horizon_limited() {
        // Per-step affinity e^{-1/8}; 200 steps give e^{-25} < 1e-6.
        let n = 200;
        let s = MeasurePair::gaussian_schedule(vec![1.0; n], vec![0.0; n], vec![1.0; n]).unwrap();
        let c = classify_pair(&s);
        assert_eq!(c.kind, TestKind::Regular);
        assert!(c.horizon_limited);
        assert_relative_eq!(c.horizon_affinity.unwrap(), (-25.0f64).exp(), max_relative = 1e-10);
        // Ten steps only reach e^{-1.25}.
        let s = MeasurePair::gaussian_schedule(vec![1.0; 10], vec![0.0; 10], vec![1.0; 10]).unwrap();
        assert_eq!(classify_pair(&s).kind, TestKind::NonResolving);
        assert!(classify_pair_with_threshold(&s, 0.0).is_err());
    }

    #[test]
    fn adjacency_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = g(1.0, 0.0, 1.0);
        let data: Vec<f64> = (1..=50).map(|s| a.sample(s, Outcome::B, &mut rng).unwrap()).collect();

        let gap = adjacency_gap(&a, &a, &data).unwrap();
        assert!(gap.iter().all(|&x| x == 0.0));

        // Schedule differing from `a` only at step 1.
        let mut mb = vec![1.0; 50];
        mb[0] = 2.0;
        let s = MeasurePair::gaussian_schedule(mb, vec![0.0; 50], vec![1.0; 50]).unwrap();
        let gap = adjacency_gap(&a, &s, &data).unwrap();
        let expected = loglr_increment(&s, 1, data[0]).unwrap() - loglr_increment(&a, 1, data[0]).unwrap();
        for &x in &gap[1..] {
            assert!((x - expected).abs() < 1e-12);
        }

        // Doubled increments: the gap is the base log-LR itself.
        let doubled = g(1.5, -0.5, 1.0);
        let gap = adjacency_gap(&a, &doubled, &data).unwrap();
        let la = loglr_path(&a, &data).unwrap();
        for (x, l) in gap.iter().zip(&la) {
            assert!((x - l).abs() < 1e-10);
        }
    }

    #[test]
    fn expected_increment_sign_under_each_marginal() {
        let pair = g(0.5, -0.5, 1.0);
        let n = 100_000;
        for outcome in [Outcome::B, Outcome::Bbar] {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let inc: Vec<f64> = (0..n)
                .map(|_| loglr_increment(&pair, 1, pair.sample(1, outcome, &mut rng).unwrap()).unwrap())
                .collect();
            let mean = inc.iter().sum::<f64>() / n as f64;
            let var = inc.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!(outcome.drift_sign() * mean > 5.0 * se, "{outcome:?}: {mean} ± {se}");
        }
    }

    #[test]
    fn serde_uses_family_tag() {
        let p: MeasurePair =
            serde_json::from_str(r#"{"family":"gaussian_iid","mean_b":1.0,"mean_bbar":0.0,"stdev":1.0}"#).unwrap();
        assert_eq!(p, g(1.0, 0.0, 1.0));
    }

    proptest::proptest! {
        #[test]
        fn midpoint_is_neutral(mb in -5.0f64..5.0, mbb in -5.0f64..5.0, sd in 0.1f64..3.0) {
            let mid = 0.5 * (mb + mbb);
            proptest::prop_assert_eq!(loglr_increment(&g(mb, mbb, sd), 1, mid).unwrap(), 0.0);
        }

        #[test]
        fn affinity_in_unit_interval(mb in -5.0f64..5.0, d in proptest::prop_oneof![proptest::strategy::Just(0.0), 0.01f64..5.0], sd in 0.1f64..3.0) {
            let c = classify_pair(&g(mb, mb + d, sd));
            proptest::prop_assert!(c.hellinger_affinity_per_step > 0.0 && c.hellinger_affinity_per_step <= 1.0);
            proptest::prop_assert_eq!(c.hellinger_affinity_per_step == 1.0, c.kind == TestKind::NonResolving);
        }

        #[test]
        fn gap_identity(data in proptest::collection::vec(-4.0f64..4.0, 1..60), shift in -2.0f64..2.0) {
            let a = g(1.0, 0.0, 1.0);
            let b = g(1.2 + shift, -0.1, 1.3);
            let gap = adjacency_gap(&a, &b, &data).unwrap();
            let mut la = 0.0;
            let mut lb = 0.0;
            for (k, &x) in data.iter().enumerate() {
                la += (1.0 / 1.0) * (x - 0.5);
                lb += ((1.3 + shift) / 1.69) * (x - 0.5 * (1.1 + shift));
                proptest::prop_assert!((gap[k + 1] - (lb - la)).abs() < 1e-10);
            }
        }
    }
}
