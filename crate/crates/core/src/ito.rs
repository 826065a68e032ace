//! Time-homogeneous redundancy maps between two log-LR diffusions.
//!
//! If `l̂ = g(l)` with both processes of the form `dl = ±σ²/2 dt + σ dw` on
//! shared noise, Ito's lemma forces
//! `g'' = -(-1)^{1{B=b}} (g' - 1) g'`. With `g(0) = 0` the solutions are
//! `g = -log(g'(0) e^{-x} + 1 - g'(0))` when `B = b` and
//! `g = log(g'(0) e^{x} + 1 - g'(0))` when `B = bbar`. Only `g'(0) = 1`
//! (the identity) lets `l̂` diverge along with `l`.

use thiserror::Error;

use crate::measures::Outcome;

pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ItoError {
    #[error("g'(0) must lie in (0, 1], got {0}")]
    SlopeOutOfRange(f64),
    #[error("integration range must be positive and finite, got {0}")]
    InvalidRange(f64),
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
}

/// Closed-form solution with `g(0) = 0` and `g'(0) = slope`.
pub fn closed_form(slope: f64, branch: Outcome, x: f64) -> f64 {
    match branch {
        Outcome::B => -(slope * (-x).exp() + 1.0 - slope).ln(),
        Outcome::Bbar => (slope * x.exp() + 1.0 - slope).ln(),
    }
}

fn second_derivative(branch: Outcome, gp: f64) -> f64 {
    // -(-1)^{1{B=b}}: +1 under b, -1 under bbar.
    branch.drift_sign() * (gp - 1.0) * gp
}

/// Classical RK4 on `(g, g')` from `0` to `x_max`. Returns `(x, g)` samples
/// at every step.
pub fn integrate(slope: f64, branch: Outcome, x_max: f64, step: f64) -> Vec<(f64, f64)> {
    let n = (x_max / step).ceil() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let (mut g, mut gp) = (0.0f64, slope);
    out.push((0.0, g));
    for k in 0..n {
        let x0 = k as f64 * step;
        let h = (x_max - x0).min(step);
        let f = |gp: f64| second_derivative(branch, gp);
        let (k1g, k1p) = (gp, f(gp));
        let (k2g, k2p) = (gp + 0.5 * h * k1p, f(gp + 0.5 * h * k1p));
        let (k3g, k3p) = (gp + 0.5 * h * k2p, f(gp + 0.5 * h * k2p));
        let (k4g, k4p) = (gp + h * k3p, f(gp + h * k3p));
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        gp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        out.push((x0 + h, g));
    }
    out
}

/// Sup deviation between the RK4 solution (step `1e-4`) and the closed form
/// on `[0, x_max]`.
pub fn ito_ode_check(slope: f64, branch: Outcome, x_max: f64) -> Result<f64, ItoError> {
    ito_ode_check_with_step(slope, branch, x_max, DEFAULT_STEP)
}

pub fn ito_ode_check_with_step(slope: f64, branch: Outcome, x_max: f64, step: f64) -> Result<f64, ItoError> {
    if !(slope > 0.0 && slope <= 1.0) {
        return Err(ItoError::SlopeOutOfRange(slope));
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(ItoError::InvalidRange(x_max));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(ItoError::InvalidStep(step));
    }
    Ok(integrate(slope, branch, x_max, step)
        .into_iter()
        .map(|(x, g)| (g - closed_form(slope, branch, x)).abs())
        .fold(0.0, f64::max))
}

/// `lim_{x→∞} g(x)` under `B = b`: `-log(1 - g'(0))`, finite unless `g'(0) = 1`.
pub fn asymptote_under_b(slope: f64) -> f64 {
    -(-slope).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_slope_is_identity() {
        assert!(ito_ode_check(1.0, Outcome::B, 5.0).unwrap() < 1e-8);
        for (x, g) in integrate(1.0, Outcome::B, 5.0, 1e-3) {
            assert!((g - x).abs() < 1e-12);
        }
        assert_relative_eq!(closed_form(1.0, Outcome::Bbar, 3.0), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn half_slope_saturates_at_log_two() {
        assert!(ito_ode_check(0.5, Outcome::B, 5.0).unwrap() < 1e-6);
        assert_relative_eq!(asymptote_under_b(0.5), std::f64::consts::LN_2, epsilon = 1e-15);
        assert!(closed_form(0.5, Outcome::B, 40.0) - std::f64::consts::LN_2 < 1e-15);
    }

    #[test]
    fn quarter_slope_bbar() {
        assert!(ito_ode_check(0.25, Outcome::Bbar, 5.0).unwrap() < 1e-6);
    }

    #[test]
    fn closed_form_solves_ode_by_finite_differences() {
        let h = 1e-4;
        for branch in [Outcome::B, Outcome::Bbar] {
            for slope in [0.25, 0.5, 0.75] {
                for x in [0.3, 1.0, 2.5] {
                    let g = |x: f64| closed_form(slope, branch, x);
                    let d1 = (g(x + h) - g(x - h)) / (2.0 * h);
                    let d2 = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
                    assert!((d2 - second_derivative(branch, d1)).abs() < 1e-6);
                }
                assert_eq!(closed_form(slope, branch, 0.0), 0.0);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert_eq!(ito_ode_check(0.0, Outcome::B, 5.0), Err(ItoError::SlopeOutOfRange(0.0)));
        assert_eq!(ito_ode_check(1.5, Outcome::B, 5.0), Err(ItoError::SlopeOutOfRange(1.5)));
        assert_eq!(ito_ode_check(0.5, Outcome::B, 0.0), Err(ItoError::InvalidRange(0.0)));
    }
}
