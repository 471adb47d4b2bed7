//! Closed-form attack analysis, used standalone through the CLI and as
//! oracles for the Monte Carlo harness.
//!
//! All formulas are functions of the fake-signal angle θ and the photon
//! count N: the sampling error Eve introduces is sin²θ, a coded photon
//! keeps overlap cos²2θ with the uncoded state, and Eve misreads Z as I
//! with probability (cos²2θ)^(N−1).

use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("angle {0} outside [0, pi/2)")]
    BadTheta(f64),
    #[error("error rate {0} outside [0, 0.5]")]
    BadErrorRate(f64),
    #[error("failure target {0} outside (0, 1)")]
    BadTarget(f64),
    #[error("photon count {0} below minimum {1}")]
    BadPhotonCount(u32, u32),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("overlap at angle {0} admits no photon count reaching the target")]
    UnreachableTarget(f64),
}

fn check_theta(theta: f64) -> Result<(), AnalyticsError> {
    if !theta.is_finite() || !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(AnalyticsError::BadTheta(theta));
    }
    Ok(())
}

/// Sampling error rate ε_E = sin²θ Eve's fake signal causes in σ_z checks.
pub fn epsilon_e(theta: f64) -> Result<f64, AnalyticsError> {
    check_theta(theta)?;
    Ok(theta.sin().powi(2))
}

/// Overlap cos²2θ between the coded and uncoded fake states, the
/// per-photon probability that a Z goes unnoticed.
pub fn coded_overlap(theta: f64) -> Result<f64, AnalyticsError> {
    check_theta(theta)?;
    let c = (2.0 * theta).cos();
    // cos(π/2) evaluates to ~1e-16 representation noise; snap it so the
    // σ_x point θ = π/4 gets its exact zero overlap.
    if c.abs() < 1e-15 {
        return Ok(0.0);
    }
    Ok(c * c)
}

/// P_F = (cos²2θ)^(N−1): the probability Eve misreads Z as I when she
/// keeps N−1 photons.
pub fn p_fail(theta: f64, n_photons: u32) -> Result<f64, AnalyticsError> {
    if n_photons < 1 {
        return Err(AnalyticsError::BadPhotonCount(n_photons, 1));
    }
    Ok(coded_overlap(theta)?.powi(n_photons as i32 - 1))
}

/// Relative slack when comparing a computed P_F against a user target,
/// so that targets quoted to the printed precision (0.262144) resolve to
/// the intended photon count.
const TARGET_SLACK: f64 = 1e-9;

/// Smallest N with p_fail(θ, N) ≤ target_pf.
pub fn min_photons(theta: f64, target_pf: f64) -> Result<u32, AnalyticsError> {
    if !target_pf.is_finite() || target_pf <= 0.0 || target_pf >= 1.0 {
        return Err(AnalyticsError::BadTarget(target_pf));
    }
    let overlap = coded_overlap(theta)?;
    if overlap >= 1.0 {
        return Err(AnalyticsError::UnreachableTarget(theta));
    }
    if overlap == 0.0 {
        return Ok(2);
    }
    // Real solution of overlap^(n−1) = target, then nudged to the exact
    // integer answer with the same p_fail the caller would check against.
    let est = 1.0 + target_pf.ln() / overlap.ln();
    if !est.is_finite() || est > u32::MAX as f64 {
        return Err(AnalyticsError::UnreachableTarget(theta));
    }
    let bound = |n: u32| -> Result<bool, AnalyticsError> {
        Ok(p_fail(theta, n)? <= target_pf * (1.0 + TARGET_SLACK))
    };
    let mut n = (est.ceil() as u32).max(2);
    while n > 2 && bound(n - 1)? {
        n -= 1;
    }
    while !bound(n)? {
        n += 1;
    }
    Ok(n)
}

fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Mutual information in bits between a uniform message bit and Eve's
/// guess. Her errors form a Z-channel (I is never misread), giving
/// I = h((1+P_F)/2) − h(P_F)/2.
pub fn eve_info_bits(p_fail_value: f64) -> Result<f64, AnalyticsError> {
    if !p_fail_value.is_finite() || !(0.0..=1.0).contains(&p_fail_value) {
        return Err(AnalyticsError::BadProbability(p_fail_value));
    }
    Ok(binary_entropy((1.0 + p_fail_value) / 2.0) - binary_entropy(p_fail_value) / 2.0)
}

/// Fake angle with sin²θ = eps_c, saturating the detectability bound.
pub fn theta_for_noise(eps_c: f64) -> Result<f64, AnalyticsError> {
    if !eps_c.is_finite() || !(0.0..=0.5).contains(&eps_c) {
        return Err(AnalyticsError::BadErrorRate(eps_c));
    }
    Ok(eps_c.sqrt().asin())
}

/// Per-control-round mismatch probability the Improved variant sees under
/// the fake-signal attack with uniform basis choice: σ_z checks fail at
/// sin²θ, σ_x checks at 1/2, so the mix is (sin²θ + 1/2)/2.
pub fn improved_detection_rate(theta: f64) -> Result<f64, AnalyticsError> {
    Ok((epsilon_e(theta)? + 0.5) / 2.0)
}

/// A fully parameterized attack: fake angle, photon count and the noise
/// budget the angle must hide in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackDesign {
    pub theta: f64,
    pub n_photons: u32,
    pub eps_c: f64,
}

impl AttackDesign {
    /// Validates sin²θ ≤ eps_c, the detectability bound.
    pub fn new(theta: f64, n_photons: u32, eps_c: f64) -> Result<Self, AnalyticsError> {
        if n_photons < 2 {
            return Err(AnalyticsError::BadPhotonCount(n_photons, 2));
        }
        if !eps_c.is_finite() || !(0.0..=0.5).contains(&eps_c) {
            return Err(AnalyticsError::BadErrorRate(eps_c));
        }
        if epsilon_e(theta)? > eps_c + 1e-12 {
            return Err(AnalyticsError::BadTheta(theta));
        }
        Ok(Self {
            theta,
            n_photons,
            eps_c,
        })
    }

    /// Saturates the bound: θ with sin²θ = eps_c.
    pub fn for_noise(eps_c: f64, n_photons: u32) -> Result<Self, AnalyticsError> {
        Self::new(theta_for_noise(eps_c)?, n_photons, eps_c)
    }

    pub fn p_fail(&self) -> f64 {
        p_fail(self.theta, self.n_photons).expect("validated at construction")
    }
}
