//! Eigenvalue concentration envelope for the prompt Gram matrix.
//!
//! For `x_i ~ N(μ*, τ_x²I)` with `‖μ*‖ = 1` and `A = (Σ x_i x_iᵀ)/k`, the
//! event
//!
//! ```text
//! L ≤ λ_d(A) ≤ λ_1(A) ≤ U   and   ‖(Σ(x_i − μ*))/k‖ < τ_x √(γ(1+t))
//! ```
//!
//! holds with probability at least `1 − 3·exp(−k t²/8)`, where `γ = √(d/k)`,
//! `L = τ_x²(1 − t/2 − γ)² − 2τ_x γ √(1+t)` and
//! `U = 1 + τ_x²(1 + t/2 + γ)² + 2τ_x γ √(1+t)`.
//!
//! The mean-noise cap is `τ_x √(γ(1+t))`: the squared mean noise is a
//! `(τ_x² d/k)`-scaled d-degree chi-square, so a cap proportional to `γ`
//! would be escaped with k-independent probability, while the `√γ` cap is
//! met with probability approaching one.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exec::run_trials;
use crate::model::InContextSource;
use crate::rng::{domains, StreamSeed};
use crate::Result;

/// Closed-form envelope at deviation parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEnvelope {
    pub t: f64,
    /// Aspect ratio `γ = √(d/k)`.
    pub gamma: f64,
    pub lower: f64,
    pub upper: f64,
    /// Failure probability bound `3·exp(−k t²/8)` (may exceed 1).
    pub fail_prob: f64,
    /// True when `lower ≤ 0` (e.g. `k < d`), making the lower bound vacuous.
    pub vacuous: bool,
}

/// Evaluates the envelope formulas.
pub fn eigen_envelope(d: usize, k: usize, t: f64, tau_x: f64) -> Result<EigenEnvelope> {
    if k == 0 {
        return Err(Error::BoundUndefined("envelope needs k >= 1".into()));
    }
    if t <= 0.0 {
        return Err(Error::BoundUndefined("envelope needs t > 0".into()));
    }
    let gamma = (d as f64 / k as f64).sqrt();
    let cross = 2.0 * tau_x * gamma * (1.0 + t).sqrt();
    let lower = tau_x * tau_x * (1.0 - t / 2.0 - gamma) * (1.0 - t / 2.0 - gamma) - cross;
    let upper = 1.0 + tau_x * tau_x * (1.0 + t / 2.0 + gamma) * (1.0 + t / 2.0 + gamma) + cross;
    let fail_prob = 3.0 * (-(k as f64) * t * t / 8.0).exp();
    Ok(EigenEnvelope { t, gamma, lower, upper, fail_prob, vacuous: lower <= 0.0 })
}

/// Empirical envelope-violation frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationRate {
    pub envelope: EigenEnvelope,
    pub violations: u64,
    pub n_trials: u64,
    pub rate: f64,
}

/// Samples `n_trials` prompts of length `k` from the source and counts how
/// often the Gram eigenvalues or the mean-noise norm escape the envelope.
pub fn eigen_violation_rate(
    source: &InContextSource,
    k: usize,
    t: f64,
    n_trials: u64,
    seed: StreamSeed,
) -> Result<ViolationRate> {
    let d = source.mu_star.len();
    let envelope = eigen_envelope(d, k, t, source.tau_x)?;
    let norm_cap = source.tau_x * (envelope.gamma * (1.0 + t)).sqrt();
    let seed = seed.domain(domains::ENVELOPE).domain(k as u64);
    let hits = run_trials(n_trials, |i| {
        let mut rng = seed.stream(i);
        let mut gram = DMatrix::<f64>::zeros(d, d);
        let mut noise_sum = nalgebra::DVector::<f64>::zeros(d);
        for _ in 0..k {
            let eps = nalgebra::DVector::from_iterator(
                d,
                (0..d).map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    source.tau_x * z
                }),
            );
            let x = &source.mu_star + &eps;
            gram.syger(1.0, &x, &x, 1.0);
            noise_sum += eps;
        }
        for r in 0..d {
            for c in (r + 1)..d {
                gram[(r, c)] = gram[(c, r)];
            }
        }
        gram /= k as f64;
        let eigen = SymmetricEigen::new(gram);
        let min = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eigen.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let inside = envelope.lower <= min
            && max <= envelope.upper
            && (noise_sum / k as f64).norm() < norm_cap;
        f64::from(!inside)
    });
    let violations = hits.iter().map(|&h| h as u64).sum();
    Ok(ViolationRate { envelope, violations, n_trials, rate: violations as f64 / n_trials as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn limits_match_population_eigenvalues() {
        // gamma -> 0, t -> 0, tau_x = 1: L -> tau² = 1 and U -> 1 + tau² = 2,
        // the extreme eigenvalues of the population matrix I + μ*μ*ᵀ.
        let envelope = eigen_envelope(3, 400_000_000, 1e-6, 1.0).unwrap();
        assert_relative_eq!(envelope.lower, 1.0, epsilon = 1e-3);
        assert_relative_eq!(envelope.upper, 2.0, epsilon = 1e-3);
        assert!(!envelope.vacuous);
    }

    #[test]
    fn small_k_is_vacuous() {
        // k < d: the Gram matrix is rank deficient and L goes negative.
        let envelope = eigen_envelope(8, 2, 0.5, 1.0).unwrap();
        assert!(envelope.lower <= 0.0);
        assert!(envelope.vacuous);
    }

    #[test]
    fn violation_rate_below_bound() {
        let source = InContextSource {
            mu_star: DVector::from_vec(vec![0.0, 0.6, 0.8]),
            w_star: DVector::from_vec(vec![1.0, 0.0, 0.0]),
            tau_x: 1.0,
            tau_y: 0.0,
        };
        let k = 256;
        let t = (k as f64).powf(-0.25);
        let result = eigen_violation_rate(&source, k, t, 2000, StreamSeed::new(4)).unwrap();
        // fail_prob = 3 exp(-sqrt(256)/8) ≈ 0.406; the empirical rate is far
        // below it, check the bound with binomial 3-sigma slack.
        let slack =
            3.0 * (result.envelope.fail_prob * 1.0 / result.n_trials as f64).sqrt();
        assert!(
            result.rate <= result.envelope.fail_prob + slack,
            "rate {} vs bound {}",
            result.rate,
            result.envelope.fail_prob
        );
    }
}
