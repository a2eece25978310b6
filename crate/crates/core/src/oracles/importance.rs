//! Importance-sampling posterior oracle.
//!
//! Particles are prior draws `(μ, w, m)`; each is weighted by the full
//! likelihood of the observation `S_k ⊕ x_{k+1}` in log space and
//! self-normalized. Sampling from the prior keeps the oracle assumption-free;
//! the price is weight degeneracy at large `k`, which the effective sample
//! size reports.

use nalgebra::DVector;

use crate::error::Error;
use crate::model::{sample_task, PriorModel, Sequence};
use crate::posterior::normalize_log_weights;
use crate::rng::{domains, StreamSeed};
use crate::Result;

use super::OracleEstimate;

const MIN_PARTICLES: u64 = 10_000;
const ESS_WARN: f64 = 100.0;

struct Particle {
    log_weight: f64,
    component: usize,
    w: DVector<f64>,
}

fn log_likelihood(
    model: &PriorModel,
    prompt: &Sequence,
    query: &DVector<f64>,
    mu: &DVector<f64>,
    w: &DVector<f64>,
) -> f64 {
    let inv_2sx = 1.0 / (2.0 * model.sigma_x * model.sigma_x);
    let inv_2sy = 1.0 / (2.0 * model.sigma_y * model.sigma_y);
    let mut log_l = -(query - mu).norm_squared() * inv_2sx;
    for (x, y) in prompt.xs.iter().zip(&prompt.ys) {
        log_l -= (x - mu).norm_squared() * inv_2sx;
        let residual = y - w.dot(x);
        log_l -= residual * residual * inv_2sy;
    }
    log_l
}

/// Self-normalized importance-sampling estimate of the posterior mixture
/// weights and the posterior mean of `w`.
pub fn importance_posterior(
    model: &PriorModel,
    prompt: &Sequence,
    query: &DVector<f64>,
    n_particles: u64,
    seed: StreamSeed,
) -> Result<OracleEstimate> {
    if n_particles < MIN_PARTICLES {
        return Err(Error::InvalidModel(format!(
            "importance oracle needs at least {MIN_PARTICLES} particles, got {n_particles}"
        )));
    }
    let seed = seed.domain(domains::IMPORTANCE);
    let sample = |i: u64| -> Particle {
        let mut rng = seed.stream(i);
        let (mu, w, component) = sample_task(model, &mut rng);
        let log_weight = log_likelihood(model, prompt, query, &mu, &w);
        Particle { log_weight, component, w }
    };
    let particles: Vec<Particle> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n_particles).into_par_iter().map(sample).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n_particles).map(sample).collect()
        }
    };

    let log_weights: Vec<f64> = particles.iter().map(|p| p.log_weight).collect();
    let u = normalize_log_weights(&log_weights);
    let ess = 1.0 / u.iter().map(|w| w * w).sum::<f64>();

    let m_count = model.n_components();
    let d = model.dim;
    let mut weights = vec![0.0; m_count];
    let mut w_mean = DVector::zeros(d);
    for (p, &ui) in particles.iter().zip(&u) {
        weights[p.component] += ui;
        w_mean.axpy(ui, &p.w, 1.0);
    }
    // Renormalize the aggregated bins so the estimates sum to one exactly.
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    w_mean /= total;
    // Delta-method stderr of self-normalized estimators:
    // Var[f̂] ≈ Σ u_i² (f_i − f̂)².
    let mut weight_var = vec![0.0; m_count];
    let mut w_var = DVector::zeros(d);
    for (p, &ui) in particles.iter().zip(&u) {
        for m in 0..m_count {
            let f = f64::from(p.component == m) - weights[m];
            weight_var[m] += ui * ui * f * f;
        }
        for j in 0..d {
            let f = p.w[j] - w_mean[j];
            w_var[j] += ui * ui * f * f;
        }
    }
    Ok(OracleEstimate {
        weights,
        weight_stderr: weight_var.iter().map(|v| v.sqrt()).collect(),
        w_mean,
        w_mean_stderr: w_var.map(f64::sqrt),
        ess: Some(ess),
        degenerate: ess < ESS_WARN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_incontext_prompt, InContextSource, PriorComponent};
    use crate::scenarios;

    #[test]
    fn single_component_weight_is_exact() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let model = PriorModel {
            dim: 2,
            components: vec![PriorComponent { weight: 1.0, mu: e1.clone(), w: e1.clone() }],
            sigma_mu: 0.3,
            sigma_w: 0.3,
            sigma_x: 1.0,
            sigma_y: 1.0,
        };
        let source = InContextSource { mu_star: e1.clone(), w_star: e1, tau_x: 1.0, tau_y: 0.0 };
        let (prompt, query) = sample_incontext_prompt(&source, 3, &mut StreamSeed::new(1).rng());
        let estimate =
            importance_posterior(&model, &prompt, &query, 10_000, StreamSeed::new(2)).unwrap();
        assert_eq!(estimate.weights, vec![1.0]);
        assert!(!estimate.degenerate);
    }

    #[test]
    fn no_evidence_recovers_prior_weights() {
        // k = 0 and a near-flat x-likelihood: weights ≈ prior within stderr.
        let mut scenario = scenarios::basis_setting(2);
        scenario.prior.sigma_x = 50.0;
        let query = DVector::from_vec(vec![0.2, -0.1]);
        let estimate = importance_posterior(
            &scenario.prior,
            &Sequence::empty(),
            &query,
            20_000,
            StreamSeed::new(3),
        )
        .unwrap();
        for (m, w) in estimate.weights.iter().enumerate() {
            assert!(
                (w - 0.5).abs() < 4.0 * estimate.weight_stderr[m].max(1e-3),
                "weight {m}: {w}"
            );
        }
    }

    #[test]
    fn rejects_small_particle_counts() {
        let scenario = scenarios::basis_setting(2);
        let query = DVector::from_vec(vec![0.0, 0.0]);
        assert!(importance_posterior(
            &scenario.prior,
            &Sequence::empty(),
            &query,
            100,
            StreamSeed::new(4)
        )
        .is_err());
    }

    #[test]
    fn matches_closed_form_posterior() {
        let scenario = scenarios::basis_setting(2);
        let (prompt, query) =
            sample_incontext_prompt(&scenario.source, 4, &mut StreamSeed::new(5).rng());
        let estimate =
            importance_posterior(&scenario.prior, &prompt, &query, 200_000, StreamSeed::new(6))
                .unwrap();
        let exact = crate::posterior::posterior(&scenario.prior, &prompt, &query).unwrap();
        for m in 0..2 {
            let gap = (estimate.weights[m] - exact.weights[m]).abs();
            assert!(
                gap <= 3.0 * estimate.weight_stderr[m].max(1e-4),
                "weight {m}: {gap} vs stderr {}",
                estimate.weight_stderr[m]
            );
        }
        for j in 0..2 {
            let gap = (estimate.w_mean[j] - exact.w_mean[j]).abs();
            assert!(
                gap <= 3.0 * estimate.w_mean_stderr[j].max(1e-4),
                "w[{j}]: {gap} vs stderr {}",
                estimate.w_mean_stderr[j]
            );
        }
    }
}
