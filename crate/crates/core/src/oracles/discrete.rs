//! Discrete-token generative model and its exact Bayes predictor.
//!
//! Tokens live in `{0, …, M−1}`. A task fixes `w = w_m` exactly and flips `μ`
//! away from `μ_m` with total probability `(M−1)σ_μ`; inputs flip away from
//! `μ` with `(M−1)σ_x`, and labels away from `(x + w) mod M` with
//! `(M−1)σ_y`. The predictor enumerates all `M²` task pairs, applies Bayes
//! rule to the prompt plus query, and returns the posterior-predictive label
//! distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::posterior::normalize_log_weights;
use crate::Result;

/// One discrete mixture component `(π_m, μ_m, w_m)`; zero weights are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteComponent {
    pub weight: f64,
    pub mu: usize,
    pub w: usize,
}

/// Discrete mixture prior over token tasks with flip probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    /// Vocabulary size `M`.
    pub vocab: usize,
    pub components: Vec<DiscreteComponent>,
    pub sigma_mu: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl DiscreteModel {
    pub fn validate(&self) -> Result<()> {
        if self.vocab < 2 {
            return Err(Error::InvalidModel("vocabulary needs at least 2 tokens".into()));
        }
        let stay = (self.vocab - 1) as f64;
        for (name, p) in
            [("sigma_mu", self.sigma_mu), ("sigma_x", self.sigma_x), ("sigma_y", self.sigma_y)]
        {
            if !(0.0..=1.0).contains(&p) || 1.0 - stay * p < 0.0 {
                return Err(Error::InvalidModel(format!(
                    "{name} = {p} must satisfy 0 <= p and (1-(M-1)p) >= 0"
                )));
            }
        }
        let mut total = 0.0;
        for c in &self.components {
            if !(0.0..=1.0).contains(&c.weight) {
                return Err(Error::InvalidModel(format!("weight {} outside [0,1]", c.weight)));
            }
            if c.mu >= self.vocab || c.w >= self.vocab {
                return Err(Error::InvalidModel("component token outside vocabulary".into()));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("weights sum to {total}")));
        }
        Ok(())
    }

    /// `P(token | center)` under a flip noise `p`: `1-(M-1)p` on the center,
    /// `p` elsewhere.
    fn flip_prob(&self, token: usize, center: usize, p: f64) -> f64 {
        if token == center {
            1.0 - (self.vocab - 1) as f64 * p
        } else {
            p
        }
    }

    fn sample_flip<R: Rng>(&self, center: usize, p: f64, rng: &mut R) -> usize {
        let stay = 1.0 - (self.vocab - 1) as f64 * p;
        if rng.gen::<f64>() < stay {
            center
        } else {
            // Uniform over the other M-1 tokens.
            let mut token = rng.gen_range(0..self.vocab - 1);
            if token >= center {
                token += 1;
            }
            token
        }
    }

    /// Prior probability of the exact task pair `(μ, w)`.
    fn task_prior(&self, mu: usize, w: usize) -> f64 {
        self.components
            .iter()
            .filter(|c| c.w == w)
            .map(|c| c.weight * self.flip_prob(mu, c.mu, self.sigma_mu))
            .sum()
    }
}

/// Samples a pretraining sequence of `len` pairs; returns the pairs and the
/// generating `(μ, w, component)`.
pub fn discrete_sample<R: Rng>(
    model: &DiscreteModel,
    len: usize,
    rng: &mut R,
) -> (Vec<(usize, usize)>, usize, usize, usize) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut component = model.components.len() - 1;
    for (m, c) in model.components.iter().enumerate() {
        acc += c.weight;
        if u < acc {
            component = m;
            break;
        }
    }
    let c = model.components[component];
    let mu = model.sample_flip(c.mu, model.sigma_mu, rng);
    let w = c.w;
    let pairs = (0..len)
        .map(|_| {
            let x = model.sample_flip(mu, model.sigma_x, rng);
            let y = model.sample_flip((x + w) % model.vocab, model.sigma_y, rng);
            (x, y)
        })
        .collect();
    (pairs, mu, w, component)
}

/// Samples an in-context prompt of `k` pairs plus a query input from a fixed
/// task `(μ*, w*)` under the model's flip noises.
pub fn discrete_prompt<R: Rng>(
    model: &DiscreteModel,
    mu_star: usize,
    w_star: usize,
    k: usize,
    rng: &mut R,
) -> (Vec<(usize, usize)>, usize) {
    let pairs = (0..k)
        .map(|_| {
            let x = model.sample_flip(mu_star, model.sigma_x, rng);
            let y = model.sample_flip((x + w_star) % model.vocab, model.sigma_y, rng);
            (x, y)
        })
        .collect();
    let query = model.sample_flip(mu_star, model.sigma_x, rng);
    (pairs, query)
}

/// Posterior-predictive distribution over the next label.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePrediction {
    /// `P(y_{k+1} = token | prompt, query)`, normalized to 1.
    pub distribution: Vec<f64>,
    /// Most likely label (lowest token wins ties).
    pub argmax: usize,
    /// Posterior over task pairs, row-major `M×M` indexed by `μ·M + w`.
    pub task_posterior: Vec<f64>,
}

/// Exact Bayes predictor: enumerates all `M²` task pairs.
pub fn discrete_bayes_predict(
    model: &DiscreteModel,
    prompt: &[(usize, usize)],
    query: usize,
) -> Result<DiscretePrediction> {
    model.validate()?;
    let m = model.vocab;
    let mut log_post = vec![f64::NEG_INFINITY; m * m];
    for mu in 0..m {
        for w in 0..m {
            let prior = model.task_prior(mu, w);
            if prior <= 0.0 {
                continue;
            }
            let mut log_p = prior.ln() + model.flip_prob(query, mu, model.sigma_x).ln();
            for &(x, y) in prompt {
                log_p += model.flip_prob(x, mu, model.sigma_x).ln();
                log_p += model.flip_prob(y, (x + w) % m, model.sigma_y).ln();
            }
            log_post[mu * m + w] = log_p;
        }
    }
    let task_posterior = normalize_log_weights(&log_post);
    let mut distribution = vec![0.0; m];
    for mu in 0..m {
        for w in 0..m {
            let p = task_posterior[mu * m + w];
            if p == 0.0 {
                continue;
            }
            for (y, slot) in distribution.iter_mut().enumerate() {
                *slot += p * model.flip_prob(y, (query + w) % m, model.sigma_y);
            }
        }
    }
    let total: f64 = distribution.iter().sum();
    for p in &mut distribution {
        *p /= total;
    }
    let argmax = distribution
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(DiscretePrediction { distribution, argmax, task_posterior })
}

/// The discrete configuration that exhibits rise-then-fall 0-1 error:
/// `M = 6`, weights 0.04/0.481/0.479 on tasks 1/3/5, in-context task
/// `(μ*, w*) = (1, 3)`.
pub fn discrete_ascent_model() -> (DiscreteModel, usize, usize) {
    let model = DiscreteModel {
        vocab: 6,
        components: vec![
            DiscreteComponent { weight: 0.04, mu: 1, w: 1 },
            DiscreteComponent { weight: 0.481, mu: 3, w: 3 },
            DiscreteComponent { weight: 0.479, mu: 5, w: 5 },
        ],
        sigma_mu: 0.05,
        sigma_x: 0.04,
        sigma_y: 0.13,
    };
    (model, 1, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;

    #[test]
    fn noiseless_single_task_is_a_point_mass() {
        let model = DiscreteModel {
            vocab: 5,
            components: vec![DiscreteComponent { weight: 1.0, mu: 2, w: 3 }],
            sigma_mu: 0.0,
            sigma_x: 0.0,
            sigma_y: 0.0,
        };
        let prediction = discrete_bayes_predict(&model, &[(2, 0)], 2).unwrap();
        assert_eq!(prediction.argmax, (2 + 3) % 5);
        assert_eq!(prediction.distribution[(2 + 3) % 5], 1.0);
    }

    #[test]
    fn predictive_distribution_normalizes() {
        let (model, mu_star, w_star) = discrete_ascent_model();
        let (prompt, query) =
            discrete_prompt(&model, mu_star, w_star, 8, &mut StreamSeed::new(1).rng());
        let prediction = discrete_bayes_predict(&model, &prompt, query).unwrap();
        let total: f64 = prediction.distribution.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let post_total: f64 = prediction.task_posterior.iter().sum();
        assert!((post_total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sampler_respects_flip_rates() {
        let (model, mu_star, w_star) = discrete_ascent_model();
        let mut rng = StreamSeed::new(2).rng();
        let n = 60_000;
        let (pairs, _) = discrete_prompt(&model, mu_star, w_star, n, &mut rng);
        let x_hits = pairs.iter().filter(|(x, _)| *x == mu_star).count() as f64 / n as f64;
        let y_hits = pairs
            .iter()
            .filter(|(x, y)| *y == (x + w_star) % model.vocab)
            .count() as f64 / n as f64;
        assert!((x_hits - 0.8).abs() < 0.01, "x stay rate {x_hits}");
        assert!((y_hits - 0.35).abs() < 0.01, "y stay rate {y_hits}");
    }

    #[test]
    fn posterior_matches_rejection_sampling() {
        // M=3 model, k=2: condition forward simulations on the observed
        // prompt + query and compare task frequencies with the posterior.
        let model = DiscreteModel {
            vocab: 3,
            components: vec![
                DiscreteComponent { weight: 0.5, mu: 0, w: 0 },
                DiscreteComponent { weight: 0.3, mu: 1, w: 1 },
                DiscreteComponent { weight: 0.2, mu: 2, w: 2 },
            ],
            sigma_mu: 0.1,
            sigma_x: 0.15,
            sigma_y: 0.1,
        };
        let prompt = [(0usize, 0usize), (0, 1)];
        let query = 0usize;
        let prediction = discrete_bayes_predict(&model, &prompt, query).unwrap();

        let mut rng = StreamSeed::new(3).rng();
        let mut counts = vec![0u64; 9];
        let mut matches = 0u64;
        for _ in 0..1_000_000 {
            let (pairs, mu, w, _) = discrete_sample(&model, 3, &mut rng);
            if pairs[0] == prompt[0] && pairs[1] == prompt[1] && pairs[2].0 == query {
                counts[mu * 3 + w] += 1;
                matches += 1;
            }
        }
        assert!(matches > 1000, "too few rejection hits: {matches}");
        for idx in 0..9 {
            let freq = counts[idx] as f64 / matches as f64;
            let p = prediction.task_posterior[idx];
            let stderr = (p * (1.0 - p) / matches as f64).sqrt().max(1e-4);
            assert!(
                (freq - p).abs() <= 3.0 * stderr,
                "task {idx}: freq {freq} vs posterior {p}"
            );
        }
    }
}
