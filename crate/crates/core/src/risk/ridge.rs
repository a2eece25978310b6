//! Ridge-regression baseline.
//!
//! The comparison draws a fresh task from the prior each trial, hands the
//! same noiseless samples to both predictors, and scores both against the
//! clean label.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::Error;
use crate::exec::mean_stderr;
use crate::model::{sample_task, PriorModel, Sequence};
use crate::posterior;
use crate::rng::{domains, StreamSeed};
use crate::Result;

use super::RiskPoint;

/// Ridge prediction `⟨query, ŵ⟩` with `(λI + Σx_ix_iᵀ) ŵ = Σx_iy_i`.
pub fn ridge_predict(prompt: &Sequence, query: &DVector<f64>, lambda: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::BoundUndefined("ridge needs lambda > 0".into()));
    }
    let d = query.len();
    let mut a = DMatrix::<f64>::identity(d, d) * lambda;
    let mut rhs = DVector::<f64>::zeros(d);
    for (x, y) in prompt.xs.iter().zip(&prompt.ys) {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        a.syger(1.0, x, x, 1.0);
        rhs.axpy(*y, x, 1.0);
    }
    for r in 0..d {
        for c in (r + 1)..d {
            a[(r, c)] = a[(c, r)];
        }
    }
    let chol = Cholesky::new(a)
        .ok_or_else(|| Error::Numerical("ridge system not positive definite".into()))?;
    Ok(chol.solve(&rhs).dot(query))
}

/// One row of the ridge-vs-posterior comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeComparePoint {
    pub k: usize,
    pub icl: RiskPoint,
    pub ridge: RiskPoint,
}

/// Risk curves for the posterior predictor and ridge regression over a shared
/// stream of tasks drawn from the prior (input spread `tau_x`, noiseless
/// labels, squared loss against the clean label).
pub fn ridge_vs_icl_curve(
    model: &PriorModel,
    tau_x: f64,
    ks: &[usize],
    lambda: f64,
    n_trials: u64,
    seed: StreamSeed,
) -> Result<Vec<RidgeComparePoint>> {
    if lambda <= 0.0 {
        return Err(Error::BoundUndefined("ridge needs lambda > 0".into()));
    }
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let seed_k = seed.domain(domains::RIDGE).domain(k as u64);
        let losses: Vec<(f64, f64)> = {
            let eval = |i: u64| -> (f64, f64) {
                let mut rng = seed_k.stream(i);
                let (mu, w, _) = sample_task(model, &mut rng);
                let source = crate::model::InContextSource {
                    mu_star: mu,
                    w_star: w,
                    tau_x,
                    tau_y: 0.0,
                };
                let (prompt, query) = crate::model::sample_incontext_prompt(&source, k, &mut rng);
                let target = source.w_star.dot(&query);
                let icl = posterior::predict(model, &prompt, &query).expect("posterior total");
                let ridge = ridge_predict(&prompt, &query, lambda).expect("lambda > 0");
                ((icl - target).powi(2), (ridge - target).powi(2))
            };
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n_trials).into_par_iter().map(eval).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n_trials).map(eval).collect()
            }
        };
        let icl: Vec<f64> = losses.iter().map(|p| p.0).collect();
        let ridge: Vec<f64> = losses.iter().map(|p| p.1).collect();
        let (icl_mean, icl_se) = mean_stderr(&icl);
        let (ridge_mean, ridge_se) = mean_stderr(&ridge);
        points.push(RidgeComparePoint {
            k,
            icl: RiskPoint { k, estimate: icl_mean, stderr: icl_se, n_trials },
            ridge: RiskPoint { k, estimate: ridge_mean, stderr: ridge_se, n_trials },
        });
    }
    Ok(points)
}
