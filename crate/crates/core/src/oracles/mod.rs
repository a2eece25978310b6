//! Independent ground truth for the posterior engine.
//!
//! None of these reuse the closed-form posterior path: the importance sampler
//! weights prior draws by the raw likelihood, the grid oracle integrates the
//! unnormalized density, the toy model is a scalar conjugate family, and the
//! discrete predictor enumerates every task pair exactly. They target small
//! instances only (`d ≤ 2`, `k ≤ 8` for the samplers).

mod discrete;
mod grid;
mod importance;
mod toy;

pub use discrete::{
    discrete_ascent_model, discrete_bayes_predict, discrete_prompt, discrete_sample,
    DiscreteComponent, DiscreteModel, DiscretePrediction,
};
pub use grid::{grid_posterior_1d, GridSpec};
pub use importance::importance_posterior;
pub use toy::{toy_posterior, ToyPosterior, ToyPrior1D};

use nalgebra::DVector;

/// Posterior summary produced by an oracle: mixture weights and the posterior
/// mean of `w`, with Monte-Carlo standard errors where applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    pub weights: Vec<f64>,
    pub weight_stderr: Vec<f64>,
    pub w_mean: DVector<f64>,
    pub w_mean_stderr: DVector<f64>,
    /// Effective sample size (importance sampling only).
    pub ess: Option<f64>,
    /// Set when the effective sample size fell below 100; the estimate is
    /// then unreliable and callers should treat checks as inconclusive.
    pub degenerate: bool,
}
