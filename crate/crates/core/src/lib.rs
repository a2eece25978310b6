//! Numerical laboratory for in-context learning of noisy linear regression
//! under a Gaussian-mixture task prior.
//!
//! The generative model draws a task `(μ, w)` from a mixture of Gaussians,
//! inputs from `N(μ, σ_x²I)`, and labels from `N(⟨w, x⟩, σ_y²)`. Conditioned
//! on a prompt of `k` labeled examples plus a query input, the task posterior
//! stays a Gaussian mixture whose components are shifted toward the prompt
//! and re-weighted by their evidence. The optimal next-label predictor is
//! `⟨query, w̃⟩` with `w̃` the posterior mean of `w`.
//!
//! Crate layout:
//! - [`model`]: prior/source types, validation, and samplers.
//! - [`posterior`]: sufficient statistics, the closed-form posterior mixture,
//!   the predictor, and the re-weighting diagnostics `Ψ_μ`, `Ψ_w`, `r(α,β)`.
//! - [`risk`]: Monte-Carlo risk estimators, the coarse / finegrained /
//!   biased-label / zero-shot risk bounds, the eigenvalue envelope, the ridge
//!   baseline, and the misleading-task forecast.
//! - [`oracles`]: independent ground truth (importance sampling, 1-D grid
//!   integration, a scalar conjugate toy model, and an exact discrete-token
//!   predictor).
//! - [`scenarios`]: named experiment presets and retrieval margins.
//!
//! All randomness flows through [`rng::StreamSeed`]: every Monte-Carlo trial
//! gets its own counter-derived stream, so results do not depend on worker
//! count. The `parallel` feature (default) fans trials out over rayon; without
//! it everything runs sequentially with identical output.

pub mod error;
pub mod exec;
pub mod model;
pub mod oracles;
pub mod posterior;
pub mod rng;
pub mod risk;
pub mod scenarios;

pub use error::Error;
pub use model::{InContextSource, PriorModel, PriorComponent, Sequence, ValidationReport};
pub use posterior::{PosteriorMixture, SufficientStats};
pub use rng::StreamSeed;
pub use risk::RiskPoint;
pub use scenarios::Scenario;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
