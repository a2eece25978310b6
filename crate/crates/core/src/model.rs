//! Generative model: Gaussian-mixture task prior and in-context source.
//!
//! Pretraining sequences draw a task `(μ, w)` by picking mixture component
//! `m` with probability `π_m` and perturbing its center by `N(0, σ_μ²I)` /
//! `N(0, σ_w²I)`; inputs follow `N(μ, σ_x²I)` and labels `N(⟨w, x⟩, σ_y²)`.
//! In-context prompts come from a fixed query-time task `(μ*, w*)` with input
//! spread `τ_x` and optional label noise `τ_y` (the default `τ_y = 0` keeps
//! labels exact).

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// One mixture component: weight and the `(μ_m, w_m)` center pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorComponent {
    pub weight: f64,
    pub mu: DVector<f64>,
    pub w: DVector<f64>,
}

/// Gaussian-mixture task prior with shared isotropic noise scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorModel {
    pub dim: usize,
    pub components: Vec<PriorComponent>,
    pub sigma_mu: f64,
    pub sigma_w: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

/// Query-time task the prompt is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InContextSource {
    pub mu_star: DVector<f64>,
    pub w_star: DVector<f64>,
    pub tau_x: f64,
    /// Label-noise scale; 0 reproduces the exact-label setting.
    #[serde(default)]
    pub tau_y: f64,
}

/// A prompt: `k` input/label pairs (possibly empty).
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub xs: Vec<DVector<f64>>,
    pub ys: Vec<f64>,
}

/// Outcome of a validation pass: hard errors and (relaxed-mode) warnings.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

const WEIGHT_SUM_TOL: f64 = 1e-12;
const UNIT_NORM_TOL: f64 = 1e-9;

impl PriorModel {
    /// Task-to-input noise ratio `δ_μ = σ_μ²/σ_x²` (0 when `σ_μ = 0`).
    pub fn delta_mu(&self) -> f64 {
        if self.sigma_mu == 0.0 {
            0.0
        } else {
            (self.sigma_mu / self.sigma_x) * (self.sigma_mu / self.sigma_x)
        }
    }

    /// Task-to-label noise ratio `δ_w = σ_w²/σ_y²` (0 when `σ_w = 0`).
    pub fn delta_w(&self) -> f64 {
        if self.sigma_w == 0.0 {
            0.0
        } else {
            (self.sigma_w / self.sigma_y) * (self.sigma_w / self.sigma_y)
        }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Mixture-weight ratio bound `r = max_{α,β} π_α/π_β`.
    pub fn weight_ratio_bound(&self) -> f64 {
        let max = self.components.iter().map(|c| c.weight).fold(f64::MIN, f64::max);
        let min = self.components.iter().map(|c| c.weight).fold(f64::MAX, f64::min);
        max / min
    }

    /// Checks the prior invariants. Strict mode promotes unit-norm violations
    /// to errors; non-finite entries are errors in either mode.
    pub fn validate(&self, strict: bool) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.dim == 0 {
            report.errors.push("dimension must be positive".into());
        }
        if self.components.is_empty() {
            report.errors.push("at least one mixture component required".into());
        }
        let finite = |v: &DVector<f64>| v.iter().all(|x| x.is_finite());
        for (m, c) in self.components.iter().enumerate() {
            if !c.weight.is_finite() || !finite(&c.mu) || !finite(&c.w) {
                report.errors.push(format!("component {} has non-finite entries", m + 1));
                continue;
            }
            if c.mu.len() != self.dim || c.w.len() != self.dim {
                report.errors.push(format!("component {} dimension mismatch", m + 1));
            }
            if c.weight <= 0.0 {
                report.errors.push(format!("component {} weight must be positive", m + 1));
            }
            for (name, v) in [("mu", &c.mu), ("w", &c.w)] {
                let norm = v.norm();
                if (norm - 1.0).abs() > UNIT_NORM_TOL {
                    let msg = format!("component {} {} norm {:.6} != 1", m + 1, name, norm);
                    if strict {
                        report.errors.push(msg);
                    } else {
                        report.warnings.push(msg);
                    }
                }
            }
        }
        let weight_sum: f64 = self.components.iter().map(|c| c.weight).sum();
        if (weight_sum - 1.0).abs() > WEIGHT_SUM_TOL {
            report.errors.push(format!("mixture weights sum to {weight_sum} != 1"));
        }
        for (name, value) in [
            ("sigma_mu", self.sigma_mu),
            ("sigma_w", self.sigma_w),
            ("sigma_x", self.sigma_x),
            ("sigma_y", self.sigma_y),
        ] {
            if !value.is_finite() || value < 0.0 {
                report.errors.push(format!("{name} = {value} must be finite and >= 0"));
            }
        }
        for (name, value) in [("delta_mu", self.delta_mu()), ("delta_w", self.delta_w())] {
            if !value.is_finite() {
                report.errors.push(format!("{name} = {value} must be finite"));
            }
        }
        if !self.weight_ratio_bound().is_finite() {
            report.errors.push("weight ratio bound r is not finite".into());
        }
        report
    }

    /// Errors unless the model passes validation at the given strictness.
    pub fn require_valid(&self, strict: bool) -> Result<()> {
        let report = self.validate(strict);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidModel(report.errors.join("; ")))
        }
    }
}

impl InContextSource {
    /// Checks the source invariants (unit norms are strict-mode errors).
    pub fn validate(&self, strict: bool) -> ValidationReport {
        let mut report = ValidationReport::default();
        let finite = self.mu_star.iter().chain(self.w_star.iter()).all(|x| x.is_finite());
        if !finite || !self.tau_x.is_finite() || !self.tau_y.is_finite() {
            report.errors.push("source has non-finite entries".into());
            return report;
        }
        if self.mu_star.len() != self.w_star.len() {
            report.errors.push("mu_star and w_star dimensions differ".into());
        }
        if self.tau_x <= 0.0 {
            report.errors.push(format!("tau_x = {} must be positive", self.tau_x));
        }
        if self.tau_y < 0.0 {
            report.errors.push(format!("tau_y = {} must be non-negative", self.tau_y));
        }
        for (name, v) in [("mu_star", &self.mu_star), ("w_star", &self.w_star)] {
            let norm = v.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                let msg = format!("{name} norm {norm:.6} != 1");
                if strict {
                    report.errors.push(msg);
                } else {
                    report.warnings.push(msg);
                }
            }
        }
        report
    }
}

impl Sequence {
    pub fn new(xs: Vec<DVector<f64>>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
        }
        Ok(Self { xs, ys })
    }

    pub fn empty() -> Self {
        Self { xs: Vec::new(), ys: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

fn gaussian_vector<R: Rng>(mean: &DVector<f64>, sd: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(
        mean.len(),
        mean.iter().map(|&m| {
            let z: f64 = StandardNormal.sample(rng);
            m + sd * z
        }),
    )
}

/// Draws a task from the prior: component index (0-based), then Gaussian
/// perturbations of its center.
pub fn sample_task<R: Rng>(
    model: &PriorModel,
    rng: &mut R,
) -> (DVector<f64>, DVector<f64>, usize) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut index = model.components.len() - 1;
    for (m, c) in model.components.iter().enumerate() {
        acc += c.weight;
        if u < acc {
            index = m;
            break;
        }
    }
    let c = &model.components[index];
    let mu = gaussian_vector(&c.mu, model.sigma_mu, rng);
    let w = gaussian_vector(&c.w, model.sigma_w, rng);
    (mu, w, index)
}

/// Samples a length-`K` pretraining sequence; all pairs share one task draw.
/// Returns the sequence together with the generating `(μ, w, component)`.
pub fn sample_pretraining_sequence<R: Rng>(
    model: &PriorModel,
    len: usize,
    rng: &mut R,
) -> (Sequence, DVector<f64>, DVector<f64>, usize) {
    let (mu, w, index) = sample_task(model, rng);
    let mut xs = Vec::with_capacity(len);
    let mut ys = Vec::with_capacity(len);
    for _ in 0..len {
        let x = gaussian_vector(&mu, model.sigma_x, rng);
        let noise: f64 = StandardNormal.sample(rng);
        ys.push(w.dot(&x) + model.sigma_y * noise);
        xs.push(x);
    }
    (Sequence { xs, ys }, mu, w, index)
}

/// Samples a prompt of `k` labeled pairs plus the query input, all from the
/// in-context task. Labels are `⟨x, w*⟩ + τ_y·ε`; the query has no label.
pub fn sample_incontext_prompt<R: Rng>(
    source: &InContextSource,
    k: usize,
    rng: &mut R,
) -> (Sequence, DVector<f64>) {
    let mut xs = Vec::with_capacity(k);
    let mut ys = Vec::with_capacity(k);
    for _ in 0..k {
        let x = gaussian_vector(&source.mu_star, source.tau_x, rng);
        let mut y = source.w_star.dot(&x);
        if source.tau_y > 0.0 {
            let noise: f64 = StandardNormal.sample(rng);
            y += source.tau_y * noise;
        }
        xs.push(x);
        ys.push(y);
    }
    let query = gaussian_vector(&source.mu_star, source.tau_x, rng);
    (Sequence { xs, ys }, query)
}
