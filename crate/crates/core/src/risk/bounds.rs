//! Risk upper bounds: coarse `O(k⁻²)`, finegrained (posterior-weighted),
//! biased-label retrieval (non-asymptotic and asymptotic), and zero-shot.
//!
//! Bounds are returned term by term so sweeps can show which regime
//! dominates. Asymptotic remainders (`O(k^{δ-5/2})`, `O(k⁻²)`) are reported
//! as order notes, never evaluated numerically.

use nalgebra::SymmetricEigen;

use crate::error::Error;
use crate::exec::mean_stderr;
use crate::model::{sample_incontext_prompt, InContextSource, PriorModel};
use crate::posterior::{normalize_log_weights, reweight_log, sufficient_stats};
use crate::rng::{domains, StreamSeed};
use crate::Result;

use super::envelope::eigen_envelope;
use super::RetrievalMargins;

/// Leading coarse-bound term `4(1+dτ_x²)/(τ_x⁴ δ_w² k²)` with the unevaluated
/// remainder flagged separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseBound {
    pub k: usize,
    pub leading: f64,
    /// Order of the dropped remainder; informational only.
    pub remainder_order: &'static str,
}

/// Coarse upper bound on the learning risk.
pub fn coarse_bound(model: &PriorModel, source: &InContextSource, k: usize) -> Result<CoarseBound> {
    let delta_w = model.delta_w();
    if delta_w == 0.0 {
        return Err(Error::BoundUndefined("coarse bound needs delta_w > 0".into()));
    }
    if source.tau_x <= 0.0 {
        return Err(Error::BoundUndefined("coarse bound needs tau_x > 0".into()));
    }
    if k == 0 {
        return Err(Error::BoundUndefined("coarse bound needs k >= 1".into()));
    }
    let d = model.dim as f64;
    let tau2 = source.tau_x * source.tau_x;
    let kf = k as f64;
    let leading = 4.0 * (1.0 + d * tau2) / (tau2 * tau2 * delta_w * delta_w * kf * kf);
    Ok(CoarseBound { k, leading, remainder_order: "O(k^(delta-5/2))" })
}

/// Monte-Carlo estimate of the finegrained bound
/// `Σ_m ‖w_m−w*‖² E[π̃_m ‖x_{k+1}‖² λ₁(A)²]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinegrainedBound {
    pub k: usize,
    pub value: f64,
    pub stderr: f64,
    /// Same expectation with every squared distance capped at 4 (the unit-norm
    /// worst case); the coarse bound's starting point, used as a sanity ceiling.
    pub distance_capped: f64,
    pub n_trials: u64,
}

/// Largest eigenvalue of `A = (I + δ_w G)⁻¹` restricted to the subspace the
/// prompt inputs actually span: eigenvalues of `G` below a rank tolerance are
/// treated as structural zeros rather than forcing `λ₁(A) = 1`.
pub(crate) fn shrinkage_lambda1(gram: &nalgebra::DMatrix<f64>, delta_w: f64) -> f64 {
    if delta_w == 0.0 {
        return 1.0;
    }
    let eigen = SymmetricEigen::new(gram.clone());
    let max = eigen.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 1.0;
    }
    let tol = max * 1e-9;
    let min_spanned = eigen
        .eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > tol)
        .fold(f64::INFINITY, f64::min);
    if min_spanned.is_finite() {
        1.0 / (1.0 + delta_w * min_spanned)
    } else {
        1.0
    }
}

/// Estimates the finegrained bound over fresh prompts.
pub fn finegrained_bound(
    model: &PriorModel,
    source: &InContextSource,
    k: usize,
    n_trials: u64,
    seed: StreamSeed,
) -> Result<FinegrainedBound> {
    if n_trials == 0 {
        return Err(Error::InvalidModel("n_trials must be at least 1".into()));
    }
    let distances: Vec<f64> = model
        .components
        .iter()
        .map(|c| (&c.w - &source.w_star).norm_squared())
        .collect();
    let delta_w = model.delta_w();
    let seed = seed.domain(domains::FINEGRAINED).domain(k as u64);
    // Each trial yields (weighted term, distance-capped term); pack both into
    // one pass by running the trial map twice over the same streams is wasted
    // work, so evaluate jointly and split afterwards.
    let joint: Vec<(f64, f64)> = {
        let eval = |i: u64| -> (f64, f64) {
            let mut rng = seed.stream(i);
            let (prompt, query) = sample_incontext_prompt(source, k, &mut rng);
            let stats = sufficient_stats(&prompt, &query).expect("dims agree");
            let weights = normalize_log_weights(&reweight_log(model, &stats).expect("psd"));
            let lam = shrinkage_lambda1(&stats.gram, delta_w);
            let factor = query.norm_squared() * lam * lam;
            let weighted: f64 =
                weights.iter().zip(&distances).map(|(p, d2)| p * d2 * factor).sum();
            (weighted, 4.0 * factor)
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
    let weighted: Vec<f64> = joint.iter().map(|p| p.0).collect();
    let capped: Vec<f64> = joint.iter().map(|p| p.1).collect();
    let (value, stderr) = mean_stderr(&weighted);
    let (distance_capped, _) = mean_stderr(&capped);
    Ok(FinegrainedBound { k, value, stderr, distance_capped, n_trials })
}

/// Per-β constant from the retrieval-bound proof, evaluated at `k = 0`:
/// `C_{k=0}(β) = 2(1 + τ_x²(d + τ_x²‖b‖²/E²)) exp(τ_x²‖b‖²/(2E²) − D/E)` with
/// `D = ‖μ_β−μ*‖² − ‖μ_α−μ*‖²`, `E = 2σ_x²(1+δ_μ)`, `b = 2(μ_β−μ_α)`.
fn c_k0(model: &PriorModel, source: &InContextSource, alpha: usize, beta: usize) -> f64 {
    let d = model.dim as f64;
    let tau2 = source.tau_x * source.tau_x;
    let e = 2.0 * model.sigma_x * model.sigma_x * (1.0 + model.delta_mu());
    let b2 = (2.0 * (&model.components[beta].mu - &model.components[alpha].mu)).norm_squared();
    let big_d = (&model.components[beta].mu - &source.mu_star).norm_squared()
        - (&model.components[alpha].mu - &source.mu_star).norm_squared();
    2.0 * (1.0 + tau2 * (d + tau2 * b2 / (e * e)))
        * (tau2 * b2 / (2.0 * e * e) - big_d / e).exp()
}

fn c_k0_sum(model: &PriorModel, source: &InContextSource, alpha: usize) -> f64 {
    (0..model.n_components())
        .filter(|&beta| beta != alpha)
        .map(|beta| c_k0(model, source, alpha, beta))
        .sum()
}

/// Term-by-term biased-label retrieval bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalBoundTerms {
    pub k: usize,
    /// Retrieval-decay term `16 r Σ_β C_{k=0}(β) exp(−k(d_μ²/(8σ_x²)+u_w²τ_x²/(8σ_y²)))`.
    pub decay: f64,
    /// Concentration-failure tail `48(1+dτ_x²) exp(−k^{1/2}/8)`.
    pub tail: f64,
    /// Learning-takeover growth `‖w_α−w*‖²(1+dτ_x²) min{1, 4k²δ_w²(1+τ_x²)²}`.
    pub growth: f64,
    /// Sum of the three non-asymptotic terms.
    pub total: f64,
    /// Asymptotic form `‖w_α−w*‖²(1+dτ_x²) + (C₁/(kδ_w)) exp(C₂ k^{−1/2})`,
    /// up to an unevaluated `O(k⁻²)` remainder.
    pub asymptotic: f64,
    /// Whether `k` lies in the validity interval of the non-asymptotic bound.
    pub interval_ok: bool,
    pub remainder_order: &'static str,
}

/// Validity interval of the non-asymptotic retrieval bound at prompt length k.
fn retrieval_interval_ok(
    model: &PriorModel,
    source: &InContextSource,
    margins: &RetrievalMargins,
    k: usize,
    check_w_margin: bool,
) -> bool {
    if k == 0 {
        return false;
    }
    let kf = k as f64;
    let delta_mu = model.delta_mu();
    let delta_w = model.delta_w();
    let tau2 = source.tau_x * source.tau_x;
    let cap_mu = if delta_mu > 0.0 { 1.0 / delta_mu - 1.0 } else { f64::INFINITY };
    let cap_w = if check_w_margin && delta_w > 0.0 {
        1.0 / (delta_w * tau2)
    } else {
        f64::INFINITY
    };
    if kf > cap_mu.min(cap_w) {
        return false;
    }
    let t = kf.powf(-0.25);
    let envelope = match eigen_envelope(model.dim, k, t, source.tau_x) {
        Ok(e) => e,
        Err(_) => return false,
    };
    if 4.0 * source.tau_x * envelope.gamma * (1.0 + t).sqrt() >= margins.d_mu_sq / 2.0 {
        return false;
    }
    if envelope.upper >= 2.0 * (1.0 + tau2) {
        return false;
    }
    if check_w_margin {
        let w_dist = |m: usize| {
            (&model.components[m].w - &source.w_star).norm_squared()
        };
        let gap = (0..model.n_components())
            .filter(|&b| b != margins.alpha)
            .map(|b| envelope.lower * w_dist(b) - envelope.upper * w_dist(margins.alpha))
            .fold(f64::INFINITY, f64::min);
        if gap <= tau2 * margins.u_w_sq / 2.0 {
            return false;
        }
    }
    true
}

/// Biased-label retrieval bound (Assumption-margin form).
pub fn retrieval_bound(
    model: &PriorModel,
    source: &InContextSource,
    margins: &RetrievalMargins,
    k: usize,
) -> Result<RetrievalBoundTerms> {
    if !margins.applicable {
        return Err(Error::MarginsNotApplicable(format!(
            "d_mu^2={:.4}, d_w^2={:.4}, u_w^2={:.4} must all be positive",
            margins.d_mu_sq, margins.d_w_sq, margins.u_w_sq
        )));
    }
    let alpha = margins.alpha;
    if alpha >= model.n_components() {
        return Err(Error::ComponentIndex { index: alpha, count: model.n_components() });
    }
    let d = model.dim as f64;
    let kf = k as f64;
    let tau2 = source.tau_x * source.tau_x;
    let delta_w = model.delta_w();
    let r = model.weight_ratio_bound();
    let w_gap = (&model.components[alpha].w - &source.w_star).norm_squared();
    let c3_sum = 16.0 * r * c_k0_sum(model, source, alpha);
    let rate = margins.d_mu_sq / (8.0 * model.sigma_x * model.sigma_x)
        + margins.u_w_sq * tau2 / (8.0 * model.sigma_y * model.sigma_y);
    let decay = c3_sum * (-kf * rate).exp();
    let tail = 48.0 * (1.0 + d * tau2) * (-kf.sqrt() / 8.0).exp();
    let growth_factor = (4.0 * kf * kf * delta_w * delta_w * (1.0 + tau2) * (1.0 + tau2)).min(1.0);
    let growth = w_gap * (1.0 + d * tau2) * growth_factor;

    let c1 = 8.0 * r * c_k0_sum(model, source, alpha) / tau2
        * (-margins.d_w_sq / (2.0 * model.sigma_w * model.sigma_w)).exp()
        * (-margins.d_mu_sq / (2.0 * model.sigma_mu * model.sigma_mu)).exp();
    let c2 = 4.0 * source.tau_x * d.sqrt() / (2.0 * model.sigma_mu * model.sigma_mu);
    let asymptotic = if k > 0 && delta_w > 0.0 {
        w_gap * (1.0 + d * tau2) + c1 / (kf * delta_w) * (c2 * kf.powf(-0.5)).exp()
    } else {
        f64::INFINITY
    };

    Ok(RetrievalBoundTerms {
        k,
        decay,
        tail,
        growth,
        total: decay + tail + growth,
        asymptotic,
        interval_ok: retrieval_interval_ok(model, source, margins, k, true),
        remainder_order: "O(k^-2)",
    })
}

/// Zero-shot bound for the antipodal pair probed with all-zero labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroShotBound {
    pub k: usize,
    /// `C₄ exp(−d_μ² k/(8σ_x²))` with `C₄ = 9 r C_{k=0}`.
    pub decay: f64,
    /// `12(1+dτ_x²) exp(−k^{1/2}/8)`.
    pub tail: f64,
    /// `(1+dτ_x²) min{1, 4k²δ_w²(1+τ_x²)²}`.
    pub growth: f64,
    pub total: f64,
    pub interval_ok: bool,
}

const ANTIPODAL_TOL: f64 = 1e-9;

/// Checks the zero-shot setting: exactly two antipodal components and a
/// source with `w* = 0` (labels identically zero).
fn check_zero_shot_setting(model: &PriorModel, source: &InContextSource) -> Result<usize> {
    if model.n_components() != 2 {
        return Err(Error::ScenarioPrecondition(format!(
            "zero-shot bound needs exactly 2 components, got {}",
            model.n_components()
        )));
    }
    let (a, b) = (&model.components[0], &model.components[1]);
    if (&a.mu + &b.mu).norm() > ANTIPODAL_TOL || (&a.w + &b.w).norm() > ANTIPODAL_TOL {
        return Err(Error::ScenarioPrecondition(
            "zero-shot bound needs antipodal centers (mu_a, w_a) = (-mu_b, -w_b)".into(),
        ));
    }
    if source.w_star.norm() > ANTIPODAL_TOL {
        return Err(Error::ScenarioPrecondition(
            "zero-shot bound needs all-zero labels (w* = 0)".into(),
        ));
    }
    // The retrieval target is the component whose input center matches mu*.
    let alpha = if (&a.mu - &source.mu_star).norm_squared()
        <= (&b.mu - &source.mu_star).norm_squared()
    {
        0
    } else {
        1
    };
    Ok(alpha)
}

/// Zero-shot upper bound; errors unless the antipodal / zero-label setting holds.
pub fn zero_shot_bound(
    model: &PriorModel,
    source: &InContextSource,
    k: usize,
) -> Result<ZeroShotBound> {
    let alpha = check_zero_shot_setting(model, source)?;
    let beta = 1 - alpha;
    let d = model.dim as f64;
    let kf = k as f64;
    let tau2 = source.tau_x * source.tau_x;
    let delta_w = model.delta_w();
    let r = model.weight_ratio_bound();
    let d_mu_sq = (&model.components[beta].mu - &source.mu_star).norm_squared()
        - (&model.components[alpha].mu - &source.mu_star).norm_squared();
    if d_mu_sq <= 0.0 {
        return Err(Error::MarginsNotApplicable(format!("d_mu^2 = {d_mu_sq} must be positive")));
    }
    let c4 = 9.0 * r * c_k0(model, source, alpha, beta);
    let decay = c4 * (-d_mu_sq * kf / (8.0 * model.sigma_x * model.sigma_x)).exp();
    let tail = 12.0 * (1.0 + d * tau2) * (-kf.sqrt() / 8.0).exp();
    let growth =
        (1.0 + d * tau2) * (4.0 * kf * kf * delta_w * delta_w * (1.0 + tau2) * (1.0 + tau2)).min(1.0);
    let margins = RetrievalMargins {
        alpha,
        d_mu_sq,
        d_w_sq: f64::NAN,
        u_w_sq: f64::NAN,
        applicable: true,
    };
    Ok(ZeroShotBound {
        k,
        decay,
        tail,
        growth,
        total: decay + tail + growth,
        interval_ok: retrieval_interval_ok(model, source, &margins, k, false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn coarse_bound_arithmetic_and_scaling() {
        let scenario = scenarios::tetrahedron(0.25, 0.25);
        // d=3, tau_x=1, delta_w=1/16, k=64: 4*4/((1/16)^2 * 64^2) = 1.
        let at = |k| coarse_bound(&scenario.prior, &scenario.source, k).unwrap().leading;
        assert_relative_eq!(at(64), 1.0, epsilon = 1e-12);
        assert_relative_eq!(at(32), 4.0 * at(64), epsilon = 1e-12);
    }

    #[test]
    fn coarse_bound_rejects_zero_delta_w() {
        let mut scenario = scenarios::tetrahedron(0.25, 0.25);
        scenario.prior.sigma_w = 0.0;
        assert!(coarse_bound(&scenario.prior, &scenario.source, 8).is_err());
    }

    #[test]
    fn shrinkage_handles_rank_deficiency() {
        // k=0: no spanned directions at all, lambda1 = 1.
        assert_eq!(shrinkage_lambda1(&DMatrix::zeros(3, 3), 0.25), 1.0);
        // Rank-1 gram: use the spanned eigenvalue instead of the zero ones.
        let x = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let gram = &x * x.transpose();
        assert_relative_eq!(shrinkage_lambda1(&gram, 0.25), 1.0 / 2.0, epsilon = 1e-12);
        // Full-rank gram: plain smallest eigenvalue.
        let gram = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 8.0, 16.0]));
        assert_relative_eq!(shrinkage_lambda1(&gram, 0.25), 1.0 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn finegrained_zero_when_prior_matches() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let model = PriorModel {
            dim: 2,
            components: vec![crate::model::PriorComponent {
                weight: 1.0,
                mu: e1.clone(),
                w: e1.clone(),
            }],
            sigma_mu: 0.3,
            sigma_w: 0.3,
            sigma_x: 1.0,
            sigma_y: 1.0,
        };
        let source = InContextSource { mu_star: e1.clone(), w_star: e1, tau_x: 1.0, tau_y: 0.0 };
        let bound = finegrained_bound(&model, &source, 4, 64, StreamSeed::new(2)).unwrap();
        assert_eq!(bound.value, 0.0);
        assert!(bound.distance_capped > 0.0);
    }

    #[test]
    fn retrieval_bound_terms_behave() {
        let scenario = scenarios::tetrahedron_biased(0.05, 0.05);
        let margins = scenarios::compute_margins(&scenario, 0).unwrap();
        let b1 = retrieval_bound(&scenario.prior, &scenario.source, &margins, 1).unwrap();
        let b64 = retrieval_bound(&scenario.prior, &scenario.source, &margins, 64).unwrap();
        let b4096 = retrieval_bound(&scenario.prior, &scenario.source, &margins, 4096).unwrap();
        assert!(b64.decay < b1.decay);
        assert!(b64.growth > b1.growth);
        assert!(b4096.growth <= 4.0 * (1.0 + 3.0) + 1e-12);
        assert_eq!(b1.total, b1.decay + b1.tail + b1.growth);
        assert!(b64.total < b1.total);
    }

    #[test]
    fn retrieval_total_is_nonmonotone_at_small_noise() {
        // The decay-then-growth shape of the summed bound needs the growth
        // cap to sit above the concentration tail, i.e. very small deltas.
        let scenario = scenarios::tetrahedron_biased(0.005, 0.005);
        let margins = scenarios::compute_margins(&scenario, 0).unwrap();
        let total = |k| {
            retrieval_bound(&scenario.prior, &scenario.source, &margins, k).unwrap().total
        };
        assert!(total(3500) < total(64));
        assert!(total(100_000) > total(3500));
    }

    #[test]
    fn retrieval_bound_requires_margins() {
        let scenario = scenarios::tetrahedron_biased(0.05, 0.05);
        let mut margins = scenarios::compute_margins(&scenario, 0).unwrap();
        margins.applicable = false;
        assert!(retrieval_bound(&scenario.prior, &scenario.source, &margins, 8).is_err());
    }

    #[test]
    fn retrieval_interval_shape() {
        // Small task noise opens a window at moderately large k; the window
        // closes again once k exceeds 1/delta - 1.
        let scenario = scenarios::tetrahedron_biased(0.01, 0.01);
        let margins = scenarios::compute_margins(&scenario, 0).unwrap();
        let ok = |k| {
            retrieval_bound(&scenario.prior, &scenario.source, &margins, k).unwrap().interval_ok
        };
        assert!(!ok(8));
        assert!(ok(4096));
        assert!(!ok(20_000));
    }

    #[test]
    fn zero_shot_bound_checks_setting() {
        let good = scenarios::zero_shot_setting(2);
        assert!(zero_shot_bound(&good.prior, &good.source, 32).is_ok());

        let bad = scenarios::tetrahedron(0.25, 0.25);
        assert!(zero_shot_bound(&bad.prior, &bad.source, 32).is_err());

        let mut labeled = good.clone();
        labeled.source.w_star = labeled.prior.components[0].w.clone();
        assert!(zero_shot_bound(&labeled.prior, &labeled.source, 32).is_err());
    }

    #[test]
    fn zero_shot_bound_at_k0() {
        let scenario = scenarios::zero_shot_setting(2);
        let bound = zero_shot_bound(&scenario.prior, &scenario.source, 0).unwrap();
        let d_tau = 1.0 + 2.0;
        assert_relative_eq!(bound.tail, 12.0 * d_tau, epsilon = 1e-12);
        assert_eq!(bound.growth, 0.0);
        assert!(bound.decay > 0.0);
        assert!(!bound.interval_ok);
    }

    #[test]
    fn zero_shot_bound_is_nonmonotone() {
        let mut scenario = scenarios::zero_shot_setting(2);
        let total_at = |scenario: &crate::scenarios::Scenario, k| {
            zero_shot_bound(&scenario.prior, &scenario.source, k).unwrap().total
        };
        // Default noise: the bound decays toward its growth floor.
        assert!(total_at(&scenario, 64) < total_at(&scenario, 1));
        // Small enough noise separates the decay phase from the growth phase.
        scenario.prior.sigma_mu = 0.005;
        scenario.prior.sigma_w = 0.005;
        assert!(total_at(&scenario, 2500) < total_at(&scenario, 64));
        assert!(total_at(&scenario, 100_000) > total_at(&scenario, 2500));
    }
}
