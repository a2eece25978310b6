//! Named experiment presets: prior geometry plus a matching in-context task.
//!
//! Regular-polyhedron priors place the component centers on the unit sphere
//! in `d = 3`; basis priors use the standard basis in `d = M`; the
//! early-ascent priors place the in-context input distribution on one
//! component and the in-context function on another; the zero-shot prior is
//! an antipodal pair probed with all-zero labels.
//!
//! Polyhedron coordinates are fixed to one canonical orientation — the model
//! is isotropic, so any rotation is equivalent, and pinned constants keep
//! tests deterministic.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{InContextSource, PriorComponent, PriorModel};
use crate::risk::RetrievalMargins;
use crate::Result;

/// A reproducible experimental configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub prior: PriorModel,
    pub source: InContextSource,
    /// Target component for biased-label (retrieval) experiments, 0-based.
    pub retrieval_alpha: Option<usize>,
    pub notes: String,
}

fn vec3(x: f64, y: f64, z: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y, z])
}

fn normalize(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    v / n
}

fn components_from_vertices(vertices: &[DVector<f64>]) -> Vec<PriorComponent> {
    let weight = 1.0 / vertices.len() as f64;
    vertices
        .iter()
        .map(|v| PriorComponent { weight, mu: v.clone(), w: v.clone() })
        .collect()
}

/// Moves the nearest neighbor of `vertices[0]` into position 1 (ties broken
/// by lowest index), so the `2w_1 + w_2` task formula always mixes adjacent
/// centers.
fn promote_nearest_neighbor(vertices: &mut [DVector<f64>]) {
    let mut best = 1;
    let mut best_dot = f64::NEG_INFINITY;
    for (j, v) in vertices.iter().enumerate().skip(1) {
        let dot = vertices[0].dot(v);
        if dot > best_dot + 1e-12 {
            best = j;
            best_dot = dot;
        }
    }
    vertices.swap(1, best);
}

fn tetrahedron_vertices() -> Vec<DVector<f64>> {
    vec![
        vec3(0.0, 0.0, -1.0),
        vec3((8.0f64 / 9.0).sqrt(), 0.0, 1.0 / 3.0),
        vec3(-(2.0f64 / 9.0).sqrt(), (2.0f64 / 3.0).sqrt(), 1.0 / 3.0),
        vec3(-(2.0f64 / 9.0).sqrt(), -(2.0f64 / 3.0).sqrt(), 1.0 / 3.0),
    ]
}

fn octahedron_vertices() -> Vec<DVector<f64>> {
    vec![
        vec3(1.0, 0.0, 0.0),
        vec3(0.0, 1.0, 0.0),
        vec3(0.0, 0.0, 1.0),
        vec3(-1.0, 0.0, 0.0),
        vec3(0.0, -1.0, 0.0),
        vec3(0.0, 0.0, -1.0),
    ]
}

fn hexahedron_vertices() -> Vec<DVector<f64>> {
    let s = 1.0 / 3.0f64.sqrt();
    let mut vertices = Vec::with_capacity(8);
    for &x in &[1.0, -1.0] {
        for &y in &[1.0, -1.0] {
            for &z in &[1.0, -1.0] {
                vertices.push(vec3(s * x, s * y, s * z));
            }
        }
    }
    vertices
}

fn icosahedron_vertices() -> Vec<DVector<f64>> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let n = (1.0 + phi * phi).sqrt();
    let mut vertices = Vec::with_capacity(12);
    for &a in &[1.0, -1.0] {
        for &b in &[1.0, -1.0] {
            vertices.push(vec3(0.0, a / n, b * phi / n));
            vertices.push(vec3(a / n, b * phi / n, 0.0));
            vertices.push(vec3(a * phi / n, 0.0, b / n));
        }
    }
    vertices
}

fn dodecahedron_vertices() -> Vec<DVector<f64>> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let s = 1.0 / 3.0f64.sqrt();
    let mut vertices = hexahedron_vertices();
    for &a in &[1.0, -1.0] {
        for &b in &[1.0, -1.0] {
            vertices.push(vec3(0.0, s * a / phi, s * b * phi));
            vertices.push(vec3(s * a / phi, s * b * phi, 0.0));
            vertices.push(vec3(s * a * phi, 0.0, s * b / phi));
        }
    }
    vertices
}

fn polyhedron_prior(vertices: Vec<DVector<f64>>, sigma_mu: f64, sigma_w: f64) -> PriorModel {
    PriorModel {
        dim: 3,
        components: components_from_vertices(&vertices),
        sigma_mu,
        sigma_w,
        sigma_x: 1.0,
        sigma_y: 1.0,
    }
}

fn mix_task(components: &[PriorComponent], coefficients: &[(usize, f64)]) -> InContextSource {
    let d = components[0].mu.len();
    let mut mu = DVector::zeros(d);
    let mut w = DVector::zeros(d);
    for &(m, c) in coefficients {
        mu += c * &components[m].mu;
        w += c * &components[m].w;
    }
    InContextSource { mu_star: normalize(mu), w_star: normalize(w), tau_x: 1.0, tau_y: 0.0 }
}

/// Tetrahedron prior with the visualization task `normalize(2w_1+w_2+0.2w_3)`.
pub fn tetrahedron(sigma_mu: f64, sigma_w: f64) -> Scenario {
    let prior = polyhedron_prior(tetrahedron_vertices(), sigma_mu, sigma_w);
    let source = mix_task(&prior.components, &[(0, 2.0), (1, 1.0), (2, 0.2)]);
    Scenario {
        name: "tetrahedron".into(),
        prior,
        source,
        retrieval_alpha: None,
        notes: "d=3 regular tetrahedron; task shifted slightly toward component 3".into(),
    }
}

/// Tetrahedron prior with the plain task `normalize(2w_1+w_2)` and component 1
/// as the retrieval target (the biased-label configuration).
pub fn tetrahedron_biased(sigma_mu: f64, sigma_w: f64) -> Scenario {
    let mut scenario = regular_polyhedron(4, sigma_mu, sigma_w).expect("tetrahedron exists");
    scenario.name = "tetrahedron-biased".into();
    scenario.retrieval_alpha = Some(0);
    annotate_margins(&mut scenario);
    scenario
}

/// Regular polyhedron prior with `M ∈ {4, 6, 8, 12, 20}` vertices and the
/// task `normalize(2w_1+w_2)` where component 2 is a nearest neighbor of
/// component 1.
pub fn regular_polyhedron(m: usize, sigma_mu: f64, sigma_w: f64) -> Result<Scenario> {
    let (name, mut vertices) = match m {
        4 => ("tetrahedron-plain", tetrahedron_vertices()),
        6 => ("octahedron", octahedron_vertices()),
        8 => ("hexahedron", hexahedron_vertices()),
        12 => ("icosahedron", icosahedron_vertices()),
        20 => ("dodecahedron", dodecahedron_vertices()),
        other => return Err(Error::UnsupportedPolyhedron(other)),
    };
    promote_nearest_neighbor(&mut vertices);
    let prior = polyhedron_prior(vertices, sigma_mu, sigma_w);
    let source = mix_task(&prior.components, &[(0, 2.0), (1, 1.0)]);
    Ok(Scenario {
        name: name.into(),
        prior,
        source,
        retrieval_alpha: None,
        notes: format!("d=3 regular polyhedron with {m} unit-norm centers"),
    })
}

/// Standard-basis prior in `d` dimensions: `M = d`, `μ_m = w_m = e_m`,
/// task `normalize(2w_1+w_2)`. Dimensions outside {2,4,8,16,32} are allowed
/// but noted as off-preset.
pub fn basis_setting(d: usize) -> Scenario {
    let components = (0..d)
        .map(|m| {
            let mut e = DVector::zeros(d);
            e[m] = 1.0;
            PriorComponent { weight: 1.0 / d as f64, mu: e.clone(), w: e }
        })
        .collect();
    let prior = PriorModel {
        dim: d,
        components,
        sigma_mu: 0.25,
        sigma_w: 0.25,
        sigma_x: 1.0,
        sigma_y: 1.0,
    };
    let source = mix_task(&prior.components, &[(0, 2.0), (1, 1.0)]);
    let mut notes = format!("standard-basis prior in d={d}");
    if ![2, 4, 8, 16, 32].contains(&d) {
        notes.push_str("; warning: dimension outside the documented set {2,4,8,16,32}");
    }
    Scenario {
        name: format!("basis-{d}"),
        prior,
        source,
        retrieval_alpha: None,
        notes,
    }
}

/// Misleading-input prior: the in-context inputs match component 1 while the
/// in-context function matches component 2. Center norms are √d for d ≥ 2,
/// so these presets only pass relaxed validation.
pub fn early_ascent(d: usize) -> Scenario {
    assert!(d >= 1, "dimension must be positive");
    let ones = DVector::from_element(d, 1.0);
    let components = if d == 1 {
        vec![
            PriorComponent {
                weight: 0.5,
                mu: DVector::from_element(1, 1.0),
                w: DVector::from_element(1, -1.0),
            },
            PriorComponent {
                weight: 0.5,
                mu: DVector::from_element(1, -1.0),
                w: DVector::from_element(1, 1.0),
            },
        ]
    } else {
        let mut mu3 = -&ones;
        mu3[0] = 1.0;
        let mut w3 = ones.clone();
        w3[0] = -1.0;
        vec![
            PriorComponent { weight: 1.0 / 3.0, mu: ones.clone(), w: -&ones },
            PriorComponent { weight: 1.0 / 3.0, mu: -&ones, w: ones.clone() },
            PriorComponent { weight: 1.0 / 3.0, mu: mu3, w: w3 },
        ]
    };
    let prior = PriorModel {
        dim: d,
        components,
        sigma_mu: 0.05,
        sigma_w: 0.05,
        sigma_x: 1.0,
        sigma_y: 2.0,
    };
    let source = InContextSource {
        mu_star: ones.clone(),
        w_star: ones,
        tau_x: 1.0,
        tau_y: 0.0,
    };
    Scenario {
        name: format!("early-ascent-{d}"),
        prior,
        source,
        retrieval_alpha: None,
        notes: "inputs follow the misleading component 1; labels follow component 2".into(),
    }
}

/// Antipodal two-component prior probed with all-zero labels (`w* = 0`,
/// `μ* = μ_1`); component 1 is the retrieval target.
pub fn zero_shot_setting(d: usize) -> Scenario {
    assert!(d >= 1, "dimension must be positive");
    let mut e1 = DVector::zeros(d);
    e1[0] = 1.0;
    let prior = PriorModel {
        dim: d,
        components: vec![
            PriorComponent { weight: 0.5, mu: e1.clone(), w: e1.clone() },
            PriorComponent { weight: 0.5, mu: -&e1, w: -&e1 },
        ],
        sigma_mu: 0.05,
        sigma_w: 0.05,
        sigma_x: 1.0,
        sigma_y: 1.0,
    };
    let source = InContextSource {
        mu_star: e1,
        w_star: DVector::zeros(d),
        tau_x: 1.0,
        tau_y: 0.0,
    };
    let mut scenario = Scenario {
        name: format!("zero-shot-{d}"),
        prior,
        source,
        retrieval_alpha: Some(0),
        notes: "antipodal pair; labels identically zero (w* = 0)".into(),
    };
    annotate_margins(&mut scenario);
    scenario
}

/// Tight retrieval margins of a scenario for target component `alpha`
/// (0-based). Negative margins are returned as-is with `applicable = false`.
pub fn compute_margins(scenario: &Scenario, alpha: usize) -> Result<RetrievalMargins> {
    let prior = &scenario.prior;
    let source = &scenario.source;
    let m_count = prior.n_components();
    if alpha >= m_count {
        return Err(Error::ComponentIndex { index: alpha, count: m_count });
    }
    if m_count < 2 {
        return Err(Error::MarginsNotApplicable(
            "margins need at least two components".into(),
        ));
    }
    let tau2 = source.tau_x * source.tau_x;
    let mu_dist =
        |m: usize| (&prior.components[m].mu - &source.mu_star).norm_squared();
    let w_dist = |m: usize| (&prior.components[m].w - &source.w_star).norm_squared();
    let mut d_mu_sq = f64::INFINITY;
    let mut d_w_sq = f64::INFINITY;
    let mut u_w_sq = f64::INFINITY;
    for beta in 0..m_count {
        if beta == alpha {
            continue;
        }
        d_mu_sq = d_mu_sq.min(mu_dist(beta) - mu_dist(alpha));
        d_w_sq = d_w_sq.min(w_dist(beta) - w_dist(alpha));
        u_w_sq = u_w_sq.min((tau2 * w_dist(beta) - (1.0 + tau2) * w_dist(alpha)) / tau2);
    }
    Ok(RetrievalMargins {
        alpha,
        d_mu_sq,
        d_w_sq,
        u_w_sq,
        applicable: d_mu_sq > 0.0 && d_w_sq > 0.0 && u_w_sq > 0.0,
    })
}

fn annotate_margins(scenario: &mut Scenario) {
    if let Some(alpha) = scenario.retrieval_alpha {
        if let Ok(margins) = compute_margins(scenario, alpha) {
            scenario.notes.push_str(&format!(
                "; margins: d_mu^2={:.4}, d_w^2={:.4}, u_w^2={:.4}, applicable={}",
                margins.d_mu_sq, margins.d_w_sq, margins.u_w_sq, margins.applicable
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tetrahedron_geometry() {
        let scenario = tetrahedron(0.25, 0.25);
        for c in &scenario.prior.components {
            assert_relative_eq!(c.mu.norm(), 1.0, epsilon = 1e-12);
        }
        // Pairwise distances all equal for a regular tetrahedron.
        let mut distances = Vec::new();
        for a in 0..4 {
            for b in (a + 1)..4 {
                distances.push(
                    (&scenario.prior.components[a].mu - &scenario.prior.components[b].mu).norm(),
                );
            }
        }
        for d in &distances {
            assert_relative_eq!(*d, distances[0], epsilon = 1e-12);
        }
        // Component 1 is the nearest center to the in-context task.
        let dots: Vec<f64> = scenario
            .prior
            .components
            .iter()
            .map(|c| c.mu.dot(&scenario.source.mu_star))
            .collect();
        for m in 1..4 {
            assert!(dots[0] > dots[m], "dots: {dots:?}");
        }
    }

    #[test]
    fn octahedron_is_canonical() {
        let scenario = regular_polyhedron(6, 0.25, 0.25).unwrap();
        for c in &scenario.prior.components {
            assert_relative_eq!(c.mu.norm(), 1.0, epsilon = 1e-12);
            assert_eq!(c.mu.iter().filter(|v| v.abs() > 1e-12).count(), 1);
        }
        // Second vertex must be adjacent (dot 0), not antipodal.
        let dot = scenario.prior.components[0].mu.dot(&scenario.prior.components[1].mu);
        assert_relative_eq!(dot, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn polyhedron_nearest_angles() {
        // Canonical nearest-neighbor cosines: icosahedron 1/sqrt(5),
        // dodecahedron sqrt(5)/3, hexahedron 1/3.
        for (m, expected) in [(8, 1.0 / 3.0), (12, 1.0 / 5.0f64.sqrt()), (20, 5.0f64.sqrt() / 3.0)]
        {
            let scenario = regular_polyhedron(m, 0.25, 0.25).unwrap();
            let v0 = &scenario.prior.components[0].mu;
            let max_dot = scenario
                .prior
                .components
                .iter()
                .skip(1)
                .map(|c| v0.dot(&c.mu))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_relative_eq!(max_dot, expected, epsilon = 1e-9);
            for c in &scenario.prior.components {
                assert_relative_eq!(c.mu.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_polyhedron_errors() {
        assert!(matches!(
            regular_polyhedron(5, 0.25, 0.25),
            Err(Error::UnsupportedPolyhedron(5))
        ));
    }

    #[test]
    fn basis_setting_geometry() {
        let scenario = basis_setting(2);
        let expected = DVector::from_vec(vec![2.0, 1.0]) / 5.0f64.sqrt();
        assert_relative_eq!(scenario.source.w_star, expected, epsilon = 1e-12);
        for a in 0..2 {
            for b in (a + 1)..2 {
                assert_eq!(
                    scenario.prior.components[a].mu.dot(&scenario.prior.components[b].mu),
                    0.0
                );
            }
        }
        let margins = compute_margins(&scenario, 0).unwrap();
        assert!(margins.d_mu_sq > 0.0);
    }

    #[test]
    fn early_ascent_presets() {
        let d1 = early_ascent(1);
        assert_eq!(d1.source.w_star, d1.prior.components[1].w);
        assert_eq!(d1.source.mu_star, d1.prior.components[0].mu);

        let d2 = early_ascent(2);
        assert_eq!(d2.prior.n_components(), 3);
        assert_eq!(d2.source.mu_star, d2.prior.components[0].mu);
        assert_eq!(d2.source.w_star, d2.prior.components[1].w);
        assert_eq!(d2.prior.components[2].mu, DVector::from_vec(vec![1.0, -1.0]));
        assert_eq!(d2.prior.components[2].w, DVector::from_vec(vec![-1.0, 1.0]));
    }

    #[test]
    fn zero_shot_margins_and_labels() {
        let scenario = zero_shot_setting(2);
        let margins = compute_margins(&scenario, 0).unwrap();
        // Antipodal unit centers with mu* = mu_1: the gap is 4<mu_1, mu*> = 4.
        assert_relative_eq!(margins.d_mu_sq, 4.0, epsilon = 1e-12);
        // w* = 0 and equal-norm w's puts d_w^2 on the zero boundary.
        assert_relative_eq!(margins.d_w_sq, 0.0, epsilon = 1e-12);
        assert!(!margins.applicable);

        let (prompt, _) = crate::model::sample_incontext_prompt(
            &scenario.source,
            16,
            &mut crate::rng::StreamSeed::new(1).rng(),
        );
        assert!(prompt.ys.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn farthest_alpha_flags_inapplicable() {
        let scenario = tetrahedron_biased(0.05, 0.05);
        // Components 3/4 are farthest from the task; margins go negative.
        let margins = compute_margins(&scenario, 2).unwrap();
        assert!(margins.d_mu_sq < 0.0);
        assert!(!margins.applicable);
        // The designated alpha = 1 has all margins positive.
        let margins = compute_margins(&scenario, 0).unwrap();
        assert!(margins.applicable, "{margins:?}");
    }

    #[test]
    fn single_component_margins_error() {
        let mut scenario = basis_setting(2);
        scenario.prior.components.truncate(1);
        assert!(compute_margins(&scenario, 0).is_err());
    }
}
