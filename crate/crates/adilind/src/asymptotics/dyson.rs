//! Dyson expansion of the driven Lindblad propagator around the g = 0
//! evolution: 𝒰(t,0) = X⁰(t,0) + Σ_n (g/ε)ⁿ ∫…∫ X⁰ L¹ X⁰ … L¹ X⁰, where the
//! backbone X⁰ is either the exact Hamiltonian evolution or its adiabatic
//! approximation. The iterated integrals are evaluated by one cumulative
//! Simpson pass per order.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::CMat;
use crate::model::{LindbladModel, SpectralFrame};
use crate::operators::Superoperator;
use crate::propagators::{adiabatic_propagator, evolve, schrodinger_propagator, EvolutionProblem};
use crate::quad::cumulative_simpson;

pub const MAX_DYSON_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DysonBasis {
    /// Backbone 𝒰⁰: conjugation by the Schrödinger propagator.
    Exact,
    /// Backbone 𝒱⁰: conjugation by the adiabatic propagator.
    Adiabatic,
}

#[derive(Clone)]
pub struct DysonTermSet {
    pub order: usize,
    pub t: f64,
    pub epsilon: f64,
    pub g: f64,
    pub basis: DysonBasis,
    /// The backbone X⁰(t, 0).
    pub zeroth: Superoperator,
    /// terms[n-1] is the n-th iterated integral including its (g/ε)ⁿ factor.
    pub terms: Vec<Superoperator>,
    /// Sampled sup of the dissipator's induced trace norm over [0, t].
    pub l1_sup: f64,
}

impl DysonTermSet {
    /// X⁰ + terms up to order n.
    pub fn partial_sum(&self, n: usize) -> Superoperator {
        let mut acc = self.zeroth.clone();
        for term in self.terms.iter().take(n) {
            acc = acc.add(term);
        }
        acc
    }

    /// ((g/ε) L₁ t)ⁿ / n!, the a-priori bound on the n-th term.
    pub fn term_norm_bound(&self, n: usize) -> f64 {
        let x: f64 = (self.g / self.epsilon) * self.l1_sup * self.t;
        x.powi(n as i32) / (1..=n).product::<usize>() as f64
    }
}

/// The iterated Dyson integrals through order `order` at time `t`, refined by
/// grid doubling until the relative change of every term drops below 1e-7.
pub fn dyson_terms(
    model: &LindbladModel,
    frame: &SpectralFrame,
    eps: f64,
    g: f64,
    t: f64,
    order: usize,
    basis: DysonBasis,
    tol: f64,
) -> Result<DysonTermSet> {
    assert!(
        order <= MAX_DYSON_ORDER,
        "Dyson order {order} > {MAX_DYSON_ORDER}"
    );
    let mut n_intervals = 128usize;
    let mut prev = dyson_terms_on_grid(model, frame, eps, g, t, order, basis, n_intervals, tol)?;
    for _ in 0..4 {
        n_intervals *= 2;
        let next = dyson_terms_on_grid(model, frame, eps, g, t, order, basis, n_intervals, tol)?;
        let mut rel = 0.0f64;
        for (a, b) in prev.terms.iter().zip(&next.terms) {
            let scale = crate::linalg::max_abs(&b.mat).max(1e-300);
            rel = rel.max(crate::linalg::max_abs(&(&a.mat - &b.mat)) / scale);
        }
        prev = next;
        if rel <= 1e-7 {
            break;
        }
    }
    Ok(prev)
}

#[allow(clippy::too_many_arguments)]
fn dyson_terms_on_grid(
    model: &LindbladModel,
    frame: &SpectralFrame,
    eps: f64,
    g: f64,
    t: f64,
    order: usize,
    basis: DysonBasis,
    n_intervals: usize,
    tol: f64,
) -> Result<DysonTermSet> {
    let d = model.dim;
    let n_nodes = n_intervals + 1;
    let h = t / n_intervals as f64;
    let nodes: Vec<f64> = (0..n_nodes).map(|k| k as f64 * h).collect();

    let backbone = match basis {
        DysonBasis::Exact => schrodinger_propagator(model, eps, 0.0, &nodes, tol)?,
        DysonBasis::Adiabatic => adiabatic_propagator(frame, eps, 0.0, &nodes, tol)?,
    };

    // B(u) = X⁰(0,u) ∘ L¹_u ∘ X⁰(u,0), plus the dissipator norm samples
    let mut b_samples: Vec<CMat> = Vec::with_capacity(n_nodes);
    let mut l1_sup = 0.0f64;
    for (k, &u) in nodes.iter().enumerate() {
        let x = &backbone.mats[k];
        let fwd = Superoperator::conjugation(x);
        let bwd = Superoperator::conjugation(&crate::linalg::dagger(x));
        let l1 = Superoperator::dissipator(&model.jump_mats(u));
        l1_sup = l1_sup.max(superop_norm_rough(&l1));
        b_samples.push(bwd.compose(&l1).compose(&fwd).mat);
    }

    // Ĩ_n(u) = ∫₀ᵘ B(s) Ĩ_{n-1}(s) ds with Ĩ_0 = I; the n-th Dyson term is
    // (g/ε)ⁿ X⁰(t,0) Ĩ_n(t).
    let mut terms = Vec::with_capacity(order);
    let mut current: Vec<CMat> = vec![crate::linalg::identity(d * d); n_nodes];
    let x_t = Superoperator::conjugation(&backbone.mats[n_nodes - 1]);
    for n in 1..=order {
        let integrand: Vec<CMat> = b_samples
            .iter()
            .zip(&current)
            .map(|(b, i)| b.dot(i))
            .collect();
        current = cumulative_simpson(&integrand, h);
        let factor = Complex64::new((g / eps).powi(n as i32), 0.0);
        let term = x_t
            .compose(&Superoperator::from_matrix(
                d,
                current[n_nodes - 1].clone(),
            )?)
            .scale(factor);
        terms.push(term);
    }

    Ok(DysonTermSet {
        order,
        t,
        epsilon: eps,
        g,
        basis,
        zeroth: x_t,
        terms,
        l1_sup,
    })
}

/// Cheap deterministic estimate of the induced trace norm of a superoperator
/// (basis matrices only; enough for the a-priori Dyson bounds).
fn superop_norm_rough(s: &Superoperator) -> f64 {
    let d = s.dim;
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let x = crate::operators::basis_matrix(d, r, c);
            worst = worst.max(crate::operators::trace_norm(&s.apply(&x)).unwrap_or(f64::NAN));
        }
    }
    worst
}

/// The order-n reduced chain ∫…∫ 𝒲₀(t,s₁)𝒫₀(s₁)L¹_{s₁} ⋯ 𝒲₀(s_n,0)𝒫₀(0):
/// the ε-independent limit of the diagonal part of the n-th Dyson integral
/// (without the (g/ε)ⁿ factor), and simultaneously the n-th Dyson term of the
/// reduced dynamics.
pub fn reduced_dyson_term(
    model: &LindbladModel,
    frame: &SpectralFrame,
    t: f64,
    order: usize,
    n_intervals: usize,
    tol: f64,
) -> Result<Superoperator> {
    let d = model.dim;
    let n_nodes = n_intervals + 1 + (n_intervals + 1) % 2;
    let h = t / (n_nodes - 1) as f64;
    let nodes: Vec<f64> = (0..n_nodes).map(|k| k as f64 * h).collect();

    let problem = EvolutionProblem::new("kato-superop", 1.0, |u| frame.transport_generator(u));
    let w0 = evolve(&problem, 0.0, &nodes, tol)?;

    let p00 = frame.pinching(0.0)?;
    let mut current: Vec<CMat> = vec![p00.mat.clone(); n_nodes];
    for _ in 1..=order {
        let mut integrand = Vec::with_capacity(n_nodes);
        for (k, &u) in nodes.iter().enumerate() {
            let w = Superoperator::from_matrix(d, w0.mats[k].clone())?;
            let l1 = Superoperator::dissipator(&model.jump_mats(u));
            let p0u = frame.pinching(u)?;
            let b = w.inv()?.compose(&p0u).compose(&l1).compose(&w);
            integrand.push(b.mat.dot(&current[k]));
        }
        current = cumulative_simpson(&integrand, h);
    }
    let w_t = Superoperator::from_matrix(d, w0.mats[n_nodes - 1].clone())?;
    Ok(w_t.compose(&Superoperator::from_matrix(
        d,
        current[n_nodes - 1].clone(),
    )?))
}
