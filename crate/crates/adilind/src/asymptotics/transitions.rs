//! Leading-order transition probabilities between instantaneous bands: the
//! purely Hamiltonian ε² term, the dissipator-driven (g/ε) history integral,
//! and the coherence asymptotics of the g = 0 evolution.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{LindbladModel, SpectralFrame};
use crate::propagators::{kato_transport, PropagatorTable, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransitionTerms {
    /// ε² Tr{P_k(t)P_k'(t) ρ̃_j(t) P_k'(t)P_k(t)} / (e_j(t)−e_k(t))².
    pub hamiltonian_term: f64,
    /// (g/ε) Σ_l ∫₀ᵗ Tr(P_k(s)Γ_l(s) ρ̃_j(s) Γ_l*(s)P_k(s)) ds; nonnegative.
    pub dissipator_term: f64,
    pub total: f64,
}

/// Parallel-transported initial state ρ̃_j(s) = W(s,0) ρ_j W(0,s) on a grid.
struct TransportedState<'a> {
    w: PropagatorTable,
    rho: &'a CMat,
}

impl TransportedState<'_> {
    fn at(&self, s: f64) -> Result<CMat> {
        let w = self.w.at(s)?;
        Ok(w.dot(self.rho).dot(&linalg::dagger(w)))
    }
}

fn check_band_state(rho: &CMat, p: &CMat) -> Result<()> {
    let projected = p.dot(rho).dot(p);
    if linalg::max_abs(&(&projected - rho)) > 1e-9 {
        return Err(Error::Invariant(
            "initial state is not supported on band j at t = 0".into(),
        ));
    }
    Ok(())
}

/// Both leading contributions to Tr(P_k(t) 𝒰(t,0)(ρ_j)) for j ≠ k, with
/// ρ_j = P_j(0)ρ_jP_j(0). Requires singleton bands j and k.
#[allow(clippy::too_many_arguments)]
pub fn perturbative_transition(
    model: &LindbladModel,
    frame: &SpectralFrame,
    eps: f64,
    g: f64,
    t: f64,
    j: usize,
    k: usize,
    rho_j: &CMat,
) -> Result<TransitionTerms> {
    assert_ne!(j, k);
    let point0 = frame.eval(0.0)?;
    check_band_state(rho_j, &point0.projectors[j])?;

    // dissipator integral on the transport grid, doubled until stable;
    // every sample is the trace of P Γ ρ̃ Γ* P ⪰ 0
    let integral_on = |n_intervals: usize| -> Result<f64> {
        let nodes: Vec<f64> = (0..=n_intervals)
            .map(|i| t * i as f64 / n_intervals as f64)
            .collect();
        let w = kato_transport(frame, 0.0, &nodes, DEFAULT_TOL)?;
        let transported = TransportedState { w, rho: rho_j };
        let h = t / n_intervals as f64;
        let mut acc = 0.0;
        for (i, &s) in nodes.iter().enumerate() {
            let point = frame.eval(s)?;
            let rho = transported.at(s)?;
            let pk = &point.projectors[k];
            let mut val = 0.0;
            for jump in &model.jumps {
                let gamma = jump.eval(s);
                val += linalg::trace(
                    &pk.dot(&gamma)
                        .dot(&rho)
                        .dot(&linalg::dagger(&gamma))
                        .dot(pk),
                )
                .re;
            }
            let weight = if i == 0 || i == n_intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += weight * val;
        }
        Ok(acc * h / 3.0)
    };
    let mut n_intervals = 128;
    let mut integral = integral_on(n_intervals)?;
    for _ in 0..4 {
        n_intervals *= 2;
        let next = integral_on(n_intervals)?;
        let stable = (next - integral).abs() <= 1e-9 * next.abs().max(1e-12);
        integral = next;
        if stable {
            break;
        }
    }
    let dissipator_term = (g / eps) * integral;

    let w = kato_transport(frame, 0.0, &[t], DEFAULT_TOL)?;
    let transported = TransportedState { w, rho: rho_j };
    let hamiltonian_term = hamiltonian_transition_at(frame, eps, t, j, k, &transported.at(t)?)?;

    Ok(TransitionTerms {
        hamiltonian_term,
        dissipator_term,
        total: hamiltonian_term + dissipator_term,
    })
}

fn hamiltonian_transition_at(
    frame: &SpectralFrame,
    eps: f64,
    t: f64,
    j: usize,
    k: usize,
    rho_tilde_t: &CMat,
) -> Result<f64> {
    let point = frame.eval(t)?;
    let energies = point.energies()?;
    let pk = &point.projectors[k];
    let dpk = frame.projector_derivative(k, t)?;
    let num = pk.dot(&dpk).dot(rho_tilde_t).dot(&dpk).dot(pk);
    let denom = (energies[j] - energies[k]).powi(2);
    Ok(eps * eps * linalg::trace(&num).re / denom)
}

/// The purely Hamiltonian adiabatic transition probability,
/// ε² Tr{P_k P_k' ρ̃_j P_k' P_k}/(e_j−e_k)², evaluated from frame data.
pub fn hamiltonian_transition(
    frame: &SpectralFrame,
    eps: f64,
    t: f64,
    j: usize,
    k: usize,
    rho_j: &CMat,
) -> Result<f64> {
    let point0 = frame.eval(0.0)?;
    check_band_state(rho_j, &point0.projectors[j])?;
    let w = kato_transport(frame, 0.0, &[t], DEFAULT_TOL)?;
    let wt = w.end();
    let rho_tilde = wt.dot(rho_j).dot(&linalg::dagger(wt));
    hamiltonian_transition_at(frame, eps, t, j, k, &rho_tilde)
}

/// Leading-order coherence block P_n(t) 𝒰⁰(t,0)(ρ_j) P_m(t) for n ≠ m:
/// of order ε when n = j or m = j, of order ε² otherwise.
#[allow(clippy::too_many_arguments)]
pub fn coherence_estimate(
    frame: &SpectralFrame,
    eps: f64,
    t: f64,
    j: usize,
    n: usize,
    m: usize,
    rho_j: &CMat,
) -> Result<CMat> {
    assert_ne!(n, m);
    let point0 = frame.eval(0.0)?;
    check_band_state(rho_j, &point0.projectors[j])?;
    let w = kato_transport(frame, 0.0, &[t], DEFAULT_TOL)?;
    let wt = w.end();
    let rho_tilde = wt.dot(rho_j).dot(&linalg::dagger(wt));
    let point = frame.eval(t)?;
    let e = point.energies()?;

    if n == j {
        // iε ρ̃_j P_m' P_m / (e_m − e_j)
        let dpm = frame.projector_derivative(m, t)?;
        let out = rho_tilde.dot(&dpm).dot(&point.projectors[m]);
        return Ok(out.mapv(|z| Complex64::new(0.0, eps / (e[m] - e[j])) * z));
    }
    if m == j {
        // adjoint of the n = j branch with n ↔ m
        let other = coherence_estimate(frame, eps, t, j, m, n, rho_j)?;
        return Ok(linalg::dagger(&other));
    }
    // ε² P_n P_n' ρ̃_j P_m' P_m / ((e_j−e_n)(e_j−e_m))
    let dpn = frame.projector_derivative(n, t)?;
    let dpm = frame.projector_derivative(m, t)?;
    let out = point.projectors[n]
        .dot(&dpn)
        .dot(&rho_tilde)
        .dot(&dpm)
        .dot(&point.projectors[m]);
    let denom = (e[j] - e[n]) * (e[j] - e[m]);
    Ok(out.mapv(|z| z * (eps * eps / denom)))
}
