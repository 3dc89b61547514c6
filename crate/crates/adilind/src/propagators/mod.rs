//! The two-parameter evolution families: the driven Schrödinger and Lindblad
//! propagators, Kato parallel transport on both the Hilbert space and the
//! superoperator level, dynamical phases, the adiabatic propagator, and the
//! superadiabatic hierarchy of corrected Hamiltonians.

mod rk;
mod superadiabatic;

pub use rk::{evolve, evolve_to, EvolutionProblem, PropagatorTable, DEFAULT_TOL};
pub use superadiabatic::{
    superadiabatic_frame, superadiabatic_propagator, SuperadiabaticFrame, MAX_ORDER,
};

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::model::{LindbladModel, SpectralFrame};
use crate::operators::Superoperator;
use crate::quad::simpson_refined;

/// Unitary Schrödinger propagator: iε∂_t U = H(t)U.
pub fn schrodinger_propagator(
    model: &LindbladModel,
    eps: f64,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<PropagatorTable> {
    let problem = EvolutionProblem::new("schrodinger", eps, |t| {
        Ok(model
            .hamiltonian
            .eval(t)
            .mapv(|z| Complex64::new(0.0, -1.0) * z))
    });
    evolve(&problem, s, times, tol)
}

/// Driven Lindblad propagator: ε∂_t 𝒰 = (L⁰_t + g L¹_t)𝒰 on vectorized states.
pub fn lindblad_propagator(
    model: &LindbladModel,
    eps: f64,
    g: f64,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<PropagatorTable> {
    let problem = EvolutionProblem::new("lindblad", eps, |t| Ok(model.generator(t, g).mat));
    let mut table = evolve(&problem, s, times, tol)?;
    table.g = Some(g);
    Ok(table)
}

/// Kato parallel transport: ∂_t W = K(t)W with K = Σ_j P'_j P_j.
pub fn kato_transport(
    frame: &SpectralFrame,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<PropagatorTable> {
    let problem = EvolutionProblem::new("kato", 1.0, |t| frame.kato_generator(t));
    evolve(&problem, s, times, tol)
}

/// Superoperator parallel transport: ∂_t 𝒲₀ = [𝒫₀'(t), 𝒫₀(t)]𝒲₀.
pub fn superop_parallel_transport(
    frame: &SpectralFrame,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<PropagatorTable> {
    let problem = EvolutionProblem::new("kato-superop", 1.0, |t| frame.transport_generator(t));
    evolve(&problem, s, times, tol)
}

/// Dynamical phase Φ_ε(t,s) = Σ_j P_j(0) e^{−(i/ε)∫_s^t e_j(r)dr}.
/// Commutes with every P_j(0) by construction. Requires singleton bands.
pub fn dynamical_phase(
    frame: &SpectralFrame,
    eps: f64,
    s: f64,
    times: &[f64],
    tol_unused: f64,
) -> Result<PropagatorTable> {
    let _ = tol_unused;
    let point0 = frame.eval(0.0)?;
    let energies0 = point0.energies()?;
    let e_max = energies0
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
        .max(1.0);
    let mut mats = Vec::with_capacity(times.len());
    for &t in times {
        // ≥ 10 quadrature points per 2π/ε oscillation of the resulting phase
        let n =
            ((10.0 * e_max * (t - s).abs() / (2.0 * std::f64::consts::PI * eps)) as usize).max(32);
        let n = n + n % 2;
        let dim = frame.dim();
        let mut phi = CMat::zeros((dim, dim));
        for (j, p0) in point0.projectors.iter().enumerate() {
            let integral = simpson_refined(
                |u| {
                    frame
                        .eval(u)
                        .and_then(|p| p.energies())
                        .map(|e| e[j])
                        .unwrap_or(f64::NAN)
                },
                s,
                t,
                n,
                1e-12,
            );
            let phase = Complex64::from_polar(1.0, -integral / eps);
            phi = phi + p0.mapv(|z| z * phase);
        }
        mats.push(phi);
    }
    Ok(PropagatorTable {
        family: "phase".into(),
        s,
        times: times.to_vec(),
        mats,
        epsilon: eps,
        g: None,
        tol: 0.0,
        achieved_error: 0.0,
    })
}

/// Adiabatic propagator: iε∂_t V = (H(t) + iεK(t))V. Intertwines the band
/// projectors and approximates the Schrödinger propagator to first order.
pub fn adiabatic_propagator(
    frame: &SpectralFrame,
    eps: f64,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<PropagatorTable> {
    let problem = EvolutionProblem::new("adiabatic", eps, |t| {
        let h = frame.path_eval(t);
        let k = frame.kato_generator(t)?;
        Ok(h.mapv(|z| Complex64::new(0.0, -1.0) * z) + k.mapv(|z| z * eps))
    });
    evolve(&problem, s, times, tol)
}

/// ρ ↦ X ρ X* lifted to a superoperator, for tables of unitary families.
pub fn conjugation_table(table: &PropagatorTable) -> Vec<Superoperator> {
    table.mats.iter().map(Superoperator::conjugation).collect()
}

/// Measured deviation between two tables on the operator level:
/// max_k ‖A_k − B_k‖ (spectral norm).
pub fn table_deviation(a: &PropagatorTable, b: &PropagatorTable) -> f64 {
    a.mats
        .iter()
        .zip(&b.mats)
        .map(|(x, y)| linalg::spectral_norm(&(x - y)))
        .fold(0.0, f64::max)
}

/// Intertwining residual max_k ‖X(t_k,s)P_j(s) − P_j(t_k)X(t_k,s)‖ over all
/// bands, for a table of operators on the Hilbert space.
pub fn intertwining_residual(table: &PropagatorTable, frame: &SpectralFrame) -> Result<f64> {
    let ps = frame.eval(table.s)?;
    let mut worst = 0.0f64;
    for (k, &t) in table.times.iter().enumerate() {
        let pt = frame.eval(t)?;
        let x = &table.mats[k];
        for j in 0..frame.group_count() {
            let r = x.dot(&ps.projectors[j]) - pt.projectors[j].dot(x);
            worst = worst.max(linalg::spectral_norm(&r));
        }
    }
    Ok(worst)
}
