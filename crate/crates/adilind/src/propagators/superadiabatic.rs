//! Superadiabatic hierarchy: iterated corrected Hamiltonians
//! H⁰ = H, Hᑫ = H − iεKᑫ⁻¹, with band projectors Pᑫ_j of Hᑫ and transport
//! generators Kᑫ = Σ_j (Pᑫ_j)' Pᑫ_j. Since every Kᑫ is anti-Hermitian, each
//! Hᑫ is Hermitian and its bands follow the base frame's bands for ε small
//! enough; the construction detects the ε threshold at runtime by requiring
//! the corrected gap to stay above half the base gap.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::SpectralFrame;

use super::{evolve, EvolutionProblem, PropagatorTable};

pub const MAX_ORDER: usize = 3;

#[derive(Clone)]
pub struct SuperadiabaticFrame {
    pub order: usize,
    pub epsilon: f64,
    base: SpectralFrame,
    fd_step: f64,
}

/// Build the order-q frame, verifying gap preservation of Hᑫ on the grid.
pub fn superadiabatic_frame(
    base: &SpectralFrame,
    eps: f64,
    order: usize,
) -> Result<SuperadiabaticFrame> {
    if order > MAX_ORDER {
        return Err(Error::OutOfRange(format!(
            "superadiabatic order {order} > {MAX_ORDER}"
        )));
    }
    let frame = SuperadiabaticFrame {
        order,
        epsilon: eps,
        base: base.clone(),
        fd_step: base.fd_step(),
    };
    let floor = base.gap / 2.0;
    // grid scan is enough: the data is smooth on the grid scale
    let stride = (base.grid.len() / 40).max(1);
    for &t in base.grid.iter().step_by(stride) {
        for level in 1..=order {
            let h = frame.hamiltonian_level(level, t)?;
            let (vals, vecs) = linalg::eigh(&h)?;
            let point =
                base.label_decomposition(t, &vals, &vecs)
                    .map_err(|_| Error::GapCollapse {
                        order: level,
                        t,
                        gap: 0.0,
                        floor,
                    })?;
            let gap = point.gap();
            if gap < floor {
                return Err(Error::GapCollapse {
                    order: level,
                    t,
                    gap,
                    floor,
                });
            }
        }
    }
    Ok(frame)
}

impl SuperadiabaticFrame {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &SpectralFrame {
        &self.base
    }

    fn hamiltonian_level(&self, level: usize, t: f64) -> Result<CMat> {
        let h = self.base.path_eval(t);
        if level == 0 {
            return Ok(h);
        }
        let k = self.kato_level(level - 1, t)?;
        Ok(h + k.mapv(|z| Complex64::new(0.0, -self.epsilon) * z))
    }

    fn projectors_level(&self, level: usize, t: f64) -> Result<Vec<CMat>> {
        if level == 0 {
            return Ok(self.base.eval(t)?.projectors);
        }
        let h = self.hamiltonian_level(level, t)?;
        let (vals, vecs) = linalg::eigh(&h)?;
        Ok(self.base.label_decomposition(t, &vals, &vecs)?.projectors)
    }

    fn kato_level(&self, level: usize, t: f64) -> Result<CMat> {
        if level == 0 {
            return self.base.kato_generator(t);
        }
        let h = self.fd_step;
        let d = self.dim();
        let pm2 = self.projectors_level(level, t - 2.0 * h)?;
        let pm1 = self.projectors_level(level, t - h)?;
        let pp1 = self.projectors_level(level, t + h)?;
        let pp2 = self.projectors_level(level, t + 2.0 * h)?;
        let pt = self.projectors_level(level, t)?;
        let mut k = CMat::zeros((d, d));
        for j in 0..pt.len() {
            let dp = (&pm2[j] - &pm1[j].mapv(|z| 8.0 * z) + pp1[j].mapv(|z| 8.0 * z) - &pp2[j])
                .mapv(|z| z / (12.0 * h));
            k = k + dp.dot(&pt[j]);
        }
        Ok(k)
    }

    /// Hᑫ(t) = H(t) − iεKᑫ⁻¹(t); Hermitian.
    pub fn hamiltonian(&self, t: f64) -> Result<CMat> {
        self.hamiltonian_level(self.order, t)
    }

    /// Band projectors of Hᑫ(t), labeled like the base frame.
    pub fn projectors(&self, t: f64) -> Result<Vec<CMat>> {
        self.projectors_level(self.order, t)
    }

    /// Kᑫ(t) = Σ_j (Pᑫ_j)'(t) Pᑫ_j(t); anti-Hermitian.
    pub fn kato(&self, t: f64) -> Result<CMat> {
        self.kato_level(self.order, t)
    }

    /// The band-diagonal compression Σ_j Pᑫ_j Kᑫ⁻¹ Pᑫ_j (zero at order 0,
    /// where Kᑫ⁻¹ is the conventional K⁻¹ = 0).
    pub fn diagonal_correction(&self, t: f64) -> Result<CMat> {
        let d = self.dim();
        if self.order == 0 {
            return Ok(CMat::zeros((d, d)));
        }
        let km1 = self.kato_level(self.order - 1, t)?;
        let ps = self.projectors_level(self.order, t)?;
        let mut out = CMat::zeros((d, d));
        for p in &ps {
            out = out + p.dot(&km1).dot(p);
        }
        Ok(out)
    }

    /// Intertwining residual of a table against the order-q projectors.
    pub fn intertwining_residual(&self, table: &PropagatorTable) -> Result<f64> {
        let ps = self.projectors(table.s)?;
        let mut worst = 0.0f64;
        for (k, &t) in table.times.iter().enumerate() {
            let pt = self.projectors(t)?;
            for j in 0..ps.len() {
                let r = table.mats[k].dot(&ps[j]) - pt[j].dot(&table.mats[k]);
                worst = worst.max(linalg::spectral_norm(&r));
            }
        }
        Ok(worst)
    }
}

/// Order-q superadiabatic propagator:
/// iε∂_t V̂ = (Hᑫ + iε(Kᑫ + Σ_j Pᑫ_j Kᑫ⁻¹ Pᑫ_j))V̂.
/// Unitary, intertwines the Pᑫ_j, and tracks the Schrödinger propagator to
/// order ε^{q+1}. At q = 0 this is exactly the adiabatic propagator.
pub fn superadiabatic_propagator(
    frame: &SuperadiabaticFrame,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<PropagatorTable> {
    let eps = frame.epsilon;
    let problem = EvolutionProblem::new(format!("superadiabatic-q{}", frame.order), eps, |t| {
        let h = frame.hamiltonian(t)?;
        let k = frame.kato(t)?;
        let dq = frame.diagonal_correction(t)?;
        Ok(h.mapv(|z| Complex64::new(0.0, -1.0) * z) + (k + dq).mapv(|z| z * eps))
    });
    evolve(&problem, s, times, tol)
}
