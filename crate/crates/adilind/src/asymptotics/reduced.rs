//! Reduced dynamics on the population space: δ ∂_t Ψ̃ = 𝒲₀(0,t) L̃¹_t 𝒲₀(t,0) Ψ̃,
//! which in the fixed basis {P_1(0), …, P_d(0)} is the matrix ODE
//! δ Ṁ = L̃(t) M. The transpose of M is a stochastic matrix, making the
//! reduced dynamics the transition matrix of a classical continuous-time
//! Markov process with rate matrix L̃(t)ᵀ.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{LindbladModel, SpectralFrame};
use crate::operators::{vec_op, Superoperator};
use crate::propagators::{evolve, EvolutionProblem};

use super::splitting_entries;

#[derive(Clone, Debug)]
pub struct ReducedDynamics {
    pub delta: f64,
    pub s: f64,
    pub times: Vec<f64>,
    /// Population matrices M(t_k, s): column c holds the populations evolved
    /// from band c.
    pub population: Vec<Array2<f64>>,
    pub bands: usize,
}

impl ReducedDynamics {
    pub fn at(&self, t: f64) -> Result<&Array2<f64>> {
        self.times
            .iter()
            .position(|&u| (u - t).abs() < 1e-12)
            .map(|k| &self.population[k])
            .ok_or_else(|| Error::OutOfRange(format!("time {t} not in reduced-dynamics table")))
    }

    /// max row-sum deviation from 1 and most negative entry of Mᵀ, over all
    /// stored times.
    pub fn stochasticity_deficit(&self) -> (f64, f64) {
        let mut rowsum = 0.0f64;
        let mut neg = 0.0f64;
        for m in &self.population {
            for c in 0..self.bands {
                let mut sum = 0.0;
                for r in 0..self.bands {
                    sum += m[[r, c]];
                    neg = neg.min(m[[r, c]]);
                }
                rowsum = rowsum.max((sum - 1.0).abs());
            }
        }
        (rowsum, neg)
    }

    /// Lift the population matrix at stored index `k` to a superoperator that
    /// acts as M on the span of {P_j(0)} and as the identity on coherences.
    pub fn lift(&self, frame: &SpectralFrame, k: usize) -> Result<Superoperator> {
        let point0 = frame.eval(self.s)?;
        let d = frame.dim();
        let m = &self.population[k];
        let mut mat = CMat::zeros((d * d, d * d));
        // Q₀(0) part: identity minus the projector onto span{P_j(0)}
        let mut span = CMat::zeros((d * d, d * d));
        for p in &point0.projectors {
            let v = vec_op(p);
            let rank = linalg::trace(p).re;
            for r in 0..d * d {
                for c in 0..d * d {
                    span[[r, c]] += v[r] * v[c].conj() / rank;
                }
            }
        }
        mat = mat + linalg::identity(d * d) - &span;
        for r in 0..self.bands {
            for c in 0..self.bands {
                let vr = vec_op(&point0.projectors[r]);
                let vc = vec_op(&point0.projectors[c]);
                let w = Complex64::new(m[[r, c]], 0.0);
                for a in 0..d * d {
                    for b in 0..d * d {
                        mat[[a, b]] += w * vr[a] * vc[b].conj();
                    }
                }
            }
        }
        Superoperator::from_matrix(d, mat)
    }
}

/// Integrate the reduced dynamics at time scale 1/δ from `s`, recording the
/// population matrix at the requested times. Requires singleton bands.
pub fn reduced_dynamics(
    model: &LindbladModel,
    frame: &SpectralFrame,
    delta: f64,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<ReducedDynamics> {
    assert!(delta > 0.0, "reduced dynamics needs delta > 0");
    let bands = frame.group_count();
    if !frame.singleton() {
        return Err(Error::NonSingletonBand { band: 0, t: s });
    }
    let problem = EvolutionProblem::new("reduced", delta, |t| {
        let point = frame.eval(t)?;
        let l = splitting_entries(&point, &model.jump_mats(t));
        Ok(l.mapv(|x| Complex64::new(x, 0.0)))
    });
    let table = evolve(&problem, s, times, tol)?;
    let population = table.mats.iter().map(|m| m.mapv(|z| z.re)).collect();
    Ok(ReducedDynamics {
        delta,
        s,
        times: table.times,
        population,
        bands,
    })
}

#[derive(Clone, Debug)]
pub struct MarkovGenerator {
    pub times: Vec<f64>,
    /// Transition-rate matrices Q(t) = L̃(t)ᵀ: row sums 0, off-diagonals ≥ 0.
    pub rates: Vec<Array2<f64>>,
}

/// Export the transposed splitting matrix as a time-dependent Markov
/// transition-rate matrix, validating its sign structure.
pub fn markov_generator(
    model: &LindbladModel,
    frame: &SpectralFrame,
    grid: &[f64],
) -> Result<MarkovGenerator> {
    let mut rates = Vec::with_capacity(grid.len());
    for &t in grid {
        let point = frame.eval(t)?;
        point.energies().map_err(|_| Error::DegenerateEigenvalue {
            t,
            gap: point.gap(),
        })?;
        let l = splitting_entries(&point, &model.jump_mats(t));
        let q = l.t().to_owned();
        let n = q.nrows();
        for r in 0..n {
            let mut sum = 0.0;
            for c in 0..n {
                sum += q[[r, c]];
                if r != c && q[[r, c]] < -1e-12 {
                    return Err(Error::Invariant(format!(
                        "negative off-diagonal rate {:.3e} at t = {t}",
                        q[[r, c]]
                    )));
                }
            }
            if sum.abs() > 1e-12 {
                return Err(Error::Invariant(format!(
                    "rate-matrix row sum {sum:.3e} at t = {t}"
                )));
            }
        }
        rates.push(q);
    }
    Ok(MarkovGenerator {
        times: grid.to_vec(),
        rates,
    })
}

/// Time-ordered exponential of the rate family by a midpoint product of plain
/// matrix exponentials: an independent route to the Markov transition matrix,
/// used to cross-check the reduced dynamics.
pub fn time_ordered_exponential(
    model: &LindbladModel,
    frame: &SpectralFrame,
    s: f64,
    t: f64,
    steps: usize,
) -> Result<Array2<f64>> {
    let bands = frame.group_count();
    let mut out = Array2::<f64>::eye(bands);
    let h = (t - s) / steps as f64;
    for k in 0..steps {
        let u = s + (k as f64 + 0.5) * h;
        let point = frame.eval(u)?;
        let q = splitting_entries(&point, &model.jump_mats(u))
            .t()
            .to_owned();
        let qc = q.mapv(|x| Complex64::new(x * h, 0.0));
        let e = linalg::expm(&qc).mapv(|z| z.re);
        out = out.dot(&e);
    }
    Ok(out)
}

/// 𝒲₀(t,0) ∘ Ψ̃_δ(t,0) ∘ 𝒫₀(0) as a superoperator: the reduced-dynamics
/// approximant of 𝒰(t,0)𝒫₀(0). Also returns the lifted Ψ̃_δ(t,0)𝒫₀(0).
pub fn transition_approximant_core(
    model: &LindbladModel,
    frame: &SpectralFrame,
    delta: f64,
    t: f64,
    tol: f64,
) -> Result<(Superoperator, Superoperator)> {
    let rd = reduced_dynamics(model, frame, delta, 0.0, &[t], tol)?;
    let psi = rd.lift(frame, 0)?;
    let p0 = frame.pinching(0.0)?;
    let psi_p0 = psi.compose(&p0);
    let w0 = crate::propagators::superop_parallel_transport(frame, 0.0, &[t], tol)?;
    let w0_t = Superoperator::from_matrix(frame.dim(), w0.end().clone())?;
    Ok((w0_t.compose(&psi_p0), psi_p0))
}
