//! Spectral frame of the full Lindbladian L_t^{[g]} at small coupling: all d²
//! eigenvalues with left/right eigenvector pairs, labeled by continuity in t
//! and classified by their g → 0 limits (the d-fold zero group versus the
//! oscillating Bohr pairs), with the structural zero eigenvalue pinned
//! exactly. This is the data behind the slow-drive approximant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::model::{LindbladModel, SpectralFrame};
use crate::operators::{superop_distance, unvec, vec_op, Superoperator};
use crate::propagators::{evolve, lindblad_propagator, EvolutionProblem, PropagatorTable};
use crate::quad::cumulative_simpson;

use super::{splitting_matrix, transition_approximant_core};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigClass {
    /// Emanates from the d-fold degenerate kernel of L⁰; index 0 is the
    /// structural zero eigenvalue.
    ZeroGroup(usize),
    /// Emanates from the Bohr eigenvalue −i(e_j − e_k), j ≠ k.
    Bohr(usize, usize),
}

#[derive(Clone)]
pub struct LindbladSpectralFrame {
    pub g: f64,
    pub grid: Vec<f64>,
    pub dim: usize,
    pub classes: Vec<EigClass>,
    /// `eigenvalues[k][a]`: eigenvalue of label `a` at grid time `k`.
    pub eigenvalues: Vec<Vec<Complex64>>,
    /// |λ| of the computed kernel eigenvalue before it was pinned to zero,
    /// per grid time.
    pub kernel_drift: Vec<f64>,
    rights: Vec<Vec<CVec>>,
    lefts: Vec<Vec<CVec>>,
    fd_step: f64,
}

/// Greedy global assignment of computed eigenvalues to reference values by
/// ascending distance. Fails when two references would claim the same value.
fn assign_by_distance(values: &[Complex64], refs: &[Complex64], t: f64) -> Result<Vec<usize>> {
    let n = refs.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for a in 0..n {
        for v in 0..n {
            pairs.push(((refs[a] - values[v]).norm(), a, v));
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut assigned = 0;
    for (_, a, v) in pairs {
        if perm[a] == usize::MAX && !used[v] {
            perm[a] = v;
            used[v] = true;
            assigned += 1;
            if assigned == n {
                break;
            }
        }
    }
    // collision guard: two labels assigned to near-identical eigenvalues
    for a in 0..n {
        for b in a + 1..n {
            if (values[perm[a]] - values[perm[b]]).norm() < 1e-13 {
                return Err(Error::LabelingFailed {
                    t,
                    reason: "eigenvalue collision; refine the grid or change g".into(),
                });
            }
        }
    }
    Ok(perm)
}

struct LabeledEig {
    eigenvalues: Vec<Complex64>,
    rights: Vec<CVec>,
    lefts: Vec<CVec>,
}

fn labeled_eig(gen: &CMat, refs: &[Complex64], t: f64) -> Result<LabeledEig> {
    let (vals, u, u_inv) = linalg::eig(gen)?;
    let perm = assign_by_distance(&vals, refs, t)?;
    let n = vals.len();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut rights = Vec::with_capacity(n);
    let mut lefts = Vec::with_capacity(n);
    for a in 0..n {
        let v = perm[a];
        eigenvalues.push(vals[v]);
        rights.push(CVec::from_shape_fn(n, |r| u[[r, v]]));
        lefts.push(CVec::from_shape_fn(n, |r| u_inv[[v, r]].conj()));
    }
    Ok(LabeledEig {
        eigenvalues,
        rights,
        lefts,
    })
}

/// Pin label 0 to the structural zero: eigenvalue exactly 0, right vector
/// trace-normalized (the instantaneous stationary state), left vector the
/// identity.
fn pin_zero(le: &mut LabeledEig, dim: usize) {
    le.eigenvalues[0] = Complex64::ZERO;
    let tr = linalg::trace(&unvec(&le.rights[0], dim));
    le.rights[0] = le.rights[0].mapv(|z| z / tr);
    le.lefts[0] = vec_op(&linalg::identity(dim));
}

impl LindbladSpectralFrame {
    pub fn label_count(&self) -> usize {
        self.classes.len()
    }

    /// Rank-one spectral projector |ν_a⟩⟩⟨⟨μ_a| at grid index k.
    pub fn projector(&self, k: usize, label: usize) -> Superoperator {
        let n = self.dim * self.dim;
        let v = &self.rights[k][label];
        let w = &self.lefts[k][label];
        let mut mat = CMat::zeros((n, n));
        for r in 0..n {
            for c in 0..n {
                mat[[r, c]] = v[r] * w[c].conj();
            }
        }
        Superoperator { dim: self.dim, mat }
    }

    /// Spectral projector onto the whole zero group at grid index k.
    pub fn zero_group_projector(&self, k: usize) -> Superoperator {
        let mut acc = Superoperator::zero(self.dim);
        for (label, class) in self.classes.iter().enumerate() {
            if matches!(class, EigClass::ZeroGroup(_)) {
                acc = acc.add(&self.projector(k, label));
            }
        }
        acc
    }

    /// Labels and eigenvalues of the zero group at grid index k, ordered by
    /// their class index.
    pub fn zero_group(&self, k: usize) -> Vec<(usize, Complex64)> {
        let mut out: Vec<(usize, usize, Complex64)> = self
            .classes
            .iter()
            .enumerate()
            .filter_map(|(label, class)| match class {
                EigClass::ZeroGroup(j) => Some((*j, label, self.eigenvalues[k][label])),
                _ => None,
            })
            .collect();
        out.sort_by_key(|e| e.0);
        out.into_iter().map(|(_, label, v)| (label, v)).collect()
    }

    fn nearest_grid_index(&self, t: f64) -> usize {
        let h = self.grid[1] - self.grid[0];
        let k = ((t - self.grid[0]) / h).round() as i64;
        k.clamp(0, self.grid.len() as i64 - 1) as usize
    }

    fn labeled_at(&self, model: &LindbladModel, t: f64) -> Result<LabeledEig> {
        let k = self.nearest_grid_index(t);
        let gen = model.generator(t, self.g).mat;
        let mut le = labeled_eig(&gen, &self.eigenvalues[k], t)?;
        pin_zero(&mut le, self.dim);
        Ok(le)
    }

    /// `𝒦(t) = Σ_a 𝒫'_a(t) 𝒫_a(t)` at coupling g, via finite differences of the labeled
    /// rank-one projectors.
    pub fn transport_generator(&self, model: &LindbladModel, t: f64) -> Result<CMat> {
        let h = self.fd_step;
        let n = self.dim * self.dim;
        let proj = |le: &LabeledEig, a: usize| -> CMat {
            let mut m = CMat::zeros((n, n));
            for r in 0..n {
                for c in 0..n {
                    m[[r, c]] = le.rights[a][r] * le.lefts[a][c].conj();
                }
            }
            m
        };
        let at = |u: f64| self.labeled_at(model, u);
        let (m2, m1, p1, p2) = (at(t - 2.0 * h)?, at(t - h)?, at(t + h)?, at(t + 2.0 * h)?);
        let here = at(t)?;
        let mut k = CMat::zeros((n, n));
        for a in 0..self.label_count() {
            let dp = (proj(&m2, a) - proj(&m1, a).mapv(|z| 8.0 * z)
                + proj(&p1, a).mapv(|z| 8.0 * z)
                - proj(&p2, a))
            .mapv(|z| z / (12.0 * h));
            k = k + dp.dot(&proj(&here, a));
        }
        Ok(k)
    }
}

/// Eigendecompose the coupled generator `L⁰_t + g L¹_t` on the grid and label
/// the spectrum. Requires the
/// Hamiltonian frame to have singleton bands; the zero-group labels are
/// ordered to match the splitting-matrix eigenvalues (sorted by real part,
/// then imaginary part) at t = 0.
pub fn lindblad_spectral_frame(
    model: &LindbladModel,
    h_frame: &SpectralFrame,
    g: f64,
    grid: &[f64],
) -> Result<LindbladSpectralFrame> {
    assert!(g > 0.0, "spectral frame needs g > 0");
    let d = model.dim;
    if !h_frame.singleton() {
        return Err(Error::NonSingletonBand {
            band: 0,
            t: grid[0],
        });
    }

    // reference spectrum at t = 0: g·λ̃_j for the zero group (λ̃_0 = 0 first),
    // −i(e_j − e_k) for the Bohr part
    let sm0 = splitting_matrix(model, grid[0], h_frame)?;
    let mut tilde: Vec<Complex64> = sm0.eigenvalues.clone();
    tilde.sort_by(|a, b| (b.re, b.im).partial_cmp(&(a.re, a.im)).unwrap());
    // descending real part puts the zero eigenvalue first
    let mut classes = Vec::with_capacity(d * d);
    let mut refs = Vec::with_capacity(d * d);
    for (j, v) in tilde.iter().enumerate() {
        classes.push(EigClass::ZeroGroup(j));
        refs.push(*v * g);
    }
    let energies0 = h_frame.eval(grid[0])?.energies()?;
    for j in 0..d {
        for k in 0..d {
            if j != k {
                classes.push(EigClass::Bohr(j, k));
                refs.push(Complex64::new(0.0, -(energies0[j] - energies0[k])));
            }
        }
    }

    let mut eigenvalues = Vec::with_capacity(grid.len());
    let mut kernel_drift = Vec::with_capacity(grid.len());
    let mut rights = Vec::with_capacity(grid.len());
    let mut lefts = Vec::with_capacity(grid.len());
    let mut prev_refs = refs;
    for &t in grid {
        let gen = model.generator(t, g).mat;
        let mut le = labeled_eig(&gen, &prev_refs, t)?;
        // structural guard: the whole spectrum sits in the closed left half
        // plane and label 0 shadows the exact kernel
        if le.eigenvalues.iter().any(|z| z.re > 1e-8) {
            return Err(Error::Invariant(format!(
                "Lindbladian eigenvalue with positive real part at t = {t}"
            )));
        }
        if le.eigenvalues[0].norm() > 1e-8 {
            return Err(Error::LabelingFailed {
                t,
                reason: format!(
                    "kernel eigenvalue drifted to {:.3e}",
                    le.eigenvalues[0].norm()
                ),
            });
        }
        kernel_drift.push(le.eigenvalues[0].norm());
        pin_zero(&mut le, d);
        prev_refs = le.eigenvalues.clone();
        eigenvalues.push(le.eigenvalues);
        rights.push(le.rights);
        lefts.push(le.lefts);
    }

    Ok(LindbladSpectralFrame {
        g,
        grid: grid.to_vec(),
        dim: d,
        classes,
        eigenvalues,
        kernel_drift,
        rights,
        lefts,
        fd_step: h_frame.fd_step(),
    })
}

pub struct SlowDriveResult {
    pub table: PropagatorTable,
    /// Sampled induced trace-norm deviation from the exact propagator.
    pub deviation: f64,
}

/// Slow-drive approximant 𝒱(t,s) = 𝒲(t,0) Ψ_ε(t,s) 𝒲(0,s), where 𝒲 solves
/// `∂_t 𝒲 = 𝒦(t) 𝒲` and Ψ_ε carries the exponentiated eigenvalue
/// integrals in the frozen t = 0 eigenprojector basis.
pub fn slow_drive_propagator(
    model: &LindbladModel,
    lframe: &LindbladSpectralFrame,
    eps: f64,
    s: f64,
    times: &[f64],
    tol: f64,
) -> Result<SlowDriveResult> {
    let d = model.dim;
    let t_end = times.last().copied().unwrap_or(s);

    // 𝒲(·, 0) on all needed times
    let mut w_times: Vec<f64> = times.to_vec();
    w_times.push(s);
    w_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    w_times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let problem = EvolutionProblem::new("slow-drive-transport", 1.0, |u| {
        lframe.transport_generator(model, u)
    });
    let w = evolve(&problem, 0.0, &w_times, tol)?;
    let w_inv_s = linalg::inv(w.at(s)?)?;

    // cumulative eigenvalue integrals Λ_a on a refined uniform grid
    let n_nodes = {
        let n = (4 * (lframe.grid.len() - 1)).max(512);
        n + n % 2
    } + 1;
    let h = t_end / (n_nodes - 1) as f64;
    let mut samples: Vec<Vec<Complex64>> = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let u = i as f64 * h;
        samples.push(lframe.labeled_at(model, u)?.eigenvalues);
    }
    let labels = lframe.label_count();
    let as_mats: Vec<CMat> = samples
        .iter()
        .map(|row| CMat::from_shape_fn((labels, 1), |(a, _)| row[a]))
        .collect();
    let cum = cumulative_simpson(&as_mats, h);
    let lambda_at = |t: f64, a: usize| -> Complex64 {
        let idx = ((t / h).round() as usize).min(n_nodes - 1);
        cum[idx][[a, 0]]
    };

    let p0: Vec<Superoperator> = (0..labels).map(|a| lframe.projector(0, a)).collect();

    let mut mats = Vec::with_capacity(times.len());
    for &t in times {
        let mut psi = CMat::zeros((d * d, d * d));
        for a in 0..labels {
            let expo = (lambda_at(t, a) - lambda_at(s, a)) / eps;
            let factor = expo.exp();
            psi = psi + p0[a].mat.mapv(|z| z * factor);
        }
        let v = w.at(t)?.dot(&psi).dot(&w_inv_s);
        mats.push(v);
    }

    let exact = lindblad_propagator(model, eps, lframe.g, s, times, tol)?;
    let mut deviation = 0.0f64;
    for (k, m) in mats.iter().enumerate() {
        let approx = Superoperator::from_matrix(d, m.clone())?;
        let ex = Superoperator::from_matrix(d, exact.mats[k].clone())?;
        deviation = deviation.max(superop_distance(&ex, &approx, 0x51d));
    }

    Ok(SlowDriveResult {
        table: PropagatorTable {
            family: "slow-drive".into(),
            s,
            times: times.to_vec(),
            mats,
            epsilon: eps,
            g: Some(lframe.g),
            tol,
            achieved_error: deviation,
        },
        deviation,
    })
}

/// Transition-regime approximant 𝒲₀(t,0) ∘ Ψ̃_{ε/g}(t,0) ∘ 𝒫₀(0) together
/// with its deviation from 𝒰(t,0) ∘ 𝒫₀(0).
pub struct TransitionApprox {
    pub superop: Superoperator,
    pub deviation: f64,
}

pub fn transition_approximant(
    model: &LindbladModel,
    frame: &SpectralFrame,
    eps: f64,
    g: f64,
    t: f64,
    tol: f64,
) -> Result<TransitionApprox> {
    let (superop, _) = transition_approximant_core(model, frame, eps / g, t, tol)?;
    let exact = lindblad_propagator(model, eps, g, 0.0, &[t], tol)?;
    let p0 = frame.pinching(0.0)?;
    let exact_p0 = Superoperator::from_matrix(model.dim, exact.end().clone())?.compose(&p0);
    let deviation = superop_distance(&exact_p0, &superop, 0x7a417);
    Ok(TransitionApprox { superop, deviation })
}
