//! The splitting matrix: the dissipator compressed to the kernel of the
//! Hamiltonian part, expressed in the ordered basis of band projectors.
//! Its entries are L̃_{kj} = Σ_l (|⟨φ_k|Γ_l φ_j⟩|² − δ_{jk} ‖Γ_l φ_k‖²),
//! equivalently Tr(P_k Γ_l P_j Γ_l*) − δ_{jk} Tr(P_k Γ_l* Γ_l), which is how
//! they are computed here (no eigenvector phases needed).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{FramePoint, LindbladModel, SpectralFrame};
use crate::operators::{dagger, DensityMatrix};

/// Raw splitting-matrix entries from labeled singleton-band projectors.
pub fn splitting_entries(point: &FramePoint, jumps: &[CMat]) -> Array2<f64> {
    let n = point.group_count();
    let mut l = Array2::<f64>::zeros((n, n));
    for gamma in jumps {
        let gd = dagger(gamma);
        let gg = gd.dot(gamma);
        for k in 0..n {
            let pk = &point.projectors[k];
            for j in 0..n {
                let pj = &point.projectors[j];
                l[[k, j]] += linalg::trace(&pk.dot(gamma).dot(pj).dot(&gd)).re;
            }
            l[[k, k]] -= linalg::trace(&pk.dot(&gg)).re;
        }
    }
    l
}

/// Splitting matrix with its spectral data. Right/left eigenvectors are the
/// coordinates of ν_j, μ_j in the band-projector basis, normalized so that
/// ⟨⟨μ_j, ν_j⟩⟩ = 1 and ⟨⟨μ_j, μ_j⟩⟩ = d, with the leftover phase fixed by
/// making the largest-magnitude entry of μ_j real positive.
#[derive(Clone, Debug)]
pub struct SplittingMatrix {
    pub t: f64,
    pub matrix: Array2<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub right: Vec<Array1<Complex64>>,
    pub left: Vec<Array1<Complex64>>,
}

impl SplittingMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Index of the kernel eigenvalue (pinned to exactly zero).
    pub fn kernel_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.eigenvalues.iter().enumerate() {
            if v.norm() < self.eigenvalues[best].norm() {
                best = i;
            }
        }
        best
    }
}

/// Build the splitting matrix of `model` at time `t` with labels taken from
/// `frame`. Requires singleton bands.
pub fn splitting_matrix(
    model: &LindbladModel,
    t: f64,
    frame: &SpectralFrame,
) -> Result<SplittingMatrix> {
    let point = frame.eval(t)?;
    point.energies().map_err(|_| Error::DegenerateEigenvalue {
        t,
        gap: point.gap(),
    })?;
    let matrix = splitting_entries(&point, &model.jump_mats(t));
    let d = matrix.nrows();

    let cm = matrix.mapv(|x| Complex64::new(x, 0.0));
    let (vals, u, u_inv) = linalg::eig(&cm)?;

    let mut eigenvalues = vals;
    let mut right = Vec::with_capacity(d);
    let mut left = Vec::with_capacity(d);
    for i in 0..d {
        let v = Array1::from_shape_fn(d, |r| u[[r, i]]);
        // rows of u_inv are left eigenvectors up to conjugation:
        // u_inv A = diag(λ) u_inv, so μ with ⟨μ, ν⟩ = 1 is the conjugated row.
        let w = Array1::from_shape_fn(d, |r| u_inv[[i, r]].conj());
        let (w, v) = normalize_pair(w, v, d);
        right.push(v);
        left.push(w);
    }

    // pin the kernel eigenvalue to exactly zero and its left vector to 1
    let k = {
        let mut best = 0;
        for (i, v) in eigenvalues.iter().enumerate() {
            if v.norm() < eigenvalues[best].norm() {
                best = i;
            }
        }
        best
    };
    eigenvalues[k] = Complex64::ZERO;
    left[k] = Array1::from_elem(d, Complex64::ONE);
    let dot: Complex64 = left[k]
        .iter()
        .zip(right[k].iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    right[k] = right[k].mapv(|z| z / dot);

    Ok(SplittingMatrix {
        t,
        matrix,
        eigenvalues,
        right,
        left,
    })
}

fn normalize_pair(
    w: Array1<Complex64>,
    v: Array1<Complex64>,
    d: usize,
) -> (Array1<Complex64>, Array1<Complex64>) {
    // scale: ⟨w, w⟩ = d
    let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut w = w.mapv(|z| z * (d as f64).sqrt() / wn);
    // phase: largest-magnitude entry of w real positive
    let mut arg = 0.0;
    let mut best = 0.0;
    for z in w.iter() {
        if z.norm() > best {
            best = z.norm();
            arg = z.arg();
        }
    }
    let phase = Complex64::from_polar(1.0, -arg);
    w = w.mapv(|z| z * phase);
    // bi-orthonormalize: ⟨w, v⟩ = 1
    let dot: Complex64 = w.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let v = v.mapv(|z| z / dot);
    (w, v)
}

/// The trace-one kernel element ν̃₀(t) = Σ_k c_k P_k(t) of the splitting
/// matrix; the slow-drive attractor.
pub fn stationary_state(
    sm: &SplittingMatrix,
    frame: &SpectralFrame,
    t: f64,
) -> Result<DensityMatrix> {
    let d = sm.dim();
    // kernel dimension check: eigenvalues within a whisker of zero
    let near_zero = sm.eigenvalues.iter().filter(|v| v.norm() < 1e-9).count();
    if near_zero != 1 {
        return Err(Error::KernelDimension { dim: near_zero });
    }
    let kv = &sm.right[sm.kernel_index()];
    let sum: Complex64 = kv.iter().sum();
    let c: Vec<f64> = kv.iter().map(|z| (z / sum).re).collect();
    for (k, &ck) in c.iter().enumerate() {
        if ck < -1e-10 {
            return Err(Error::Invariant(format!(
                "stationary weight c_{k} = {ck:.3e} negative"
            )));
        }
    }
    let point = frame.eval(t)?;
    let mut rho = CMat::zeros((frame.dim(), frame.dim()));
    for k in 0..d {
        rho = rho + point.projectors[k].mapv(|z| z * c[k]);
    }
    DensityMatrix::new(rho)
}
