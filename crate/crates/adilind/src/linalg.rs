//! Dense decompositions for small complex matrices, backed by `faer`.
//!
//! Everything here works on `ndarray` matrices and converts at the boundary;
//! at the dimensions this crate targets (d ≤ 16, superoperators ≤ 256²) the
//! copies are free compared to the factorizations.

use faer::prelude::Solve;
use faer::{Mat, Side};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

fn to_faer(a: &CMat) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMat {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues in nondecreasing
/// order with a unitary matrix of eigenvector columns.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let e = to_faer(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals = e.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, from_faer(e.U())))
}

/// General (possibly non-normal) eigendecomposition A = U diag(λ) U⁻¹.
///
/// Returns eigenvalues, right eigenvectors as columns of `u`, and `u_inv`
/// whose rows are the matching left eigenvectors up to conjugation; the
/// bi-orthogonality ⟨row_i(u⁻¹), col_j(u)⟩ = δ_ij holds by construction.
pub fn eig(a: &CMat) -> Result<(Vec<Complex64>, CMat, CMat)> {
    let e = to_faer(a)
        .eigen()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals: Vec<Complex64> = e.S().column_vector().iter().copied().collect();
    let u = from_faer(e.U());
    let u_inv = inv(&u)?;
    Ok((vals, u, u_inv))
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    let s = to_faer(a)
        .singular_values()
        .map_err(|e| Error::Eigen(format!("svd: {e:?}")))?;
    Ok(s)
}

pub fn inv(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimMismatch(format!("inv of {}x{}", n, a.ncols())));
    }
    let lu = to_faer(a).partial_piv_lu();
    let id = Mat::<Complex64>::identity(n, n);
    let sol = lu.solve(&id);
    let out = from_faer(sol.as_ref());
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen("singular matrix in inverse".into()));
    }
    Ok(out)
}

pub fn identity(d: usize) -> CMat {
    Array2::eye(d)
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diag().sum()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    singular_values(a)
        .map(|s| s.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN)
}

pub fn frobenius_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Matrix exponential by scaling and squaring on a plain Taylor series.
/// Adequate for the small generators this crate manipulates.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = max_abs(a) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings as i32));
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..=20 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        sum = &sum + &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..squarings {
        out = out.dot(&out);
    }
    out
}
