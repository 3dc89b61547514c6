//! Dense complex operator and superoperator algebra: norms, inner products,
//! vectorization, channel diagnostics.
//!
//! Vectorization convention (fixed for the whole crate): **column stacking**.
//! `vec(A)[c*d + r] = A[r, c]`, so column `a` of a superoperator matrix is the
//! vectorized image of the basis matrix `E_{a mod d, a div d}`. With this
//! convention `vec(A B C) = (Cᵀ ⊗ A) vec(B)`.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

pub use crate::linalg::{
    commutator, dagger, frobenius_norm, identity, max_abs, spectral_norm, trace,
};

/// Trace norm: the sum of the singular values.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("trace_norm input"));
    }
    Ok(linalg::singular_values(a)?.iter().sum())
}

/// Hilbert-Schmidt scalar product Tr(A* B).
pub fn hs_inner(a: &CMat, b: &CMat) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(format!(
            "hs_inner {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// ‖A − A*‖ relative to ‖A‖ (Frobenius); 0 for the zero matrix.
pub fn hermiticity_deficit(a: &CMat) -> f64 {
    let n = frobenius_norm(a);
    if n == 0.0 {
        return 0.0;
    }
    frobenius_norm(&(a - &dagger(a))) / n
}

/// Column-stacking vectorization.
pub fn vec_op(a: &CMat) -> CVec {
    let d = a.nrows();
    Array1::from_shape_fn(d * d, |i| a[[i % d, i / d]])
}

pub fn unvec(v: &CVec, d: usize) -> CMat {
    Array2::from_shape_fn((d, d), |(r, c)| v[c * d + r])
}

/// Basis matrix E_{rc} with a single 1 at (r, c).
pub fn basis_matrix(d: usize, r: usize, c: usize) -> CMat {
    let mut e = CMat::zeros((d, d));
    e[[r, c]] = Complex64::new(1.0, 0.0);
    e
}

/// A linear map on d×d operators stored as a d²×d² matrix acting on
/// column-stacked vectorizations.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub dim: usize,
    pub mat: CMat,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, mat: CMat) -> Result<Self> {
        if mat.dim() != (dim * dim, dim * dim) {
            return Err(Error::DimMismatch(format!(
                "superoperator matrix {:?} for dim {dim}",
                mat.dim()
            )));
        }
        Ok(Self { dim, mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: Array2::eye(dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            mat: CMat::zeros((dim * dim, dim * dim)),
        }
    }

    /// ρ ↦ A ρ B as a matrix: Bᵀ ⊗ A.
    pub fn from_left_right(a: &CMat, b: &CMat) -> Self {
        let bt = b.t().to_owned();
        Self {
            dim: a.nrows(),
            mat: linalg::kron(&bt, a),
        }
    }

    /// ρ ↦ U ρ U*.
    pub fn conjugation(u: &CMat) -> Self {
        Self::from_left_right(u, &dagger(u))
    }

    /// Hamiltonian part of a Lindblad generator: ρ ↦ −i[H, ρ].
    pub fn hamiltonian_generator(h: &CMat) -> Self {
        let d = h.nrows();
        let mi = Complex64::new(0.0, -1.0);
        let left = Self::from_left_right(h, &identity(d));
        let right = Self::from_left_right(&identity(d), h);
        Self {
            dim: d,
            mat: (&left.mat - &right.mat).mapv(|z| mi * z),
        }
    }

    /// Dissipator ρ ↦ Σ_l (Γ_l ρ Γ_l* − ½{Γ_l*Γ_l, ρ}).
    pub fn dissipator(jumps: &[CMat]) -> Self {
        assert!(
            !jumps.is_empty(),
            "dissipator needs at least one jump operator"
        );
        let d = jumps[0].nrows();
        let id = identity(d);
        let mut mat = CMat::zeros((d * d, d * d));
        let half = Complex64::new(0.5, 0.0);
        for g in jumps {
            let gd = dagger(g);
            let gg = gd.dot(g);
            mat = mat + Self::from_left_right(g, &gd).mat;
            mat = mat - Self::from_left_right(&gg, &id).mat.mapv(|z| half * z);
            mat = mat - Self::from_left_right(&id, &gg).mat.mapv(|z| half * z);
        }
        Self { dim: d, mat }
    }

    /// Full Lindblad generator L⁰ + g L¹ at a frozen time.
    pub fn lindblad_generator(h: &CMat, jumps: &[CMat], g: f64) -> Self {
        let mut out = Self::hamiltonian_generator(h);
        if g != 0.0 && !jumps.is_empty() {
            let gc = Complex64::new(g, 0.0);
            out.mat = out.mat + Self::dissipator(jumps).mat.mapv(|z| gc * z);
        }
        out
    }

    /// Pinching ρ ↦ Σ_j P_j ρ P_j.
    pub fn pinching(projectors: &[CMat]) -> Self {
        let d = projectors[0].nrows();
        let mut mat = CMat::zeros((d * d, d * d));
        for p in projectors {
            mat = mat + Self::from_left_right(p, p).mat;
        }
        Self { dim: d, mat }
    }

    /// Build the matrix of a linear action by evaluating it on all basis
    /// matrices. Linearity is probed on random pairs first.
    pub fn from_action(d: usize, action: impl Fn(&CMat) -> CMat) -> Result<Self> {
        let mut rng = crate::rng(0x5eed_ac7e);
        for _ in 0..3 {
            let a = random_matrix(d, &mut rng);
            let b = random_matrix(d, &mut rng);
            let alpha = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let beta = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let lhs = action(&(a.mapv(|z| alpha * z) + b.mapv(|z| beta * z)));
            let rhs = action(&a).mapv(|z| alpha * z) + action(&b).mapv(|z| beta * z);
            let scale = max_abs(&lhs).max(max_abs(&rhs)).max(1.0);
            let dev = max_abs(&(&lhs - &rhs)) / scale;
            if dev > 1e-9 {
                return Err(Error::NonlinearAction { deviation: dev });
            }
        }
        let mut mat = CMat::zeros((d * d, d * d));
        for a in 0..d * d {
            let img = vec_op(&action(&basis_matrix(d, a % d, a / d)));
            for r in 0..d * d {
                mat[[r, a]] = img[r];
            }
        }
        Ok(Self { dim: d, mat })
    }

    pub fn apply(&self, a: &CMat) -> CMat {
        unvec(&self.mat.dot(&vec_op(a)), self.dim)
    }

    /// Composition self ∘ other.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.dot(&other.mat),
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.mapv(|w| z * w),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            mat: linalg::inv(&self.mat)?,
        })
    }

    /// Choi matrix C = Σ_{ab} E_{ab} ⊗ S(E_{ab}); S is completely positive
    /// iff C ⪰ 0.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut c = CMat::zeros((d * d, d * d));
        for a in 0..d {
            for b in 0..d {
                let e = basis_matrix(d, a, b);
                c = c + linalg::kron(&e, &self.apply(&e));
            }
        }
        c
    }

    /// max_{ab} |Tr S(E_{ab}) − Tr E_{ab}|.
    pub fn trace_preservation_deficit(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let tr = trace(&self.apply(&basis_matrix(d, a, b)));
                let expected = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((tr - Complex64::new(expected, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_cptp(&self, tol: f64) -> Result<CptpReport> {
        assert!(tol > 0.0, "is_cptp tolerance must be positive");
        let choi = self.choi();
        let herm = hermiticity_deficit(&choi);
        let sym = (&choi + &dagger(&choi)).mapv(|z| 0.5 * z);
        let (vals, _) = linalg::eigh(&sym)?;
        let min_eig = vals.first().copied().unwrap_or(0.0);
        let tp_deficit = self.trace_preservation_deficit();
        Ok(CptpReport {
            choi_min_eigenvalue: min_eig,
            trace_deficit: tp_deficit,
            choi_hermiticity_deficit: herm,
            pass: min_eig >= -tol && tp_deficit <= tol,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CptpReport {
    pub choi_min_eigenvalue: f64,
    pub trace_deficit: f64,
    pub choi_hermiticity_deficit: f64,
    pub pass: bool,
}

/// A validated state: Hermitian, unit trace, positive up to tolerance.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        let tr = trace(&mat);
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::Invariant(format!("density matrix trace {tr} != 1")));
        }
        if hermiticity_deficit(&mat) > 1e-10 {
            return Err(Error::Invariant("density matrix not Hermitian".into()));
        }
        let (vals, _) = linalg::eigh(&mat)?;
        if vals.first().copied().unwrap_or(0.0) < -1e-9 {
            return Err(Error::Invariant(format!(
                "density matrix min eigenvalue {:.3e}",
                vals[0]
            )));
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: identity(d).mapv(|z| z / d as f64),
        }
    }

    pub fn pure(psi: &CVec) -> Self {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let d = psi.len();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj() / (norm * norm));
        Self { mat }
    }

    pub fn random_pure(d: usize, rng: &mut impl Rng) -> Self {
        let psi = Array1::from_shape_fn(d, |_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        Self::pure(&psi)
    }

    pub fn random_mixed(d: usize, rng: &mut impl Rng) -> Self {
        let g = random_matrix(d, rng);
        let pos = g.dot(&dagger(&g));
        let tr = trace(&pos).re;
        Self {
            mat: pos.mapv(|z| z / tr),
        }
    }
}

/// Sampled induced trace-norm distance between two superoperators: the max of
/// ‖(A−B)(x)‖₁ over 200 seeded random pure states plus the d² basis matrices
/// (all of unit trace norm). A deterministic lower bound on the induced norm;
/// what every error fit in this crate uses.
pub fn superop_distance(a: &Superoperator, b: &Superoperator, seed: u64) -> f64 {
    assert_eq!(a.dim, b.dim);
    let d = a.dim;
    let diff = a.sub(b);
    let mut worst = 0.0f64;
    let mut probe = |x: &CMat| {
        let v = trace_norm(&diff.apply(x)).unwrap_or(f64::NAN);
        if v > worst {
            worst = v;
        }
    };
    let mut rng = crate::rng(seed);
    for _ in 0..200 {
        probe(&DensityMatrix::random_pure(d, &mut rng).mat);
    }
    for r in 0..d {
        for c in 0..d {
            probe(&basis_matrix(d, r, c));
        }
    }
    worst
}

/// Random complex matrix with entries uniform in the unit square around 0.
pub fn random_matrix(d: usize, rng: &mut impl Rng) -> CMat {
    Array2::from_shape_fn((d, d), |_| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMat {
    let g = random_matrix(d, rng);
    (&g + &dagger(&g)).mapv(|z| 0.5 * z)
}

/// JSON form of a complex matrix: row-major `[re, im]` pairs plus dim.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_mat(a: &CMat) -> Self {
        Self {
            dim: a.nrows(),
            entries: a.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_mat(&self) -> Result<CMat> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::DimMismatch(format!(
                "{} entries for dim {}",
                self.entries.len(),
                self.dim
            )));
        }
        Ok(Array2::from_shape_fn((self.dim, self.dim), |(r, c)| {
            let [re, im] = self.entries[r * self.dim + c];
            Complex64::new(re, im)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn sigma_x() -> CMat {
        array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]
    }

    pub fn sigma_y() -> CMat {
        array![[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]]
    }

    pub fn sigma_z() -> CMat {
        array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]]
    }

    /// Independent 2x2 Hermitian eigenvalue oracle (quadratic formula).
    fn eig2_hermitian(a: &CMat) -> (f64, f64) {
        let tr = (a[[0, 0]] + a[[1, 1]]).re;
        let det = (a[[0, 0]] * a[[1, 1]] - a[[0, 1]] * a[[1, 0]]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }

    #[test]
    fn trace_norm_identity_and_diag() {
        assert!((trace_norm(&identity(2)).unwrap() - 2.0).abs() < 1e-14);
        let d = array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]];
        assert!((trace_norm(&d).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_nilpotent() {
        // Oracle: singular values of A are sqrt of eigenvalues of A*A.
        let a = array![[c(0., 0.), c(2., 0.)], [c(0., 0.), c(0., 0.)]];
        let ata = dagger(&a).dot(&a);
        let (lo, hi) = eig2_hermitian(&ata);
        let expected = lo.max(0.0).sqrt() + hi.max(0.0).sqrt();
        assert!((expected - 2.0).abs() < 1e-14);
        assert!((trace_norm(&a).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_rejects_non_finite() {
        let a = array![[c(f64::NAN, 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]];
        assert!(trace_norm(&a).is_err());
    }

    #[test]
    fn trace_norm_subadditive_on_random_pairs() {
        let mut rng = rng(11);
        for _ in 0..50 {
            let a = random_matrix(3, &mut rng);
            let b = random_matrix(3, &mut rng);
            let lhs = trace_norm(&(&a + &b)).unwrap();
            let rhs = trace_norm(&a).unwrap() + trace_norm(&b).unwrap();
            assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn hs_inner_paulis() {
        assert!((hs_inner(&identity(2), &identity(2)).unwrap() - c(2., 0.)).norm() < 1e-14);
        assert!(hs_inner(&sigma_x(), &sigma_y()).unwrap().norm() < 1e-14);
        let p = array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]];
        assert!((hs_inner(&p, &p).unwrap() - c(1., 0.)).norm() < 1e-14);
        assert!(hs_inner(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn hs_inner_conjugate_symmetric() {
        let mut rng = rng(12);
        let a = random_matrix(3, &mut rng);
        let b = random_matrix(3, &mut rng);
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        assert!(hs_inner(&a, &a).unwrap().re > 0.0);
    }

    #[test]
    fn from_action_identity() {
        let s = Superoperator::from_action(2, |a| a.clone()).unwrap();
        assert!(max_abs(&(&s.mat - &identity(4))) < 1e-14);
    }

    #[test]
    fn from_action_commutator_eigenvalues() {
        // A ↦ −i[H, A] with H = diag(e1, e2) has eigenvalues
        // {0, 0, −i(e1−e2), −i(e2−e1)} with eigenvectors E_jk.
        let (e1, e2) = (0.7, -0.4);
        let h = array![[c(e1, 0.), c(0., 0.)], [c(0., 0.), c(e2, 0.)]];
        let s =
            Superoperator::from_action(2, |a| commutator(&h, a).mapv(|z| c(0., -1.) * z)).unwrap();
        let (vals, _, _) = linalg::eig(&s.mat).unwrap();
        let mut expected = [c(0., 0.), c(0., 0.), c(0., -(e1 - e2)), c(0., e1 - e2)];
        let mut got = vals;
        let key = |z: &Complex64| (z.im * 1e6) as i64;
        expected.sort_by_key(key);
        got.sort_by_key(key);
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!((g - e).norm() < 1e-10, "{g} vs {e}");
        }
    }

    #[test]
    fn from_action_left_multiplication() {
        // Oracle: enumerate the action on basis matrices by hand.
        // σ_z E_{00} = E_{00}, σ_z E_{10} = −E_{10}, σ_z E_{01} = E_{01},
        // σ_z E_{11} = −E_{11}, so in column-stacking order the matrix is
        // diag(1, −1, 1, −1).
        let sz = sigma_z();
        let s = Superoperator::from_action(2, |a| sz.dot(a)).unwrap();
        let mut expected = CMat::zeros((4, 4));
        for (i, v) in [1.0, -1.0, 1.0, -1.0].iter().enumerate() {
            expected[[i, i]] = c(*v, 0.);
        }
        assert!(max_abs(&(&s.mat - &expected)) < 1e-14);
    }

    #[test]
    fn from_action_rejects_nonlinear() {
        let r = Superoperator::from_action(2, |a| a.mapv(|z| z * z.norm()));
        assert!(matches!(r, Err(Error::NonlinearAction { .. })));
    }

    #[test]
    fn choi_identity_channel() {
        let s = Superoperator::identity(2);
        let choi = s.choi();
        // C = Σ E_ab ⊗ E_ab = 2 |Ω⟩⟨Ω| for the maximally entangled Ω.
        assert!((trace(&choi) - c(2., 0.)).norm() < 1e-14);
        let (vals, _) = linalg::eigh(&choi).unwrap();
        assert!(vals[..3].iter().all(|v| v.abs() < 1e-14));
        assert!((vals[3] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn choi_transpose_map_not_cp() {
        // Oracle: the Choi matrix of the transpose map is the swap operator,
        // whose eigenvalues are ±1.
        let s = Superoperator::from_action(2, |a| a.t().to_owned()).unwrap();
        let choi = s.choi();
        let mut swap = CMat::zeros((4, 4));
        for a in 0..2 {
            for b in 0..2 {
                swap = swap + linalg::kron(&basis_matrix(2, a, b), &basis_matrix(2, b, a));
            }
        }
        assert!(max_abs(&(&choi - &swap)) < 1e-14);
        let rep = s.is_cptp(1e-7).unwrap();
        assert!(!rep.pass);
        assert!((rep.choi_min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn choi_depolarizing() {
        // Direct Choi assembly: A ↦ Tr(A) I/2 maps E_ab to δ_ab I/2, so
        // C = I₄ / 2.
        let s =
            Superoperator::from_action(2, |a| identity(2).mapv(|z| z * trace(a) / 2.0)).unwrap();
        let choi = s.choi();
        assert!(max_abs(&(&choi - &identity(4).mapv(|z| 0.5 * z))) < 1e-14);
        assert!(s.is_cptp(1e-7).unwrap().pass);
    }

    #[test]
    fn pinching_is_cptp() {
        let p1 = array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 0.)]];
        let p2 = array![[c(0., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]];
        let s = Superoperator::pinching(&[p1, p2]);
        let rep = s.is_cptp(1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn exponentiated_lindblad_generators_are_cptp() {
        let mut rng = rng(21);
        for d in [2usize, 3] {
            for _ in 0..5 {
                let h = random_hermitian(d, &mut rng);
                let jumps = vec![random_matrix(d, &mut rng)];
                let gen = Superoperator::lindblad_generator(&h, &jumps, 0.7);
                let s = Superoperator {
                    dim: d,
                    mat: linalg::expm(&gen.mat),
                };
                let rep = s.is_cptp(1e-7).unwrap();
                assert!(rep.pass, "d={d}: {rep:?}");
            }
        }
    }

    #[test]
    fn contraction_in_trace_norm() {
        let mut rng = rng(22);
        let h = random_hermitian(2, &mut rng);
        let jumps = vec![random_matrix(2, &mut rng)];
        let gen = Superoperator::lindblad_generator(&h, &jumps, 0.5);
        let s = Superoperator {
            dim: 2,
            mat: linalg::expm(&gen.mat),
        };
        for _ in 0..100 {
            let rho = DensityMatrix::random_mixed(2, &mut rng);
            let out = s.apply(&rho.mat);
            assert!(trace_norm(&out).unwrap() <= trace_norm(&rho.mat).unwrap() + 1e-10);
        }
    }

    #[test]
    fn from_action_of_apply_roundtrip() {
        let mut rng = rng(23);
        for d in [2usize, 3] {
            let m = random_matrix(d * d, &mut rng);
            let s = Superoperator { dim: d, mat: m };
            let rebuilt = Superoperator::from_action(d, |a| s.apply(a)).unwrap();
            assert!(max_abs(&(&rebuilt.mat - &s.mat)) < 1e-12);
            // apply agrees with matrix·vec reshaped on random operators
            for _ in 0..5 {
                let a = random_matrix(d, &mut rng);
                let via_vec = unvec(&s.mat.dot(&vec_op(&a)), d);
                assert!(max_abs(&(&via_vec - &s.apply(&a))) < 1e-13);
            }
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity(2).mapv(|z| 0.5 * z)).is_ok());
        assert!(DensityMatrix::new(identity(2)).is_err());
        let mut rng = rng(24);
        let rho = DensityMatrix::random_pure(3, &mut rng);
        assert!((trace(&rho.mat).re - 1.0).abs() < 1e-12);
        assert!(DensityMatrix::new(rho.mat).is_ok());
    }

    #[test]
    fn matrix_json_roundtrip() {
        let mut rng = rng(25);
        let a = random_matrix(3, &mut rng);
        let j = MatrixJson::from_mat(&a);
        let s = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert!(max_abs(&(&back.to_mat().unwrap() - &a)) < 1e-15);
    }
}
