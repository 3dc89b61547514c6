//! Time-dependent Lindblad models: smooth operator paths, built-in model
//! families, instantaneous spectral frames, and numerical checks of the
//! structural hypotheses the asymptotic results rest on (flat start, spectral
//! gap, generic spectrum, maximal splitting).

pub mod schedule;
pub mod spectral;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use ndarray::array;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{dagger, random_hermitian, random_matrix, Superoperator};

pub use schedule::{smooth_switch, switch_extended, SmoothSchedule};
pub use spectral::{FramePoint, SpectralFrame};

/// Uniform grid with `n` intervals on [0, 1].
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

pub const DEFAULT_GRID_INTERVALS: usize = 200;

/// Default finite-difference step for path and projector derivatives.
/// Smaller than the grid spacing: the flat-start switch has 5th derivatives
/// of order 1e5, so truncation at the grid spacing would eat the whole
/// intertwining error budget. At 1e-3 truncation is ~1e-9 and roundoff ~1e-13.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// A smooth matrix-valued function of t ∈ [0, 1] (evaluable slightly outside,
/// so boundary finite differences stay central).
#[derive(Clone)]
pub struct OperatorPath {
    pub dim: usize,
    pub hermitian: bool,
    pub fd_step: f64,
    f: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
}

impl std::fmt::Debug for OperatorPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorPath")
            .field("dim", &self.dim)
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

impl OperatorPath {
    pub fn from_fn(
        dim: usize,
        hermitian: bool,
        f: impl Fn(f64) -> CMat + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            hermitian,
            fd_step: DEFAULT_FD_STEP,
            f: Arc::new(f),
        }
    }

    pub fn constant(m: CMat, hermitian: bool) -> Self {
        let dim = m.nrows();
        Self::from_fn(dim, hermitian, move |_| m.clone())
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn eval(&self, t: f64) -> CMat {
        (self.f)(t)
    }

    /// 4th-order central finite difference at the path's step.
    pub fn derivative(&self, t: f64) -> CMat {
        self.derivative_at_step(t, self.fd_step)
    }

    pub fn derivative_at_step(&self, t: f64, h: f64) -> CMat {
        let num = self.eval(t - 2.0 * h) - self.eval(t - h).mapv(|z| 8.0 * z)
            + self.eval(t + h).mapv(|z| 8.0 * z)
            - self.eval(t + 2.0 * h);
        num.mapv(|z| z / (12.0 * h))
    }
}

#[derive(Clone, Debug)]
pub struct LindbladModel {
    pub name: String,
    pub dim: usize,
    pub hamiltonian: OperatorPath,
    pub jumps: Vec<OperatorPath>,
}

impl LindbladModel {
    pub fn new(
        name: impl Into<String>,
        hamiltonian: OperatorPath,
        jumps: Vec<OperatorPath>,
    ) -> Result<Self> {
        let dim = hamiltonian.dim;
        if jumps.iter().any(|j| j.dim != dim) {
            return Err(Error::DimMismatch(
                "jump operator dimension differs from Hamiltonian".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            dim,
            hamiltonian,
            jumps,
        })
    }

    pub fn jump_mats(&self, t: f64) -> Vec<CMat> {
        self.jumps.iter().map(|j| j.eval(t)).collect()
    }

    /// The frozen generator L⁰_t + g L¹_t as a superoperator matrix.
    pub fn generator(&self, t: f64, g: f64) -> Superoperator {
        Superoperator::lindblad_generator(&self.hamiltonian.eval(t), &self.jump_mats(t), g)
    }

    pub fn spectral_frame(&self, grid: &[f64], threshold: Option<f64>) -> Result<SpectralFrame> {
        SpectralFrame::build(&self.hamiltonian, grid, threshold)
    }
}

/// Parameters of the built-in model families.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct BuiltinParams {
    /// Spectral gap of the qubit Hamiltonians.
    pub delta: f64,
    /// Dissipation strength γ(t) = gamma0 + gamma1·θ(t).
    pub gamma0: f64,
    pub gamma1: f64,
    /// Total rotation angle of the qubit drive.
    pub theta_max: f64,
    /// Seed for the random families.
    pub seed: u64,
    /// Amplitude of the time-dependent part of the random Hamiltonian.
    pub drive_scale: f64,
    /// Amplitude of the random jump operators.
    pub jump_scale: f64,
    /// Drive profile; see [`DriveKind`].
    pub drive: DriveKind,
}

/// Shape of the schedule θ(t)/θ_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveKind {
    /// The C∞ switch with all derivatives vanishing at both endpoints.
    FlatSwitch,
    /// t²(3 − 2t): flat to first order only. The second endpoint derivative
    /// survives, which keeps the subleading remainders of the perturbative
    /// formulas at their generic order.
    Smoothstep,
    /// t²: flat to first order at the start, constant curvature, nothing
    /// special at the end.
    Quadratic,
    /// Plain ramp t: no flatness at all.
    Ramp,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            delta: 1.0,
            gamma0: 1.0,
            gamma1: 0.0,
            theta_max: FRAC_PI_2,
            seed: 7,
            drive_scale: 0.3,
            jump_scale: 0.7,
            drive: DriveKind::FlatSwitch,
        }
    }
}

impl BuiltinParams {
    pub fn gamma(&self, t: f64) -> f64 {
        self.gamma0 + self.gamma1 * self.schedule(t)
    }

    pub fn schedule(&self, t: f64) -> f64 {
        match self.drive {
            DriveKind::FlatSwitch => switch_extended(t),
            DriveKind::Smoothstep => {
                let u = t.clamp(0.0, 1.0);
                u * u * (3.0 - 2.0 * u)
            }
            DriveKind::Quadratic => {
                let u = t.clamp(0.0, 1.0);
                u * u
            }
            DriveKind::Ramp => t.clamp(0.0, 1.0),
        }
    }
}

pub const BUILTIN_MODELS: &[&str] = &["qubit-sx", "qubit-lowering", "qubit-dephasing", "random-d3"];

/// Construct a built-in model. The qubit families share the Hamiltonian
/// H(t) = (Δ/2)(cos θ(t) σ_z + sin θ(t) σ_x) with θ(t) = θ_max·switch(t) and
/// differ in their jump operator, which is expressed in the instantaneous
/// eigenframe so its matrix elements between bands stay constant in time:
///
/// - `qubit-sx`: Γ(t) = √γ(t) (cos θ σ_x − sin θ σ_z), i.e. σ_x in the frame;
/// - `qubit-lowering`: Γ(t) = √γ(t) |ground(t)⟩⟨excited(t)|;
/// - `qubit-dephasing`: Γ(t) = √γ(t) (cos θ σ_z + sin θ σ_x), a function of H.
///
/// `random-d3` is a seeded d = 3 family H(t) = Q(D + θ(t) A)Q* with two
/// constant random jump operators.
pub fn builtin_model(name: &str, params: &BuiltinParams) -> Result<LindbladModel> {
    if params.gamma0 < 0.0 || params.gamma0 + params.gamma1 < 0.0 {
        return Err(Error::Config(
            "gamma(t) must stay nonnegative on [0,1]".into(),
        ));
    }
    let p = params.clone();
    let theta = move |t: f64| p.theta_max * p.schedule(t);
    match name {
        "qubit-sx" | "qubit-lowering" | "qubit-dephasing" => {
            let (delta, p2) = (params.delta, params.clone());
            let th = theta.clone();
            let hamiltonian = OperatorPath::from_fn(2, true, move |t| {
                let a = th(t);
                qubit_h(delta, a)
            });
            let th = theta.clone();
            let jump = match name {
                "qubit-sx" => OperatorPath::from_fn(2, false, move |t| {
                    let (a, g) = (th(t), p2.gamma(t).max(0.0).sqrt());
                    array![
                        [c(-g * a.sin(), 0.0), c(g * a.cos(), 0.0)],
                        [c(g * a.cos(), 0.0), c(g * a.sin(), 0.0)]
                    ]
                }),
                "qubit-lowering" => OperatorPath::from_fn(2, false, move |t| {
                    let (a, g) = (th(t), p2.gamma(t).max(0.0).sqrt());
                    let (ch, sh) = ((a / 2.0).cos(), (a / 2.0).sin());
                    // |ground⟩⟨excited| with ground = (−s, c), excited = (c, s)
                    array![
                        [c(-g * sh * ch, 0.0), c(-g * sh * sh, 0.0)],
                        [c(g * ch * ch, 0.0), c(g * ch * sh, 0.0)]
                    ]
                }),
                _ => OperatorPath::from_fn(2, false, move |t| {
                    let (a, g) = (th(t), p2.gamma(t).max(0.0).sqrt());
                    array![
                        [c(g * a.cos(), 0.0), c(g * a.sin(), 0.0)],
                        [c(g * a.sin(), 0.0), c(-g * a.cos(), 0.0)]
                    ]
                }),
            };
            LindbladModel::new(name, hamiltonian, vec![jump])
        }
        "random-d3" => {
            let mut rng = crate::rng(params.seed);
            let q = random_unitary(3, &mut rng);
            let d0 = array![
                [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(0.0, 0.0), c(2.6, 0.0)]
            ];
            let base = q.dot(&d0).dot(&dagger(&q));
            let drive = random_hermitian(3, &mut rng).mapv(|z| z * params.drive_scale);
            let th = theta.clone();
            let hamiltonian =
                OperatorPath::from_fn(3, true, move |t| &base + &drive.mapv(|z| z * th(t)));
            let jumps = (0..2)
                .map(|_| {
                    let m = random_matrix(3, &mut rng).mapv(|z| z * params.jump_scale);
                    OperatorPath::constant(m, false)
                })
                .collect();
            LindbladModel::new(name, hamiltonian, jumps)
        }
        other => Err(Error::UnknownModel(other.into())),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qubit_h(delta: f64, a: f64) -> CMat {
    array![
        [c(delta / 2.0 * a.cos(), 0.0), c(delta / 2.0 * a.sin(), 0.0)],
        [
            c(delta / 2.0 * a.sin(), 0.0),
            c(-delta / 2.0 * a.cos(), 0.0)
        ]
    ]
}

fn random_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    // QR of a random matrix via Gram-Schmidt; plenty for model seeding.
    let m = random_matrix(d, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..d {
        let mut v: Vec<Complex64> = (0..d).map(|i| m[[i, j]]).collect();
        for u in &cols {
            let dot: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for i in 0..d {
                v[i] -= dot * u[i];
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= norm;
        }
        cols.push(v);
    }
    CMat::from_shape_fn((d, d), |(i, j)| cols[j][i])
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Check {
    pub pass: bool,
    /// The quantity measured (a norm or a margin; see each check).
    pub value: f64,
    /// The threshold it was compared against.
    pub requirement: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesesReport {
    /// max ‖Ḣ(t)‖ near t = 0; passes when below the flat-start tolerance.
    pub reg_flat_start: Check,
    /// min inter-band distance over the grid; passes when ≥ required gap.
    pub spec_gap: Check,
    /// min of (eigenvalue spacing, Bohr-frequency spacing) over the grid.
    pub gen: Check,
    /// min pairwise spacing of the splitting-matrix eigenvalues over the grid.
    pub split: Check,
}

impl HypothesesReport {
    pub fn all_pass(&self) -> bool {
        self.reg_flat_start.pass && self.spec_gap.pass && self.gen.pass && self.split.pass
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HypothesisOptions {
    pub flat_start_tol: f64,
    pub required_gap: f64,
    pub gen_tol: f64,
    pub split_tol: f64,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        Self {
            flat_start_tol: 1e-8,
            required_gap: 0.01,
            gen_tol: 1e-6,
            split_tol: 1e-6,
        }
    }
}

/// Verify the structural hypotheses on a grid. All four checks always run and
/// report their margins; nothing here errors on a mere failure.
pub fn check_hypotheses(
    model: &LindbladModel,
    grid: &[f64],
    opts: &HypothesisOptions,
) -> Result<HypothesesReport> {
    // flat start: sample the derivative norm near t = 0
    let mut dh_max = 0.0f64;
    for &t in &[0.0, 5e-4, 1e-3, 2e-3] {
        dh_max = dh_max.max(linalg::spectral_norm(&model.hamiltonian.derivative(t)));
    }
    let reg_flat_start = Check {
        pass: dh_max <= opts.flat_start_tol,
        value: dh_max,
        requirement: opts.flat_start_tol,
    };

    let frame = model.spectral_frame(grid, None)?;
    let spec_gap = Check {
        pass: frame.gap >= opts.required_gap,
        value: frame.gap,
        requirement: opts.required_gap,
    };

    // Gen: simple eigenvalues and distinct Bohr frequencies, from the raw
    // (ungrouped) spectrum.
    let mut gen_margin = f64::INFINITY;
    for &t in grid {
        let (vals, _) = linalg::eigh(&model.hamiltonian.eval(t))?;
        for w in vals.windows(2) {
            gen_margin = gen_margin.min(w[1] - w[0]);
        }
        let d = vals.len();
        let mut bohr = Vec::new();
        for j in 0..d {
            for k in 0..d {
                if j != k {
                    bohr.push(vals[j] - vals[k]);
                }
            }
        }
        for a in 0..bohr.len() {
            for b in a + 1..bohr.len() {
                gen_margin = gen_margin.min((bohr[a] - bohr[b]).abs());
            }
        }
    }
    let gen = Check {
        pass: gen_margin >= opts.gen_tol,
        value: gen_margin,
        requirement: opts.gen_tol,
    };

    // Split: pairwise separation of the splitting-matrix spectrum. Needs
    // singleton bands; reported as failed otherwise.
    let split = if frame.singleton() && !model.jumps.is_empty() {
        let mut margin = f64::INFINITY;
        for &t in grid {
            let point = frame.eval(t)?;
            let ltilde = crate::asymptotics::splitting_entries(&point, &model.jump_mats(t));
            let cm = ltilde.mapv(|x| Complex64::new(x, 0.0));
            let (vals, _, _) = linalg::eig(&cm)?;
            for a in 0..vals.len() {
                for b in a + 1..vals.len() {
                    margin = margin.min((vals[a] - vals[b]).norm());
                }
            }
        }
        Check {
            pass: margin >= opts.split_tol,
            value: margin,
            requirement: opts.split_tol,
        }
    } else {
        Check {
            pass: false,
            value: 0.0,
            requirement: opts.split_tol,
        }
    };

    Ok(HypothesesReport {
        reg_flat_start,
        spec_gap,
        gen,
        split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::splitting_entries;
    use crate::operators::hs_inner;

    #[test]
    fn qubit_sx_symmetry_condition_holds() {
        let params = BuiltinParams {
            gamma0: 0.8,
            gamma1: 0.4,
            ..Default::default()
        };
        let model = builtin_model("qubit-sx", &params).unwrap();
        let frame = model.spectral_frame(&uniform_grid(50), None).unwrap();
        for &t in &[0.1, 0.5, 0.9] {
            let point = frame.eval(t).unwrap();
            let l = splitting_entries(&point, &model.jump_mats(t));
            assert!(
                (l[[0, 1]] - l[[1, 0]]).abs() < 1e-12,
                "L̃ off-diagonals {} vs {}",
                l[[0, 1]],
                l[[1, 0]]
            );
            // jump is σ_x in the rotating frame: |⟨1|Γ|2⟩|² = γ(t)
            assert!((l[[0, 1]] - params.gamma(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn qubit_lowering_symmetry_fails() {
        let model = builtin_model("qubit-lowering", &BuiltinParams::default()).unwrap();
        let frame = model.spectral_frame(&uniform_grid(50), None).unwrap();
        let point = frame.eval(0.5).unwrap();
        let l = splitting_entries(&point, &model.jump_mats(0.5));
        // Γ maps only excited → ground
        assert!((l[[0, 1]] - 1.0).abs() < 1e-10);
        assert!(l[[1, 0]].abs() < 1e-12);
    }

    #[test]
    fn random_d3_reproducible() {
        let a = builtin_model("random-d3", &BuiltinParams::default()).unwrap();
        let b = builtin_model("random-d3", &BuiltinParams::default()).unwrap();
        for &t in &[0.0, 0.33, 0.77, 1.0] {
            let (ha, hb) = (a.hamiltonian.eval(t), b.hamiltonian.eval(t));
            assert_eq!(ha, hb, "byte-identical Hamiltonians expected");
            for (ja, jb) in a.jumps.iter().zip(&b.jumps) {
                assert_eq!(ja.eval(t), jb.eval(t));
            }
        }
    }

    #[test]
    fn unknown_model_rejected() {
        assert!(matches!(
            builtin_model("qubit-zz", &BuiltinParams::default()),
            Err(Error::UnknownModel(_))
        ));
    }

    #[test]
    fn hypotheses_qubit_sx_all_pass() {
        let model = builtin_model("qubit-sx", &BuiltinParams::default()).unwrap();
        let report =
            check_hypotheses(&model, &uniform_grid(100), &HypothesisOptions::default()).unwrap();
        assert!(report.reg_flat_start.pass, "{report:?}");
        assert!(report.spec_gap.pass, "{report:?}");
        assert!(report.gen.pass, "{report:?}");
        assert!(report.split.pass, "{report:?}");
        assert!(report.all_pass());
    }

    #[test]
    fn hypotheses_degenerate_hamiltonian_fails_gen() {
        let h = OperatorPath::constant(linalg::identity(2), true);
        let model = LindbladModel::new("flat", h, vec![]).unwrap();
        let report =
            check_hypotheses(&model, &uniform_grid(10), &HypothesisOptions::default()).unwrap();
        assert!(!report.gen.pass);
    }

    #[test]
    fn hypotheses_dephasing_fails_split() {
        // dephasing jumps are functions of H, so L̃ ≡ 0 and the splitting is
        // completely degenerate
        let model = builtin_model("qubit-dephasing", &BuiltinParams::default()).unwrap();
        let frame = model.spectral_frame(&uniform_grid(50), None).unwrap();
        let point = frame.eval(0.4).unwrap();
        let l = splitting_entries(&point, &model.jump_mats(0.4));
        assert!(
            l.iter().all(|x| x.abs() < 1e-12),
            "L̃ should vanish, got {l:?}"
        );
        let report =
            check_hypotheses(&model, &uniform_grid(50), &HypothesisOptions::default()).unwrap();
        assert!(!report.split.pass);
        assert!(report.gen.pass);
    }

    #[test]
    fn derivative_evaluator_matches_schedule_rate() {
        // H(t) = θ(t) σ_x must differentiate to θ'(t) σ_x; oracle for θ' is a
        // fine central difference of the scalar switch.
        let sx = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        let sx2 = sx.clone();
        let path = OperatorPath::from_fn(2, true, move |t| sx2.mapv(|z| z * switch_extended(t)));
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let h = 1e-5;
            let rate = (switch_extended(t + h) - switch_extended(t - h)) / (2.0 * h);
            let d = path.derivative(t);
            let err = linalg::max_abs(&(&d - &sx.mapv(|z| z * rate)));
            assert!(err < 1e-6, "derivative error {err:.2e} at t={t}");
        }
    }

    #[test]
    fn derivative_richardson_consistency() {
        let model = builtin_model("qubit-sx", &BuiltinParams::default()).unwrap();
        let h = model.hamiltonian.fd_step;
        for &t in &[0.2, 0.5, 0.8] {
            let d1 = model.hamiltonian.derivative_at_step(t, h);
            let d2 = model.hamiltonian.derivative_at_step(t, h / 2.0);
            // 4th-order scheme: halving the step shrinks the truncation error
            // by 16, so the two evaluations agree to ~the error at step h
            let diff = linalg::max_abs(&(&d1 - &d2));
            assert!(diff < 1e-8, "FD inconsistency {diff:.2e} at t={t}");
        }
    }

    #[test]
    fn builtin_resolution_of_identity_on_grid() {
        for name in BUILTIN_MODELS {
            let model = builtin_model(name, &BuiltinParams::default()).unwrap();
            let grid = uniform_grid(50);
            let frame = model.spectral_frame(&grid, None).unwrap();
            for point in &frame.points {
                let mut sum = CMat::zeros((model.dim, model.dim));
                for p in &point.projectors {
                    sum = sum + p;
                    // idempotency via ⟨⟨P, P⟩⟩ = Tr P for projectors
                    let p2 = p.dot(p);
                    assert!(linalg::max_abs(&(&p2 - p)) < 1e-10);
                }
                assert!(linalg::max_abs(&(&sum - &linalg::identity(model.dim))) < 1e-10);
            }
        }
        // hs_inner sanity on a projector: ⟨⟨P,P⟩⟩ = rank
        let model = builtin_model("qubit-sx", &BuiltinParams::default()).unwrap();
        let frame = model.spectral_frame(&uniform_grid(10), None).unwrap();
        let p = &frame.points[3].projectors[0];
        assert!((hs_inner(p, p).unwrap().re - 1.0).abs() < 1e-10);
    }
}
