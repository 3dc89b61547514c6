//! The declared failure modes: ambiguous band matching, non-singleton bands
//! where singletons are required, degenerate splitting kernels, and gap
//! collapse of the corrected Hamiltonians.

use adilind::asymptotics::{reduced_dynamics, splitting_matrix, stationary_state};
use adilind::linalg::identity;
use adilind::model::{builtin_model, uniform_grid, BuiltinParams, OperatorPath, SpectralFrame};
use adilind::propagators::{dynamical_phase, superadiabatic_frame, DEFAULT_TOL};
use adilind::Error;
use ndarray::array;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn coarse_grid_with_fast_rotation_is_ambiguous() {
    // the bands rotate by π/2 per grid step, so consecutive projectors
    // overlap both labels equally
    let path = OperatorPath::from_fn(2, true, |t| {
        let a = std::f64::consts::PI * t;
        array![
            [c(a.cos(), 0.0), c(a.sin(), 0.0)],
            [c(a.sin(), 0.0), c(-a.cos(), 0.0)]
        ]
    });
    let grid = [0.0, 0.5, 1.0];
    let r = SpectralFrame::build(&path, &grid, None);
    assert!(
        matches!(r, Err(Error::LabelingAmbiguous { .. })),
        "expected ambiguity, got {r:?}"
    );
    // a fine grid resolves it
    assert!(SpectralFrame::build(&path, &uniform_grid(40), None).is_ok());
}

#[test]
fn non_singleton_band_rejected_where_required() {
    // d = 3 with a permanently two-fold band
    let h = array![
        [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]
    ];
    let path = OperatorPath::constant(h, true);
    let frame = SpectralFrame::build(&path, &uniform_grid(20), None).unwrap();
    assert_eq!(frame.group_count(), 2);
    assert!(!frame.singleton());

    let r = dynamical_phase(&frame, 0.1, 0.0, &[1.0], DEFAULT_TOL);
    assert!(matches!(r, Err(Error::NonSingletonBand { .. })), "{r:?}");

    let jump = OperatorPath::constant(identity(3), false);
    let model = adilind::model::LindbladModel::new("degenerate", path, vec![jump]).unwrap();
    let r = reduced_dynamics(&model, &frame, 1.0, 0.0, &[1.0], DEFAULT_TOL);
    assert!(matches!(r, Err(Error::NonSingletonBand { .. })), "{r:?}");
}

#[test]
fn degenerate_splitting_kernel_rejected() {
    // dephasing jumps leave the populations frozen: the splitting matrix
    // vanishes and its kernel is the whole population space
    let model = builtin_model("qubit-dephasing", &BuiltinParams::default()).unwrap();
    let frame = model.spectral_frame(&uniform_grid(50), None).unwrap();
    let sm = splitting_matrix(&model, 0.5, &frame).unwrap();
    let r = stationary_state(&sm, &frame, 0.5);
    assert!(matches!(r, Err(Error::KernelDimension { dim: 2 })), "{r:?}");
}

#[test]
fn corrected_hamiltonian_gap_collapse_detected() {
    // a narrowly split pair with a strong drive: the first corrected
    // Hamiltonian H − iεK moves the close eigenvalues by more than half
    // their distance once ε is large enough
    let params = BuiltinParams {
        drive_scale: 1.2,
        ..Default::default()
    };
    let model = builtin_model("random-d3", &params).unwrap();
    let narrow = OperatorPath::from_fn(3, true, {
        let h = model.hamiltonian.clone();
        move |t| {
            let m = h.eval(t);
            // compress the spectrum so the base gap is small
            m.mapv(|z| z * 0.12)
        }
    });
    let frame = SpectralFrame::build(&narrow, &uniform_grid(200), None).unwrap();
    let mut collapsed = false;
    for &eps in &[0.2, 0.5, 1.0, 2.0] {
        match superadiabatic_frame(&frame, eps, 2) {
            Err(Error::GapCollapse { .. }) => {
                collapsed = true;
                break;
            }
            Err(other) => panic!("unexpected error {other}"),
            Ok(_) => {}
        }
    }
    assert!(collapsed, "no threshold found up to eps = 2");
}
