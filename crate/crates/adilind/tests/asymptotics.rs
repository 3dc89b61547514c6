//! Oracle tests for the splitting matrix, stationary states, reduced
//! population dynamics, the Markov export, and the perturbative transition
//! formulas.

use adilind::asymptotics::{
    markov_generator, perturbative_transition, reduced_dynamics, splitting_entries,
    splitting_matrix, stationary_state, time_ordered_exponential, transition_approximant_core,
};
use adilind::linalg::{identity, max_abs, CMat};
use adilind::model::{
    builtin_model, check_hypotheses, uniform_grid, BuiltinParams, HypothesisOptions, LindbladModel,
    OperatorPath,
};
use adilind::operators::trace;
use adilind::propagators::DEFAULT_TOL;
use ndarray::{array, Array2};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qubit(
    gamma0: f64,
    gamma1: f64,
) -> (LindbladModel, adilind::model::SpectralFrame, BuiltinParams) {
    let params = BuiltinParams {
        gamma0,
        gamma1,
        ..Default::default()
    };
    let model = builtin_model("qubit-sx", &params).unwrap();
    let frame = model.spectral_frame(&uniform_grid(200), None).unwrap();
    (model, frame, params)
}

#[test]
fn splitting_identity_jump_vanishes() {
    let (_, frame, _) = qubit(1.0, 0.0);
    let point = frame.eval(0.5).unwrap();
    let l = splitting_entries(&point, &[identity(2)]);
    assert!(l.iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn splitting_qubit_sx_closed_form() {
    let (model, frame, params) = qubit(0.7, 0.6);
    for &t in &[0.0, 0.4, 0.8, 1.0] {
        let sm = splitting_matrix(&model, t, &frame).unwrap();
        let gamma = params.gamma(t);
        let expected = array![[-gamma, gamma], [gamma, -gamma]];
        let diff = &sm.matrix - &expected;
        assert!(
            diff.iter().all(|x| x.abs() < 1e-9),
            "t={t}: {:?}",
            sm.matrix
        );
    }
}

#[test]
fn splitting_qubit_lowering_closed_form() {
    // Γ = |ground⟩⟨excited| gives, in ascending band order,
    // L̃ = [[0, 1], [0, −1]]: probability flows from band 1 into band 0.
    let params = BuiltinParams::default();
    let model = builtin_model("qubit-lowering", &params).unwrap();
    let frame = model.spectral_frame(&uniform_grid(200), None).unwrap();
    let sm = splitting_matrix(&model, 0.6, &frame).unwrap();
    let expected = array![[0.0, 1.0], [0.0, -1.0]];
    let diff = &sm.matrix - &expected;
    assert!(diff.iter().all(|x| x.abs() < 1e-9), "{:?}", sm.matrix);
}

#[test]
fn splitting_structure_on_random_models() {
    // column sums 0, off-diagonals ≥ 0, and 0 in the spectrum, on 50 seeded
    // generic models
    let mut found = 0;
    let mut seed = 0u64;
    while found < 50 {
        seed += 1;
        assert!(seed < 200, "not enough generic models found");
        let params = BuiltinParams {
            seed,
            ..Default::default()
        };
        let model = builtin_model("random-d3", &params).unwrap();
        let grid = uniform_grid(40);
        let report = check_hypotheses(&model, &grid, &HypothesisOptions::default()).unwrap();
        if !(report.gen.pass && report.split.pass) {
            continue;
        }
        found += 1;
        let frame = model.spectral_frame(&grid, None).unwrap();
        for &t in &[0.0, 0.5, 1.0] {
            let sm = splitting_matrix(&model, t, &frame).unwrap();
            let d = sm.dim();
            for j in 0..d {
                let mut col = 0.0;
                for k in 0..d {
                    col += sm.matrix[[k, j]];
                    if k != j {
                        assert!(sm.matrix[[k, j]] >= -1e-12, "seed {seed}");
                    }
                }
                assert!(col.abs() <= 1e-12, "seed {seed}: column sum {col:.2e}");
            }
            let zero_dist = sm
                .eigenvalues
                .iter()
                .map(|v| v.norm())
                .fold(f64::INFINITY, f64::min);
            assert!(zero_dist <= 1e-10, "seed {seed}");
            // nonzero eigenvalues strictly in the left half plane
            for v in &sm.eigenvalues {
                assert!(v.re <= 1e-10, "seed {seed}: eigenvalue {v}");
            }
        }
    }
}

#[test]
fn splitting_eigvec_normalization() {
    let params = BuiltinParams {
        seed: 3,
        ..Default::default()
    };
    let model = builtin_model("random-d3", &params).unwrap();
    let frame = model.spectral_frame(&uniform_grid(40), None).unwrap();
    let sm = splitting_matrix(&model, 0.5, &frame).unwrap();
    let d = sm.dim() as f64;
    for j in 0..sm.dim() {
        let dot: Complex64 = sm.left[j]
            .iter()
            .zip(sm.right[j].iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((dot - c(1.0, 0.0)).norm() < 1e-10, "⟨μ,ν⟩ = {dot}");
        let nn: f64 = sm.left[j].iter().map(|z| z.norm_sqr()).sum();
        assert!((nn - d).abs() < 1e-10, "⟨μ,μ⟩ = {nn}");
    }
    // kernel row: left vector is exactly 1 (trace functional)
    let k = sm.kernel_index();
    assert!(sm.left[k].iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
}

#[test]
fn stationary_state_qubit_families() {
    let (model, frame, _) = qubit(1.0, 0.0);
    let sm = splitting_matrix(&model, 0.7, &frame).unwrap();
    let nu = stationary_state(&sm, &frame, 0.7).unwrap();
    assert!(max_abs(&(&nu.mat - &identity(2).mapv(|z| 0.5 * z))) < 1e-9);

    // lowering: kernel of [[0,1],[0,−1]] is (1,0) → the ground band projector
    let model = builtin_model("qubit-lowering", &BuiltinParams::default()).unwrap();
    let frame = model.spectral_frame(&uniform_grid(200), None).unwrap();
    let sm = splitting_matrix(&model, 0.7, &frame).unwrap();
    let nu = stationary_state(&sm, &frame, 0.7).unwrap();
    let p_ground = &frame.eval(0.7).unwrap().projectors[0];
    assert!(max_abs(&(&nu.mat - p_ground)) < 1e-9);
    assert!((trace(&nu.mat).re - 1.0).abs() < 1e-10);
}

#[test]
fn stationary_state_is_fixed_point_of_rate_flow() {
    let params = BuiltinParams {
        seed: 11,
        ..Default::default()
    };
    let model = builtin_model("random-d3", &params).unwrap();
    let frame = model.spectral_frame(&uniform_grid(40), None).unwrap();
    let sm = splitting_matrix(&model, 0.5, &frame).unwrap();
    let nu = stationary_state(&sm, &frame, 0.5).unwrap();
    let point = frame.eval(0.5).unwrap();
    let c_vec: Vec<f64> = (0..3)
        .map(|k| trace(&point.projectors[k].dot(&nu.mat)).re)
        .collect();
    // evolve c under exp(τ L̃) for τ = 50 / |Re λ̃_min|; it must not move
    let re_min = sm
        .eigenvalues
        .iter()
        .filter(|v| v.norm() > 1e-9)
        .map(|v| v.re.abs())
        .fold(f64::INFINITY, f64::min);
    let tau = 50.0 / re_min;
    let flow = adilind::linalg::expm(&sm.matrix.mapv(|x| c(x * tau, 0.0)));
    let mut out = [0.0f64; 3];
    for r in 0..3 {
        for j in 0..3 {
            out[r] += flow[[r, j]].re * c_vec[j];
        }
    }
    for r in 0..3 {
        assert!((out[r] - c_vec[r]).abs() < 1e-8);
    }
}

#[test]
fn reduced_dynamics_identity_at_start_and_closed_form() {
    let (model, frame, params) = qubit(1.0, 0.5);
    let delta = 0.7;
    let times = [0.3, 0.3, 1.0];
    let rd = reduced_dynamics(&model, &frame, delta, 0.3, &times, DEFAULT_TOL).unwrap();
    assert!(rd
        .at(0.3)
        .unwrap()
        .iter()
        .zip(Array2::<f64>::eye(2).iter())
        .all(|(a, b)| (a - b).abs() < 1e-12));

    // population matrix ½[[1,1],[1,1]] + e^{−(2/δ)∫γ} ½[[1,−1],[−1,1]];
    // the γ integral oracle is a fine Riemann sum of the scalar rate
    let m = rd.at(1.0).unwrap();
    let n = 40_000;
    let int_gamma: f64 = (0..n)
        .map(|i| params.gamma(0.3 + (i as f64 + 0.5) * 0.7 / n as f64) * 0.7 / n as f64)
        .sum();
    let f = (-2.0 / delta * int_gamma).exp();
    let expected = array![
        [0.5 + 0.5 * f, 0.5 - 0.5 * f],
        [0.5 - 0.5 * f, 0.5 + 0.5 * f]
    ];
    for (a, b) in m.iter().zip(expected.iter()) {
        assert!((a - b).abs() < 1e-8, "{m:?} vs {expected:?}");
    }
}

#[test]
fn reduced_dynamics_decay_constant() {
    // γ ≡ 1, δ = 1, t − s = 1: decaying factor e^{−2}
    let (model, frame, _) = qubit(1.0, 0.0);
    let rd = reduced_dynamics(&model, &frame, 1.0, 0.0, &[1.0], DEFAULT_TOL).unwrap();
    let m = rd.at(1.0).unwrap();
    let f = m[[0, 0]] - m[[1, 0]];
    assert!((f - 0.135_335_283_236_61).abs() < 1e-9, "factor {f}");
}

#[test]
fn reduced_dynamics_transpose_stochastic() {
    for &(name, seed) in &[("qubit-sx", 7u64), ("qubit-lowering", 7), ("random-d3", 11)] {
        let params = BuiltinParams {
            seed,
            ..Default::default()
        };
        let model = builtin_model(name, &params).unwrap();
        let frame = model.spectral_frame(&uniform_grid(100), None).unwrap();
        for &delta in &[0.1, 1.0, 10.0] {
            let rd = reduced_dynamics(&model, &frame, delta, 0.0, &uniform_grid(10), DEFAULT_TOL)
                .unwrap();
            let (rowsum, neg) = rd.stochasticity_deficit();
            assert!(
                rowsum <= 1e-10,
                "{name} δ={delta}: row-sum deficit {rowsum:.2e}"
            );
            assert!(neg >= -1e-10, "{name} δ={delta}: negative entry {neg:.2e}");
        }
    }
}

#[test]
fn reduced_dynamics_lift_is_cptp_after_transport() {
    let (model, frame, _) = qubit(1.0, 0.0);
    for &delta in &[0.3, 1.0, 3.0] {
        let (approx, psi_p0) =
            transition_approximant_core(&model, &frame, delta, 0.8, DEFAULT_TOL).unwrap();
        for s in [&approx, &psi_p0] {
            let rep = s.is_cptp(1e-7).unwrap();
            assert!(rep.pass, "δ={delta}: {rep:?}");
        }
    }
}

#[test]
fn markov_rates_and_time_ordered_exponential() {
    // symmetric 2-state rate matrix with rates γ(t)
    let (model, frame, params) = qubit(1.0, 0.8);
    let gens = markov_generator(&model, &frame, &uniform_grid(20)).unwrap();
    for (k, q) in gens.rates.iter().enumerate() {
        let gamma = params.gamma(gens.times[k]);
        let expected = array![[-gamma, gamma], [gamma, -gamma]];
        for (a, b) in q.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
    // the midpoint product of exponentials reproduces the transposed
    // population matrix of the reduced dynamics at δ = 1
    let rd = reduced_dynamics(&model, &frame, 1.0, 0.0, &[1.0], DEFAULT_TOL).unwrap();
    let t_exp = time_ordered_exponential(&model, &frame, 0.0, 1.0, 4000).unwrap();
    let m = rd.at(1.0).unwrap();
    for r in 0..2 {
        for cix in 0..2 {
            assert!((t_exp[[r, cix]] - m[[cix, r]]).abs() < 1e-6);
        }
    }

    // no dissipator → zero rates, identity chain
    let flat = LindbladModel::new(
        "bare",
        model.hamiltonian.clone(),
        vec![OperatorPath::constant(CMat::zeros((2, 2)), false)],
    )
    .unwrap();
    let gens = markov_generator(&flat, &frame, &uniform_grid(5)).unwrap();
    assert!(gens.rates.iter().all(|q| q.iter().all(|x| x.abs() < 1e-14)));
    let chain = time_ordered_exponential(&flat, &frame, 0.0, 1.0, 100).unwrap();
    assert!(chain
        .iter()
        .zip(Array2::<f64>::eye(2).iter())
        .all(|(a, b)| (a - b).abs() < 1e-12));

    // random-d3 row sums
    let model = builtin_model("random-d3", &BuiltinParams::default()).unwrap();
    let frame = model.spectral_frame(&uniform_grid(100), None).unwrap();
    let gens = markov_generator(&model, &frame, &uniform_grid(20)).unwrap();
    for q in &gens.rates {
        for r in 0..3 {
            let sum: f64 = (0..3).map(|cix| q[[r, cix]]).sum();
            assert!(sum.abs() <= 1e-12);
        }
    }
}

#[test]
fn perturbative_transition_dephasing_dissipator_vanishes() {
    let params = BuiltinParams::default();
    let model = builtin_model("qubit-dephasing", &params).unwrap();
    let frame = model.spectral_frame(&uniform_grid(200), None).unwrap();
    let rho = frame.eval(0.0).unwrap().projectors[0].clone();
    let terms = perturbative_transition(&model, &frame, 0.1, 0.01, 1.0, 0, 1, &rho).unwrap();
    assert!(terms.dissipator_term.abs() <= 1e-12, "{terms:?}");
}

#[test]
fn perturbative_transition_g_zero_and_qubit_rate() {
    let (model, frame, _) = qubit(1.0, 0.0);
    let rho = frame.eval(0.0).unwrap().projectors[0].clone();
    let t0 = perturbative_transition(&model, &frame, 0.1, 0.0, 1.0, 0, 1, &rho).unwrap();
    assert_eq!(t0.dissipator_term, 0.0);
    assert!((t0.total - t0.hamiltonian_term).abs() < 1e-15);

    // γ ≡ 1: the frame-aligned jump has unit matrix element between the
    // bands, so the history integral is exactly (g/ε)·t
    for &(eps, g, t) in &[(0.1, 0.01, 1.0), (0.2, 0.05, 0.5)] {
        let terms = perturbative_transition(&model, &frame, eps, g, t, 0, 1, &rho).unwrap();
        let expected = g / eps * t;
        assert!(
            (terms.dissipator_term - expected).abs() < 1e-7 * expected.max(1.0),
            "eps={eps} g={g}: {} vs {expected}",
            terms.dissipator_term
        );
        assert!(terms.dissipator_term >= 0.0);
    }
}

#[test]
fn hamiltonian_transition_constant_h_is_zero() {
    let h = OperatorPath::constant(
        array![[c(0.5, 0.), c(0., 0.)], [c(0., 0.), c(-0.5, 0.)]],
        true,
    );
    let model = LindbladModel::new("const", h, vec![]).unwrap();
    let frame = model.spectral_frame(&uniform_grid(20), None).unwrap();
    let rho = frame.eval(0.0).unwrap().projectors[0].clone();
    let v = adilind::asymptotics::hamiltonian_transition(&frame, 0.1, 0.8, 0, 1, &rho).unwrap();
    assert!(v.abs() < 1e-18);
}

#[test]
fn dissipator_term_nonnegative_on_random_models() {
    let mut checked = 0;
    let mut seed = 100u64;
    while checked < 10 {
        seed += 1;
        let params = BuiltinParams {
            seed,
            ..Default::default()
        };
        let model = builtin_model("random-d3", &params).unwrap();
        let grid = uniform_grid(40);
        let report = check_hypotheses(&model, &grid, &HypothesisOptions::default()).unwrap();
        if !report.gen.pass {
            continue;
        }
        checked += 1;
        let frame = model.spectral_frame(&grid, None).unwrap();
        let rho = frame.eval(0.0).unwrap().projectors[1].clone();
        let terms = perturbative_transition(&model, &frame, 0.15, 0.02, 0.7, 1, 2, &rho).unwrap();
        assert!(terms.dissipator_term >= 0.0, "seed {seed}: {terms:?}");
    }
}

#[test]
fn closed_form_matches_reduced_dynamics_on_random_tuples() {
    let mut rng = adilind::rng(77);
    use rand::Rng;
    for _ in 0..20 {
        let params = BuiltinParams {
            gamma0: 0.2 + rng.random::<f64>(),
            gamma1: rng.random::<f64>(),
            ..Default::default()
        };
        let delta = 0.2 + 3.0 * rng.random::<f64>();
        let t = 0.1 + 0.9 * rng.random::<f64>();
        let model = builtin_model("qubit-sx", &params).unwrap();
        let frame = model.spectral_frame(&uniform_grid(100), None).unwrap();
        let closed = adilind::experiments::qubit_closed_form_checked(
            &model,
            &frame,
            delta,
            t,
            adilind::experiments::QubitObservable::Transition,
        )
        .unwrap();
        let rd = reduced_dynamics(&model, &frame, delta, 0.0, &[t], DEFAULT_TOL).unwrap();
        let reduced = rd.at(t).unwrap()[[1, 0]];
        assert!(
            (closed - reduced).abs() < 1e-8,
            "γ=({}, {}), δ={delta}, t={t}: {closed} vs {reduced}",
            params.gamma0,
            params.gamma1
        );
    }
}

#[test]
fn hamiltonian_formula_residual_cubic_on_ramped_qubit() {
    // quadratic ramp: a fully flat start suppresses the cubic remainder of
    // the transition formula below its generic order
    let params = BuiltinParams {
        drive: adilind::model::DriveKind::Quadratic,
        ..Default::default()
    };
    let model = builtin_model("qubit-sx", &params).unwrap();
    let frame = model.spectral_frame(&uniform_grid(200), None).unwrap();
    let rho0 = frame.eval(0.0).unwrap().projectors[0].clone();
    let times = [0.25, 0.33, 0.41, 0.49, 0.57, 0.65, 0.73, 0.8];
    let eps_list = [0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025];
    let mut residuals = Vec::new();
    for &eps in &eps_list {
        let u0 =
            adilind::propagators::lindblad_propagator(&model, eps, 0.0, 0.0, &times, DEFAULT_TOL)
                .unwrap();
        let mut mean = 0.0;
        for (k, &t) in times.iter().enumerate() {
            let sop =
                adilind::operators::Superoperator::from_matrix(2, u0.mats[k].clone()).unwrap();
            let p1 = frame.eval(t).unwrap().projectors[1].clone();
            let prob = trace(&p1.dot(&sop.apply(&rho0))).re;
            let f =
                adilind::asymptotics::hamiltonian_transition(&frame, eps, t, 0, 1, &rho0).unwrap();
            mean += (prob - f).abs() / times.len() as f64;
        }
        residuals.push(mean);
    }
    let lx: Vec<f64> = eps_list.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = residuals.iter().map(|y: &f64| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let s = num / lx.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!(
        (s - 3.0).abs() <= 0.3,
        "residual slope {s:.3}, values {residuals:?}"
    );
}

#[test]
fn coherence_block_linear_in_epsilon_and_matches_formula() {
    let (model, frame, _) = qubit(1.0, 0.0);
    let rho0 = frame.eval(0.0).unwrap().projectors[0].clone();
    let t = 0.6;
    let eps_list = [0.04, 0.02, 0.01];
    let mut mags = Vec::new();
    for &eps in &eps_list {
        let u0 =
            adilind::propagators::lindblad_propagator(&model, eps, 0.0, 0.0, &[t], DEFAULT_TOL)
                .unwrap();
        let sop = adilind::operators::Superoperator::from_matrix(2, u0.end().clone()).unwrap();
        let out = sop.apply(&rho0);
        let pt = frame.eval(t).unwrap();
        let block = pt.projectors[0].dot(&out).dot(&pt.projectors[1]);
        let measured = adilind::linalg::spectral_norm(&block);
        mags.push(measured);
        // the order-ε branch of the block formula matches in magnitude up to
        // its own O(ε) relative correction
        let est = adilind::asymptotics::coherence_estimate(&frame, eps, t, 0, 0, 1, &rho0).unwrap();
        let ratio = measured / adilind::linalg::spectral_norm(&est);
        let budget = 1.0 + 6.0 * eps;
        assert!(
            ratio < budget && ratio > 1.0 / budget,
            "eps={eps}: formula ratio {ratio:.4}"
        );
    }
    let lx: Vec<f64> = eps_list.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = mags.iter().map(|y: &f64| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let s = num / lx.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!((s - 1.0).abs() <= 0.2, "coherence magnitude slope {s:.3}");
}
