//! Command-line entry point: load a run configuration, execute simulations,
//! regime sweeps, invariant batteries, and data exports.
//!
//! Exit codes are a stable contract: 0 success, 1 configuration error,
//! 2 integration failure, 3 hypothesis failure, 4 invariant failure.

mod config;
mod model_io;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use adilind::asymptotics::{
    markov_generator, reduced_dynamics, splitting_entries, splitting_matrix, stationary_state,
    time_ordered_exponential,
};
use adilind::experiments::{qubit_closed_form_checked, run_suite, QubitObservable, SweepPlan};
use adilind::linalg::{dagger, max_abs};
use adilind::model::{
    check_hypotheses, uniform_grid, HypothesisOptions, LindbladModel, SpectralFrame,
};
use adilind::operators::{trace, Superoperator};
use adilind::propagators::{
    adiabatic_propagator, kato_transport, lindblad_propagator, schrodinger_propagator,
    superop_parallel_transport,
};
use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use config::RunConfig;
use output::Writer;

#[derive(Parser)]
#[command(
    name = "adilind",
    version,
    about = "Slowly driven Lindblad dynamics: simulations, asymptotic approximants, and convergence-rate sweeps"
)]
struct Cli {
    /// Run configuration (TOML); defaults are used when absent.
    #[arg(long, global = true, env = "ADILIND_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true, env = "ADILIND_OUT")]
    out: Option<String>,

    /// RNG seed (overrides the config).
    #[arg(long, global = true, env = "ADILIND_SEED")]
    seed: Option<u64>,

    /// Integrator tolerance (overrides the config).
    #[arg(long, global = true, env = "ADILIND_TOL")]
    tol: Option<f64>,

    /// Suppress progress output.
    #[arg(long, global = true, env = "ADILIND_QUIET")]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the exact and adiabatic families and export their tables.
    Simulate,
    /// Run a named convergence-rate suite and export the report.
    Sweep {
        /// Suite name (overrides the config).
        #[arg(long, env = "ADILIND_SUITE")]
        suite: Option<String>,
    },
    /// Run the invariant battery on the configured model.
    Validate {
        /// Corrupt the splitting matrix first, proving the battery can fail.
        #[arg(long, hide = true)]
        inject_violation: bool,
    },
    /// Compare the two-level closed form with the reduced and exact dynamics.
    QubitDemo,
    /// Export the time-dependent Markov rate matrix of the configured model.
    ExportMarkov,
    /// Print the fully resolved default configuration.
    PrintDefaults,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code)
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    if let Some(lib) = e.downcast_ref::<adilind::Error>() {
        use adilind::Error::*;
        return match lib {
            IntegrationFailure { .. } => 2,
            Hypothesis(_)
            | NonSingletonBand { .. }
            | DegenerateEigenvalue { .. }
            | Symmetry(_)
            | LabelingAmbiguous { .. }
            | LabelingFailed { .. }
            | GapCollapse { .. }
            | KernelDimension { .. } => 3,
            Invariant(_) => 4,
            _ => 1,
        };
    }
    1
}

fn run(cli: Cli) -> Result<u8> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0) {
            bail!("--tol must be strictly positive");
        }
        cfg.tolerances.integrator = tol;
    }
    if cli.quiet {
        cfg.output.quiet = true;
    }

    match cli.command {
        Command::PrintDefaults => {
            print!("{}", RunConfig::default().canonical_toml());
            Ok(0)
        }
        Command::Simulate => cmd_simulate(&cfg, &cli),
        Command::Sweep { suite } => cmd_sweep(&cfg, suite),
        Command::Validate { inject_violation } => cmd_validate(&cfg, &cli, inject_violation),
        Command::QubitDemo => cmd_qubit_demo(&cfg, &cli),
        Command::ExportMarkov => cmd_export_markov(&cfg, &cli),
    }
}

fn config_dir(cli: &Cli) -> PathBuf {
    cli.config
        .as_deref()
        .and_then(|p| p.parent())
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn build_model_and_frame(cfg: &RunConfig, cli: &Cli) -> Result<(LindbladModel, SpectralFrame)> {
    let model = model_io::build_model(&cfg.model, &config_dir(cli))?;
    let grid = uniform_grid(cfg.model.grid_intervals);
    let frame = model.spectral_frame(&grid, None)?;
    Ok((model, frame))
}

fn cmd_simulate(cfg: &RunConfig, cli: &Cli) -> Result<u8> {
    let (model, frame) = build_model_and_frame(cfg, cli)?;
    let grid = uniform_grid(cfg.model.grid_intervals);
    let report = check_hypotheses(&model, &grid, &HypothesisOptions::default())?;
    if !report.spec_gap.pass {
        return Err(adilind::Error::Hypothesis(format!(
            "spectral gap {:.3e} below {:.3e}",
            report.spec_gap.value, report.spec_gap.requirement
        ))
        .into());
    }

    let (eps, g, tol) = (cfg.params.epsilon, cfg.params.g, cfg.tolerances.integrator);
    let times: Vec<f64> = uniform_grid(20).iter().map(|u| u * cfg.params.t).collect();
    let mut writer = Writer::new(
        &cfg.output.dir,
        &cfg.model.name,
        "simulate",
        eps,
        g,
        &cfg.hash(),
        cfg.output.quiet,
    )?;
    let config_toml = cfg.canonical_toml();

    let exact = lindblad_propagator(&model, eps, g, 0.0, &times, tol)?;
    let schrod = schrodinger_propagator(&model, eps, 0.0, &times, tol)?;
    let adiab = adiabatic_propagator(&frame, eps, 0.0, &times, tol)?;
    let kato = kato_transport(&frame, 0.0, &times, tol)?;
    let transport = superop_parallel_transport(&frame, 0.0, &times, tol)?;
    for table in [&exact, &schrod, &adiab, &kato, &transport] {
        writer.write_table(table, &config_toml)?;
    }

    // final-state summary for each initial band projector
    let final_sop = Superoperator::from_matrix(model.dim, exact.end().clone())?;
    let cptp = final_sop.is_cptp(cfg.tolerances.cptp)?;
    let point0 = frame.eval(0.0)?;
    let point_t = frame.eval(*times.last().unwrap())?;
    let mut states = Vec::new();
    for (j, p) in point0.projectors.iter().enumerate() {
        let rho0 = p.mapv(|z| z / trace(p).re);
        let rho = final_sop.apply(&rho0);
        let populations: Vec<f64> = point_t
            .projectors
            .iter()
            .map(|q| trace(&q.dot(&rho)).re)
            .collect();
        let purity = trace(&rho.dot(&rho)).re;
        states.push(json!({
            "initial_band": j,
            "populations": populations,
            "purity": purity,
            "trace": trace(&rho).re,
        }));
    }
    let summary = json!({
        "schema_version": 1,
        "hypotheses": report,
        "final_time": times.last(),
        "cptp": cptp,
        "states": states,
        "final_state_of_ground_band": adilind::operators::MatrixJson::from_mat(
            &final_sop.apply(&point0.projectors[0].mapv(|z| z / trace(&point0.projectors[0]).re)),
        ),
        "config": config_toml,
    });
    writer.write(
        "summary.json",
        &format!("{}\n", serde_json::to_string_pretty(&summary)?),
    )?;

    // reduced population dynamics, when the model supports it
    if report.gen.pass && report.split.pass {
        let rd = reduced_dynamics(
            &model,
            &frame,
            cfg.params.delta,
            0.0,
            &times,
            cfg.tolerances.integrator,
        )?;
        writer.write_real_table("population", &rd.times, &rd.population)?;
    }
    Ok(0)
}

/// The hypotheses each suite's claims rest on. Flat start is deliberately not
/// demanded by the perturbative suite: its drive ramps quadratically.
fn gate_suite(plan: &SweepPlan) -> Result<()> {
    let model = adilind::model::builtin_model(&plan.model_name, &plan.params)?;
    let grid = uniform_grid(plan.grid_intervals);
    let report = check_hypotheses(&model, &grid, &HypothesisOptions::default())?;
    let need_gen = matches!(
        plan.suite.as_str(),
        "perturbative" | "slow-drive" | "spectral"
    );
    let need_split = matches!(plan.suite.as_str(), "slow-drive" | "spectral");
    if !report.spec_gap.pass {
        bail!(adilind::Error::Hypothesis(
            "spectral gap check failed for the suite model".into()
        ));
    }
    if need_gen && !report.gen.pass {
        bail!(adilind::Error::Hypothesis(
            "generic-spectrum check failed for the suite model".into()
        ));
    }
    if need_split && !report.split.pass {
        bail!(adilind::Error::Hypothesis(
            "splitting check failed for the suite model".into()
        ));
    }
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, suite: Option<String>) -> Result<u8> {
    let suite = suite.unwrap_or_else(|| cfg.sweep.suite.clone());
    let mut plan = SweepPlan::named(&suite)?;
    if !cfg.sweep.epsilons.is_empty() {
        plan.epsilons = cfg.sweep.epsilons.clone();
    }
    if !cfg.sweep.times.is_empty() {
        plan.times = cfg.sweep.times.clone();
    }
    plan.tol = cfg.tolerances.integrator;
    plan.seed = cfg.seed;
    gate_suite(&plan)?;

    let report = run_suite(&plan)?;
    let mut writer = Writer::new(
        &cfg.output.dir,
        &plan.model_name,
        &format!("sweep-{suite}"),
        plan.epsilons[0],
        plan.path.g(plan.epsilons[0]),
        &cfg.hash(),
        cfg.output.quiet,
    )?;
    let full = json!({
        "report": report,
        "plan": plan,
        "config": cfg.canonical_toml(),
    });
    writer.write(
        "report.json",
        &format!("{}\n", serde_json::to_string_pretty(&full)?),
    )?;
    writer.write("report.csv", &report.to_csv_string())?;
    writer.write("report.txt", &report.to_text_table())?;
    if !cfg.output.quiet {
        print!("{}", report.to_text_table());
        eprintln!("({:.1}s)", report.runtime_seconds);
    }
    if report.pass() {
        Ok(0)
    } else {
        eprintln!("sweep {suite}: at least one series failed");
        Ok(4)
    }
}

fn cmd_validate(cfg: &RunConfig, cli: &Cli, inject: bool) -> Result<u8> {
    let (model, frame) = build_model_and_frame(cfg, cli)?;
    let grid = uniform_grid(cfg.model.grid_intervals);
    let hyp = check_hypotheses(&model, &grid, &HypothesisOptions::default())?;
    let (eps, g, tol) = (cfg.params.epsilon, cfg.params.g, cfg.tolerances.integrator);
    let itol = cfg.tolerances.intertwining;
    let mut lines = Vec::new();
    let mut failed = false;
    let mut check = |name: &str, pass: Option<bool>, detail: String| {
        if pass == Some(false) {
            failed = true;
        }
        lines.push(output::check_line(name, pass, &detail));
    };

    // exact propagator: trace preservation and complete positivity
    let times = [0.5 * cfg.params.t, cfg.params.t];
    let exact = lindblad_propagator(&model, eps, g, 0.0, &times, tol)?;
    let mut worst_trace = 0.0f64;
    let mut worst_choi = 0.0f64;
    for m in &exact.mats {
        let rep = Superoperator::from_matrix(model.dim, m.clone())?.is_cptp(cfg.tolerances.cptp)?;
        worst_trace = worst_trace.max(rep.trace_deficit);
        worst_choi = worst_choi.min(rep.choi_min_eigenvalue);
    }
    check(
        "trace preservation",
        Some(worst_trace <= 1e-8),
        format!("deficit {worst_trace:.2e} (tol 1e-8)"),
    );
    check(
        "complete positivity",
        Some(worst_choi >= -cfg.tolerances.cptp),
        format!(
            "Choi min eigenvalue {worst_choi:.2e} (tol {:.0e})",
            cfg.tolerances.cptp
        ),
    );

    // transport identities
    let w = kato_transport(&frame, 0.0, &times, tol)?;
    let res = adilind::propagators::intertwining_residual(&w, &frame)?;
    check(
        "transport intertwining",
        Some(res <= itol),
        format!("residual {res:.2e} (tol {itol:.0e})"),
    );
    let w0 = superop_parallel_transport(&frame, 0.0, &times, tol)?;
    let mut conj = 0.0f64;
    for (k, _) in times.iter().enumerate() {
        let sop = Superoperator::from_matrix(model.dim, w0.mats[k].clone())?;
        let p0 = frame.eval(0.0)?;
        for p in &p0.projectors {
            let lhs = sop.apply(p);
            let rhs = w.mats[k].dot(p).dot(&dagger(&w.mats[k]));
            conj = conj.max(max_abs(&(&lhs - &rhs)));
        }
    }
    check(
        "transport vs conjugation",
        Some(conj <= itol),
        format!("residual {conj:.2e} (tol {itol:.0e})"),
    );

    // dissipator-structure checks need g > 0 and a generic spectrum
    let dissipative = g > 0.0 && !model.jumps.is_empty();
    if dissipative && hyp.gen.pass {
        let mut col_worst = 0.0f64;
        let mut neg_worst = 0.0f64;
        for &t in &[0.0, 0.5, 1.0] {
            let point = frame.eval(t)?;
            let mut l = splitting_entries(&point, &model.jump_mats(t));
            if inject {
                l[[0, 1]] -= 1e-6; // constructed violation
            }
            for j in 0..l.ncols() {
                let mut col = 0.0;
                for k in 0..l.nrows() {
                    col += l[[k, j]];
                    if k != j {
                        neg_worst = neg_worst.min(l[[k, j]]);
                    }
                }
                col_worst = col_worst.max(col.abs());
            }
        }
        check(
            "splitting column sums",
            Some(col_worst <= 1e-12),
            format!("max |sum| {col_worst:.2e} (tol 1e-12)"),
        );
        check(
            "splitting off-diagonal signs",
            Some(neg_worst >= -1e-12),
            format!("min off-diagonal {neg_worst:.2e} (tol -1e-12)"),
        );
        if hyp.split.pass {
            let rd = reduced_dynamics(
                &model,
                &frame,
                cfg.params.delta,
                0.0,
                &uniform_grid(10),
                tol,
            )?;
            let (rowsum, neg) = rd.stochasticity_deficit();
            check(
                "reduced-dynamics stochasticity",
                Some(rowsum <= 1e-10 && neg >= -1e-10),
                format!("row-sum deficit {rowsum:.2e}, min entry {neg:.2e} (tol 1e-10)"),
            );
        } else {
            check(
                "reduced-dynamics stochasticity",
                None,
                "skipped: splitting is degenerate".into(),
            );
        }
    } else {
        let why = if !dissipative {
            "no dissipator (g = 0)"
        } else {
            "spectrum not generic"
        };
        check("splitting column sums", None, format!("skipped: {why}"));
        check(
            "splitting off-diagonal signs",
            None,
            format!("skipped: {why}"),
        );
        check(
            "reduced-dynamics stochasticity",
            None,
            format!("skipped: {why}"),
        );
    }

    println!("invariant battery for {} (ε = {eps}, g = {g}):", model.name);
    for line in &lines {
        println!("{line}");
    }
    Ok(if failed { 4 } else { 0 })
}

fn cmd_qubit_demo(cfg: &RunConfig, cli: &Cli) -> Result<u8> {
    let (model, frame) = build_model_and_frame(cfg, cli)?;
    if model.dim != 2 {
        bail!(adilind::Error::Hypothesis(
            "the demo needs a two-level model".into()
        ));
    }
    let (eps, g, tol) = (cfg.params.epsilon, cfg.params.g, cfg.tolerances.integrator);
    let delta = eps / g.max(1e-300);
    let times: Vec<f64> = (1..=10).map(|k| cfg.params.t * k as f64 / 10.0).collect();
    let exact = lindblad_propagator(&model, eps, g, 0.0, &times, tol)?;
    let rho0 = frame.eval(0.0)?.projectors[0].clone();

    let mut rows = String::from("t,closed_form,reduced,exact\n");
    println!("two-level transition probability from the ground band (ε = {eps}, g = {g}):");
    println!(
        "  {:<6} {:>12} {:>12} {:>12}",
        "t", "closed form", "reduced", "exact"
    );
    for (k, &t) in times.iter().enumerate() {
        let closed =
            qubit_closed_form_checked(&model, &frame, delta, t, QubitObservable::Transition)?;
        let rd = reduced_dynamics(&model, &frame, delta, 0.0, &[t], tol)?;
        let reduced = rd.at(t)?[[1, 0]];
        let sop = Superoperator::from_matrix(2, exact.mats[k].clone())?;
        let p1 = frame.eval(t)?.projectors[1].clone();
        let simulated = trace(&p1.dot(&sop.apply(&rho0))).re;
        println!("  {t:<6.2} {closed:>12.6} {reduced:>12.6} {simulated:>12.6}");
        rows.push_str(&format!(
            "{t:.17e},{closed:.17e},{reduced:.17e},{simulated:.17e}\n"
        ));
    }
    let mut writer = Writer::new(
        &cfg.output.dir,
        &cfg.model.name,
        "qubit-demo",
        eps,
        g,
        &cfg.hash(),
        cfg.output.quiet,
    )?;
    writer.write("transition.csv", &rows)?;
    Ok(0)
}

fn cmd_export_markov(cfg: &RunConfig, cli: &Cli) -> Result<u8> {
    let (model, frame) = build_model_and_frame(cfg, cli)?;
    let grid = uniform_grid(cfg.model.grid_intervals);
    let hyp = check_hypotheses(&model, &grid, &HypothesisOptions::default())?;
    if !hyp.gen.pass {
        return Err(adilind::Error::Hypothesis(
            "rate-matrix export needs simple eigenvalues with distinct differences".into(),
        )
        .into());
    }
    let export_grid = uniform_grid(40);
    let gens = markov_generator(&model, &frame, &export_grid)?;

    // cross-check: the midpoint exponential product must match the reduced
    // population dynamics
    let rd = reduced_dynamics(
        &model,
        &frame,
        1.0,
        0.0,
        &[cfg.params.t],
        cfg.tolerances.integrator,
    )?;
    let chain = time_ordered_exponential(&model, &frame, 0.0, cfg.params.t, 4000)?;
    let m = rd.at(cfg.params.t)?;
    let mut dev = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            dev = dev.max((chain[[r, c]] - m[[c, r]]).abs());
        }
    }
    if dev > 1e-6 {
        return Err(adilind::Error::Invariant(format!(
            "rate-matrix chain deviates from the reduced dynamics by {dev:.2e}"
        ))
        .into());
    }

    let mut writer = Writer::new(
        &cfg.output.dir,
        &cfg.model.name,
        "markov",
        cfg.params.epsilon,
        cfg.params.g,
        &cfg.hash(),
        cfg.output.quiet,
    )?;
    writer.write_real_table("rates", &gens.times, &gens.rates)?;
    let splitting: Vec<ndarray::Array2<f64>> = gens
        .times
        .iter()
        .map(|&t| splitting_matrix(&model, t, &frame).map(|sm| sm.matrix))
        .collect::<adilind::Result<_>>()?;
    writer.write_real_table("splitting", &gens.times, &splitting)?;
    if !cfg.output.quiet {
        eprintln!("chain vs reduced dynamics deviation: {dev:.2e}");
    }

    // the stationary state at the final time, for convenience
    let sm = splitting_matrix(&model, cfg.params.t, &frame)?;
    let nu = stationary_state(&sm, &frame, cfg.params.t)?;
    let sidecar = json!({
        "schema_version": 1,
        "dim": model.dim,
        "stationary_populations": (0..frame.group_count())
            .map(|k| trace(&frame.eval(cfg.params.t).unwrap().projectors[k].dot(&nu.mat)).re)
            .collect::<Vec<f64>>(),
        "chain_vs_reduced_deviation": dev,
        "config": cfg.canonical_toml(),
    });
    writer.write(
        "rates.json",
        &format!("{}\n", serde_json::to_string_pretty(&sidecar)?),
    )?;
    Ok(0)
}
