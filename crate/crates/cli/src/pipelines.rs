//! One function per subcommand: builds the problem from the validated
//! config, runs the corresponding toolkit operation, and writes the outputs
//! (CSV tables, binary field snapshots, structured-text verdicts). The
//! manifest is assembled by [`execute`] and written last.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use parasol_core::evolution::{EvolveSpec, Integrator, Scheme};
use parasol_core::experiments::{
    averaging_convergence, check_theorem_hypotheses, contraction_test, tail_estimate,
    HypothesisConfig, HypothesisVerdict, InitialDataMode, TailReport, TheoremKind,
};
use parasol_core::nonlinearity::{average_f, AveragedProblem, Nonlinearity};
use parasol_core::periodic::{
    self, PeriodMap, PeriodicSolveReport, SolverOptions, SweepDirection,
};
use parasol_core::spectral::{analyze_spectrum, SchrodingerOperator, SpectralReport};
use parasol_core::Trajectory;

use crate::config::{ModeChoice, PotentialChoice, RunConfig};
use crate::manifest::{RunManifest, TimingRecord};
use crate::output::{num, OutputWriter};
use crate::CliError;

/// The selectable pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    SolvePeriodic,
    LambdaSweep,
    AprioriSweep,
    Spectrum,
    Averaging,
    Tails,
    Contraction,
    CheckHypotheses,
    Demo,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::SolvePeriodic => "solve-periodic",
            Pipeline::LambdaSweep => "lambda-sweep",
            Pipeline::AprioriSweep => "apriori-sweep",
            Pipeline::Spectrum => "spectrum",
            Pipeline::Averaging => "averaging",
            Pipeline::Tails => "tails",
            Pipeline::Contraction => "contraction",
            Pipeline::CheckHypotheses => "check-hypotheses",
            Pipeline::Demo => "demo",
        }
    }
}

/// Runs one pipeline end to end: outputs first (each written atomically),
/// manifest last. A failing pipeline still gets a manifest carrying the
/// failure record; the error is then propagated for the exit code.
pub fn execute(
    config: &RunConfig,
    config_text: &str,
    pipeline: Pipeline,
    out_dir: &Path,
) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::new(pipeline.name(), config_text, config.seed);
    let mut writer = OutputWriter::new(out_dir)?;
    let start = Instant::now();
    let result = dispatch(config, pipeline, &mut writer);
    manifest.timings.push(TimingRecord {
        stage: "total".to_string(),
        millis: start.elapsed().as_millis() as u64,
    });
    manifest.files = writer.records().to_vec();
    match &result {
        Ok(()) => manifest.success = true,
        Err(e) => {
            manifest.success = false;
            manifest.failure = Some(e.to_string());
        }
    }
    manifest.write(out_dir)?;
    result.map(|()| manifest)
}

fn dispatch(config: &RunConfig, pipeline: Pipeline, w: &mut OutputWriter) -> Result<(), CliError> {
    match pipeline {
        Pipeline::SolvePeriodic => run_solve_periodic(config, w),
        Pipeline::LambdaSweep => run_lambda_sweep(config, w),
        Pipeline::AprioriSweep => run_apriori_sweep(config, w),
        Pipeline::Spectrum => run_spectrum(config, w),
        Pipeline::Averaging => run_averaging(config, w),
        Pipeline::Tails => run_tails(config, w),
        Pipeline::Contraction => run_contraction(config, w),
        Pipeline::CheckHypotheses => run_check_hypotheses(config, w),
        Pipeline::Demo => run_demo(config, w),
    }
}

struct Problem {
    nl: Arc<Nonlinearity>,
    u0: parasol_core::Field,
    scheme: Scheme,
    opts: SolverOptions,
    steps_per_period: usize,
}

fn setup(config: &RunConfig) -> Result<Problem, CliError> {
    let grid = config.build_grid()?;
    let nl = config.build_nonlinearity(&grid)?;
    let u0 = config.build_initial(&grid);
    Ok(Problem {
        nl,
        u0,
        scheme: config.solver.scheme.into(),
        opts: config.solver.options(),
        steps_per_period: config.solver.steps_per_period,
    })
}

fn averaged(p: &Problem, config: &RunConfig) -> Result<Arc<AveragedProblem>, CliError> {
    Ok(Arc::new(average_f(
        &p.nl,
        config.experiment.quadrature_points,
    )?))
}

fn write_solve_outputs(
    w: &mut OutputWriter,
    map: &PeriodMap,
    report: &PeriodicSolveReport,
) -> Result<(), CliError> {
    let residual_rows: Vec<Vec<String>> = report
        .residual_history
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), num(*r)])
        .collect();
    w.write_csv("residuals.csv", &["iteration", "h1_residual"], &residual_rows)?;

    let orbit_rows: Vec<Vec<String>> = report
        .orbit
        .times
        .iter()
        .zip(report.orbit.l2.iter().zip(&report.orbit.h1))
        .map(|(t, (l2, h1))| vec![num(*t), num(*l2), num(*h1)])
        .collect();
    w.write_csv("orbit.csv", &["time", "l2_norm", "h1_norm"], &orbit_rows)?;

    w.write_field(
        "solution.field",
        &report.solution,
        &format!("periodic state at phase 0, lambda = {}", map.lambda()),
    )?;

    let drift = (&map.apply_refined(&report.solution, 2)? - &report.solution).norm_h1();
    let mut text = String::new();
    text.push_str(&format!("method = {}\n", report.method));
    text.push_str(&format!("lambda = {}\n", num(map.lambda())));
    text.push_str(&format!("converged = {}\n", report.converged));
    text.push_str(&format!("iterations = {}\n", report.iterations));
    text.push_str(&format!("final_residual_h1 = {}\n", num(report.final_residual())));
    text.push_str(&format!(
        "contraction_ratio_estimate = {}\n",
        report
            .contraction_ratio
            .map(num)
            .unwrap_or_else(|| "none".to_string())
    ));
    text.push_str(&format!(
        "divergence_detected = {}\n",
        report.divergence_detected
    ));
    text.push_str(&format!(
        "failure = {}\n",
        report.failure.as_deref().unwrap_or("none")
    ));
    text.push_str(&format!("reintegration_drift_h1 = {}\n", num(drift)));
    text.push_str(&format!("solution_h1_norm = {}\n", num(report.solution.norm_h1())));
    w.write_text("solve.txt", &text)?;
    Ok(())
}

fn run_solve_periodic(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let lambda = config.experiment.lambdas[0];
    let map = PeriodMap::new(&p.nl, lambda, p.scheme, p.steps_per_period)?;
    let report = periodic::solve_periodic(&map, &p.u0, &p.opts)?;
    write_solve_outputs(w, &map, &report)?;
    if !report.converged {
        return Err(CliError::Pipeline(format!(
            "periodic solve did not converge: final residual {}",
            report.final_residual()
        )));
    }
    Ok(())
}

fn run_lambda_sweep(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let avg = averaged(&p, config)?;
    let report = periodic::lambda_sweep(
        &p.nl,
        &avg,
        &config.experiment.lambdas,
        p.scheme,
        p.steps_per_period,
        &p.u0,
        &p.opts,
    )?;
    let rows: Vec<Vec<String>> = report
        .lambdas
        .iter()
        .zip(report.solves.iter().zip(&report.distances))
        .map(|(l, (solve, d))| {
            vec![
                num(*l),
                solve.converged.to_string(),
                solve.iterations.to_string(),
                num(solve.final_residual()),
                num(*d),
            ]
        })
        .collect();
    w.write_csv(
        "sweep.csv",
        &[
            "lambda",
            "converged",
            "iterations",
            "final_residual_h1",
            "distance_to_stationary_h1",
        ],
        &rows,
    )?;
    w.write_field(
        "stationary.field",
        &report.stationary.solution,
        "averaged stationary state",
    )?;
    let mut text = String::new();
    text.push_str(&format!(
        "stationary_converged = {}\n",
        report.stationary.converged
    ));
    text.push_str(&format!(
        "stationary_residual_l2 = {}\n",
        num(report.stationary.residual)
    ));
    text.push_str(&format!(
        "stationary_newton_iterations = {}\n",
        report.stationary.newton_iterations
    ));
    let monotone = report.distances.windows(2).all(|p| p[1] <= p[0]);
    text.push_str(&format!("distances_nonincreasing = {monotone}\n"));
    w.write_text("sweep.txt", &text)?;

    if !report.stationary.converged {
        return Err(CliError::Pipeline(
            "averaged stationary solve did not converge".to_string(),
        ));
    }
    if let Some(bad) = report.solves.iter().position(|s| !s.converged) {
        return Err(CliError::Pipeline(format!(
            "fixed-point solve did not converge at lambda = {}",
            report.lambdas[bad]
        )));
    }
    Ok(())
}

fn run_apriori_sweep(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let lambda = config.experiment.lambdas[0];
    let map = PeriodMap::new(&p.nl, lambda, p.scheme, p.steps_per_period)?;
    let direction: SweepDirection = config.experiment.direction.into();
    let report = periodic::apriori_sweep(
        &map,
        &config.experiment.radii,
        direction,
        config.experiment.directions_per_radius,
        &p.opts,
        config.seed,
    )?;
    let rows: Vec<Vec<String>> = report
        .outcomes
        .iter()
        .map(|o| {
            let min = o.found_norms.first().copied();
            let max = o.found_norms.last().copied();
            vec![
                num(o.radius),
                o.found_norms.len().to_string(),
                o.failed_runs.to_string(),
                min.map(num).unwrap_or_else(|| "none".to_string()),
                max.map(num).unwrap_or_else(|| "none".to_string()),
            ]
        })
        .collect();
    w.write_csv(
        "radii.csv",
        &[
            "radius",
            "converged_runs",
            "failed_runs",
            "min_solution_h1",
            "max_solution_h1",
        ],
        &rows,
    )?;
    if let Some(witness) = &report.witness {
        w.write_field("witness.field", witness, "nontrivial fixed point found")?;
    }
    let mut text = String::new();
    text.push_str(&format!("direction = {:?}\n", report.direction));
    text.push_str(&format!(
        "extreme_norm = {}\n",
        report.extreme_norm.map(num).unwrap_or_else(|| "none".to_string())
    ));
    text.push_str(&format!("directions_per_radius = {}\n", report.directions_per_radius));
    text.push_str(&format!("seed = {}\n", report.seed));
    text.push_str(&format!("evidence = {}\n", report.evidence));
    w.write_text("sweep.txt", &text)?;
    Ok(())
}

fn spectral_rows(report: &SpectralReport) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), num(*v), "kept".to_string()])
        .collect();
    for (i, v) in report.discarded.iter().enumerate() {
        rows.push(vec![
            (report.eigenvalues.len() + i).to_string(),
            num(*v),
            "discarded".to_string(),
        ]);
    }
    rows
}

fn spectral_text(report: &SpectralReport) -> String {
    let mut text = String::new();
    text.push_str(&format!("m_minus = {}\n", report.m_minus));
    text.push_str(&format!("parity = {}\n", report.parity()));
    text.push_str(&format!("kernel_gap = {}\n", num(report.kernel_gap)));
    text.push_str(&format!("gap_tol = {}\n", num(report.gap_tol)));
    text.push_str(&format!(
        "essential_lower_bound = {}\n",
        num(report.essential_lower_bound)
    ));
    text.push_str(&format!("resonant = {}\n", report.resonant));
    text
}

fn analyze_potential(
    p: &Problem,
    config: &RunConfig,
    which: PotentialChoice,
) -> Result<SpectralReport, CliError> {
    let avg = averaged(p, config)?;
    let (potential, bound) = match which {
        PotentialChoice::AtInfinity => (
            avg.omega_hat().clone(),
            p.nl.slope_at_infinity().limit_lower_bound(),
        ),
        PotentialChoice::AtZero => {
            let split = p.nl.slope_at_zero().ok_or_else(|| {
                CliError::Pipeline(
                    "the zero-slope potential needs a problem with f(t,x,0) = 0".to_string(),
                )
            })?;
            let alpha = avg.alpha_hat().ok_or_else(|| {
                CliError::Pipeline("averaged zero-slope potential unavailable".to_string())
            })?;
            (alpha.clone(), split.limit_lower_bound())
        }
    };
    let op = SchrodingerOperator::new(potential);
    Ok(analyze_spectrum(
        &op,
        bound,
        config.experiment.eigen_count,
        config.experiment.eigen_tol,
        None,
        config.seed,
    )?)
}

fn run_spectrum(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let report = analyze_potential(&p, config, config.experiment.potential)?;
    w.write_csv(
        "eigenvalues.csv",
        &["index", "eigenvalue", "certification"],
        &spectral_rows(&report),
    )?;
    w.write_text("spectrum.txt", &spectral_text(&report))?;
    Ok(())
}

fn run_averaging(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let avg = averaged(&p, config)?;
    let mode = match config.experiment.mode {
        ModeChoice::H1Converging => InitialDataMode::H1Converging,
        ModeChoice::L2OnlyConverging => InitialDataMode::L2OnlyConverging,
    };
    let t_obs = config.experiment.t_obs.unwrap_or_else(|| p.nl.period());
    let report = averaging_convergence(
        &p.nl,
        &avg,
        &p.u0,
        &config.experiment.lambdas,
        config.experiment.delta,
        t_obs,
        p.scheme,
        p.steps_per_period,
        mode,
        config.experiment.noise_h1,
        config.seed,
    )?;
    let rows: Vec<Vec<String>> = report
        .lambdas
        .iter()
        .zip(report.sup_errors.iter().zip(&report.failures))
        .map(|(l, (e, f))| {
            vec![
                num(*l),
                num(*e),
                f.clone().unwrap_or_else(|| "none".to_string()),
            ]
        })
        .collect();
    w.write_csv("averaging.csv", &["lambda", "sup_error_h1", "failure"], &rows)?;
    let mut text = String::new();
    text.push_str(&format!("mode = {}\n", report.mode));
    text.push_str(&format!("delta = {}\n", num(report.delta)));
    text.push_str(&format!("t_obs = {}\n", num(report.t_obs)));
    let ok = report.failures.iter().all(|f| f.is_none());
    text.push_str(&format!("all_runs_completed = {ok}\n"));
    w.write_text("averaging.txt", &text)?;
    Ok(())
}

fn trajectory_with_tails(
    p: &Problem,
    radii: &[f64],
    periods: usize,
    start: &parasol_core::Field,
) -> Result<Trajectory, CliError> {
    let integrator = Integrator::physical(&p.nl, 1.0, p.scheme)?;
    let steps = p.steps_per_period * periods;
    let spec = EvolveSpec {
        horizon: p.nl.period() * periods as f64,
        steps,
        sample_every: (p.steps_per_period / 8).max(1),
        keep_states: false,
        tail_radii: radii.to_vec(),
    };
    Ok(integrator.evolve(start, 0.0, &spec)?)
}

fn write_tail_outputs(w: &mut OutputWriter, report: &TailReport) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = report
        .radii
        .iter()
        .zip(&report.fitted_offsets)
        .map(|(r, a)| vec![num(*r), num(*a)])
        .collect();
    w.write_csv("tails.csv", &["radius", "fitted_offset"], &rows)?;

    let mut header: Vec<String> = vec!["time".to_string()];
    header.extend(report.radii.iter().map(|r| format!("tail_at_{r}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let series: Vec<Vec<String>> = report
        .times
        .iter()
        .zip(&report.tails)
        .map(|(t, row)| {
            let mut cells = vec![num(*t)];
            cells.extend(row.iter().map(|v| num(*v)));
            cells
        })
        .collect();
    w.write_csv("tail_series.csv", &header_refs, &series)?;

    let mut text = String::new();
    text.push_str(&format!("rate = {}\n", num(report.rate)));
    text.push_str(&format!("trajectory_bound_h1 = {}\n", num(report.h1_bound)));
    let monotone = report
        .fitted_offsets
        .windows(2)
        .all(|pair| pair[1] <= pair[0] + 1e-15);
    text.push_str(&format!("offsets_nonincreasing = {monotone}\n"));
    w.write_text("tails.txt", &text)?;
    Ok(())
}

fn run_tails(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let rate = p.nl.dissipativity_rate();
    if rate <= 0.0 {
        return Err(CliError::Pipeline(format!(
            "tail fit needs a positive dissipativity rate, got {rate}"
        )));
    }
    let radii = config.tail_radii();
    let traj = trajectory_with_tails(&p, &radii, config.experiment.periods, &p.u0)?;
    let h1_bound = traj.h1.iter().fold(0.0f64, |m, v| m.max(*v));
    let report = tail_estimate(&traj, rate, h1_bound, &radii)?;
    write_tail_outputs(w, &report)
}

fn run_contraction(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let u1 = p.u0.clone();
    let u2 = u1.scaled(0.5);
    let times = config.contraction_times(p.nl.period());
    let dt = p.nl.period() / p.steps_per_period as f64;
    let report = contraction_test(&p.nl, &u1, &u2, &times, p.scheme, dt)
        .map_err(|e| CliError::Pipeline(e.to_string()))?;
    let rows: Vec<Vec<String>> = report
        .times
        .iter()
        .zip(&report.ratios)
        .map(|(t, r)| vec![num(*t), num(*r)])
        .collect();
    w.write_csv("contraction.csv", &["time", "ratio"], &rows)?;
    let mut text = String::new();
    text.push_str(&format!("rate = {}\n", num(report.rate)));
    text.push_str(&format!(
        "initial_distance_l2 = {}\n",
        num(report.initial_distance)
    ));
    let worst = report.ratios.iter().fold(0.0f64, |m, v| m.max(*v));
    text.push_str(&format!("max_ratio = {}\n", num(worst)));
    w.write_text("contraction.txt", &text)?;
    Ok(())
}

fn hypothesis_rows(verdict: &HypothesisVerdict) -> Vec<Vec<String>> {
    verdict
        .checks
        .iter()
        .map(|c| {
            vec![
                format!("{:?}", verdict.kind),
                c.name.to_string(),
                c.status.to_string(),
                c.margin.map(num).unwrap_or_else(|| "none".to_string()),
            ]
        })
        .collect()
}

fn hypothesis_text(verdict: &HypothesisVerdict) -> String {
    let mut text = String::new();
    text.push_str(&format!("statement = {:?}\n", verdict.kind));
    text.push_str(&format!("verdict = {}\n", verdict.verdict));
    for c in &verdict.checks {
        text.push_str(&format!(
            "check.{} = {} (margin {}): {}\n",
            c.name,
            c.status,
            c.margin.map(num).unwrap_or_else(|| "none".to_string()),
            c.detail
        ));
    }
    for caveat in &verdict.caveats {
        text.push_str(&format!("caveat = {caveat}\n"));
    }
    text
}

fn run_check_hypotheses(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let hcfg = HypothesisConfig {
        quadrature_points: config.experiment.quadrature_points,
        eigen_count: config.experiment.eigen_count,
        eigen_tol: config.experiment.eigen_tol,
        seed: config.seed,
        ..HypothesisConfig::default()
    };
    let existence = check_theorem_hypotheses(&p.nl, TheoremKind::Existence, &hcfg)?;
    let mut rows = hypothesis_rows(&existence);
    let mut text = hypothesis_text(&existence);
    if p.nl.zero_preserving() {
        let nontrivial = check_theorem_hypotheses(&p.nl, TheoremKind::NontrivialExistence, &hcfg)?;
        rows.extend(hypothesis_rows(&nontrivial));
        text.push('\n');
        text.push_str(&hypothesis_text(&nontrivial));
    }
    w.write_csv(
        "hypotheses.csv",
        &["statement", "check", "status", "margin"],
        &rows,
    )?;
    w.write_text("hypotheses.txt", &text)?;
    Ok(())
}

fn run_demo(config: &RunConfig, w: &mut OutputWriter) -> Result<(), CliError> {
    let p = setup(config)?;
    let hcfg = HypothesisConfig {
        quadrature_points: config.experiment.quadrature_points,
        eigen_count: config.experiment.eigen_count,
        eigen_tol: config.experiment.eigen_tol,
        seed: config.seed,
        ..HypothesisConfig::default()
    };

    // Stage 1: hypothesis grading.
    let kind = if p.nl.zero_preserving() {
        TheoremKind::NontrivialExistence
    } else {
        TheoremKind::Existence
    };
    let verdict = check_theorem_hypotheses(&p.nl, kind, &hcfg)?;
    w.write_csv(
        "hypotheses.csv",
        &["statement", "check", "status", "margin"],
        &hypothesis_rows(&verdict),
    )?;
    w.write_text("hypotheses.txt", &hypothesis_text(&verdict))?;

    // Stage 2: spectra of the averaged potentials.
    if let Some(report) = &verdict.spectrum_at_limit {
        w.write_csv(
            "spectrum_limit.csv",
            &["index", "eigenvalue", "certification"],
            &spectral_rows(report),
        )?;
        w.write_text("spectrum_limit.txt", &spectral_text(report))?;
    }
    if let Some(report) = &verdict.spectrum_at_zero {
        w.write_csv(
            "spectrum_zero.csv",
            &["index", "eigenvalue", "certification"],
            &spectral_rows(report),
        )?;
        w.write_text("spectrum_zero.txt", &spectral_text(report))?;
    }

    // Stage 3: periodic solve.
    let lambda = config.experiment.lambdas[0];
    let map = PeriodMap::new(&p.nl, lambda, p.scheme, p.steps_per_period)?;
    let report = periodic::solve_periodic(&map, &p.u0, &p.opts)?;
    write_solve_outputs(w, &map, &report)?;
    if !report.converged {
        return Err(CliError::Pipeline(format!(
            "periodic solve did not converge: final residual {}",
            report.final_residual()
        )));
    }

    // Stage 4: tail fit along the orbit of the solution.
    let rate = p.nl.dissipativity_rate();
    if rate > 0.0 {
        let radii = config.tail_radii();
        let traj = trajectory_with_tails(&p, &radii, config.experiment.periods, &report.solution)?;
        let h1_bound = traj.h1.iter().fold(0.0f64, |m, v| m.max(*v));
        let tails = tail_estimate(&traj, rate, h1_bound, &radii)?;
        write_tail_outputs(w, &tails)?;
    }
    Ok(())
}
