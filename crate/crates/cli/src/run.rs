//! Dispatch of a validated manifest to the library and artifact emission.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use frs_core::action::{gamma_sweep, geodesic_convexity_check, solve_geodesic, solve_schrodinger, GammaSweep, PathMode, SolveReport};
use frs_core::bures::{bures_sq, gaussian_w2_sq, GaussianParams};
use frs_core::dynamics::{dissipation_report, heat_flow_exact, heat_flow_integrate};
use frs_core::SymMat;
use log::info;
use serde::{Deserialize, Serialize};

use crate::check::{run_checks, CheckGroup};
use crate::error::CliError;
use crate::manifest::{Command, Manifest};
use crate::output::{gamma_csv, heatflow_csv, path_csv, states_csv, to_json, write_file};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker cap; `None` keeps the rayon default.
    pub threads: Option<usize>,
    /// Test hook: perturbs one quantity inside the `check` suite.
    pub inject_fault: bool,
}

/// Contents of the result file. Deterministic for a given manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunResult {
    Bures {
        dim: usize,
        bures_sq: f64,
        bures: f64,
    },
    W2Gaussian {
        w2_sq: f64,
        mean_part: f64,
        covariance_part: f64,
    },
    Heatflow {
        t_end: f64,
        dt: f64,
        steps: usize,
        final_state: Vec<SymMat>,
        final_entropy: f64,
        final_fisher: f64,
        /// Largest entry deviation from the closed-form flow over all samples.
        max_exact_error: f64,
        max_mass_drift: f64,
        max_dissipation_residual: f64,
        entropy_nonincreasing: bool,
        fisher_nonincreasing: bool,
    },
    Geodesic {
        report: SolveReport,
        /// ½-convexity violation of the entropy along the path (unit-mass mode only).
        convexity_violation: Option<f64>,
    },
    Schrodinger {
        report: SolveReport,
    },
    GammaSweep {
        sweep: GammaSweep,
        gaps_positive: bool,
        gaps_strictly_decreasing: bool,
    },
    Check {
        all_passed: bool,
        groups: Vec<CheckGroup>,
    },
}

/// Timing and environment record, kept apart so the result file stays byte-stable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub manifest_version: String,
    pub tool_version: String,
    pub threads: usize,
    pub started_unix_seconds: f64,
    pub elapsed_seconds: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub result: RunResult,
    pub result_path: PathBuf,
    /// Set when a solver stopped before reaching its tolerance.
    pub converged: bool,
}

/// Runs a manifest inside a thread pool capped at `opts.threads`.
pub fn execute(manifest: &Manifest, opts: &RunOptions) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(|| run(manifest, opts))
}

fn run(manifest: &Manifest, opts: &RunOptions) -> Result<Outcome, CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    std::fs::create_dir_all(&opts.out_dir)
        .map_err(|source| CliError::Io { path: opts.out_dir.display().to_string(), source })?;
    let out = |name: &str| opts.out_dir.join(name);
    let csv = out(&manifest.outputs.csv_name(manifest.command));
    let states = out(&manifest.outputs.states_csv_name(manifest.command));

    let (result, converged) = match manifest.command {
        Command::Bures => (bures(manifest)?, true),
        Command::W2Gaussian => (w2_gaussian(manifest)?, true),
        Command::Heatflow => (heatflow(manifest, &csv, &states)?, true),
        Command::Geodesic | Command::Schrodinger => path_solve(manifest, &states)?,
        Command::GammaSweep => sweep(manifest, &csv)?,
        Command::Check => {
            let groups = run_checks(opts.inject_fault);
            let all_passed = groups.iter().all(|g| g.passed);
            (RunResult::Check { all_passed, groups }, true)
        }
    };

    let result_path = out(&manifest.outputs.result);
    write_file(&result_path, &to_json(&result)?)?;
    let meta = Metadata {
        command: manifest.command.name().into(),
        manifest_version: manifest.version.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        threads: rayon::current_num_threads(),
        started_unix_seconds: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        converged,
    };
    write_file(&out(&manifest.outputs.metadata), &to_json(&meta)?)?;
    info!("wrote {}", result_path.display());
    Ok(Outcome { result, result_path, converged })
}

fn single_cell_pair(manifest: &Manifest) -> Result<(SymMat, SymMat), CliError> {
    let grid = manifest.build_grid()?;
    if grid.len() != 1 {
        return Err(CliError::Validation(format!(
            "command {} takes single matrices, got {} cells",
            manifest.command.name(),
            grid.len()
        )));
    }
    let (a0, a1) = manifest.raw_endpoints(&grid)?;
    let a1 = a1.ok_or_else(|| CliError::Validation("endpoint a1 is required".into()))?;
    Ok((a0[0].clone(), a1[0].clone()))
}

fn bures(manifest: &Manifest) -> Result<RunResult, CliError> {
    let (a0, a1) = single_cell_pair(manifest)?;
    let b = bures_sq(&a0, &a1)?;
    Ok(RunResult::Bures { dim: a0.dim(), bures_sq: b, bures: b.sqrt() })
}

fn w2_gaussian(manifest: &Manifest) -> Result<RunResult, CliError> {
    let (a0, a1) = single_cell_pair(manifest)?;
    let spec = manifest.gaussian.as_ref().expect("validated");
    let g0 = GaussianParams::new(spec.mean0.clone(), a0)?;
    let g1 = GaussianParams::new(spec.mean1.clone(), a1)?;
    let covariance_part = bures_sq(&g0.covariance, &g1.covariance)?;
    let w2_sq = gaussian_w2_sq(&g0, &g1)?;
    Ok(RunResult::W2Gaussian { w2_sq, mean_part: w2_sq - covariance_part, covariance_part })
}

fn heatflow(manifest: &Manifest, csv: &Path, states: &Path) -> Result<RunResult, CliError> {
    let spec = manifest.heatflow.as_ref().expect("validated");
    let grid = manifest.build_grid()?;
    let (a0, _) = manifest.measures(&grid, true)?;
    let trace = heat_flow_integrate(&a0, spec.t_end, spec.dt)?;
    let residuals = if trace.times.len() >= 3 { dissipation_report(&trace)? } else { Vec::new() };

    let mut max_exact_error: f64 = 0.0;
    let mut max_mass_drift: f64 = 0.0;
    for (t, s) in trace.times.iter().zip(&trace.states) {
        max_exact_error = max_exact_error.max(s.max_cell_distance(&heat_flow_exact(&a0, *t)?));
        max_mass_drift = max_mass_drift.max((s.mass() - a0.mass()).abs());
    }
    let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);

    write_file(csv, &heatflow_csv(&trace, &residuals))?;
    write_file(states, &states_csv(&trace.times, &trace.states)?)?;
    let last = trace.final_state();
    Ok(RunResult::Heatflow {
        t_end: spec.t_end,
        dt: spec.dt,
        steps: trace.times.len() - 1,
        final_state: last.values().to_vec(),
        final_entropy: *trace.entropy_series.last().expect("nonempty"),
        final_fisher: *trace.fisher_series.last().expect("nonempty"),
        max_exact_error,
        max_mass_drift,
        max_dissipation_residual: residuals.iter().map(|r| r.1).fold(0.0, f64::max),
        entropy_nonincreasing: nonincreasing(&trace.entropy_series),
        fisher_nonincreasing: nonincreasing(&trace.fisher_series),
    })
}

fn path_solve(manifest: &Manifest, states: &Path) -> Result<(RunResult, bool), CliError> {
    let grid = manifest.build_grid()?;
    let cfg = &manifest.solver;
    let (a0, a1) = manifest.measures(&grid, cfg.mode.constrained())?;
    let a1 = a1.ok_or_else(|| CliError::Validation("endpoint a1 is required".into()))?;
    let report = match manifest.command {
        Command::Geodesic => solve_geodesic(&a0, &a1, cfg)?,
        _ => solve_schrodinger(&a0, &a1, cfg)?,
    };
    write_file(states, &path_csv(&report.path)?)?;
    let converged = report.converged;
    info!("value {} after {} iterations (gradient norm {:.3e})", report.value, report.iterations, report.final_grad_norm);
    let result = match manifest.command {
        Command::Geodesic => {
            let convexity_violation = if cfg.mode == PathMode::FisherRao && converged {
                Some(geodesic_convexity_check(&report)?)
            } else {
                None
            };
            RunResult::Geodesic { report, convexity_violation }
        }
        _ => RunResult::Schrodinger { report },
    };
    Ok((result, converged))
}

fn sweep(manifest: &Manifest, csv: &Path) -> Result<(RunResult, bool), CliError> {
    let grid = manifest.build_grid()?;
    let cfg = &manifest.solver;
    let (a0, a1) = manifest.measures(&grid, cfg.mode.constrained())?;
    let a1 = a1.ok_or_else(|| CliError::Validation("endpoint a1 is required".into()))?;
    let eps = &manifest.sweep.as_ref().expect("validated").epsilons;
    let sweep = gamma_sweep(&a0, &a1, eps, cfg)?;
    write_file(csv, &gamma_csv(&sweep))?;
    let gaps_positive = sweep.rows.iter().all(|r| r.gap > 0.0);
    let gaps_strictly_decreasing = sweep.rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let converged = sweep.all_converged();
    Ok((RunResult::GammaSweep { sweep, gaps_positive, gaps_strictly_decreasing }, converged))
}
