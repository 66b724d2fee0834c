//! Artifact writers. Floats are printed in shortest round-trip form, so the
//! files are byte-stable for identical inputs.

use std::fmt::Write as _;
use std::path::Path;

use frs_core::action::{GammaSweep, Path as KnotPath};
use frs_core::dynamics::FlowTrace;
use frs_core::frspace::MatrixMeasure;
use serde::Serialize;

use crate::error::CliError;

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn entry_header(out: &mut String, d: usize) {
    for i in 0..d {
        for j in 0..d {
            let _ = write!(out, ",a_{i}_{j}");
        }
    }
}

/// Rows `(t, cell_id, entries…, lambda_min)`, entries row-major.
pub fn states_csv(times: &[f64], states: &[MatrixMeasure]) -> Result<String, CliError> {
    let d = states.first().map_or(0, |s| s.grid().dim());
    let mut out = String::from("t,cell_id");
    entry_header(&mut out, d);
    out.push_str(",lambda_min\n");
    for (t, state) in times.iter().zip(states) {
        for (cell, a) in state.grid().cells().iter().zip(state.values()) {
            let _ = write!(out, "{t},{}", cell.id);
            for v in a.as_slice() {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{}", a.min_eigenvalue()?);
        }
    }
    Ok(out)
}

pub fn path_csv(path: &KnotPath) -> Result<String, CliError> {
    states_csv(&path.times(), path.knots())
}

/// Rows `(t, entropy, fisher, dissipation_residual)`; the residual is blank
/// at the first and last sample, where no central difference exists.
pub fn heatflow_csv(trace: &FlowTrace, residuals: &[(f64, f64)]) -> String {
    let mut out = String::from("t,entropy,fisher,dissipation_residual\n");
    for (j, t) in trace.times.iter().enumerate() {
        let _ = write!(out, "{t},{},{},", trace.entropy_series[j], trace.fisher_series[j]);
        if j >= 1 && j <= residuals.len() {
            let _ = write!(out, "{}", residuals[j - 1].1);
        }
        out.push('\n');
    }
    out
}

pub fn gamma_csv(sweep: &GammaSweep) -> String {
    let mut out = String::from("epsilon,value,gap,action_part,fisher_part,iterations,converged\n");
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.epsilon, r.value, r.gap, r.action_part, r.fisher_part, r.iterations, r.converged
        );
    }
    out
}
