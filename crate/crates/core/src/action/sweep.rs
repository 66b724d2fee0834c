use serde::{Deserialize, Serialize};

use super::optimizer::{solve_geodesic, solve_path};
use super::{SolveReport, SolverConfig};
use crate::error::{FrsError, Result};
use crate::frspace::{entropy, MatrixMeasure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub epsilon: f64,
    pub value: f64,
    /// `value − FR²`, with `FR²` from the geodesic solve.
    pub gap: f64,
    pub action_part: f64,
    pub fisher_part: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSweep {
    pub geodesic_value: f64,
    pub geodesic_converged: bool,
    pub rows: Vec<GammaRow>,
}

impl GammaSweep {
    pub fn all_converged(&self) -> bool {
        self.geodesic_converged && self.rows.iter().all(|r| r.converged)
    }
}

/// Solves the Schrödinger problem along a strictly decreasing list of
/// temperatures, warm-starting each solve from the previous optimum, and
/// reports the gap to the geodesic value.
pub fn gamma_sweep(a0: &MatrixMeasure, a1: &MatrixMeasure, eps_list: &[f64], cfg: &SolverConfig) -> Result<GammaSweep> {
    if eps_list.is_empty() {
        return Err(FrsError::Invalid("ε list is empty".into()));
    }
    if let Some(e) = eps_list.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(FrsError::Invalid(format!("ε values must be finite and nonnegative, got {e}")));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FrsError::Invalid("ε list must be strictly decreasing".into()));
    }

    let geodesic = solve_geodesic(a0, a1, cfg)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut previous: Option<SolveReport> = None;
    for &epsilon in eps_list {
        let run_cfg = SolverConfig { epsilon, ..cfg.clone() };
        let report = solve_path(a0, a1, &run_cfg, previous.as_ref().map(|r| &r.path))
            .map_err(|e| FrsError::Sweep { epsilon, source: Box::new(e) })?;
        rows.push(GammaRow {
            epsilon,
            value: report.value,
            gap: report.value - geodesic.value,
            action_part: report.action_part,
            fisher_part: report.fisher_part,
            iterations: report.iterations,
            converged: report.converged,
        });
        previous = Some(report);
    }
    Ok(GammaSweep { geodesic_value: geodesic.value, geodesic_converged: geodesic.converged, rows })
}

/// Largest violation over the knots of
/// `ℰ(A_t) ≤ (1−t)ℰ(A_0) + tℰ(A_1) − ¼ t(1−t)·FR²`,
/// i.e. ½-convexity of the entropy along the discrete geodesic in `report`.
/// The endpoints contribute exactly 0, so the result is never negative.
pub fn geodesic_convexity_check(report: &SolveReport) -> Result<f64> {
    let path = &report.path;
    let entropies = path
        .knots()
        .iter()
        .map(|k| entropy(k, false).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    let (e0, e1) = (entropies[0], entropies[entropies.len() - 1]);
    Ok(path
        .times()
        .iter()
        .zip(&entropies)
        .map(|(&t, &e)| e - ((1.0 - t) * e0 + t * e1 - 0.25 * t * (1.0 - t) * report.value))
        .fold(f64::NEG_INFINITY, f64::max))
}
