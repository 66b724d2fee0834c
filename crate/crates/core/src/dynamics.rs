//! The generalized heat flow `dA/dt = ½(Id − A)`, i.e. the Fisher-Rao gradient
//! flow of the extended entropy with reference measure `Id`.
//!
//! On Gaussians `N(A)` this is exactly the covariance equation of the
//! Fokker-Planck flow towards `N(Id)`, so no spatial PDE is solved here.

use serde::{Deserialize, Serialize};

use crate::error::{FrsError, Result};
use crate::frspace::{entropy, fisher_info, MatrixMeasure, PSD_TOL};
use crate::symmat::SymMat;

/// Sampled trajectory of the heat flow with its entropy and Fisher series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub states: Vec<MatrixMeasure>,
    pub entropy_series: Vec<f64>,
    pub fisher_series: Vec<f64>,
}

impl FlowTrace {
    pub fn final_state(&self) -> &MatrixMeasure {
        self.states.last().expect("trace is never empty")
    }
}

/// Closed form `A_t = Id + e^{−t/2}(A_0 − Id)`, cell by cell.
pub fn heat_flow_exact(a0: &MatrixMeasure, t: f64) -> Result<MatrixMeasure> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(FrsError::Invalid(format!("flow time must be finite and nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(a0.clone());
    }
    let decay = (-0.5 * t).exp();
    let values = a0
        .values()
        .iter()
        .map(|a| a.shift_diag(-1.0).scaled(decay).shift_diag(1.0))
        .collect();
    Ok(MatrixMeasure::from_parts(a0.grid().clone(), values))
}

fn heat_rhs(a: &SymMat) -> SymMat {
    a.scaled(-0.5).shift_diag(0.5)
}

/// One classical Runge-Kutta step of `dA/dt = rhs(A)` applied cell by cell.
fn rk4_step(values: &[SymMat], h: f64, rhs: impl Fn(&SymMat) -> SymMat) -> Vec<SymMat> {
    values
        .iter()
        .map(|a| {
            let k1 = rhs(a);
            let mut tmp = a.clone();
            tmp.axpy(0.5 * h, &k1);
            let k2 = rhs(&tmp);
            let mut tmp = a.clone();
            tmp.axpy(0.5 * h, &k2);
            let k3 = rhs(&tmp);
            let mut tmp = a.clone();
            tmp.axpy(h, &k3);
            let k4 = rhs(&tmp);
            let mut out = a.clone();
            out.axpy(h / 6.0, &k1);
            out.axpy(h / 3.0, &k2);
            out.axpy(h / 3.0, &k3);
            out.axpy(h / 6.0, &k4);
            out
        })
        .collect()
}

/// Integrates the heat flow with RK4, recording states at multiples of `dt`
/// (the last step is shortened if `t_end` is not a multiple).
pub fn heat_flow_integrate(a0: &MatrixMeasure, t_end: f64, dt: f64) -> Result<FlowTrace> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FrsError::Invalid(format!("dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(FrsError::Invalid(format!("t_end must be nonnegative, got {t_end}")));
    }
    let ratio = t_end / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(a0.clone());
    let mut current = a0.values().to_vec();
    for j in 1..=steps {
        let t = if j == steps { t_end } else { j as f64 * dt };
        let h = t - times[j - 1];
        current = rk4_step(&current, h, heat_rhs);
        for a in &current {
            let dec = a.eig()?;
            if dec.min() < -PSD_TOL * dec.max().abs().max(1.0) {
                return Err(FrsError::Integration { time: t, min_eigenvalue: dec.min() });
            }
        }
        times.push(t);
        states.push(MatrixMeasure::from_parts(a0.grid().clone(), current.clone()));
    }

    let entropy_series = states
        .iter()
        .map(|s| entropy(s, false).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    let fisher_series = states
        .iter()
        .map(|s| fisher_info(s, false).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowTrace { times, states, entropy_series, fisher_series })
}

/// Residuals `|dℰ/dt + ℱ|` at interior samples, with `dℰ/dt` from central differences.
pub fn dissipation_report(trace: &FlowTrace) -> Result<Vec<(f64, f64)>> {
    let n = trace.times.len();
    if n < 3 {
        return Err(FrsError::Invalid(format!("dissipation report needs at least 3 states, got {n}")));
    }
    let dt = trace.times[1] - trace.times[0];
    for w in trace.times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(FrsError::Invalid(format!(
                "non-uniform time grid: step {} at t = {} differs from {dt}",
                w[1] - w[0],
                w[0]
            )));
        }
    }
    Ok((1..n - 1)
        .map(|j| {
            let de = (trace.entropy_series[j + 1] - trace.entropy_series[j - 1]) / (2.0 * dt);
            (trace.times[j], (de + trace.fisher_series[j]).abs())
        })
        .collect())
}
