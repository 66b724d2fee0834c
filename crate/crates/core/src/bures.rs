//! Bures distance between PSD matrices, the Wasserstein distance between
//! Gaussians, and the Bures-Wasserstein metric on the SPD cone.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::action::{solve_geodesic, PathMode, SolverConfig};
use crate::error::{FrsError, Result};
use crate::frspace::{Grid, MatrixMeasure};
use crate::symmat::{classify_psd, frobenius_unchecked, PsdClass, SymMat};

/// Absolute PSD tolerance for covariance inputs.
pub const COVARIANCE_PSD_TOL: f64 = 1e-12;

/// Parameters of a Gaussian `N(m, A)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mean: Vec<f64>,
    pub covariance: SymMat,
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, covariance: SymMat) -> Result<Self> {
        if mean.len() != covariance.dim() {
            return Err(FrsError::Dimension { expected: covariance.dim(), found: mean.len() });
        }
        require_psd(&covariance, "covariance")?;
        Ok(Self { mean, covariance })
    }

    pub fn centered(covariance: SymMat) -> Result<Self> {
        Self::new(vec![0.0; covariance.dim()], covariance)
    }
}

fn require_psd(a: &SymMat, name: &str) -> Result<()> {
    let tol = COVARIANCE_PSD_TOL * a.max_abs().max(1.0);
    match classify_psd(a, tol)? {
        PsdClass::Indefinite => Err(FrsError::Domain(format!("{name} is indefinite"))),
        _ => Ok(()),
    }
}

fn require_pd(a: &SymMat, name: &str) -> Result<()> {
    match classify_psd(a, 0.0)? {
        PsdClass::PositiveDefinite => Ok(()),
        _ => Err(FrsError::Domain(format!("{name} is not positive definite"))),
    }
}

/// `tr A0 + tr A1 − 2 tr((A0^{1/2} A1 A0^{1/2})^{1/2})`, for PSD inputs.
///
/// Round-off negative eigenvalues inside both square roots are clamped at 0.
pub fn bures_sq(a0: &SymMat, a1: &SymMat) -> Result<f64> {
    if a0.dim() != a1.dim() {
        return Err(FrsError::Dimension { expected: a0.dim(), found: a1.dim() });
    }
    require_psd(a0, "A0")?;
    require_psd(a1, "A1")?;
    let r0 = a0.sqrt_psd()?;
    let cross = a1.congruence(&r0).sqrt_psd()?;
    Ok((a0.trace() + a1.trace() - 2.0 * cross.trace()).max(0.0))
}

/// `|m1 − m0|² + B²(A0, A1)`
pub fn gaussian_w2_sq(g0: &GaussianParams, g1: &GaussianParams) -> Result<f64> {
    if g0.mean.len() != g1.mean.len() {
        return Err(FrsError::Dimension { expected: g0.mean.len(), found: g1.mean.len() });
    }
    let shift: f64 = g0.mean.iter().zip(&g1.mean).map(|(a, b)| (b - a) * (b - a)).sum();
    Ok(shift + bures_sq(&g0.covariance, &g1.covariance)?)
}

/// Bures-Wasserstein metric `g_A(U, V) = tr(U A V)`.
pub fn metric(a: &SymMat, u: &SymMat, v: &SymMat) -> Result<f64> {
    for m in [u, v] {
        if m.dim() != a.dim() {
            return Err(FrsError::Dimension { expected: a.dim(), found: m.dim() });
        }
    }
    require_pd(a, "A")?;
    Ok(frobenius_unchecked(&a.jordan(u), v))
}

/// Riesz map `U ↦ (AU)^sym`; inverted by [`crate::symmat::lyapunov_solve`].
pub fn riesz(a: &SymMat, u: &SymMat) -> SymMat {
    a.jordan(u)
}

/// Minimal discrete action between two PD matrices with `n_steps`
/// intervals, computed by the path solver on a one-cell grid without mass
/// constraint and reported per unit cell weight. Approximates `4·B²(A0, A1)`.
pub fn bures_dynamic_sq(a0: &SymMat, a1: &SymMat, n_steps: usize, cfg: &SolverConfig) -> Result<f64> {
    if a0.dim() != a1.dim() {
        return Err(FrsError::Dimension { expected: a0.dim(), found: a1.dim() });
    }
    require_pd(a0, "A0")?;
    require_pd(a1, "A1")?;
    let grid = Arc::new(Grid::single_cell(a0.dim()));
    let m0 = MatrixMeasure::unnormalized(&grid, vec![a0.clone()])?;
    let m1 = MatrixMeasure::unnormalized(&grid, vec![a1.clone()])?;
    let cfg = SolverConfig { n_steps, mode: PathMode::Hellinger, ..cfg.clone() };
    let report = solve_geodesic(&m0, &m1, &cfg)?;
    if !report.converged {
        return Err(FrsError::NotConverged { iterations: report.iterations, grad_norm: report.final_grad_norm });
    }
    Ok(report.value / grid.weight(0))
}
