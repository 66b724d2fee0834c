//! Discrete paths of matrix measures and the variational problems on them:
//! Fisher-Rao geodesics, mass-free (Hellinger) geodesics, and the
//! ε-regularized Schrödinger problem.
//!
//! Time is discretized on `t_j = j/n`. On each interval the velocity potential
//! is eliminated through the Lyapunov solve on the midpoint state, so the
//! objective depends on the interior knots only.

mod objective;
mod optimizer;
mod sweep;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FrsError, Result};
use crate::frspace::{retract, Grid, MatrixMeasure};
use crate::symmat::SymMat;

pub use objective::{interval_actions, objective, path_action, path_fisher, ObjectiveEval};
pub use optimizer::{solve_geodesic, solve_path, solve_schrodinger};
pub use sweep::{gamma_sweep, geodesic_convexity_check, GammaRow, GammaSweep};

/// Whether knots are held on the unit-mass constraint.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMode {
    /// Unit mass at every time (Fisher-Rao distance).
    #[default]
    FisherRao,
    /// No mass constraint (Hellinger distance); decouples cell by cell.
    Hellinger,
}

impl PathMode {
    pub fn constrained(self) -> bool {
        matches!(self, PathMode::FisherRao)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Number of time intervals `n`.
    pub n_steps: usize,
    pub max_iter: usize,
    /// Stopping threshold on the Riemannian gradient norm.
    pub grad_tol: f64,
    /// Absolute eigenvalue floor enforced by the retraction.
    pub eig_floor: f64,
    /// Largest entry change allowed in the first step.
    pub step_init: f64,
    /// Temperature ε of the Schrödinger problem.
    pub epsilon: f64,
    /// Seeds the perturbation of the initial path when `init_jitter > 0`.
    pub seed: u64,
    pub init_jitter: f64,
    /// Number of stored quasi-Newton pairs.
    pub memory: usize,
    pub mode: PathMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_steps: 32,
            max_iter: 20_000,
            grad_tol: 1e-9,
            eig_floor: 1e-10,
            step_init: 0.1,
            epsilon: 0.0,
            seed: 0,
            init_jitter: 0.0,
            memory: 30,
            mode: PathMode::FisherRao,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(FrsError::Invalid(format!("n_steps must be at least 2, got {}", self.n_steps)));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(FrsError::Invalid(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if !(self.eig_floor.is_finite() && self.eig_floor >= 0.0) {
            return Err(FrsError::Invalid(format!("eig_floor must be nonnegative, got {}", self.eig_floor)));
        }
        if !(self.step_init.is_finite() && self.step_init > 0.0) {
            return Err(FrsError::Invalid(format!("step_init must be positive, got {}", self.step_init)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(FrsError::Invalid(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.init_jitter.is_finite() && self.init_jitter >= 0.0) {
            return Err(FrsError::Invalid(format!("init_jitter must be nonnegative, got {}", self.init_jitter)));
        }
        if self.memory == 0 {
            return Err(FrsError::Invalid("memory must be at least 1".into()));
        }
        Ok(())
    }
}

/// A curve `t_j = j/n ↦ A_j` with fixed endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathRepr", into = "PathRepr")]
pub struct Path {
    grid: Arc<Grid>,
    knots: Vec<MatrixMeasure>,
    mode: PathMode,
}

#[derive(Clone, Serialize, Deserialize)]
struct PathRepr {
    mode: PathMode,
    grid: Arc<Grid>,
    knots: Vec<Vec<SymMat>>,
}

impl From<Path> for PathRepr {
    fn from(p: Path) -> Self {
        PathRepr {
            mode: p.mode,
            grid: p.grid,
            knots: p.knots.into_iter().map(MatrixMeasure::into_values).collect(),
        }
    }
}

impl TryFrom<PathRepr> for Path {
    type Error = FrsError;
    fn try_from(r: PathRepr) -> Result<Self> {
        let knots = r
            .knots
            .into_iter()
            .map(|v| MatrixMeasure::unnormalized(&r.grid, v))
            .collect::<Result<Vec<_>>>()?;
        Path::new(knots, r.mode)
    }
}

impl Path {
    /// Validates a knot sequence: at least two knots on one grid, unit mass
    /// in the constrained mode.
    pub fn new(knots: Vec<MatrixMeasure>, mode: PathMode) -> Result<Self> {
        if knots.len() < 2 {
            return Err(FrsError::Invalid(format!("a path needs at least 2 knots, got {}", knots.len())));
        }
        let grid = Arc::clone(knots[0].grid());
        for (j, k) in knots.iter().enumerate() {
            if **k.grid() != *grid {
                return Err(FrsError::Domain(format!("knot {j} lives on a different grid")));
            }
            if mode.constrained() && !k.is_normalized() {
                return Err(FrsError::Domain(format!("knot {j} has mass {} in constrained mode", k.mass())));
            }
        }
        Ok(Self { grid, knots, mode })
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, knots: Vec<MatrixMeasure>, mode: PathMode) -> Self {
        Self { grid, knots, mode }
    }

    /// Linear interpolation of the endpoints, retracted onto the feasible set
    /// (endpoints kept exactly).
    pub fn linear(a0: &MatrixMeasure, a1: &MatrixMeasure, n_steps: usize, mode: PathMode, eig_floor: f64) -> Result<Self> {
        if n_steps < 1 {
            return Err(FrsError::Invalid("n_steps must be positive".into()));
        }
        let grid = Arc::clone(a0.grid());
        let mut knots = Vec::with_capacity(n_steps + 1);
        knots.push(a0.clone());
        for j in 1..n_steps {
            let t = j as f64 / n_steps as f64;
            let raw = a0
                .values()
                .iter()
                .zip(a1.values())
                .map(|(x, y)| &x.scaled(1.0 - t) + &y.scaled(t))
                .collect();
            knots.push(retract(&grid, raw, eig_floor, mode.constrained())?.0);
        }
        knots.push(a1.clone());
        Ok(Self { grid, knots, mode })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn mode(&self) -> PathMode {
        self.mode
    }

    pub fn n_steps(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn knots(&self) -> &[MatrixMeasure] {
        &self.knots
    }

    pub fn start(&self) -> &MatrixMeasure {
        &self.knots[0]
    }

    pub fn end(&self) -> &MatrixMeasure {
        &self.knots[self.knots.len() - 1]
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.n_steps() as f64;
        (0..=self.n_steps()).map(|j| j as f64 / n).collect()
    }

    pub fn reversed(&self) -> Path {
        let mut knots = self.knots.clone();
        knots.reverse();
        Self { grid: Arc::clone(&self.grid), knots, mode: self.mode }
    }

    /// Largest cell-wise entry distance between two paths with the same knot count.
    pub fn max_distance(&self, other: &Path) -> f64 {
        self.knots
            .iter()
            .zip(&other.knots)
            .map(|(a, b)| a.max_cell_distance(b))
            .fold(0.0, f64::max)
    }
}

/// Feasibility record over all accepted optimizer iterates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    /// `max |mass − 1|` over the interior knots (constrained mode only; 0 otherwise).
    pub max_mass_drift: f64,
    /// Smallest eigenvalue over the interior knots.
    pub min_eigenvalue: f64,
    /// `max |Σ w ⟨A, U⟩| / max(1, Σ w ‖A‖ ‖U‖)` over every projected gradient:
    /// absolute for ordinary gradients, relative once round-off in huge ones
    /// (knots near the floor with `ε > 0`) dominates.
    pub max_zero_average_residual: f64,
    pub evaluations: usize,
    pub accepted_iterates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Minimized objective `action_part + ε²·fisher_part`.
    pub value: f64,
    pub action_part: f64,
    /// Time integral of the Fisher information along the returned path.
    pub fisher_part: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
    pub diagnostics: SolveDiagnostics,
    pub path: Path,
}
