use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{FrsError, Result};
use crate::numeric::pairwise_sum;
use crate::symmat::{SymMat, eig};

/// Relative PSD tolerance for blocks of a measure.
pub const PSD_TOL: f64 = 1e-12;
/// Allowed deviation of the total mass from one.
pub const MASS_TOL: f64 = 1e-9;

/// One PSD block per grid cell.
///
/// Measures built by [`make_measure`] carry unit mass `Σ_k w_k tr A_k = 1`.
/// [`MatrixMeasure::unnormalized`] skips the mass check; it backs the
/// Hellinger (mass-free) mode and functional probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr")]
pub struct MatrixMeasure {
    grid: Arc<Grid>,
    values: Vec<SymMat>,
}

#[derive(Deserialize)]
struct MeasureRepr {
    grid: Arc<Grid>,
    values: Vec<SymMat>,
}

impl TryFrom<MeasureRepr> for MatrixMeasure {
    type Error = FrsError;
    fn try_from(r: MeasureRepr) -> Result<Self> {
        MatrixMeasure::unnormalized(&r.grid, r.values)
    }
}

fn check_blocks(grid: &Grid, raw: &[SymMat]) -> Result<()> {
    if raw.len() != grid.len() {
        return Err(FrsError::Dimension { expected: grid.len(), found: raw.len() });
    }
    for (cell, a) in raw.iter().enumerate() {
        if a.dim() != grid.dim() {
            return Err(FrsError::Dimension { expected: grid.dim(), found: a.dim() });
        }
        let dec = eig(a)?;
        let tol = PSD_TOL * dec.max().abs().max(1.0);
        if dec.min() < -tol {
            return Err(FrsError::IndefiniteCell { cell, min_eigenvalue: dec.min() });
        }
    }
    Ok(())
}

/// Builds a point of the Fisher-Rao space. With `normalize` the blocks are
/// divided by their total mass, otherwise the mass must already be one.
pub fn make_measure(grid: &Arc<Grid>, raw: Vec<SymMat>, normalize: bool) -> Result<MatrixMeasure> {
    check_blocks(grid, &raw)?;
    let m = MatrixMeasure { grid: Arc::clone(grid), values: raw };
    let mass = m.mass();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(FrsError::Domain(format!("measure has non-positive mass {mass}")));
    }
    if normalize {
        let inv = 1.0 / mass;
        Ok(MatrixMeasure { values: m.values.iter().map(|a| a.scaled(inv)).collect(), ..m })
    } else if (mass - 1.0).abs() > MASS_TOL {
        Err(FrsError::Domain(format!("measure mass {mass} differs from 1")))
    } else {
        Ok(m)
    }
}

/// The identity field, `A_k = Id` for every cell.
pub fn uniform_identity(grid: &Arc<Grid>) -> MatrixMeasure {
    MatrixMeasure {
        grid: Arc::clone(grid),
        values: vec![SymMat::identity(grid.dim()); grid.len()],
    }
}

impl MatrixMeasure {
    /// PSD blocks without the unit-mass requirement.
    pub fn unnormalized(grid: &Arc<Grid>, raw: Vec<SymMat>) -> Result<Self> {
        check_blocks(grid, &raw)?;
        Ok(Self { grid: Arc::clone(grid), values: raw })
    }

    /// Skips validation; callers guarantee shape and PSD.
    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<SymMat>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[SymMat] {
        &self.values
    }

    pub fn into_values(self) -> Vec<SymMat> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_k w_k tr A_k`
    pub fn mass(&self) -> f64 {
        let terms: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, a)| self.grid.weight(k) * a.trace())
            .collect();
        pairwise_sum(&terms)
    }

    pub fn is_normalized(&self) -> bool {
        (self.mass() - 1.0).abs() <= MASS_TOL
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.values
            .iter()
            .map(|a| a.min_eigenvalue())
            .try_fold(f64::INFINITY, |m, l| l.map(|l| m.min(l)))
    }

    /// Largest cell-wise max-entry distance to another measure on the same grid.
    pub fn max_cell_distance(&self, other: &MatrixMeasure) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max)
    }
}
