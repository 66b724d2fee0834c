use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FrsError, Result};

/// One cell of the discretized domain. Coordinates are metadata only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

/// Quadrature of the domain `D`.
///
/// Weights are rescaled so that `Σ w_k = 1/d`, which makes the identity field
/// a unit-mass measure. The caller's weights and their total are kept so the
/// grid serializes exactly as it was given.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: Vec<Cell>,
    raw_weights: Vec<f64>,
    weights: Vec<f64>,
    volume: f64,
}

impl Grid {
    pub fn new(dim: usize, raw_weights: Vec<f64>) -> Result<Self> {
        let cells = (0..raw_weights.len()).map(|id| Cell { id, coords: None }).collect();
        Self::with_cells(dim, cells, raw_weights)
    }

    pub fn with_cells(dim: usize, cells: Vec<Cell>, raw_weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(FrsError::Invalid("matrix dimension must be at least 1".into()));
        }
        if raw_weights.is_empty() {
            return Err(FrsError::Invalid("grid needs at least one cell".into()));
        }
        if cells.len() != raw_weights.len() {
            return Err(FrsError::Dimension { expected: raw_weights.len(), found: cells.len() });
        }
        if let Some((k, w)) = raw_weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(FrsError::Invalid(format!("weight of cell {k} must be positive and finite, got {w}")));
        }
        let volume: f64 = raw_weights.iter().sum();
        let factor = 1.0 / (dim as f64 * volume);
        let weights = raw_weights.iter().map(|w| w * factor).collect();
        Ok(Self { dim, cells, raw_weights, weights, volume })
    }

    /// `k` cells of equal weight.
    pub fn uniform(k: usize, dim: usize) -> Result<Self> {
        Self::new(dim, vec![1.0; k])
    }

    pub fn single_cell(dim: usize) -> Self {
        Self::uniform(1, dim).expect("single cell grid is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Normalized quadrature weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn raw_weights(&self) -> &[f64] {
        &self.raw_weights
    }

    /// Total of the caller's weights before normalization.
    pub fn original_volume(&self) -> f64 {
        self.volume
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    dim: usize,
    cells: Vec<Cell>,
    weights: Vec<f64>,
    original_volume: f64,
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GridRepr {
            dim: self.dim,
            cells: self.cells.clone(),
            weights: self.raw_weights.clone(),
            original_volume: self.volume,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = GridRepr::deserialize(deserializer)?;
        let grid = Grid::with_cells(repr.dim, repr.cells, repr.weights).map_err(serde::de::Error::custom)?;
        if (grid.volume - repr.original_volume).abs() > 1e-9 * grid.volume {
            return Err(serde::de::Error::custom(format!(
                "original_volume {} disagrees with the weights (sum {})",
                repr.original_volume, grid.volume
            )));
        }
        Ok(grid)
    }
}
