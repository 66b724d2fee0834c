//! Experiment manifests: one JSON document describing a single command run.

use std::path::Path;
use std::sync::Arc;

use clap::ValueEnum;
use frs_core::action::SolverConfig;
use frs_core::frspace::{make_measure, Grid, MatrixMeasure};
use frs_core::random::{generate_endpoints, EndpointGenerator};
use frs_core::SymMat;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MANIFEST_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bures,
    W2Gaussian,
    Heatflow,
    Geodesic,
    Schrodinger,
    GammaSweep,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bures => "bures",
            Command::W2Gaussian => "w2-gaussian",
            Command::Heatflow => "heatflow",
            Command::Geodesic => "geodesic",
            Command::Schrodinger => "schrodinger",
            Command::GammaSweep => "gamma-sweep",
            Command::Check => "check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: String,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<EndpointsSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heatflow: Option<HeatflowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Number of cells `K`.
    pub cells: usize,
    /// Matrix dimension `d`.
    pub dim: usize,
    #[serde(default)]
    pub weights: WeightsSpec,
}

/// Either the string `"uniform"` or one raw weight per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Named(String),
    Explicit(Vec<f64>),
}

impl Default for WeightsSpec {
    fn default() -> Self {
        WeightsSpec::Named("uniform".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EndpointsSpec {
    /// One matrix per cell for each endpoint.
    Explicit {
        a0: Vec<SymMat>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a1: Option<Vec<SymMat>>,
        /// Rescale the endpoints to unit mass instead of rejecting them.
        #[serde(default)]
        normalize: bool,
    },
    Generator(EndpointGenerator),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub mean0: Vec<f64>,
    pub mean1: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatflowSpec {
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
}

/// Artifact file names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub result: String,
    pub metadata: String,
    /// Main CSV series; defaults to `<command>.csv`.
    pub csv: Option<String>,
    /// Per-cell state series (heat flow and paths); defaults to `<command>_states.csv`.
    pub states_csv: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { result: "result.json".into(), metadata: "metadata.json".into(), csv: None, states_csv: None }
    }
}

impl OutputSpec {
    pub fn csv_name(&self, command: Command) -> String {
        self.csv.clone().unwrap_or_else(|| format!("{}.csv", command.name()))
    }

    pub fn states_csv_name(&self, command: Command) -> String {
        self.states_csv.clone().unwrap_or_else(|| format!("{}_states.csv", command.name()))
    }
}

impl Manifest {
    /// A manifest with no inputs, used by `check` when no file is given.
    pub fn bare(command: Command) -> Self {
        Self {
            version: MANIFEST_VERSION.into(),
            command,
            grid: None,
            endpoints: None,
            solver: SolverConfig::default(),
            gaussian: None,
            heatflow: None,
            sweep: None,
            outputs: OutputSpec::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read manifest {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| {
            CliError::Validation(format!("manifest line {}, column {}: {e}", e.line(), e.column()))
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != MANIFEST_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported manifest version {:?} (expected {MANIFEST_VERSION:?})",
                self.version
            )));
        }
        self.solver.validate()?;
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::Validation(format!("command {} requires the `{field}` field", self.command.name())))
            }
        };
        match self.command {
            Command::Check => Ok(()),
            Command::Heatflow => {
                need(self.endpoints.is_some(), "endpoints")?;
                need(self.heatflow.is_some(), "heatflow")
            }
            Command::W2Gaussian => {
                need(self.endpoints.is_some(), "endpoints")?;
                need(self.gaussian.is_some(), "gaussian")
            }
            Command::GammaSweep => {
                need(self.endpoints.is_some(), "endpoints")?;
                need(self.sweep.is_some(), "sweep")
            }
            Command::Bures | Command::Geodesic | Command::Schrodinger => need(self.endpoints.is_some(), "endpoints"),
        }
    }

    /// Builds the grid from the explicit spec or, failing that, from the
    /// shape of explicit endpoints (uniform weights).
    pub fn build_grid(&self) -> Result<Arc<Grid>, CliError> {
        if let Some(g) = &self.grid {
            let raw = match &g.weights {
                WeightsSpec::Named(name) if name == "uniform" => vec![1.0; g.cells],
                WeightsSpec::Named(name) => {
                    return Err(CliError::Validation(format!("unknown weights {name:?} (expected \"uniform\" or a list)")))
                }
                WeightsSpec::Explicit(w) => {
                    if w.len() != g.cells {
                        return Err(CliError::Validation(format!(
                            "grid has {} cells but {} weights",
                            g.cells,
                            w.len()
                        )));
                    }
                    w.clone()
                }
            };
            return Ok(Arc::new(Grid::new(g.dim, raw)?));
        }
        match &self.endpoints {
            Some(EndpointsSpec::Explicit { a0, .. }) if !a0.is_empty() => {
                Ok(Arc::new(Grid::uniform(a0.len(), a0[0].dim())?))
            }
            Some(EndpointsSpec::Explicit { .. }) => Err(CliError::Validation("endpoint a0 has no cells".into())),
            _ => Err(CliError::Validation("a `grid` is required with generated endpoints".into())),
        }
    }

    /// Raw endpoint matrices, one per cell; `a1` may be absent.
    pub fn raw_endpoints(&self, grid: &Arc<Grid>) -> Result<(Vec<SymMat>, Option<Vec<SymMat>>), CliError> {
        match self.endpoints.as_ref() {
            Some(EndpointsSpec::Explicit { a0, a1, .. }) => {
                for (name, side) in [("a0", Some(a0)), ("a1", a1.as_ref())] {
                    let Some(side) = side else { continue };
                    if side.len() != grid.len() {
                        return Err(CliError::Validation(format!(
                            "endpoint {name} has {} cells, grid has {}",
                            side.len(),
                            grid.len()
                        )));
                    }
                    if let Some(m) = side.iter().find(|m| m.dim() != grid.dim()) {
                        return Err(CliError::Validation(format!(
                            "endpoint {name} has a {0}×{0} block, grid dimension is {1}",
                            m.dim(),
                            grid.dim()
                        )));
                    }
                }
                Ok((a0.clone(), a1.clone()))
            }
            Some(EndpointsSpec::Generator(spec)) => {
                let (m0, m1) = generate_endpoints(grid, spec)?;
                Ok((m0.into_values(), Some(m1.into_values())))
            }
            None => Err(CliError::Validation("no endpoints given".into())),
        }
    }

    /// Endpoint measures. Explicit endpoints are normalized only on request;
    /// `require_unit_mass` rejects off-mass inputs otherwise.
    pub fn measures(&self, grid: &Arc<Grid>, require_unit_mass: bool) -> Result<(MatrixMeasure, Option<MatrixMeasure>), CliError> {
        let normalize = matches!(self.endpoints, Some(EndpointsSpec::Explicit { normalize: true, .. }));
        let (a0, a1) = self.raw_endpoints(grid)?;
        let build = |raw: Vec<SymMat>| -> Result<MatrixMeasure, CliError> {
            if normalize {
                Ok(make_measure(grid, raw, true)?)
            } else if require_unit_mass {
                Ok(make_measure(grid, raw, false)?)
            } else {
                Ok(MatrixMeasure::unnormalized(grid, raw)?)
            }
        };
        let m0 = build(a0)?;
        let m1 = a1.map(build).transpose()?;
        Ok((m0, m1))
    }
}
