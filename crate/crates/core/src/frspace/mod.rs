//! The Fisher-Rao space of unit-mass PSD matrix-valued measures on a
//! discretized domain, its tangent fields, and the entropy-type functionals.

mod functionals;
mod grid;
mod measure;

pub use functionals::{
    entropy, fisher_info, fr_norm_sq, grad_fr, potentials_of, project_tangent, retract, von_neumann,
    FunctionalValue, TangentField,
};
pub use grid::{Cell, Grid};
pub use measure::{make_measure, uniform_identity, MatrixMeasure, MASS_TOL, PSD_TOL};
