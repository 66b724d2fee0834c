//! Numerical toolkit for the non-commutative Fisher-Rao geometry of
//! positive semi-definite matrix-valued measures.
//!
//! * [`symmat`]: dense symmetric kernel (eigendecomposition, spectral functions, Lyapunov solve)
//! * [`bures`]: Bures and Gaussian Wasserstein distances, the Bures-Wasserstein metric
//! * [`frspace`]: matrix measures on a grid, tangent fields, entropy and Fisher information
//! * [`dynamics`]: the heat flow `dA/dt = ½(Id − A)` and its entropy dissipation
//! * [`action`]: discrete paths, geodesic and Schrödinger solvers, ε-sweeps

pub mod action;
pub mod bures;
pub mod dynamics;
pub mod error;
pub mod frspace;
pub mod numeric;
pub mod random;
pub mod symmat;

pub use error::{FrsError, Result};
pub use symmat::SymMat;
