use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Grid, MatrixMeasure, MASS_TOL};
use crate::error::{FrsError, Result};
use crate::numeric::pairwise_sum;
use crate::symmat::{eig, frobenius_unchecked, lyapunov_solve, EigenFloor, SymMat};

/// Value of a functional, `+∞` when a block touches the boundary of the cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    /// Fisher-Rao gradient in tangent-vector form, one block per cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<Vec<SymMat>>,
}

impl FunctionalValue {
    fn infinite() -> Self {
        Self { value: f64::INFINITY, gradient: None }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// A field of potentials `U_k`; the tangent vector is `ξ_k = (A_k U_k)^sym`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentField {
    grid: Arc<Grid>,
    potentials: Vec<SymMat>,
}

impl TangentField {
    /// Validates shape and the zero-average condition `Σ w_k ⟨A_k, U_k⟩ = 0`.
    pub fn new(base: &MatrixMeasure, potentials: Vec<SymMat>) -> Result<Self> {
        check_field(base, &potentials)?;
        let field = Self { grid: Arc::clone(base.grid()), potentials };
        let r = field.zero_average_residual(base);
        if r.abs() > MASS_TOL {
            return Err(FrsError::Domain(format!("potential field is not zero-average (residual {r:.3e})")));
        }
        Ok(field)
    }

    /// No zero-average check; for mass-free (Hellinger) directions.
    pub fn unconstrained(base: &MatrixMeasure, potentials: Vec<SymMat>) -> Result<Self> {
        check_field(base, &potentials)?;
        Ok(Self { grid: Arc::clone(base.grid()), potentials })
    }

    pub fn potentials(&self) -> &[SymMat] {
        &self.potentials
    }

    pub fn into_potentials(self) -> Vec<SymMat> {
        self.potentials
    }

    /// `Σ_k w_k ⟨A_k, U_k⟩`
    pub fn zero_average_residual(&self, base: &MatrixMeasure) -> f64 {
        weighted_pairing(base.grid(), base.values(), &self.potentials)
    }

    /// Tangent vectors `ξ_k = (A_k U_k)^sym`.
    pub fn tangent_vectors(&self, base: &MatrixMeasure) -> Vec<SymMat> {
        base.values().iter().zip(&self.potentials).map(|(a, u)| a.jordan(u)).collect()
    }
}

fn check_field(base: &MatrixMeasure, field: &[SymMat]) -> Result<()> {
    if field.len() != base.len() {
        return Err(FrsError::Dimension { expected: base.len(), found: field.len() });
    }
    if let Some(u) = field.iter().find(|u| u.dim() != base.grid().dim()) {
        return Err(FrsError::Dimension { expected: base.grid().dim(), found: u.dim() });
    }
    Ok(())
}

fn weighted_pairing(grid: &Grid, a: &[SymMat], b: &[SymMat]) -> f64 {
    let terms: Vec<f64> = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| grid.weight(k) * frobenius_unchecked(x, y))
        .collect();
    pairwise_sum(&terms)
}

/// Fisher-Rao gradient of an internal energy `∫F(A)` from its pointwise
/// Euclidean first variation: `G_k = (A_k F'_k)^sym − c A_k`, `c = Σ_j w_j tr(A_j F'_j)`.
pub fn grad_fr(a: &MatrixMeasure, fprime: &[SymMat]) -> Result<Vec<SymMat>> {
    check_field(a, fprime)?;
    let sym_parts: Vec<SymMat> = a.values().iter().zip(fprime).map(|(ak, fk)| ak.jordan(fk)).collect();
    let traces: Vec<f64> = sym_parts
        .iter()
        .enumerate()
        .map(|(k, s)| a.grid().weight(k) * s.trace())
        .collect();
    let c = pairwise_sum(&traces);
    Ok(sym_parts
        .into_iter()
        .zip(a.values())
        .map(|(mut s, ak)| {
            s.axpy(-c, ak);
            s
        })
        .collect())
}

/// Projects raw potentials onto the zero-average subspace: `U_k = U_raw_k − c·Id`
/// with `c = Σ w_k ⟨A_k, U_raw_k⟩ / mass(A)`.
pub fn project_tangent(a: &MatrixMeasure, raw: &[SymMat]) -> Result<TangentField> {
    check_field(a, raw)?;
    let c = weighted_pairing(a.grid(), a.values(), raw) / a.mass();
    let potentials = raw.iter().map(|u| u.shift_diag(-c)).collect();
    Ok(TangentField { grid: Arc::clone(a.grid()), potentials })
}

/// Squared Fisher-Rao norm `Σ_k w_k ⟨A_k U_k, U_k⟩`.
pub fn fr_norm_sq(a: &MatrixMeasure, u: &TangentField) -> Result<f64> {
    if *u.grid != **a.grid() {
        return Err(FrsError::Domain("tangent field is based on a different grid".into()));
    }
    check_field(a, &u.potentials)?;
    let terms: Vec<f64> = a
        .values()
        .iter()
        .zip(&u.potentials)
        .enumerate()
        .map(|(k, (ak, uk))| a.grid().weight(k) * frobenius_unchecked(&ak.jordan(uk), uk))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Potentials of a field of tangent vectors: solves `(A_k U_k)^sym = ξ_k` per cell.
pub fn potentials_of(a: &MatrixMeasure, xi: &[SymMat]) -> Result<TangentField> {
    check_field(a, xi)?;
    let potentials = a
        .values()
        .iter()
        .zip(xi)
        .map(|(ak, x)| lyapunov_solve(ak, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentField { grid: Arc::clone(a.grid()), potentials })
}

/// Extended entropy `Σ_k w_k ½ tr[A_k − log A_k − Id]`.
///
/// The full integrand is used rather than the reduced `−½ tr ∫ log A`, so the
/// value stays meaningful slightly off the unit-mass constraint.
pub fn entropy(a: &MatrixMeasure, with_gradient: bool) -> Result<FunctionalValue> {
    let floor = EigenFloor::default();
    let mut terms = Vec::with_capacity(a.len());
    let mut fprime = Vec::with_capacity(if with_gradient { a.len() } else { 0 });
    for (k, ak) in a.values().iter().enumerate() {
        let dec = eig(ak)?;
        if dec.min() <= floor.threshold(dec.max()) {
            return Ok(FunctionalValue::infinite());
        }
        let e: f64 = dec.eigenvalues.iter().map(|&l| l - l.ln() - 1.0).sum();
        terms.push(a.grid().weight(k) * 0.5 * e);
        if with_gradient {
            fprime.push(dec.map(|l| 0.5 * (1.0 - 1.0 / l)));
        }
    }
    let gradient = if with_gradient { Some(grad_fr(a, &fprime)?) } else { None };
    Ok(FunctionalValue { value: pairwise_sum(&terms), gradient })
}

/// Extended Fisher information `¼ (Σ_k w_k tr A_k⁻¹ − 1)`.
pub fn fisher_info(a: &MatrixMeasure, with_gradient: bool) -> Result<FunctionalValue> {
    let floor = EigenFloor::default();
    let mut terms = Vec::with_capacity(a.len());
    let mut fprime = Vec::new();
    for (k, ak) in a.values().iter().enumerate() {
        let dec = eig(ak)?;
        if dec.min() <= floor.threshold(dec.max()) {
            return Ok(FunctionalValue::infinite());
        }
        terms.push(a.grid().weight(k) * dec.eigenvalues.iter().map(|l| 1.0 / l).sum::<f64>());
        if with_gradient {
            fprime.push(dec.map(|l| -0.25 / (l * l)));
        }
    }
    let gradient = if with_gradient { Some(grad_fr(a, &fprime)?) } else { None };
    Ok(FunctionalValue { value: 0.25 * (pairwise_sum(&terms) - 1.0), gradient })
}

/// Von Neumann functional `Σ_k w_k tr(A_k log A_k)`, with `0 log 0 = 0`.
///
/// The gradient (first variation `log A + Id`) is only returned when every
/// block is positive definite.
pub fn von_neumann(a: &MatrixMeasure, with_gradient: bool) -> Result<FunctionalValue> {
    let floor = EigenFloor::default();
    let mut terms = Vec::with_capacity(a.len());
    let mut fprime = Some(Vec::new());
    for (k, ak) in a.values().iter().enumerate() {
        let dec = eig(ak)?;
        let s: f64 = dec
            .eigenvalues
            .iter()
            .map(|&l| if l > 0.0 { l * l.ln() } else { 0.0 })
            .sum();
        terms.push(a.grid().weight(k) * s);
        if with_gradient {
            if dec.min() <= floor.threshold(dec.max()) {
                fprime = None;
            } else if let Some(f) = fprime.as_mut() {
                f.push(dec.map(|l| l.ln() + 1.0));
            }
        }
    }
    let gradient = match (with_gradient, fprime) {
        (true, Some(f)) => Some(grad_fr(a, &f)?),
        _ => None,
    };
    Ok(FunctionalValue { value: pairwise_sum(&terms), gradient })
}

/// Returns a perturbed field to the feasible set: eigenvalues below `floor`
/// are raised to it, then (if `normalize`) the mass is rescaled to one.
/// Rescaling can push a clamped eigenvalue back under the floor, so the two
/// steps alternate until both hold (the correction shrinks by a factor of
/// order `floor` per pass). Also returns the smallest eigenvalue.
pub fn retract(grid: &Arc<Grid>, raw: Vec<SymMat>, floor: f64, normalize: bool) -> Result<(MatrixMeasure, f64)> {
    const MAX_PASSES: usize = 8;
    if raw.len() != grid.len() {
        return Err(FrsError::Dimension { expected: grid.len(), found: raw.len() });
    }
    let mut values = raw;
    for _ in 0..MAX_PASSES {
        let mut clamped = false;
        for a in values.iter_mut() {
            let dec = eig(a)?;
            if dec.min() < floor {
                // clamp a little above the floor so rebuilding the matrix cannot
                // push the recomputed spectrum back under it
                let target = floor + 8.0 * f64::EPSILON * dec.dim() as f64 * dec.max().abs();
                *a = dec.map(|l| l.max(target));
                clamped = true;
            }
        }
        if !normalize {
            break;
        }
        let mass = MatrixMeasure::from_parts(Arc::clone(grid), values.clone()).mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(FrsError::Domain(format!("retraction hit non-positive mass {mass}")));
        }
        if mass == 1.0 || (!clamped && (mass - 1.0).abs() <= f64::EPSILON) {
            break;
        }
        let inv = 1.0 / mass;
        values.iter_mut().for_each(|a| *a = a.scaled(inv));
        if !clamped || inv >= 1.0 {
            break;
        }
    }
    let m = MatrixMeasure::from_parts(Arc::clone(grid), values);
    let lmin = m.min_eigenvalue()?;
    Ok((m, lmin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frspace::{make_measure, uniform_identity};

    fn probe() -> MatrixMeasure {
        let g = Arc::new(Grid::single_cell(2));
        make_measure(&g, vec![SymMat::diag(&[1.5, 0.5])], false).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let g = Arc::new(Grid::uniform(3, 2).unwrap());
        assert_eq!(entropy(&uniform_identity(&g), false).unwrap().value, 0.0);

        // ½·½·[(1.5 − ln 1.5 − 1) + (0.5 − ln 0.5 − 1)]
        let full = 0.25 * ((1.5 - 1.5f64.ln() - 1.0) + (0.5 - 0.5f64.ln() - 1.0));
        // reduced form −½ tr ∫ log A, valid at unit mass
        let reduced = -0.25 * (1.5f64.ln() + 0.5f64.ln());
        let e = entropy(&probe(), false).unwrap().value;
        assert!((e - full).abs() < 1e-15);
        assert!((e - reduced).abs() < 1e-15);
        assert!((e - 0.0719205).abs() < 1e-7);
    }

    #[test]
    fn entropy_is_infinite_on_boundary() {
        let g = Arc::new(Grid::single_cell(2));
        let m = make_measure(&g, vec![SymMat::diag(&[2.0, 0.0])], false).unwrap();
        assert!(entropy(&m, true).unwrap().is_infinite());
        assert!(fisher_info(&m, false).unwrap().is_infinite());
        // von Neumann stays finite: 0 log 0 = 0
        assert!((von_neumann(&m, false).unwrap().value - 0.5 * 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn fisher_examples() {
        let g = Arc::new(Grid::uniform(2, 3).unwrap());
        assert_eq!(fisher_info(&uniform_identity(&g), false).unwrap().value, 0.0);
        let f = fisher_info(&probe(), false).unwrap().value;
        assert!((f - 0.25 * (0.5 * (1.0 / 1.5 + 2.0) - 1.0)).abs() < 1e-15);
        assert!((f - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn von_neumann_examples() {
        let g = Arc::new(Grid::uniform(2, 2).unwrap());
        assert_eq!(von_neumann(&uniform_identity(&g), false).unwrap().value, 0.0);

        let g1 = Arc::new(Grid::single_cell(1));
        let e = std::f64::consts::E;
        let m = MatrixMeasure::unnormalized(&g1, vec![SymMat::diag(&[e])]).unwrap();
        assert!((von_neumann(&m, false).unwrap().value - e).abs() < 1e-15);

        let v = von_neumann(&probe(), false).unwrap().value;
        assert!((v - 0.5 * (1.5 * 1.5f64.ln() + 0.5 * 0.5f64.ln())).abs() < 1e-15);
        assert!((v - 0.130812).abs() < 1e-6);
    }

    #[test]
    fn grad_fr_examples() {
        let g = Arc::new(Grid::uniform(2, 2).unwrap());
        let id = uniform_identity(&g);
        let zero = vec![SymMat::zeros(2); 2];
        assert!(grad_fr(&id, &zero).unwrap().iter().all(|m| m.max_abs() == 0.0));

        let a = probe();
        let fp = vec![SymMat::diag(&[1.0 / 6.0, -0.5])];
        let gr = grad_fr(&a, &fp).unwrap();
        assert!((&gr[0] - &SymMat::diag(&[0.25, -0.25])).max_abs() < 1e-15);

        let gc = grad_fr(&a, &[SymMat::scalar(2, 0.7)]).unwrap();
        assert!(gc[0].max_abs() < 1e-15);
    }

    #[test]
    fn entropy_gradient_matches_hand_value() {
        let e = entropy(&probe(), true).unwrap();
        let gr = e.gradient.unwrap();
        assert!((&gr[0] - &SymMat::diag(&[0.25, -0.25])).max_abs() < 1e-15);
    }

    #[test]
    fn project_tangent_examples() {
        let a = probe();
        let t = project_tangent(&a, &[SymMat::diag(&[1.0, 0.0])]).unwrap();
        assert!((&t.potentials()[0] - &SymMat::diag(&[0.25, -0.75])).max_abs() < 1e-15);
        assert!(t.zero_average_residual(&a).abs() < 1e-15);

        let t = project_tangent(&a, &[SymMat::identity(2)]).unwrap();
        assert!(t.potentials()[0].max_abs() < 1e-15);

        let again = project_tangent(&a, t.potentials()).unwrap();
        assert_eq!(again.potentials(), t.potentials());
    }

    #[test]
    fn fr_norm_examples() {
        let a = probe();
        let zero = TangentField::new(&a, vec![SymMat::zeros(2)]).unwrap();
        assert_eq!(fr_norm_sq(&a, &zero).unwrap(), 0.0);

        let g = Arc::new(Grid::single_cell(2));
        let id = uniform_identity(&g);
        let u = TangentField::new(&id, vec![SymMat::diag(&[1.0, -1.0])]).unwrap();
        assert!((fr_norm_sq(&id, &u).unwrap() - 1.0).abs() < 1e-15);

        let xi = entropy(&a, true).unwrap().gradient.unwrap();
        let pot = potentials_of(&a, &xi).unwrap();
        let f = fisher_info(&a, false).unwrap().value;
        assert!((fr_norm_sq(&a, &pot).unwrap() - f).abs() < 1e-14);
    }

    #[test]
    fn fr_norm_rejects_foreign_grid() {
        let a = probe();
        let other = Arc::new(Grid::uniform(2, 2).unwrap());
        let id = uniform_identity(&other);
        let u = TangentField::unconstrained(&id, vec![SymMat::zeros(2); 2]).unwrap();
        assert!(fr_norm_sq(&a, &u).is_err());
    }

    #[test]
    fn tangent_field_requires_zero_average() {
        assert!(TangentField::new(&probe(), vec![SymMat::identity(2)]).is_err());
    }

    #[test]
    fn retract_clamps_and_normalizes() {
        let g = Arc::new(Grid::uniform(2, 2).unwrap());
        let raw = vec![SymMat::diag(&[1.2, -0.01]), SymMat::diag(&[0.9, 0.9])];
        let (m, lmin) = retract(&g, raw, 1e-6, true).unwrap();
        assert!((m.mass() - 1.0).abs() < 1e-15);
        assert_eq!(m.min_eigenvalue().unwrap(), lmin);
        assert!(lmin >= 1e-6);

        // mass above one: the rescale alone would undercut the floor
        let raw = vec![SymMat::diag(&[3.0, -0.5]), SymMat::diag(&[1.0, 1e-3])];
        let (m, lmin) = retract(&g, raw, 1e-3, true).unwrap();
        assert!((m.mass() - 1.0).abs() < 1e-12);
        assert!(lmin >= 1e-3, "{lmin}");
    }
}
