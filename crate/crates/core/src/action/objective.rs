use rayon::prelude::*;

use super::Path;
use crate::error::Result;
use crate::frspace::MatrixMeasure;
use crate::numeric::pairwise_sum;
use crate::symmat::{eig, frobenius_unchecked, lyapunov_solve_spectral, SpectralDecomp, SymMat};

/// Objective value, its split, and the Euclidean (Frobenius) gradient with
/// respect to the interior knots, indexed `[j − 1][cell]`.
#[derive(Clone, Debug)]
pub struct ObjectiveEval {
    pub value: f64,
    pub action: f64,
    pub fisher: f64,
    pub gradient: Option<Vec<Vec<SymMat>>>,
}

impl ObjectiveEval {
    fn infinite() -> Self {
        Self { value: f64::INFINITY, action: f64::INFINITY, fisher: f64::INFINITY, gradient: None }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

struct IntervalOut {
    terms: Vec<f64>,
    left: Vec<SymMat>,
    right: Vec<SymMat>,
}

/// Only round-off level spectra count as singular. Feasible iterates sit at or
/// above `eig_floor`, which may be far below any relative threshold.
fn singular(dec: &SpectralDecomp) -> bool {
    dec.min() <= 16.0 * f64::EPSILON * dec.dim() as f64 * dec.max().abs()
}

/// Cost of one interval, `Δt Σ_k w_k ⟨S_k, U_k⟩` with `S = (A_{j+1} − A_j)/Δt`,
/// `M = (A_j + A_{j+1})/2` and `MU + UM = 2S`.
///
/// The derivative is `2U − (Δt/2)U²` towards `A_{j+1}` and `−2U − (Δt/2)U²`
/// towards `A_j` (weighted by `w_k`). `None` signals a singular midpoint.
fn interval(a: &MatrixMeasure, b: &MatrixMeasure, dt: f64, with_grad: bool) -> Result<Option<IntervalOut>> {
    let grid = a.grid();
    let k_cells = a.len();
    let mut out = IntervalOut {
        terms: Vec::with_capacity(k_cells),
        left: Vec::with_capacity(if with_grad { k_cells } else { 0 }),
        right: Vec::with_capacity(if with_grad { k_cells } else { 0 }),
    };
    for (k, (ak, bk)) in a.values().iter().zip(b.values()).enumerate() {
        let mid = (ak + bk).scaled(0.5);
        let vel = (bk - ak).scaled(1.0 / dt);
        let dec = eig(&mid)?;
        if singular(&dec) {
            return Ok(None);
        }
        let u = lyapunov_solve_spectral(&dec, &vel);
        let w = grid.weight(k);
        out.terms.push(dt * w * frobenius_unchecked(&vel, &u));
        if with_grad {
            let u2 = u.square();
            let mut right = u.scaled(2.0 * w);
            right.axpy(-0.5 * dt * w, &u2);
            let mut left = u.scaled(-2.0 * w);
            left.axpy(-0.5 * dt * w, &u2);
            out.left.push(left);
            out.right.push(right);
        }
    }
    Ok(Some(out))
}

/// `¼(Σ_k w_k tr A_k⁻¹ − 1)` and its Euclidean derivative `−¼ w_k A_k⁻²`.
fn knot_fisher(a: &MatrixMeasure, with_grad: bool) -> Result<Option<(f64, Vec<SymMat>)>> {
    let mut terms = Vec::with_capacity(a.len());
    let mut grad = Vec::new();
    for (k, ak) in a.values().iter().enumerate() {
        let dec = eig(ak)?;
        if singular(&dec) {
            return Ok(None);
        }
        let w = a.grid().weight(k);
        terms.push(w * dec.eigenvalues.iter().map(|l| 1.0 / l).sum::<f64>());
        if with_grad {
            grad.push(dec.map(|l| -0.25 * w / (l * l)));
        }
    }
    Ok(Some((0.25 * (pairwise_sum(&terms) - 1.0), grad)))
}

/// Evaluates `action + ε²·fisher` on the knot sequence `knots[0..=n]`.
/// With `epsilon == 0` the Fisher term is skipped entirely (reported as 0).
pub(crate) fn evaluate(knots: &[&MatrixMeasure], epsilon: f64, with_grad: bool) -> Result<ObjectiveEval> {
    let n = knots.len() - 1;
    let dt = 1.0 / n as f64;
    let intervals = (0..n)
        .into_par_iter()
        .with_min_len(4)
        .map(|j| interval(knots[j], knots[j + 1], dt, with_grad))
        .collect::<Result<Vec<_>>>()?;
    let Some(intervals) = intervals.into_iter().collect::<Option<Vec<_>>>() else {
        return Ok(ObjectiveEval::infinite());
    };
    let terms: Vec<f64> = intervals.iter().flat_map(|iv| iv.terms.iter().copied()).collect();
    let action = pairwise_sum(&terms);

    let mut gradient = if with_grad {
        Some(
            (1..n)
                .map(|j| {
                    intervals[j - 1]
                        .right
                        .iter()
                        .zip(&intervals[j].left)
                        .map(|(r, l)| r + l)
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    if epsilon == 0.0 {
        return Ok(ObjectiveEval { value: action, action, fisher: 0.0, gradient });
    }

    let per_knot = (0..n + 1)
        .into_par_iter()
        .with_min_len(4)
        .map(|j| knot_fisher(knots[j], with_grad && j > 0 && j < n))
        .collect::<Result<Vec<_>>>()?;
    let Some(per_knot) = per_knot.into_iter().collect::<Option<Vec<_>>>() else {
        return Ok(ObjectiveEval::infinite());
    };
    let fisher = trapezoid(&per_knot.iter().map(|(v, _)| *v).collect::<Vec<_>>(), dt);
    if let Some(g) = gradient.as_mut() {
        let scale = epsilon * epsilon * dt;
        for (j, gj) in g.iter_mut().enumerate() {
            for (gjk, fk) in gj.iter_mut().zip(&per_knot[j + 1].1) {
                gjk.axpy(scale, fk);
            }
        }
    }
    Ok(ObjectiveEval { value: action + epsilon * epsilon * fisher, action, fisher, gradient })
}

fn trapezoid(values: &[f64], dt: f64) -> f64 {
    let n = values.len() - 1;
    let terms: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| if j == 0 || j == n { 0.5 * dt * v } else { dt * v })
        .collect();
    pairwise_sum(&terms)
}

fn knot_refs(path: &Path) -> Vec<&MatrixMeasure> {
    path.knots().iter().collect()
}

/// Full objective `action + ε²·∫ℱ` of a path, with the Fisher part always
/// reported, and optionally the gradient w.r.t. the interior knots.
pub fn objective(path: &Path, epsilon: f64, with_gradient: bool) -> Result<ObjectiveEval> {
    let knots = knot_refs(path);
    let mut ev = evaluate(&knots, epsilon, with_gradient)?;
    if epsilon == 0.0 && ev.is_finite() {
        ev.fisher = path_fisher(path)?;
    }
    Ok(ev)
}

/// Discrete kinetic action `Σ_j Δt Σ_k w_k ⟨M U, U⟩`; `+∞` on a singular midpoint.
pub fn path_action(path: &Path) -> Result<f64> {
    Ok(evaluate(&knot_refs(path), 0.0, false)?.action)
}

/// Trapezoidal time integral of the Fisher information; `+∞` on a singular knot.
pub fn path_fisher(path: &Path) -> Result<f64> {
    let mut values = Vec::with_capacity(path.knots().len());
    for k in path.knots() {
        match knot_fisher(k, false)? {
            Some((v, _)) => values.push(v),
            None => return Ok(f64::INFINITY),
        }
    }
    Ok(trapezoid(&values, 1.0 / path.n_steps() as f64))
}

/// Action contribution of each time interval.
pub fn interval_actions(path: &Path) -> Result<Vec<f64>> {
    let dt = 1.0 / path.n_steps() as f64;
    path.knots()
        .windows(2)
        .map(|w| {
            Ok(match interval(&w[0], &w[1], dt, false)? {
                Some(iv) => pairwise_sum(&iv.terms),
                None => f64::INFINITY,
            })
        })
        .collect()
}
