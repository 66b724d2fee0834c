//! Limited-memory quasi-Newton descent over the interior knots.
//!
//! The initial inverse-Hessian model is the Fisher-Rao metric of each knot:
//! a Euclidean gradient block `G_k` becomes the potential `G_k / w_k`, is
//! projected onto the zero-average subspace (constrained mode), and is mapped
//! to the tangent vector `(A_k U_k)^sym`. Every trial point is retracted
//! (eigenvalue clamp, then mass renormalization) before evaluation, and the
//! step is accepted by an Armijo test with parameter ¼ and halving.

use std::collections::VecDeque;
use std::sync::Arc;

use super::objective::{evaluate, path_fisher, ObjectiveEval};
use super::{Path, SolveDiagnostics, SolveReport, SolverConfig};
use crate::error::{FrsError, Result};
use crate::frspace::{project_tangent, retract, Grid, MatrixMeasure};
use crate::random::{random_symmetric, rng_from_seed};
use crate::symmat::SymMat;

const ARMIJO: f64 = 0.25;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

/// Fisher-Rao geodesic (ε forced to 0).
pub fn solve_geodesic(a0: &MatrixMeasure, a1: &MatrixMeasure, cfg: &SolverConfig) -> Result<SolveReport> {
    let cfg = SolverConfig { epsilon: 0.0, ..cfg.clone() };
    solve_path(a0, a1, &cfg, None)
}

/// Schrödinger problem at temperature `cfg.epsilon`.
pub fn solve_schrodinger(a0: &MatrixMeasure, a1: &MatrixMeasure, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_path(a0, a1, cfg, None)
}

/// Minimizes `action + ε²·∫ℱ` between fixed endpoints, starting from `init`
/// when given (warm start) and from the linear interpolation otherwise.
pub fn solve_path(a0: &MatrixMeasure, a1: &MatrixMeasure, cfg: &SolverConfig, init: Option<&Path>) -> Result<SolveReport> {
    cfg.validate()?;
    if **a0.grid() != **a1.grid() {
        return Err(FrsError::Domain("endpoints live on different grids".into()));
    }
    let constrained = cfg.mode.constrained();
    if constrained {
        for (name, a) in [("A0", a0), ("A1", a1)] {
            if !a.is_normalized() {
                return Err(FrsError::Domain(format!("endpoint {name} has mass {} (must be 1)", a.mass())));
            }
        }
    }
    if cfg.epsilon > 0.0 {
        for (name, a) in [("A0", a0), ("A1", a1)] {
            let lmin = a.min_eigenvalue()?;
            if lmin <= 0.0 {
                return Err(FrsError::Domain(format!(
                    "endpoint {name} must be positive definite for ε > 0 (min eigenvalue {lmin:.3e})"
                )));
            }
        }
    }

    let start = match init {
        Some(p) => {
            if p.n_steps() != cfg.n_steps || p.mode() != cfg.mode {
                return Err(FrsError::Invalid("warm-start path does not match the solver configuration".into()));
            }
            if p.start() != a0 || p.end() != a1 {
                return Err(FrsError::Invalid("warm-start path has different endpoints".into()));
            }
            p.clone()
        }
        None => Path::linear(a0, a1, cfg.n_steps, cfg.mode, cfg.eig_floor)?,
    };

    let mut solver = Solver::new(a0, a1, cfg);
    let mut interior: Vec<MatrixMeasure> = start.knots()[1..cfg.n_steps].to_vec();
    if cfg.init_jitter > 0.0 {
        interior = solver.jitter(interior)?;
    }
    solver.run(interior)
}

struct Memory {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

struct Iterate {
    interior: Vec<MatrixMeasure>,
    x: Vec<f64>,
    eval: ObjectiveEval,
    g: Vec<f64>,
}

struct Solver<'a> {
    a0: &'a MatrixMeasure,
    a1: &'a MatrixMeasure,
    grid: Arc<Grid>,
    cfg: &'a SolverConfig,
    dt: f64,
    diag: SolveDiagnostics,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn flatten(field: &[Vec<SymMat>]) -> Vec<f64> {
    field.iter().flat_map(|knot| knot.iter().flat_map(|m| m.as_slice().iter().copied())).collect()
}

fn flatten_measures(knots: &[MatrixMeasure]) -> Vec<f64> {
    knots
        .iter()
        .flat_map(|knot| knot.values().iter().flat_map(|m| m.as_slice().iter().copied()))
        .collect()
}

impl<'a> Solver<'a> {
    fn new(a0: &'a MatrixMeasure, a1: &'a MatrixMeasure, cfg: &'a SolverConfig) -> Self {
        Self {
            a0,
            a1,
            grid: Arc::clone(a0.grid()),
            cfg,
            dt: 1.0 / cfg.n_steps as f64,
            diag: SolveDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() },
        }
    }

    fn block(&self) -> usize {
        self.grid.dim() * self.grid.dim()
    }

    fn unflatten(&self, x: &[f64]) -> Result<Vec<Vec<SymMat>>> {
        let d = self.grid.dim();
        let per_knot = self.grid.len() * self.block();
        x.chunks(per_knot)
            .map(|knot| knot.chunks(self.block()).map(|m| SymMat::from_row_major(d, m)).collect())
            .collect()
    }

    fn jitter(&self, interior: Vec<MatrixMeasure>) -> Result<Vec<MatrixMeasure>> {
        let mut rng = rng_from_seed(self.cfg.seed);
        interior
            .into_iter()
            .map(|knot| {
                let raw = knot
                    .values()
                    .iter()
                    .map(|a| {
                        let scale = self.cfg.init_jitter * a.trace() / a.dim() as f64;
                        let mut out = a.clone();
                        out.axpy(scale, &random_symmetric(&mut rng, a.dim()));
                        out
                    })
                    .collect();
                Ok(retract(&self.grid, raw, self.cfg.eig_floor, self.cfg.mode.constrained())?.0)
            })
            .collect()
    }

    fn eval(&mut self, interior: &[MatrixMeasure]) -> Result<ObjectiveEval> {
        self.diag.evaluations += 1;
        let mut knots: Vec<&MatrixMeasure> = Vec::with_capacity(interior.len() + 2);
        knots.push(self.a0);
        knots.extend(interior.iter());
        knots.push(self.a1);
        evaluate(&knots, self.cfg.epsilon, true)
    }

    /// Removes the component of `g` along the mass normal `(w_k Id)_k` of each
    /// knot. Directions tangent to the constraint see the same slope, but the
    /// large multiplier part no longer cancels inside dot products.
    fn strip_normal(&self, g: &mut [f64]) {
        let d = self.grid.dim();
        let per_knot = self.grid.len() * self.block();
        let w = self.grid.weights();
        let nn: f64 = w.iter().map(|wk| wk * wk * d as f64).sum();
        for knot in g.chunks_mut(per_knot) {
            let gn: f64 = knot
                .chunks(self.block())
                .zip(w)
                .map(|(m, wk)| wk * (0..d).map(|i| m[i * d + i]).sum::<f64>())
                .sum();
            let mu = gn / nn;
            for (m, wk) in knot.chunks_mut(self.block()).zip(w) {
                for i in 0..d {
                    m[i * d + i] -= mu * wk;
                }
            }
        }
    }

    fn iterate(&mut self, interior: Vec<MatrixMeasure>) -> Result<Iterate> {
        let eval = self.eval(&interior)?;
        let mut g = eval.gradient.as_deref().map(flatten).unwrap_or_default();
        if self.cfg.mode.constrained() {
            self.strip_normal(&mut g);
        }
        Ok(Iterate { x: flatten_measures(&interior), interior, eval, g })
    }

    /// Metric preconditioner: Euclidean gradient blocks to tangent vectors
    /// (scaled by `1/Δt` so the norm is the time-continuous one).
    fn precondition(&mut self, interior: &[MatrixMeasure], q: &[f64]) -> Result<Vec<f64>> {
        let blocks = self.unflatten(q)?;
        let mut out = Vec::with_capacity(q.len());
        for (knot, qj) in interior.iter().zip(blocks) {
            let raw: Vec<SymMat> = qj
                .iter()
                .enumerate()
                .map(|(k, g)| g.scaled(1.0 / self.grid.weight(k)))
                .collect();
            let potentials = if self.cfg.mode.constrained() {
                let field = project_tangent(knot, &raw)?;
                let scale: f64 = knot
                    .values()
                    .iter()
                    .zip(field.potentials())
                    .enumerate()
                    .map(|(k, (a, u))| self.grid.weight(k) * a.frobenius_norm() * u.frobenius_norm())
                    .sum();
                let r = field.zero_average_residual(knot).abs() / scale.max(1.0);
                self.diag.max_zero_average_residual = self.diag.max_zero_average_residual.max(r);
                field.into_potentials()
            } else {
                raw
            };
            for (a, u) in knot.values().iter().zip(&potentials) {
                out.extend(a.jordan(u).scaled(1.0 / self.dt).as_slice().iter().copied());
            }
        }
        Ok(out)
    }

    fn direction(&mut self, it: &Iterate, memory: &VecDeque<Memory>) -> Result<Vec<f64>> {
        let mut q = it.g.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for m in memory.iter().rev() {
            let a = m.rho * dot(&m.s, &q);
            q.iter_mut().zip(&m.y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        alphas.reverse();
        let mut r = self.precondition(&it.interior, &q)?;
        if let Some(last) = memory.back() {
            let py = self.precondition(&it.interior, &last.y)?;
            let ypy = dot(&last.y, &py);
            if ypy > 0.0 {
                let gamma = 1.0 / (last.rho * ypy);
                r.iter_mut().for_each(|v| *v *= gamma);
            }
        }
        for (m, a) in memory.iter().zip(alphas) {
            let b = m.rho * dot(&m.y, &r);
            r.iter_mut().zip(&m.s).for_each(|(ri, si)| *ri += (a - b) * si);
        }
        r.iter_mut().for_each(|v| *v = -*v);
        Ok(r)
    }

    fn trial(&mut self, it: &Iterate, d: &[f64], step: f64) -> Result<Option<(Iterate, f64, f64)>> {
        let x: Vec<f64> = it.x.iter().zip(d).map(|(xi, di)| xi + step * di).collect();
        let blocks = self.unflatten(&x)?;
        let mut interior = Vec::with_capacity(blocks.len());
        let mut lmin = f64::INFINITY;
        let mut drift: f64 = 0.0;
        for raw in blocks {
            let (m, l) = retract(&self.grid, raw, self.cfg.eig_floor, self.cfg.mode.constrained())?;
            lmin = lmin.min(l);
            if self.cfg.mode.constrained() {
                drift = drift.max((m.mass() - 1.0).abs());
            }
            interior.push(m);
        }
        let next = self.iterate(interior)?;
        if next.eval.value.is_finite() {
            Ok(Some((next, lmin, drift)))
        } else {
            Ok(None)
        }
    }

    fn line_search(&mut self, it: &Iterate, d: &[f64], slope: f64, first_step: f64) -> Result<Option<Iterate>> {
        let f = it.eval.value;
        let mut step = first_step;
        for _ in 0..MAX_BACKTRACKS {
            if let Some((next, lmin, drift)) = self.trial(it, d, step)? {
                let ft = next.eval.value;
                let armijo = ft <= f + ARMIJO * step * slope;
                // approximate Wolfe test, for when f has hit its round-off floor
                let dslope = dot(&next.g, d);
                let approx = ft <= f + 1e-12 * f.abs() && dslope >= 0.9 * slope && dslope <= -0.8 * slope;
                if armijo || approx {
                    self.diag.min_eigenvalue = self.diag.min_eigenvalue.min(lmin);
                    self.diag.max_mass_drift = self.diag.max_mass_drift.max(drift);
                    self.diag.accepted_iterates += 1;
                    return Ok(Some(next));
                }
            }
            step *= SHRINK;
        }
        Ok(None)
    }

    fn run(&mut self, interior: Vec<MatrixMeasure>) -> Result<SolveReport> {
        if self.cfg.mode.constrained() {
            for k in &interior {
                self.diag.max_mass_drift = self.diag.max_mass_drift.max((k.mass() - 1.0).abs());
            }
        }
        for k in &interior {
            self.diag.min_eigenvalue = self.diag.min_eigenvalue.min(k.min_eigenvalue()?);
        }
        let mut it = self.iterate(interior)?;
        if !it.eval.value.is_finite() {
            return Err(FrsError::Domain("initial path has a singular midpoint".into()));
        }

        let mut memory: VecDeque<Memory> = VecDeque::with_capacity(self.cfg.memory);
        let mut iterations = 0;
        let mut converged = false;
        let mut grad_norm;
        loop {
            let pg = self.precondition(&it.interior, &it.g)?;
            grad_norm = dot(&it.g, &pg).max(0.0).sqrt();
            if grad_norm <= self.cfg.grad_tol || it.g.is_empty() {
                converged = true;
                break;
            }
            if iterations >= self.cfg.max_iter {
                break;
            }
            iterations += 1;

            let mut d = if memory.is_empty() { pg.iter().map(|v| -v).collect() } else { self.direction(&it, &memory)? };
            let mut slope = dot(&it.g, &d);
            if !(slope < 0.0) {
                memory.clear();
                d = pg.iter().map(|v| -v).collect();
                slope = dot(&it.g, &d);
            }
            let first_step = if memory.is_empty() {
                let dmax = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                (self.cfg.step_init / dmax).min(1.0)
            } else {
                1.0
            };

            match self.line_search(&it, &d, slope, first_step)? {
                Some(next) => {
                    let s: Vec<f64> = next.x.iter().zip(&it.x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = next.g.iter().zip(&it.g).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                        if memory.len() == self.cfg.memory {
                            memory.pop_front();
                        }
                        memory.push_back(Memory { s, y, rho: 1.0 / sy });
                    }
                    it = next;
                }
                None if !memory.is_empty() => memory.clear(),
                None => break,
            }
        }

        let mut knots = Vec::with_capacity(self.cfg.n_steps + 1);
        knots.push(self.a0.clone());
        knots.extend(it.interior);
        knots.push(self.a1.clone());
        let path = Path::from_parts(Arc::clone(&self.grid), knots, self.cfg.mode);
        let fisher_part = if self.cfg.epsilon == 0.0 { path_fisher(&path)? } else { it.eval.fisher };
        if self.diag.min_eigenvalue == f64::INFINITY {
            self.diag.min_eigenvalue = 0.0;
        }
        Ok(SolveReport {
            value: it.eval.value,
            action_part: it.eval.action,
            fisher_part,
            epsilon: self.cfg.epsilon,
            iterations,
            final_grad_norm: grad_norm,
            converged,
            diagnostics: self.diag.clone(),
            path,
        })
    }
}
