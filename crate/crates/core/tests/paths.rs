use std::sync::Arc;

use frs_core::action::*;
use frs_core::bures::{bures_dynamic_sq, bures_sq};
use frs_core::frspace::{make_measure, uniform_identity, Grid, MatrixMeasure};
use frs_core::random::{generate_endpoints, random_spd, rng_from_seed, EndpointGenerator};
use frs_core::symmat::frobenius;
use frs_core::SymMat;

fn scalar_measure(grid: &Arc<Grid>, values: &[f64]) -> MatrixMeasure {
    make_measure(grid, values.iter().map(|v| SymMat::scalar(1, *v)).collect(), true).unwrap()
}

/// `4 arccos²(Σ √(p q))` on the cell masses.
fn scalar_fr_sq(a: &MatrixMeasure, b: &MatrixMeasure) -> f64 {
    let w = a.grid().weights();
    let bc: f64 = (0..a.len())
        .map(|k| (w[k] * a.values()[k].trace() * w[k] * b.values()[k].trace()).sqrt())
        .sum();
    4.0 * bc.min(1.0).acos().powi(2)
}

#[test]
fn action_gradient_matches_central_differences() {
    let grid = Arc::new(Grid::uniform(2, 2).unwrap());
    let mut rng = rng_from_seed(3);
    let knots: Vec<MatrixMeasure> = (0..4)
        .map(|_| MatrixMeasure::unnormalized(&grid, (0..2).map(|_| random_spd(&mut rng, 2, 0.5, 3.0)).collect()).unwrap())
        .collect();
    let path = Path::new(knots.clone(), PathMode::Hellinger).unwrap();
    for eps in [0.0, 0.3] {
        let ev = objective(&path, eps, true).unwrap();
        let grad = ev.gradient.unwrap();
        let h = 1e-5;
        for j in 1..3 {
            for k in 0..2 {
                for (p, q) in [(0, 0), (0, 1), (1, 1)] {
                    let mut dir = SymMat::zeros(2);
                    dir = &dir + &SymMat::from_fn(2, |i, l| if (i, l) == (p, q) || (i, l) == (q, p) { 1.0 } else { 0.0 });
                    let eval_at = |s: f64| {
                        let mut ks = knots.clone();
                        let mut vals = ks[j].values().to_vec();
                        vals[k].axpy(s, &dir);
                        ks[j] = MatrixMeasure::unnormalized(&grid, vals).unwrap();
                        objective(&Path::new(ks, PathMode::Hellinger).unwrap(), eps, false).unwrap().value
                    };
                    let fd = (eval_at(h) - eval_at(-h)) / (2.0 * h);
                    let an = frobenius(&grad[j - 1][k], &dir).unwrap();
                    assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "eps {eps} j {j} k {k} ({p},{q}): {fd} vs {an}");
                }
            }
        }
    }
}

#[test]
fn scalar_fisher_rao_geodesic_example() {
    // masses (0.2, 0.8) → (0.8, 0.2): 4 arccos²(0.8) = 1.656375
    let grid = Arc::new(Grid::uniform(2, 1).unwrap());
    let a0 = scalar_measure(&grid, &[0.4, 1.6]);
    let a1 = scalar_measure(&grid, &[1.6, 0.4]);
    let oracle = scalar_fr_sq(&a0, &a1);
    assert!((oracle - 1.656375).abs() < 1e-6);
    let r = solve_geodesic(&a0, &a1, &SolverConfig { n_steps: 64, ..Default::default() }).unwrap();
    assert!(r.converged);
    assert!((r.value - oracle).abs() / oracle <= 5e-3, "{} vs {oracle}", r.value);
    assert!((r.diagnostics.max_mass_drift) <= 1e-9);
}

#[test]
fn hellinger_geodesic_example() {
    let a = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let v = bures_dynamic_sq(&a, &SymMat::identity(2), 32, &SolverConfig::default()).unwrap() / 4.0;
    let expected = bures_sq(&a, &SymMat::identity(2)).unwrap();
    assert!((expected - 0.535898).abs() < 1e-6);
    assert!((v - expected).abs() / expected <= 1e-3);
}

#[test]
fn geodesic_has_constant_speed_and_is_symmetric() {
    let grid = Arc::new(Grid::uniform(3, 2).unwrap());
    let (a0, a1) = generate_endpoints(&grid, &EndpointGenerator { seed: 9, eigen_range: [0.3, 4.0] }).unwrap();
    let cfg = SolverConfig { n_steps: 32, ..Default::default() };
    let fwd = solve_geodesic(&a0, &a1, &cfg).unwrap();
    let bwd = solve_geodesic(&a1, &a0, &cfg).unwrap();
    assert!(fwd.converged && bwd.converged);
    assert!((fwd.value - bwd.value).abs() <= 1e-8 * fwd.value);
    assert!(fwd.path.max_distance(&bwd.path.reversed()) <= 1e-5);

    let speeds = interval_actions(&fwd.path).unwrap();
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let spread = speeds.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max) / mean;
    assert!(spread <= 1e-2, "speed spread {spread}");
}

#[test]
fn schrodinger_value_decreases_with_temperature() {
    let grid = Arc::new(Grid::uniform(4, 2).unwrap());
    let (a0, a1) = generate_endpoints(&grid, &EndpointGenerator { seed: 1, eigen_range: [0.3, 3.0] }).unwrap();
    let sweep = gamma_sweep(&a0, &a1, &[0.5, 0.2, 0.1, 0.05], &SolverConfig::default()).unwrap();
    assert!(sweep.all_converged() && sweep.geodesic_converged);
    for w in sweep.rows.windows(2) {
        assert!(w[1].value < w[0].value);
    }
    let last = sweep.rows.last().unwrap();
    assert!(last.value >= sweep.geodesic_value);
    assert!(last.gap <= 0.25 * sweep.rows[0].gap);
}

#[test]
fn epsilon_zero_matches_geodesic() {
    let grid = Arc::new(Grid::uniform(2, 2).unwrap());
    let (a0, a1) = generate_endpoints(&grid, &EndpointGenerator { seed: 4, eigen_range: [0.5, 2.0] }).unwrap();
    let cfg = SolverConfig { n_steps: 16, ..Default::default() };
    let g = solve_geodesic(&a0, &a1, &cfg).unwrap();
    let s = solve_schrodinger(&a0, &a1, &cfg).unwrap();
    assert_eq!(g.value, s.value);
}

#[test]
fn identity_to_identity_is_trivial() {
    let grid = Arc::new(Grid::uniform(3, 2).unwrap());
    let id = uniform_identity(&grid);
    let r = solve_geodesic(&id, &id, &SolverConfig { n_steps: 8, ..Default::default() }).unwrap();
    assert!(r.converged);
    assert!(r.value.abs() < 1e-20);
}

#[test]
fn feasibility_is_maintained_along_iterates() {
    let grid = Arc::new(Grid::uniform(4, 2).unwrap());
    let (a0, a1) = generate_endpoints(&grid, &EndpointGenerator { seed: 2, eigen_range: [0.2, 5.0] }).unwrap();
    let cfg = SolverConfig { init_jitter: 0.05, seed: 8, ..Default::default() };
    let r = solve_schrodinger(&a0, &a1, &SolverConfig { epsilon: 0.2, ..cfg.clone() }).unwrap();
    assert!(r.converged);
    assert!(r.diagnostics.max_mass_drift <= 1e-9);
    assert!(r.diagnostics.min_eigenvalue >= cfg.eig_floor);
    assert!(r.diagnostics.max_zero_average_residual <= 1e-9);
}

#[test]
fn convexity_check_is_small_on_scalar_geodesic() {
    let grid = Arc::new(Grid::uniform(2, 1).unwrap());
    let a0 = scalar_measure(&grid, &[0.4, 1.6]);
    let a1 = scalar_measure(&grid, &[1.6, 0.4]);
    let r = solve_geodesic(&a0, &a1, &SolverConfig { n_steps: 64, ..Default::default() }).unwrap();
    let viol = geodesic_convexity_check(&r).unwrap();
    assert!((0.0..=1e-2).contains(&viol), "{viol}");
}
