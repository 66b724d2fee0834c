//! Seeded generators for random SPD blocks and endpoint measures.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{FrsError, Result};
use crate::frspace::{make_measure, Grid, MatrixMeasure};
use crate::symmat::SymMat;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
/// Returned row-major.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let mut ok = true;
        for k in 0..dim {
            for j in 0..k {
                let proj: f64 = (0..dim).map(|i| cols[k][i] * cols[j][i]).sum();
                for i in 0..dim {
                    cols[k][i] -= proj * cols[j][i];
                }
            }
            let norm = cols[k].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[k].iter_mut().for_each(|v| *v /= norm);
        }
        if ok {
            let mut q = vec![0.0; dim * dim];
            for (k, col) in cols.iter().enumerate() {
                for i in 0..dim {
                    q[i * dim + k] = col[i];
                }
            }
            return q;
        }
    }
}

/// `Q diag(λ) Qᵀ` with `λ` uniform in `[lo, hi]` and `Q` Haar-random.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> SymMat {
    let lambdas: Vec<f64> = (0..dim)
        .map(|_| if hi > lo { rng.gen_range(lo..=hi) } else { lo })
        .collect();
    let q = random_orthogonal(rng, dim);
    SymMat::from_fn(dim, |i, j| (0..dim).map(|k| q[i * dim + k] * lambdas[k] * q[j * dim + k]).sum())
}

/// Random symmetric matrix with standard normal entries.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SymMat {
    let raw: Vec<f64> = (0..dim * dim).map(|_| rng.sample(StandardNormal)).collect();
    SymMat::from_fn(dim, |i, j| raw[i * dim + j])
}

/// Endpoint generator: seeded rotations of seeded diagonal blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointGenerator {
    pub seed: u64,
    /// Eigenvalue range `[lo, hi]`, before mass normalization.
    pub eigen_range: [f64; 2],
}

/// Two mass-normalized measures on `grid`, deterministic per seed.
pub fn generate_endpoints(grid: &Arc<Grid>, spec: &EndpointGenerator) -> Result<(MatrixMeasure, MatrixMeasure)> {
    let [lo, hi] = spec.eigen_range;
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
        return Err(FrsError::Invalid(format!(
            "eigenvalue range [{lo}, {hi}] must be a nonempty subset of (0, inf)"
        )));
    }
    let mut rng = rng_from_seed(spec.seed);
    let d = grid.dim();
    let mut draw = || -> Vec<SymMat> { (0..grid.len()).map(|_| random_spd(&mut rng, d, lo, hi)).collect() };
    let a0 = draw();
    let a1 = draw();
    Ok((make_measure(grid, a0, true)?, make_measure(grid, a1, true)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_is_orthogonal() {
        let mut rng = rng_from_seed(7);
        for d in 1..6 {
            let q = random_orthogonal(&mut rng, d);
            for i in 0..d {
                for j in 0..d {
                    let dot: f64 = (0..d).map(|k| q[k * d + i] * q[k * d + j]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - target).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn endpoints_are_deterministic_and_normalized() {
        let grid = Arc::new(Grid::uniform(4, 2).unwrap());
        let spec = EndpointGenerator { seed: 42, eigen_range: [0.5, 2.0] };
        let (a, b) = generate_endpoints(&grid, &spec).unwrap();
        let (c, d) = generate_endpoints(&grid, &spec).unwrap();
        assert_eq!(a, c);
        assert_eq!(b, d);
        assert!((a.mass() - 1.0).abs() < 1e-12);
        assert!((b.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_range_gives_uniform_identity() {
        let grid = Arc::new(Grid::uniform(3, 2).unwrap());
        let spec = EndpointGenerator { seed: 1, eigen_range: [1.0, 1.0] };
        let (a, _) = generate_endpoints(&grid, &spec).unwrap();
        for v in a.values() {
            assert!((v - &SymMat::identity(2)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_range() {
        let grid = Arc::new(Grid::uniform(2, 2).unwrap());
        for r in [[0.0, 1.0], [2.0, 1.0], [-1.0, 1.0]] {
            let spec = EndpointGenerator { seed: 0, eigen_range: r };
            assert!(generate_endpoints(&grid, &spec).is_err());
        }
    }
}
