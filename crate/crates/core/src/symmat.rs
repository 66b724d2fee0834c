//! Dense real symmetric matrices.
//!
//! Every pointwise object of the geometry (densities `A`, potentials `U`,
//! tangent vectors `ξ`) is a small symmetric block. This module provides the
//! storage type, a cyclic Jacobi eigensolver, spectral matrix functions, the
//! Frobenius pairing, PSD classification and the Lyapunov solve that inverts
//! the map `U ↦ (AU + UA)/2`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FrsError, Result};

const MAX_SWEEPS: usize = 60;

/// General dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(FrsError::Invalid("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(FrsError::NotSquare { rows: dim, row, cols: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

/// Symmetric part `(M + Mᵀ)/2`. Exact symmetry of the result is guaranteed.
pub fn sym(m: &Matrix) -> SymMat {
    let n = m.dim;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = m.get(i, i);
        for j in (i + 1)..n {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    SymMat { dim: n, data }
}

/// Symmetric part of a row-major array; errors on non-square input.
pub fn sym_rows(rows: &[Vec<f64>]) -> Result<SymMat> {
    Matrix::from_rows(rows).map(|m| sym(&m))
}

/// Dense real symmetric matrix with exact `a[i][j] == a[j][i]`.
#[derive(Clone, PartialEq)]
pub struct SymMat {
    dim: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = c;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Symmetrizes the given rows; errors when they are not square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        sym_rows(rows)
    }

    /// Builds from a row-major buffer of length `dim²`, symmetrizing it.
    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(FrsError::Dimension { expected: dim * dim, found: data.len() });
        }
        Ok(sym(&Matrix { dim, data: data.to_vec() }))
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        sym(&m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Row-major entries (length `dim²`).
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix { dim: self.dim, data: self.data.clone() }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> SymMat {
        SymMat { dim: self.dim, data: self.data.iter().map(|v| c * v).collect() }
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &SymMat) {
        assert_eq!(self.dim, x.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&x.data) {
            *a += alpha * b;
        }
    }

    /// Adds `c` to every diagonal entry.
    pub fn shift_diag(&self, c: f64) -> SymMat {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += c;
        }
        out
    }

    /// General product `self · other`.
    pub fn matmul(&self, other: &SymMat) -> Matrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Jordan product `(self·other + other·self)/2`.
    pub fn jordan(&self, other: &SymMat) -> SymMat {
        sym(&self.matmul(other))
    }

    /// `self²`, symmetric by construction.
    pub fn square(&self) -> SymMat {
        sym(&self.matmul(self))
    }

    /// Congruence `B · self · B` for symmetric `B`.
    pub fn congruence(&self, b: &SymMat) -> SymMat {
        let bs = b.matmul(self);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = bs.data[i * n + k];
                for j in 0..n {
                    out.data[i * n + j] += a * b.data[k * n + j];
                }
            }
        }
        sym(&out)
    }

    pub fn eig(&self) -> Result<SpectralDecomp> {
        eig(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eig(self)?.min())
    }

    /// `Q f(Λ) Qᵀ` with the floor policy applied to the spectrum first.
    pub fn spectral_fn(&self, f: impl Fn(f64) -> f64, floor: EigenFloor) -> Result<SymMat> {
        spectral_fn(self, f, floor)
    }

    /// Square root of a PSD matrix. Eigenvalues within round-off of zero
    /// (below `4·d·ε·λmax`) are treated as exact zeros, since their square
    /// roots would otherwise inject `O(√ε)` noise.
    pub fn sqrt_psd(&self) -> Result<SymMat> {
        let dec = eig(self)?;
        let cut = 4.0 * self.dim as f64 * f64::EPSILON * dec.max().max(0.0);
        Ok(dec.map(|l| if l <= cut { 0.0 } else { l.sqrt() }))
    }

    /// Matrix logarithm with the default strict floor.
    pub fn log(&self) -> Result<SymMat> {
        spectral_fn(self, f64::ln, EigenFloor::default())
    }

    pub fn exp(&self) -> Result<SymMat> {
        Ok(eig(self)?.map(f64::exp))
    }

    /// Matrix inverse with the default strict floor.
    pub fn inv(&self) -> Result<SymMat> {
        spectral_fn(self, f64::recip, EigenFloor::default())
    }
}

impl Add<&SymMat> for &SymMat {
    type Output = SymMat;
    fn add(self, rhs: &SymMat) -> SymMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        SymMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub<&SymMat> for &SymMat {
    type Output = SymMat;
    fn sub(self, rhs: &SymMat) -> SymMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        SymMat { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<f64> for &SymMat {
    type Output = SymMat;
    fn mul(self, c: f64) -> SymMat {
        self.scaled(c)
    }
}

impl Neg for &SymMat {
    type Output = SymMat;
    fn neg(self) -> SymMat {
        self.scaled(-1.0)
    }
}

impl Serialize for SymMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SymMat::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Eigendecomposition `S = Q diag(λ) Qᵀ`, eigenvalues ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    /// Row-major `d×d`; column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: Vec<f64>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    #[inline]
    pub fn vector(&self, row: usize, col: usize) -> f64 {
        self.eigenvectors[row * self.dim() + col]
    }

    /// `Q diag(f(λ)) Qᵀ`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMat {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.compose(&vals)
    }

    /// `Q diag(values) Qᵀ`
    pub fn compose(&self, values: &[f64]) -> SymMat {
        let n = self.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.vector(i, k) * values[k] * self.vector(j, k);
                }
                out.set(i, j, acc);
                out.set(j, i, acc);
            }
        }
        sym(&out)
    }

    /// `Qᵀ S Q`
    pub fn to_eigenbasis(&self, s: &SymMat) -> SymMat {
        let n = self.dim();
        let mut tmp = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += s.get(i, k) * self.vector(k, j);
                }
                tmp.set(i, j, acc);
            }
        }
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.vector(k, i) * tmp.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        sym(&out)
    }

    /// `Q M Qᵀ`
    pub fn from_eigenbasis(&self, m: &SymMat) -> SymMat {
        let n = self.dim();
        let mut tmp = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.vector(i, k) * m.get(k, j);
                }
                tmp.set(i, j, acc);
            }
        }
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += tmp.get(i, k) * self.vector(j, k);
                }
                out.set(i, j, acc);
            }
        }
        sym(&out)
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Rotations are skipped once `|a_pq| ≤ ε·sqrt(|a_pp a_qq|)`, which keeps small
/// eigenvalues of positive definite inputs accurate to high relative precision.
pub fn eig(s: &SymMat) -> Result<SpectralDecomp> {
    if !s.is_finite() {
        return Err(FrsError::Invalid("matrix has non-finite entries".into()));
    }
    let n = s.dim;
    let mut a = s.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = s.frobenius_norm();
    let abs_tol = f64::EPSILON * f64::EPSILON * scale;

    let negligible = |a: &[f64], p: usize, q: usize| -> bool {
        let apq = a[p * n + q].abs();
        apq <= abs_tol || apq <= f64::EPSILON * (a[p * n + p] * a[q * n + q]).abs().sqrt()
    };

    let mut converged = n == 1 || scale == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if negligible(&a, p, q) {
                    continue;
                }
                rotated = true;
                let apq = a[p * n + q];
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        let off = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        return Err(FrsError::EigenNotConverged { sweeps, off_norm: off });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(SpectralDecomp { eigenvalues, eigenvectors })
}

/// What to do with eigenvalues below the floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloorPolicy {
    /// Report a singularity error.
    Strict,
    /// Raise the eigenvalue to the floor.
    Clamp,
}

/// Eigenvalue floor, relative to the largest eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenFloor {
    pub relative: f64,
    pub policy: FloorPolicy,
}

impl EigenFloor {
    pub const DEFAULT_RELATIVE: f64 = 1e-10;

    pub fn strict(relative: f64) -> Self {
        Self { relative, policy: FloorPolicy::Strict }
    }

    pub fn clamp(relative: f64) -> Self {
        Self { relative, policy: FloorPolicy::Clamp }
    }

    /// Absolute threshold for a spectrum whose largest eigenvalue is `lambda_max`.
    pub fn threshold(&self, lambda_max: f64) -> f64 {
        if self.relative > 0.0 {
            (self.relative * lambda_max.max(0.0)).max(f64::MIN_POSITIVE)
        } else {
            0.0
        }
    }

    /// Applies the policy to one eigenvalue.
    pub fn apply(&self, lambda: f64, threshold: f64) -> Result<f64> {
        if lambda >= threshold {
            return Ok(lambda);
        }
        match self.policy {
            FloorPolicy::Strict => Err(FrsError::Singular { eigenvalue: lambda, floor: threshold }),
            FloorPolicy::Clamp => Ok(threshold),
        }
    }
}

impl Default for EigenFloor {
    fn default() -> Self {
        Self::strict(Self::DEFAULT_RELATIVE)
    }
}

pub fn spectral_fn(s: &SymMat, f: impl Fn(f64) -> f64, floor: EigenFloor) -> Result<SymMat> {
    let dec = eig(s)?;
    let thr = floor.threshold(dec.max());
    let vals = dec
        .eigenvalues
        .iter()
        .map(|&l| floor.apply(l, thr).map(&f))
        .collect::<Result<Vec<_>>>()?;
    Ok(dec.compose(&vals))
}

/// Frobenius pairing `tr(M Nᵀ)`.
pub fn frobenius(m: &SymMat, n: &SymMat) -> Result<f64> {
    if m.dim != n.dim {
        return Err(FrsError::Dimension { expected: m.dim, found: n.dim });
    }
    Ok(frobenius_unchecked(m, n))
}

#[inline]
pub(crate) fn frobenius_unchecked(m: &SymMat, n: &SymMat) -> f64 {
    m.data.iter().zip(&n.data).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdClass {
    PositiveDefinite,
    SemiDefinite,
    Indefinite,
}

/// Classifies by the smallest eigenvalue against `±tol`.
pub fn classify_psd(s: &SymMat, tol: f64) -> Result<PsdClass> {
    let lmin = eig(s)?.min();
    Ok(if lmin > tol {
        PsdClass::PositiveDefinite
    } else if lmin >= -tol {
        PsdClass::SemiDefinite
    } else {
        PsdClass::Indefinite
    })
}

/// Solves `AU + UA = 2S` for symmetric `U`, with `A` positive definite.
pub fn lyapunov_solve(a: &SymMat, s: &SymMat) -> Result<SymMat> {
    if a.dim != s.dim {
        return Err(FrsError::Dimension { expected: a.dim, found: s.dim });
    }
    let dec = eig(a)?;
    let thr = EigenFloor::default().threshold(dec.max());
    if dec.min() < thr {
        return Err(FrsError::Singular { eigenvalue: dec.min(), floor: thr });
    }
    Ok(lyapunov_solve_spectral(&dec, s))
}

/// Lyapunov solve against a precomputed eigendecomposition of `A`:
/// `Û_ij = 2 Ŝ_ij / (λ_i + λ_j)` in the eigenbasis.
pub fn lyapunov_solve_spectral(dec: &SpectralDecomp, s: &SymMat) -> SymMat {
    let n = dec.dim();
    let mut hat = dec.to_eigenbasis(s);
    for i in 0..n {
        for j in 0..n {
            let denom = dec.eigenvalues[i] + dec.eigenvalues[j];
            hat.data[i * n + j] *= 2.0 / denom;
        }
    }
    dec.from_eigenbasis(&hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &SymMat, b: &SymMat, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn sym_examples() {
        let id = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(sym(&id), SymMat::identity(2));
        let m = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(sym(&m).rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = SymMat::from_rows(&[vec![1.0, 0.3], vec![0.3, -2.0]]).unwrap();
        assert_eq!(sym(&s.to_matrix()), s);
    }

    #[test]
    fn sym_rejects_non_square() {
        let err = sym_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, FrsError::NotSquare { .. }));
    }

    #[test]
    fn eig_examples() {
        let d = eig(&SymMat::identity(2)).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 1.0]);
        let d = eig(&SymMat::diag(&[3.0, 1.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 3.0]);

        let a = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let d = eig(&a).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] - 3.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // columns match (1,-1)/√2 and (1,1)/√2 up to sign
        let c0 = [d.vector(0, 0), d.vector(1, 0)];
        let c1 = [d.vector(0, 1), d.vector(1, 1)];
        assert!(((c0[0] * r - c0[1] * r).abs() - 1.0).abs() < 1e-14);
        assert!(((c1[0] * r + c1[1] * r).abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_nan() {
        let m = SymMat::diag(&[1.0, f64::NAN]);
        assert!(eig(&m).is_err());
    }

    #[test]
    fn spectral_fn_examples() {
        assert!(close(&SymMat::identity(2).sqrt_psd().unwrap(), &SymMat::identity(2), 1e-15));
        let r = SymMat::diag(&[4.0, 9.0]).sqrt_psd().unwrap();
        assert!(close(&r, &SymMat::diag(&[2.0, 3.0]), 1e-15));

        // eigenvalues {1, 3}: log 1 = 0 leaves (log 3)/2 in every entry
        let a = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let l = a.log().unwrap();
        let h = 3f64.ln() / 2.0;
        assert!(close(&l, &SymMat::from_rows(&[vec![h, h], vec![h, h]]).unwrap(), 1e-14));
    }

    #[test]
    fn strict_floor_names_eigenvalue() {
        let err = SymMat::diag(&[1.0, 0.0]).log().unwrap_err();
        match err {
            FrsError::Singular { eigenvalue, .. } => assert_eq!(eigenvalue, 0.0),
            e => panic!("unexpected {e:?}"),
        }
        let clamped = SymMat::diag(&[1.0, 0.0])
            .spectral_fn(f64::ln, EigenFloor::clamp(1e-10))
            .unwrap();
        assert!((clamped.get(1, 1) - 1e-10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn frobenius_examples() {
        let i2 = SymMat::identity(2);
        assert_eq!(frobenius(&i2, &i2).unwrap(), 2.0);
        assert_eq!(frobenius(&SymMat::diag(&[1.0, 2.0]), &SymMat::diag(&[3.0, 4.0])).unwrap(), 11.0);
        assert_eq!(frobenius(&SymMat::zeros(3), &SymMat::zeros(3)).unwrap(), 0.0);
        assert!(frobenius(&i2, &SymMat::identity(3)).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_psd(&SymMat::identity(2), 1e-12).unwrap(), PsdClass::PositiveDefinite);
        assert_eq!(classify_psd(&SymMat::diag(&[1.0, 0.0]), 1e-12).unwrap(), PsdClass::SemiDefinite);
        assert_eq!(classify_psd(&SymMat::diag(&[1.0, -1.0]), 1e-12).unwrap(), PsdClass::Indefinite);
    }

    #[test]
    fn lyapunov_examples() {
        let s = SymMat::from_rows(&[vec![0.3, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert!(close(&lyapunov_solve(&SymMat::identity(2), &s).unwrap(), &s, 1e-15));

        let a = SymMat::diag(&[1.0, 3.0]);
        let off = SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let u = lyapunov_solve(&a, &off).unwrap();
        assert!(close(&u, &SymMat::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap(), 1e-15));

        assert!(matches!(
            lyapunov_solve(&SymMat::diag(&[1.0, 0.0]), &off),
            Err(FrsError::Singular { .. })
        ));
    }

    #[test]
    fn serde_symmetrizes_on_load() {
        let m: SymMat = serde_json::from_str("[[1.0, 2.0], [0.0, 3.0]]").unwrap();
        assert_eq!(m.rows(), vec![vec![1.0, 1.0], vec![1.0, 3.0]]);
        assert!(serde_json::from_str::<SymMat>("[[1.0, 2.0], [0.0]]").is_err());
    }
}
