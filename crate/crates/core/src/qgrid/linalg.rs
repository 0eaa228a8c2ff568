//! Banded and dense kernels behind the eigensolver and the propagator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::GridOperator;
use crate::error::GridError;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// LU factorization with partial pivoting of a band matrix with `kl` sub- and
/// `ku` superdiagonals. Pivoting widens the upper band to `kl + ku`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    // Row i holds columns i - kl ..= i + kl + ku.
    data: Vec<Complex64>,
    lower: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factors `op + shift·I`.
    pub fn factor(op: &GridOperator, shift: Complex64) -> Result<Self, GridError> {
        let b = op.bandwidth();
        Self::factor_with(op.size(), b, b, |i, push| {
            for &(j, v) in &op.rows()[i] {
                push(j, v);
            }
            push(i, shift);
        })
    }

    fn factor_with(n: usize, kl: usize, ku: usize, fill: impl Fn(usize, &mut dyn FnMut(usize, Complex64))) -> Result<Self, GridError> {
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu { n, kl, ku, width, data: vec![ZERO; n * width], lower: vec![ZERO; n * kl], piv: vec![0; n] };
        for i in 0..n {
            let mut push = |j: usize, v: Complex64| {
                let k = lu.at(i, j);
                lu.data[k] += v;
            };
            fill(i, &mut push);
        }
        let scale = lu.data.iter().fold(0.0f64, |a, x| a.max(x.norm()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.at(k, k)].norm();
            for r in k + 1..=last_row {
                let v = lu.data[lu.at(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || best <= 1e-300 * scale {
                return Err(GridError::LinearSolve(format!("singular pivot at row {k}")));
            }
            lu.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (lu.at(k, j), lu.at(p, j));
                    lu.data.swap(a, b);
                }
            }
            let pivot = lu.data[lu.at(k, k)];
            for r in k + 1..=last_row {
                let m = lu.data[lu.at(r, k)] / pivot;
                lu.lower[k * kl + (r - k - 1)] = m;
                let rk = lu.at(r, k);
                lu.data[rk] = ZERO;
                if m != ZERO {
                    for j in k + 1..=last_col {
                        let u = lu.data[lu.at(k, j)];
                        let idx = lu.at(r, j);
                        lu.data[idx] -= m * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                x[r] -= self.lower[k * self.kl + (r - k - 1)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                s -= self.data[self.at(i, j)] * x[j];
            }
            x[i] = s / self.data[self.at(i, i)];
        }
    }
}

/// Linear solver for `op + shift·I`, banded when that pays off.
pub enum ShiftedSolver {
    Banded(Box<BandLu>),
    Dense(Box<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>>),
}

/// Whether the band path is cheaper than dense factorization.
pub fn prefers_band(op: &GridOperator) -> bool {
    let b = op.bandwidth();
    8 * b < op.size()
}

impl ShiftedSolver {
    pub fn new(op: &GridOperator, shift: Complex64) -> Result<Self, GridError> {
        if prefers_band(op) {
            return Ok(ShiftedSolver::Banded(Box::new(BandLu::factor(op, shift)?)));
        }
        let n = op.size();
        let m = op.to_dense() + DMatrix::<Complex64>::identity(n, n) * shift;
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(GridError::LinearSolve("singular matrix".into()));
        }
        Ok(ShiftedSolver::Dense(Box::new(lu)))
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) -> Result<(), GridError> {
        match self {
            ShiftedSolver::Banded(lu) => lu.solve_in_place(x),
            ShiftedSolver::Dense(lu) => {
                let b = DVector::from_column_slice(x);
                let s = lu.solve(&b).ok_or_else(|| GridError::LinearSolve("singular matrix".into()))?;
                x.copy_from_slice(s.as_slice());
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GridError::LinearSolve("non-finite solution".into()));
        }
        Ok(())
    }
}

/// Hermitian band matrix in lower storage, for Sturm counts.
pub struct BandHermitian {
    n: usize,
    b: usize,
    // lower[i * (b+1) + d] = A[i][i-d]
    lower: Vec<Complex64>,
    norm: f64,
}

impl BandHermitian {
    pub fn new(op: &GridOperator) -> Self {
        let n = op.size();
        let b = op.bandwidth();
        let mut lower = vec![ZERO; n * (b + 1)];
        for (i, row) in op.rows().iter().enumerate() {
            for &(j, v) in row {
                if j <= i {
                    lower[i * (b + 1) + (i - j)] += v;
                }
            }
        }
        for i in 0..n {
            lower[i * (b + 1)].im = 0.0;
        }
        let norm = (0..n)
            .map(|i| {
                let mut s = 0.0;
                for d in 0..=b.min(i) {
                    s += lower[i * (b + 1) + d].norm();
                }
                for d in 1..=b.min(n - 1 - i) {
                    s += lower[(i + d) * (b + 1) + d].norm();
                }
                s
            })
            .fold(0.0, f64::max);
        BandHermitian { n, b, lower, norm }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Gershgorin interval containing the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let (n, b) = (self.n, self.b);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let d = self.lower[i * (b + 1)].re;
            let mut r = 0.0;
            for k in 1..=b.min(i) {
                r += self.lower[i * (b + 1) + k].norm();
            }
            for k in 1..=b.min(n - 1 - i) {
                r += self.lower[(i + k) * (b + 1) + k].norm();
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Number of eigenvalues strictly below `sigma`, from the inertia of an
    /// unpivoted `L D Lᴴ` factorization of `A - σI`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        let pivmin = f64::EPSILON * f64::EPSILON * self.norm.max(1e-300);
        // l[i*w + d] = L[i][i-d] for d >= 1; diag d[i].
        let mut l = vec![ZERO; n * w];
        let mut d = vec![0.0; n];
        let mut count = 0;
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..i {
                // L[i][j] = (A[i][j] - Σ_{k<j} L[i][k] conj(L[j][k]) d[k]) / d[j]
                let mut s = self.lower[i * w + (i - j)];
                for k in lo.max(j.saturating_sub(b))..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)].conj() * d[k];
                }
                l[i * w + (i - j)] = s / d[j];
            }
            let mut s = self.lower[i * w].re - sigma;
            for k in lo..i {
                s -= l[i * w + (i - k)].norm_sqr() * d[k];
            }
            if s.abs() < pivmin {
                s = -pivmin;
            }
            if s < 0.0 {
                count += 1;
            }
            d[i] = s;
        }
        count
    }

    /// The `k`-th smallest eigenvalue (zero-based) by bisection.
    pub fn eigenvalue(&self, k: usize, bounds: (f64, f64)) -> f64 {
        let (mut lo, mut hi) = bounds;
        let tol = 2.0 * f64::EPSILON * self.norm.max(lo.abs()).max(hi.abs());
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Dense Hermitian eigendecomposition, eigenvalues ascending.
pub fn dense_hermitian_eigen(op: &GridOperator) -> (Vec<f64>, DMatrix<Complex64>) {
    let m = op.to_dense();
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::grid::{Axis, Grid, Stencil};
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new(vec![Axis::dirichlet(0.0, 1.0, n)], Stencil::Central(2)).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_matrix(n: usize) -> GridOperator {
        let g = grid(n);
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, c((i % 5) as f64 - 2.0, 0.0)));
            if i + 1 < n {
                e.push((i, i + 1, c(0.3, 1.1)));
                e.push((i + 1, i, c(0.3, -1.1)));
            }
            if i + 3 < n {
                e.push((i, i + 3, c(-0.7, 0.2)));
                e.push((i + 3, i, c(-0.7, -0.2)));
            }
        }
        GridOperator::from_triplets(&g, e)
    }

    #[test]
    fn band_lu_solves() {
        let a = test_matrix(40);
        let shift = c(0.1, 0.4);
        let lu = BandLu::factor(&a, shift).unwrap();
        let x: Vec<Complex64> = (0..40).map(|i| c(i as f64, 1.0 - i as f64 * 0.5)).collect();
        let mut b: Vec<Complex64> = a.apply(&x).iter().zip(&x).map(|(ax, x)| ax + shift * x).collect();
        lu.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-10, "{u} vs {v}");
        }
    }

    #[test]
    fn sturm_counts_match_dense() {
        let a = test_matrix(60);
        let (values, _) = dense_hermitian_eigen(&a);
        let band = BandHermitian::new(&a);
        let bounds = band.bounds();
        assert!(bounds.0 <= values[0] && values[59] <= bounds.1);
        for k in [0, 1, 17, 30, 59] {
            let v = band.eigenvalue(k, bounds);
            assert!((v - values[k]).abs() < 1e-10, "k={k}: {v} vs {}", values[k]);
        }
    }
}
