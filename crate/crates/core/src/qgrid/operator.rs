use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::Grid;
use crate::error::GridError;

/// Relative tolerance of the weighted Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Sparse matrix acting on grid functions, stored row by row.
#[derive(Debug, Clone)]
pub struct GridOperator {
    grid: Arc<Grid>,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl PartialEq for GridOperator {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.rows == other.rows
    }
}

impl GridOperator {
    pub fn zero(grid: &Arc<Grid>) -> Self {
        GridOperator { grid: grid.clone(), rows: vec![Vec::new(); grid.size()] }
    }

    pub fn identity(grid: &Arc<Grid>) -> Self {
        Self::diagonal(grid, &vec![1.0; grid.size()])
    }

    pub fn diagonal(grid: &Arc<Grid>, d: &[f64]) -> Self {
        assert_eq!(d.len(), grid.size());
        let rows = d.iter().enumerate().map(|(i, &v)| if v == 0.0 { vec![] } else { vec![(i, Complex64::new(v, 0.0))] }).collect();
        GridOperator { grid: grid.clone(), rows }
    }

    /// Builds from `(row, col, value)` entries; repeated entries are summed.
    pub fn from_triplets(grid: &Arc<Grid>, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let n = grid.size();
        let mut acc: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n}x{n}");
            *acc[i].entry(j).or_default() += v;
        }
        let rows = acc.into_iter().map(|r| r.into_iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect()).collect();
        GridOperator { grid: grid.clone(), rows }
    }

    pub(crate) fn from_rows(grid: &Arc<Grid>, rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        debug_assert_eq!(rows.len(), grid.size());
        GridOperator { grid: grid.clone(), rows }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, Complex64)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i].iter().find(|e| e.0 == j).map(|e| e.1).unwrap_or_default()
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(j, _)| i.abs_diff(*j)))
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.size(), "vector length");
        let row = |r: &Vec<(usize, Complex64)>| r.iter().map(|(j, c)| c * v[*j]).sum();
        if self.nnz() > 1 << 16 {
            self.rows.par_iter().map(row).collect()
        } else {
            self.rows.iter().map(row).collect()
        }
    }

    fn same_grid(&self, other: &Self) -> Result<(), GridError> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(GridError::InvalidGrid("operators live on different grids".into()))
        }
    }

    fn combine(&self, other: &Self, s: Complex64) -> Result<Self, GridError> {
        self.same_grid(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    let ka = a.get(i).map(|e| e.0).unwrap_or(usize::MAX);
                    let kb = b.get(j).map(|e| e.0).unwrap_or(usize::MAX);
                    let (k, v) = if ka < kb {
                        i += 1;
                        (ka, a[i - 1].1)
                    } else if kb < ka {
                        j += 1;
                        (kb, s * b[j - 1].1)
                    } else {
                        i += 1;
                        j += 1;
                        (ka, a[i - 1].1 + s * b[j - 1].1)
                    };
                    if v != Complex64::new(0.0, 0.0) {
                        out.push((k, v));
                    }
                }
                out
            })
            .collect();
        Ok(GridOperator { grid: self.grid.clone(), rows })
    }

    pub fn add(&self, other: &Self) -> Result<Self, GridError> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GridError> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let rows = self.rows.iter().map(|r| r.iter().map(|&(j, v)| (j, s * v)).filter(|e| e.1 != Complex64::new(0.0, 0.0)).collect()).collect();
        GridOperator { grid: self.grid.clone(), rows }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self, GridError> {
        self.same_grid(other)?;
        let rows = self
            .rows
            .par_iter()
            .map(|r| {
                let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
                for &(k, a) in r {
                    for &(j, b) in &other.rows[k] {
                        *acc.entry(j).or_default() += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect()
            })
            .collect();
        Ok(GridOperator { grid: self.grid.clone(), rows })
    }

    /// `[self, other] = self other - other self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, GridError> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Adjoint with respect to the grid's weighted inner product: `W⁻¹ A† W`.
    pub fn adjoint(&self) -> Self {
        let w = self.grid.weights();
        let entries = self.rows.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |&(j, v)| (j, i, v.conj() * w[i] / w[j])));
        Self::from_triplets(&self.grid, entries.collect::<Vec<_>>())
    }

    /// Largest deviation of `W A` from its conjugate transpose, relative to `max |W A|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let w = self.grid.weights();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                let a = v * w[i];
                let b = self.get(j, i).conj() * w[j];
                worst = worst.max((a - b).norm());
                scale = scale.max(a.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// The similar matrix `W^{1/2} A W^{-1/2}`, Hermitian in the plain sense
    /// whenever this operator is Hermitian for the weighted inner product.
    pub fn symmetrized(&self) -> Self {
        let w = self.grid.weights();
        let rows = self.rows.iter().enumerate().map(|(i, r)| r.iter().map(|&(j, v)| (j, v * (w[i] / w[j]).sqrt())).collect()).collect();
        GridOperator { grid: self.grid.clone(), rows }
    }

    /// Weighted norm `‖A v‖` against a test vector, for convergence studies.
    pub fn weighted_norm_on(&self, v: &[Complex64]) -> f64 {
        let w = self.grid.weights();
        self.apply(v).iter().zip(w).map(|(x, w)| w * x.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::grid::{Axis, Stencil};

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new(vec![Axis::dirichlet(0.0, 1.0, n)], Stencil::Central(2)).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn algebra() {
        let g = grid(8);
        let a = GridOperator::from_triplets(&g, [(0, 1, c(1.0, 0.0)), (1, 0, c(2.0, 0.0)), (0, 1, c(0.0, 1.0))]);
        assert_eq!(a.get(0, 1), c(1.0, 1.0));
        assert_eq!(a.bandwidth(), 1);
        let id = GridOperator::identity(&g);
        assert_eq!(a.compose(&id).unwrap(), a);
        assert_eq!(a.sub(&a).unwrap().nnz(), 0);
        let comm = a.commutator(&a.scale(c(3.0, 0.0))).unwrap();
        assert_eq!(comm.nnz(), 0);
        let dense = a.to_dense();
        assert_eq!(dense[(1, 0)], c(2.0, 0.0));
    }

    #[test]
    fn hermiticity() {
        let g = grid(8);
        let h = GridOperator::from_triplets(&g, [(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0)), (2, 2, c(3.0, 0.0))]);
        assert!(h.is_hermitian());
        assert_eq!(h.adjoint(), h);
        let nh = GridOperator::from_triplets(&g, [(0, 1, c(1.0, 0.0))]);
        assert!(!nh.is_hermitian());
    }
}
