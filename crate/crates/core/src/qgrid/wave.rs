use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{Boundary, Grid};
use super::operator::GridOperator;
use crate::error::GridError;

/// Imaginary parts of expectation values below this are dropped silently.
pub const IMAG_DISCARD: f64 = 1e-10;
/// Imaginary parts above this signal a non-Hermitian operator.
pub const IMAG_LIMIT: f64 = 1e-8;

/// Complex grid function with the weighted inner product `Σ w_j ψ̄_j φ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: &Arc<Grid>, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != grid.size() {
            return Err(GridError::DimensionMismatch { expected: grid.size(), got: values.len() });
        }
        Ok(WaveFunction { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = grid.points().iter().map(|q| f(q)).collect();
        WaveFunction { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| a.conj() * b * w)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<(), GridError> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(GridError::LinearSolve("cannot normalize a zero or non-finite state".into()));
        }
        for v in &mut self.values {
            *v /= n;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self, GridError> {
        self.normalize()?;
        Ok(self)
    }

    /// `⟨ψ, A ψ⟩ / ⟨ψ, ψ⟩`, real for Hermitian `A`.
    pub fn expectation(&self, op: &GridOperator) -> Result<f64, GridError> {
        let a = WaveFunction { grid: self.grid.clone(), values: op.apply(&self.values) };
        let z = self.inner(&a) / self.norm_sqr();
        if z.im.abs() > IMAG_LIMIT * z.re.abs().max(1.0) {
            return Err(GridError::HermiticityViolation { imag: z.im });
        }
        Ok(z.re)
    }

    /// Multiplies by `exp(-i A_k q^k)`, the image of an eigenstate under a boost by `A`.
    pub fn boost(&self, a: &[f64]) -> Result<Self, GridError> {
        if a.len() != self.grid.dim() {
            return Err(GridError::DimensionMismatch { expected: self.grid.dim(), got: a.len() });
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let q = self.grid.point(i);
                let phase: f64 = a.iter().zip(&q).map(|(a, q)| a * q).sum();
                v * Complex64::from_polar(1.0, -phase)
            })
            .collect();
        Ok(WaveFunction { grid: self.grid.clone(), values })
    }

    /// Signed DFT index carrying the most weight on a 1D periodic grid.
    pub fn fourier_index(&self) -> Result<i64, GridError> {
        if self.grid.dim() != 1 || self.grid.axes()[0].boundary != Boundary::Periodic {
            return Err(GridError::InvalidGrid("fourier index needs a 1D periodic grid".into()));
        }
        let n = self.values.len();
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        // Index n stands for wave number 2πn/L.
        let (best, _) = buf.iter().enumerate().fold((0, -1.0), |acc, (k, v)| if v.norm() > acc.1 { (k, v.norm()) } else { acc });
        let k = best as i64;
        Ok(if k > n as i64 / 2 { k - n as i64 } else { k })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::grid::{Axis, Stencil};
    use std::f64::consts::PI;

    fn ring(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new(vec![Axis::circle(2.0 * PI, n)], Stencil::Central(2)).unwrap())
    }

    #[test]
    fn norms_and_inner_products() {
        let g = ring(64);
        let mut psi = WaveFunction::from_fn(&g, |q| Complex64::from_polar(2.0, 3.0 * q[0]));
        assert!((psi.norm_sqr() - 8.0 * PI).abs() < 1e-12);
        psi.normalize().unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-14);
        let other = WaveFunction::from_fn(&g, |q| Complex64::from_polar(1.0, 2.0 * q[0]));
        assert!(psi.inner(&other).norm() < 1e-13);
    }

    #[test]
    fn boost_shifts_fourier_index() {
        let g = ring(64);
        let psi = WaveFunction::from_fn(&g, |q| Complex64::from_polar(1.0, 3.0 * q[0]));
        assert_eq!(psi.fourier_index().unwrap(), 3);
        assert_eq!(psi.boost(&[5.0]).unwrap().fourier_index().unwrap(), -2);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let g = ring(16);
        let psi = WaveFunction::from_fn(&g, |q| Complex64::new(1.0 + q[0].cos(), 0.0));
        let id = GridOperator::identity(&g);
        assert!((psi.expectation(&id).unwrap() - 1.0).abs() < 1e-14);
        let bad = id.scale(Complex64::new(0.0, 1.0));
        assert!(matches!(psi.expectation(&bad), Err(GridError::HermiticityViolation { .. })));
    }
}
