use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::grid::{Grid, Measure, RadialMeasure};
use super::operator::GridOperator;
use crate::chartkit::ReferenceFrame;
use crate::error::GridError;
use crate::scalar::Coefficient;
use crate::symcore::{AffineObservable, PhaseSpace, Polynomial};

/// Lifts a 1D matrix acting along `axis` to the whole grid.
fn along_axis(grid: &Arc<Grid>, axis: usize, rows1d: &[Vec<(usize, f64)>]) -> GridOperator {
    let stride = grid.stride(axis);
    let n = grid.axes()[axis].n;
    let rows = (0..grid.size())
        .map(|idx| {
            let i = (idx / stride) % n;
            let base = idx - i * stride;
            rows1d[i].iter().map(|&(j, c)| (base + j * stride, Complex64::new(c, 0.0))).collect()
        })
        .collect();
    GridOperator::from_rows(grid, rows)
}

/// First-derivative matrix `D_k` along `axis`.
pub fn derivative(grid: &Arc<Grid>, axis: usize) -> GridOperator {
    along_axis(grid, axis, &grid.axes()[axis].first_derivative(grid.stencil()))
}

/// Second-derivative matrix along `axis`.
///
/// On radial grids the stencil is continued oddly through `r = 0`, the
/// behaviour of `ρ = rψ` for regular states.
pub fn second_derivative(grid: &Arc<Grid>, axis: usize) -> GridOperator {
    let odd = matches!(grid.measure(), Measure::Radial(_)) && grid.axes()[axis].start == 0.0;
    along_axis(grid, axis, &grid.axes()[axis].second_derivative(grid.stencil(), odd))
}

/// Discrete `-i(a^k D_k + D_k a^k)/2 + b` from nodal values of `a^k` and `b`.
pub fn discretize_affine_values(grid: &Arc<Grid>, a: &[Vec<f64>], b: &[f64]) -> Result<GridOperator, GridError> {
    if a.len() != grid.dim() {
        return Err(GridError::DimensionMismatch { expected: grid.dim(), got: a.len() });
    }
    if b.len() != grid.size() || a.iter().any(|c| c.len() != grid.size()) {
        return Err(GridError::DimensionMismatch { expected: grid.size(), got: b.len() });
    }
    let mut op = GridOperator::diagonal(grid, b);
    let half_i = Complex64::new(0.0, -0.5);
    for (k, ak) in a.iter().enumerate() {
        if ak.iter().all(|&x| x == 0.0) {
            continue;
        }
        let d = derivative(grid, k);
        let diag = GridOperator::diagonal(grid, ak);
        let sym = diag.compose(&d)?.add(&d.compose(&diag)?)?;
        op = op.add(&sym.scale(half_i))?;
    }
    Ok(op)
}

fn nodal<C: Coefficient>(p: &Polynomial<C>, t: f64, points: &[Vec<f64>]) -> Result<Vec<f64>, GridError> {
    if !p.is_real() {
        return Err(GridError::NotHermitian);
    }
    Ok(points.iter().map(|q| p.eval_tq(t, q)).collect())
}

/// Grid operator of `a^k(t, q) p_k + b(t, q)` frozen at time `t`.
pub fn discretize_affine<C: Coefficient>(f: &AffineObservable<C>, t: f64, grid: &Arc<Grid>) -> Result<GridOperator, GridError> {
    grid.check_chart(f.base().chart())?;
    let mut coeffs = f.momentum_coefficients();
    if f.space() == PhaseSpace::Homogeneous {
        if !coeffs[0].is_zero() {
            return Err(GridError::Symbolic(crate::error::SymbolicError::DependsOnTimeMomentum(f.to_polynomial().to_string())));
        }
        coeffs = &coeffs[1..];
    }
    let points = grid.points();
    let a = coeffs.iter().map(|c| nodal(c, t, &points)).collect::<Result<Vec<_>, _>>()?;
    let b = nodal(f.base(), t, &points)?;
    discretize_affine_values(grid, &a, &b)
}

/// Checks symmetry and positive definiteness and returns the inverse.
pub fn inverse_mass(mass: &[Vec<f64>]) -> Result<DMatrix<f64>, GridError> {
    let m = mass.len();
    if mass.iter().any(|r| r.len() != m) {
        return Err(GridError::MassNotPositive);
    }
    let mat = DMatrix::from_fn(m, m, |i, j| mass[i][j]);
    let scale = mat.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !mat.iter().all(|x| x.is_finite()) || (&mat - mat.transpose()).iter().any(|x| x.abs() > 1e-14 * scale) {
        return Err(GridError::MassNotPositive);
    }
    let chol = mat.cholesky().ok_or(GridError::MassNotPositive)?;
    Ok(chol.inverse())
}

/// Kinetic part `½ (m⁻¹)^{ij} p̂_i p̂_j` with `p̂ = -iD`.
pub fn kinetic_operator(grid: &Arc<Grid>, mass: &[Vec<f64>]) -> Result<GridOperator, GridError> {
    if mass.len() != grid.dim() {
        return Err(GridError::DimensionMismatch { expected: grid.dim(), got: mass.len() });
    }
    let inv = inverse_mass(mass)?;
    let mut op = GridOperator::zero(grid);
    for i in 0..grid.dim() {
        for j in 0..grid.dim() {
            let c = inv[(i, j)];
            if c == 0.0 {
                continue;
            }
            let k = if i == j { second_derivative(grid, i) } else { derivative(grid, i).compose(&derivative(grid, j))? };
            op = op.add(&k.scale(Complex64::new(-0.5 * c, 0.0)))?;
        }
    }
    Ok(op)
}

/// Discrete energy function `Ê_Γ = ½ m⁻¹ p̂ p̂ + V - (Γ^k p_k)^` at time `t`.
pub fn build_energy_operator<C: Coefficient>(
    mass: &[Vec<f64>],
    potential: &dyn Fn(&[f64]) -> f64,
    frame: &ReferenceFrame<C>,
    t: f64,
    grid: &Arc<Grid>,
) -> Result<GridOperator, GridError> {
    grid.check_chart(frame.chart())?;
    let points = grid.points();
    let v: Vec<f64> = points.iter().map(|q| potential(q)).collect();
    let mut op = kinetic_operator(grid, mass)?.add(&GridOperator::diagonal(grid, &v))?;
    if frame.components().iter().any(|c| !c.is_zero()) {
        let gamma = frame.components().iter().map(|c| nodal(c, t, &points)).collect::<Result<Vec<_>, _>>()?;
        op = op.sub(&discretize_affine_values(grid, &gamma, &vec![0.0; grid.size()])?)?;
    }
    Ok(op)
}

/// Re-expresses an energy operator relative to another frame:
/// `Ê_{Γ'} = Ê_Γ + ((Γ - Γ')^k p_k)^`.
pub fn frame_shift<C: Coefficient>(
    energy: &GridOperator,
    from: &ReferenceFrame<C>,
    to: &ReferenceFrame<C>,
    t: f64,
) -> Result<GridOperator, GridError> {
    let grid = energy.grid();
    grid.check_chart(from.chart())?;
    grid.check_chart(to.chart())?;
    let points = grid.points();
    let mut diff = vec![vec![0.0; grid.size()]; grid.dim()];
    for (n, q) in points.iter().enumerate() {
        let (a, b) = (from.velocity(t, q), to.velocity(t, q));
        for k in 0..grid.dim() {
            diff[k][n] = a[k] - b[k];
        }
    }
    energy.add(&discretize_affine_values(grid, &diff, &vec![0.0; grid.size()])?)
}

/// Energy operator of a frame given as a polynomial Hamiltonian `Γ^k p_k`.
pub fn frame_hamiltonian_operator<C: Coefficient>(frame: &ReferenceFrame<C>, t: f64, grid: &Arc<Grid>) -> Result<GridOperator, GridError> {
    let f = AffineObservable::new(&frame.hamiltonian(), PhaseSpace::Vertical)?;
    discretize_affine(&f, t, grid)
}

/// Radial operator `(1/m)(-(1/r)∂_r - ½∂_r² + l(l+1)/r²) + V(r)`.
///
/// With [`RadialMeasure::Unit`] the operator acts on `ρ = rψ`, where it reads
/// `(1/m)(-½∂_r² + l(l+1)/r²) + V`. With [`RadialMeasure::Jacobian`] it acts on
/// `ψ` itself and is the conjugate `r⁻¹ (…) r` of the former.
pub fn radial_operator(potential: &dyn Fn(f64) -> f64, l: i64, mass: f64, grid: &Arc<Grid>) -> Result<GridOperator, GridError> {
    let Measure::Radial(measure) = grid.measure() else {
        return Err(GridError::InvalidGrid("radial operator needs a radial grid".into()));
    };
    if l < 0 {
        return Err(GridError::NegativeAngularMomentum(l));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(GridError::MassNotPositive);
    }
    let r = grid.axes()[0].nodes();
    if r[0] <= 0.0 {
        return Err(GridError::GridTouchesOrigin);
    }
    let c = (l * (l + 1)) as f64;
    let diag: Vec<f64> = r.iter().map(|&r| c / (mass * r * r) + potential(r)).collect();
    let op = second_derivative(grid, 0).scale(Complex64::new(-0.5 / mass, 0.0)).add(&GridOperator::diagonal(grid, &diag))?;
    Ok(match measure {
        RadialMeasure::Unit => op,
        RadialMeasure::Jacobian => {
            let rows = op.rows().iter().enumerate().map(|(i, row)| row.iter().map(|&(j, v)| (j, v * r[j] / r[i])).collect()).collect();
            GridOperator::from_rows(grid, rows)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::{Chart, Coordinate, Var};
    use crate::qgrid::grid::{Axis, Stencil};
    use crate::scalar::GaussianRational;

    fn line_grid(n: usize, stencil: Stencil) -> Arc<Grid> {
        Arc::new(Grid::new(vec![Axis::dirichlet(-5.0, 5.0, n)], stencil).unwrap())
    }

    #[test]
    fn affine_operator_is_hermitian() {
        let chart = Chart::cartesian(1);
        let f = crate::symcore::parse_polynomial("(q1^2 - t) * p_q1 + q1^3", &chart).unwrap();
        let f = AffineObservable::new(&f, PhaseSpace::Vertical).unwrap();
        let g = line_grid(64, Stencil::Central(4));
        let op = discretize_affine(&f, 0.7, &g).unwrap();
        assert!(op.is_hermitian());
        let c = Polynomial::var(&chart, Var::Momentum(0)).scale(&crate::scalar::gaussian((1, 1), (2, 1)));
        let c = AffineObservable::complexified(&c, PhaseSpace::Vertical).unwrap();
        assert_eq!(discretize_affine(&c, 0.0, &g), Err(GridError::NotHermitian));
    }

    #[test]
    fn instantwise_restriction_agrees() {
        let chart = Chart::cartesian(1);
        let f = crate::symcore::parse_polynomial("t*q1*p_q1 + t^2*q1", &chart).unwrap();
        let t0 = GaussianRational::from_ratio(3, 2);
        let restricted = f.substitute(Var::Time, &Polynomial::constant(&chart, t0));
        let g = line_grid(32, Stencil::Central(2));
        let a = discretize_affine(&AffineObservable::new(&f, PhaseSpace::Vertical).unwrap(), 1.5, &g).unwrap();
        let b = discretize_affine(&AffineObservable::new(&restricted, PhaseSpace::Vertical).unwrap(), -4.0, &g).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn mass_validation() {
        assert!(inverse_mass(&[vec![2.0]]).is_ok());
        assert_eq!(inverse_mass(&[vec![0.0]]).unwrap_err(), GridError::MassNotPositive);
        assert_eq!(inverse_mass(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap_err(), GridError::MassNotPositive);
        assert_eq!(inverse_mass(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err(), GridError::MassNotPositive);
    }

    #[test]
    fn frame_shift_matches_direct_build() {
        let chart = Chart::cartesian(1);
        let g = line_grid(48, Stencil::Central(2));
        let v = |q: &[f64]| 0.5 * q[0] * q[0];
        let rest = ReferenceFrame::<GaussianRational>::zero(&chart);
        let moving = ReferenceFrame::constant(&chart, &[GaussianRational::from_ratio(1, 3)]).unwrap();
        let e0 = build_energy_operator(&[vec![1.0]], &v, &rest, 0.0, &g).unwrap();
        let e1 = build_energy_operator(&[vec![1.0]], &v, &moving, 0.0, &g).unwrap();
        let shifted = frame_shift(&e0, &rest, &moving, 0.0).unwrap();
        assert!(shifted.sub(&e1).unwrap().max_abs() < 1e-13);
        assert!(e1.is_hermitian());
    }

    #[test]
    fn periodic_chart_needs_periodic_axis() {
        let chart = Chart::new("t", vec![Coordinate::circle("phi", 2.0 * std::f64::consts::PI)]).unwrap();
        let rest = ReferenceFrame::<GaussianRational>::zero(&chart);
        let g = line_grid(16, Stencil::Central(2));
        assert!(matches!(build_energy_operator(&[vec![1.0]], &|_| 0.0, &rest, 0.0, &g), Err(GridError::InvalidGrid(_))));
    }

    #[test]
    fn radial_measures_are_similar() {
        let v = |r: f64| -1.0 / r;
        let gu = Arc::new(Grid::radial(30.0, 200, RadialMeasure::Unit, Stencil::Central(2)).unwrap());
        let gj = Arc::new(Grid::radial(30.0, 200, RadialMeasure::Jacobian, Stencil::Central(2)).unwrap());
        let u = radial_operator(&v, 1, 1.0, &gu).unwrap();
        let j = radial_operator(&v, 1, 1.0, &gj).unwrap();
        assert!(u.is_hermitian() && j.is_hermitian());
        assert!(j.get(0, 0) == u.get(0, 0));
        assert_eq!(radial_operator(&v, -1, 1.0, &gu), Err(GridError::NegativeAngularMomentum(-1)));
        let flat = line_grid(16, Stencil::Central(2));
        assert!(matches!(radial_operator(&v, 0, 1.0, &flat), Err(GridError::InvalidGrid(_))));
    }

    #[test]
    fn hydrogen_ground_converges_quadratically() {
        let error = |n: usize| {
            let g = Arc::new(Grid::radial(40.0, n, RadialMeasure::Unit, Stencil::Central(6)).unwrap());
            let h = radial_operator(&|r: f64| -1.0 / r, 0, 1.0, &g).unwrap();
            (crate::qgrid::eigensolve(&h, 1).unwrap()[0].value + 0.5).abs()
        };
        let (coarse, fine) = (error(400), error(800));
        assert!(fine < 1e-3);
        assert!((3.5..4.5).contains(&(coarse / fine)), "{coarse:e} {fine:e}");
    }
}
