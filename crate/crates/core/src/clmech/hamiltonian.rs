use num_traits::Float;

use crate::chartkit::Var;
use crate::clmech::PhasePoint;
use crate::error::{ClassicalError, SymbolicError};
use crate::scalar::Coefficient;
use crate::symcore::{NumericPolynomial, Polynomial};

/// Hamiltonian on the vertical cotangent bundle with evaluable first derivatives.
pub trait Hamiltonian<T: Float>: Sync {
    fn dim(&self) -> usize;

    fn value(&self, t: T, q: &[T], p: &[T]) -> T;

    /// `(∂_k H, ∂^k H)` at the point.
    fn gradient(&self, t: T, q: &[T], p: &[T]) -> (Vec<T>, Vec<T>);

    /// Explicit time derivative `∂_t H`.
    fn time_derivative(&self, t: T, q: &[T], p: &[T]) -> T;
}

/// Real polynomial compiled for evaluation, with `(t, q, p_k)` arguments.
#[derive(Debug, Clone)]
pub struct PhaseFunction<T> {
    value: NumericPolynomial<T>,
}

impl<T: Float> PhaseFunction<T> {
    pub fn new<C: Coefficient>(f: &Polynomial<C>) -> Result<Self, SymbolicError> {
        if f.depends_on(Var::TimeMomentum) {
            return Err(SymbolicError::DependsOnTimeMomentum(f.to_string()));
        }
        Ok(PhaseFunction { value: f.compile()? })
    }

    pub fn eval(&self, x: &PhasePoint<T>) -> T {
        self.value.eval_vertical(x.t, &x.q, &x.p)
    }
}

/// Hamiltonian given by an exact polynomial; derivatives are taken symbolically.
#[derive(Debug, Clone)]
pub struct SymbolicHamiltonian<T> {
    dim: usize,
    value: NumericPolynomial<T>,
    dq: Vec<NumericPolynomial<T>>,
    dp: Vec<NumericPolynomial<T>>,
    dt: NumericPolynomial<T>,
}

impl<T: Float> SymbolicHamiltonian<T> {
    pub fn new<C: Coefficient>(h: &Polynomial<C>) -> Result<Self, ClassicalError> {
        if h.depends_on(Var::TimeMomentum) {
            return Err(SymbolicError::DependsOnTimeMomentum(h.to_string()).into());
        }
        let m = h.chart().dim();
        let compile = |f: Polynomial<C>| f.compile::<T>().map_err(ClassicalError::from);
        Ok(SymbolicHamiltonian {
            dim: m,
            value: compile(h.clone())?,
            dq: (0..m).map(|k| compile(h.derivative(Var::Coord(k)))).collect::<Result<_, _>>()?,
            dp: (0..m).map(|k| compile(h.derivative(Var::Momentum(k)))).collect::<Result<_, _>>()?,
            dt: compile(h.derivative(Var::Time))?,
        })
    }
}

impl<T: Float + Send + Sync> Hamiltonian<T> for SymbolicHamiltonian<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: T, q: &[T], p: &[T]) -> T {
        self.value.eval_vertical(t, q, p)
    }

    fn gradient(&self, t: T, q: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
        (
            self.dq.iter().map(|f| f.eval_vertical(t, q, p)).collect(),
            self.dp.iter().map(|f| f.eval_vertical(t, q, p)).collect(),
        )
    }

    fn time_derivative(&self, t: T, q: &[T], p: &[T]) -> T {
        self.dt.eval_vertical(t, q, p)
    }
}

/// Hamiltonian known only through point evaluations; derivatives use central
/// differences with step `1e-6 × scale`.
pub struct SampledHamiltonian<T, F> {
    dim: usize,
    step: T,
    f: F,
}

impl<T: Float, F: Fn(T, &[T], &[T]) -> T + Sync> SampledHamiltonian<T, F> {
    pub fn new(dim: usize, scale: T, f: F) -> Self {
        SampledHamiltonian { dim, step: T::from(1e-6).unwrap() * scale, f }
    }

    pub fn step(&self) -> T {
        self.step
    }
}

impl<T: Float + Send + Sync, F: Fn(T, &[T], &[T]) -> T + Sync> Hamiltonian<T> for SampledHamiltonian<T, F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, t: T, q: &[T], p: &[T]) -> T {
        (self.f)(t, q, p)
    }

    fn gradient(&self, t: T, q: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
        let h = self.step;
        let two_h = h + h;
        let mut qs = q.to_vec();
        let mut ps = p.to_vec();
        let mut dq = Vec::with_capacity(self.dim);
        let mut dp = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            qs[k] = q[k] + h;
            let up = (self.f)(t, &qs, p);
            qs[k] = q[k] - h;
            let down = (self.f)(t, &qs, p);
            qs[k] = q[k];
            dq.push((up - down) / two_h);

            ps[k] = p[k] + h;
            let up = (self.f)(t, q, &ps);
            ps[k] = p[k] - h;
            let down = (self.f)(t, q, &ps);
            ps[k] = p[k];
            dp.push((up - down) / two_h);
        }
        (dq, dp)
    }

    fn time_derivative(&self, t: T, q: &[T], p: &[T]) -> T {
        let h = self.step;
        ((self.f)(t + h, q, p) - (self.f)(t - h, q, p)) / (h + h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::Chart;
    use crate::clmech::integrate_hamilton;
    use crate::scalar::GaussianRational as G;

    #[test]
    fn sampled_matches_symbolic() {
        let chart = Chart::cartesian(2);
        let src = "p_q1^2/2 + p_q2^2/2 + q1^2*q2 + t*q1";
        let poly = crate::symcore::parse_polynomial(src, &chart).unwrap();
        let exact = SymbolicHamiltonian::<f64>::new(&poly).unwrap();
        let sampled = SampledHamiltonian::new(2, 1.0, |t: f64, q: &[f64], p: &[f64]| {
            0.5 * (p[0] * p[0] + p[1] * p[1]) + q[0] * q[0] * q[1] + t * q[0]
        });
        let (t, q, p) = (0.4, [0.3, -1.2], [0.7, 0.1]);
        let (a, b) = (exact.gradient(t, &q, &p), sampled.gradient(t, &q, &p));
        for (x, y) in a.0.iter().chain(&a.1).zip(b.0.iter().chain(&b.1)) {
            assert!((x - y).abs() < 1e-8);
        }
        assert!((exact.time_derivative(t, &q, &p) - sampled.time_derivative(t, &q, &p)).abs() < 1e-8);

        let x0 = PhasePoint::new(0.0, vec![0.2, 0.1], vec![0.0, 0.3]);
        let ta = integrate_hamilton(&exact, &x0, 2.0, 1e-2).unwrap();
        let tb = integrate_hamilton(&sampled, &x0, 2.0, 1e-2).unwrap();
        assert!((ta.last().q[0] - tb.last().q[0]).abs() < 1e-7);
    }

    #[test]
    fn rejects_time_momentum_and_complex() {
        let chart = Chart::cartesian(1);
        let pt = Polynomial::<G>::var(&chart, Var::TimeMomentum);
        assert!(SymbolicHamiltonian::<f64>::new(&pt).is_err());
        let c = Polynomial::<G>::constant(&chart, G::imag_unit());
        assert!(SymbolicHamiltonian::<f64>::new(&c).is_err());
    }
}
