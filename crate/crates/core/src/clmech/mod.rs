//! Numerical Hamilton dynamics: RK4 trajectories, observables along them and
//! conservation diagnostics.

mod export;
mod hamiltonian;
mod series;

pub use export::write_trajectory_csv;
pub use hamiltonian::{Hamiltonian, PhaseFunction, SampledHamiltonian, SymbolicHamiltonian};
pub use series::{along_trajectory, conservation_report, CurrentVerdict, TimeSeries};

use std::sync::Arc;

use num_traits::Float;

use crate::chartkit::{Chart, Topology};
use crate::error::ClassicalError;

/// Point `(t, q^k, p_k)` of the vertical cotangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T> {
    pub t: T,
    pub q: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Float> PhasePoint<T> {
    pub fn new(t: T, q: Vec<T>, p: Vec<T>) -> Self {
        PhasePoint { t, q, p }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.p).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub points: Vec<PhasePoint<T>>,
    pub dt: T,
    pub method: Method,
}

impl<T: Float> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &PhasePoint<T> {
        &self.points[0]
    }

    pub fn last(&self) -> &PhasePoint<T> {
        self.points.last().expect("trajectories hold at least the initial point")
    }

    pub fn times(&self) -> Vec<T> {
        self.points.iter().map(|x| x.t).collect()
    }
}

fn wrap<T: Float>(chart: Option<&Arc<Chart>>, q: &mut [T]) {
    let Some(chart) = chart else { return };
    for (i, x) in q.iter_mut().enumerate() {
        if let Topology::Circle { period } = chart.topology(i) {
            let l = T::from(period).unwrap();
            let r = *x % l;
            *x = if r < T::zero() { r + l } else { r };
        }
    }
}

/// RK4 solution of `q̇ = ∂^k H`, `ṗ = -∂_k H` from `x0` to `t1`.
///
/// The step is `dt` rounded so that an integer number of steps lands on `t1`.
pub fn integrate_hamilton<T: Float, H: Hamiltonian<T> + ?Sized>(
    h: &H,
    x0: &PhasePoint<T>,
    t1: T,
    dt: T,
) -> Result<Trajectory<T>, ClassicalError> {
    integrate_on_chart(h, None, x0, t1, dt)
}

/// As [`integrate_hamilton`], wrapping circle coordinates of `chart` after every step.
pub fn integrate_hamilton_on<T: Float, H: Hamiltonian<T> + ?Sized>(
    h: &H,
    chart: &Arc<Chart>,
    x0: &PhasePoint<T>,
    t1: T,
    dt: T,
) -> Result<Trajectory<T>, ClassicalError> {
    if chart.dim() != h.dim() {
        return Err(ClassicalError::DimensionMismatch { expected: h.dim(), got: chart.dim() });
    }
    integrate_on_chart(h, Some(chart), x0, t1, dt)
}

fn integrate_on_chart<T: Float, H: Hamiltonian<T> + ?Sized>(
    h: &H,
    chart: Option<&Arc<Chart>>,
    x0: &PhasePoint<T>,
    t1: T,
    dt: T,
) -> Result<Trajectory<T>, ClassicalError> {
    let m = h.dim();
    if x0.q.len() != m || x0.p.len() != m {
        return Err(ClassicalError::DimensionMismatch { expected: m, got: x0.q.len().max(x0.p.len()) });
    }
    let span = t1 - x0.t;
    if !(dt > T::zero()) || !dt.is_finite() || !(span >= T::zero()) || !x0.is_finite() {
        return Err(ClassicalError::BadStep);
    }
    let steps = (span / dt).round().to_usize().unwrap_or(0).max(usize::from(span > T::zero()));
    let step = if steps == 0 { dt } else { span / T::from(steps).unwrap() };
    let half = T::from(0.5).unwrap();
    let sixth = T::from(1.0 / 6.0).unwrap();
    let two = T::from(2.0).unwrap();

    let mut start = x0.clone();
    wrap(chart, &mut start.q);
    let mut points = Vec::with_capacity(steps + 1);
    points.push(start);

    let rhs = |t: T, q: &[T], p: &[T]| -> Option<(Vec<T>, Vec<T>)> {
        let (dq, dp) = h.gradient(t, q, p);
        let qdot = dp;
        let pdot: Vec<T> = dq.into_iter().map(|v| -v).collect();
        (qdot.iter().chain(&pdot).all(|v| v.is_finite())).then_some((qdot, pdot))
    };
    let axpy = |x: &[T], a: T, y: &[T]| -> Vec<T> { x.iter().zip(y).map(|(u, v)| *u + a * *v).collect() };

    for k in 0..steps {
        let x = points.last().unwrap();
        let blow = || ClassicalError::BlowUp {
            t: x.t.to_f64().unwrap_or(f64::NAN),
            last_q: x.q.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
            last_p: x.p.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        };
        let t = x0.t + step * T::from(k).unwrap();
        let (k1q, k1p) = rhs(t, &x.q, &x.p).ok_or_else(blow)?;
        let (k2q, k2p) =
            rhs(t + half * step, &axpy(&x.q, half * step, &k1q), &axpy(&x.p, half * step, &k1p)).ok_or_else(blow)?;
        let (k3q, k3p) =
            rhs(t + half * step, &axpy(&x.q, half * step, &k2q), &axpy(&x.p, half * step, &k2p)).ok_or_else(blow)?;
        let (k4q, k4p) = rhs(t + step, &axpy(&x.q, step, &k3q), &axpy(&x.p, step, &k3p)).ok_or_else(blow)?;
        let combine = |y: &[T], a: &[T], b: &[T], c: &[T], d: &[T]| -> Vec<T> {
            (0..y.len()).map(|i| y[i] + step * sixth * (a[i] + two * b[i] + two * c[i] + d[i])).collect()
        };
        let mut q = combine(&x.q, &k1q, &k2q, &k3q, &k4q);
        let p = combine(&x.p, &k1p, &k2p, &k3p, &k4p);
        let next_t = if k + 1 == steps { t1 } else { x0.t + step * T::from(k + 1).unwrap() };
        wrap(chart, &mut q);
        let next = PhasePoint { t: next_t, q, p };
        if !next.is_finite() {
            return Err(blow());
        }
        points.push(next);
    }
    Ok(Trajectory { points, dt: step, method: Method::Rk4 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::{Coordinate, Var};
    use crate::scalar::GaussianRational as G;
    use crate::scalar::Coefficient;
    use crate::symcore::Polynomial;

    type P = Polynomial<G>;

    fn oscillator() -> SymbolicHamiltonian<f64> {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        let p = P::var(&chart, Var::Momentum(0));
        let h = (&(&p * &p) + &(&q * &q)).scale(&G::from_ratio(1, 2));
        SymbolicHamiltonian::new(&h).unwrap()
    }

    #[test]
    fn free_particle_is_exact() {
        let chart = Chart::cartesian(1);
        let p = P::var(&chart, Var::Momentum(0));
        let h = SymbolicHamiltonian::<f64>::new(&(&p * &p).scale(&G::from_ratio(1, 2))).unwrap();
        let tr = integrate_hamilton(&h, &PhasePoint::new(0.0, vec![0.0], vec![1.0]), 1.0, 0.01).unwrap();
        let end = tr.last();
        assert!((end.q[0] - 1.0).abs() < 1e-13 && (end.p[0] - 1.0).abs() < 1e-15);
        assert_eq!(end.t, 1.0);
        assert_eq!(tr.len(), 101);
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let h = oscillator();
        let two_pi = 2.0 * std::f64::consts::PI;
        let tr = integrate_hamilton(&h, &PhasePoint::new(0.0, vec![1.0], vec![0.0]), two_pi, 1e-3).unwrap();
        let end = tr.last();
        assert!((end.q[0] - 1.0).abs() < 1e-9 && end.p[0].abs() < 1e-9, "{end:?}");
    }

    #[test]
    fn constant_hamiltonian_freezes() {
        let chart = Chart::cartesian(2);
        let h = SymbolicHamiltonian::<f64>::new(&P::constant(&chart, G::from_int(3))).unwrap();
        let x0 = PhasePoint::new(0.0, vec![0.3, -1.0], vec![2.0, 0.5]);
        let tr = integrate_hamilton(&h, &x0, 5.0, 0.1).unwrap();
        assert!(tr.points.iter().all(|x| x.q == x0.q && x.p == x0.p));
    }

    #[test]
    fn global_error_is_fourth_order() {
        let h = oscillator();
        let err = |dt: f64| {
            let tr = integrate_hamilton(&h, &PhasePoint::new(0.0, vec![1.0], vec![0.0]), 10.0, dt).unwrap();
            let e = tr.last();
            ((e.q[0] - 10f64.cos()).powi(2) + (e.p[0] + 10f64.sin()).powi(2)).sqrt()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn energy_drift_of_rk4_scales_with_fifth_power() {
        let h = oscillator();
        let drift = |dt: f64| {
            let tr = integrate_hamilton(&h, &PhasePoint::new(0.0, vec![1.0], vec![0.0]), 100.0, dt).unwrap();
            let e = tr.last();
            (h.value(e.t, &e.q, &e.p) - 0.5).abs()
        };
        let ratio = drift(0.1) / drift(0.05);
        assert!((28.0..=36.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn blow_up_reports_last_good_point() {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        // q̇ = 0, ṗ = -6q^5 overflows at once.
        let h = SymbolicHamiltonian::<f64>::new(&q.pow(6)).unwrap();
        let err = integrate_hamilton(&h, &PhasePoint::new(0.0, vec![1e70], vec![0.0]), 1.0, 0.1).unwrap_err();
        assert!(matches!(err, ClassicalError::BlowUp { t, .. } if t == 0.0));
    }

    #[test]
    fn rejects_bad_steps() {
        let h = oscillator();
        let x0 = PhasePoint::new(0.0, vec![1.0], vec![0.0]);
        assert_eq!(integrate_hamilton(&h, &x0, 1.0, 0.0), Err(ClassicalError::BadStep));
        assert_eq!(integrate_hamilton(&h, &x0, -1.0, 0.1), Err(ClassicalError::BadStep));
        let bad = PhasePoint::new(0.0, vec![1.0, 2.0], vec![0.0, 0.0]);
        assert!(matches!(integrate_hamilton(&h, &bad, 1.0, 0.1), Err(ClassicalError::DimensionMismatch { .. })));
    }

    #[test]
    fn circle_coordinates_wrap() {
        let chart = Chart::new("t", vec![Coordinate::circle("phi", 1.0)]).unwrap();
        let p = P::var(&chart, Var::Momentum(0));
        let h = SymbolicHamiltonian::<f64>::new(&(&p * &p).scale(&G::from_ratio(1, 2))).unwrap();
        let tr = integrate_hamilton_on(&h, &chart, &PhasePoint::new(0.0, vec![0.5], vec![1.0]), 2.25, 0.25).unwrap();
        assert!((tr.last().q[0] - 0.75).abs() < 1e-12);
        assert!(tr.points.iter().all(|x| (0.0..1.0).contains(&x.q[0])));
    }

    #[test]
    fn works_in_single_precision() {
        let chart = Chart::cartesian(1);
        let p = P::var(&chart, Var::Momentum(0));
        let h = SymbolicHamiltonian::<f32>::new(&(&p * &p).scale(&G::from_ratio(1, 2))).unwrap();
        let tr = integrate_hamilton(&h, &PhasePoint::new(0.0f32, vec![0.0], vec![2.0]), 1.0, 0.125).unwrap();
        assert!((tr.last().q[0] - 2.0).abs() < 1e-5);
    }
}
