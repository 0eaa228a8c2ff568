//! Characteristics of a reference frame: `dq/dt = Γ(t, q)`.
//!
//! Trajectories are integrated with the Dormand–Prince 5(4) pair and
//! stored node by node together with the local rates, which is enough for
//! cubic Hermite interpolation between nodes.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::chartkit::{Chart, ReferenceFrame, Topology, Var};
use crate::error::ChartError;
use crate::scalar::{Coefficient, GaussianRational};
use crate::symcore::{NumericPolynomial, Polynomial};

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions<T> {
    /// Absolute and relative local error tolerance.
    pub tolerance: T,
    /// Trajectories whose norm exceeds this radius have left the chart.
    pub escape_radius: T,
    pub max_steps: usize,
}

impl<T: Float> Default for FlowOptions<T> {
    fn default() -> Self {
        FlowOptions {
            tolerance: T::from(1e-10).unwrap(),
            escape_radius: T::from(1e12).unwrap(),
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory<T> {
    pub times: Vec<T>,
    /// Unwrapped positions; see [`FrameFlow::position`] for wrapped values.
    pub states: Vec<Vec<T>>,
    pub rates: Vec<Vec<T>>,
}

impl<T: Float> FlowTrajectory<T> {
    fn locate(&self, t: T) -> usize {
        let forward = self.times.last().copied().unwrap_or(t) >= self.times[0];
        let n = self.times.len();
        let idx = self
            .times
            .partition_point(|&s| if forward { s <= t } else { s >= t });
        idx.clamp(1, n.max(2) - 1) - 1
    }

    /// Cubic Hermite interpolant and its time derivative at `t`.
    pub fn interpolate(&self, t: T) -> (Vec<T>, Vec<T>) {
        if self.times.len() == 1 {
            return (self.states[0].clone(), self.rates[0].clone());
        }
        let k = self.locate(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let one = T::one();
        let two = T::from(2.0).unwrap();
        let three = T::from(3.0).unwrap();
        let six = T::from(6.0).unwrap();
        let h00 = (one + two * s) * (one - s) * (one - s);
        let h10 = s * (one - s) * (one - s);
        let h01 = s * s * (three - two * s);
        let h11 = s * s * (s - one);
        let d00 = six * s * (s - one) / h;
        let d10 = (one - s) * (one - three * s);
        let d01 = -d00;
        let d11 = s * (three * s - two);
        let (y0, y1) = (&self.states[k], &self.states[k + 1]);
        let (f0, f1) = (&self.rates[k], &self.rates[k + 1]);
        let pos = (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]).collect();
        let vel = (0..y0.len()).map(|i| d00 * y0[i] + d10 * f0[i] + d01 * y1[i] + d11 * f1[i]).collect();
        (pos, vel)
    }
}

/// Sampled map `(t, q̄) ↦ q(t, q̄)` of adapted coordinates.
#[derive(Debug, Clone)]
pub struct FrameFlow<T> {
    pub t0: T,
    pub t1: T,
    pub tolerance: T,
    chart: Arc<Chart>,
    field: Vec<NumericPolynomial<T>>,
    pub trajectories: Vec<FlowTrajectory<T>>,
}

fn wrap_into<T: Float>(chart: &Chart, q: &mut [T]) {
    for (i, x) in q.iter_mut().enumerate() {
        if let Topology::Circle { period } = chart.topology(i) {
            let p = T::from(period).unwrap();
            let r = *x % p;
            *x = if r < T::zero() { r + p } else { r };
        }
    }
}

fn eval_field<T: Float>(chart: &Chart, field: &[NumericPolynomial<T>], t: T, y: &[T]) -> Vec<T> {
    let mut q = y.to_vec();
    wrap_into(chart, &mut q);
    field.iter().map(|g| g.eval_tq(t, &q)).collect()
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn integrate<T: Float>(
    chart: &Chart,
    field: &[NumericPolynomial<T>],
    t0: T,
    t1: T,
    y0: &[T],
    opts: &FlowOptions<T>,
    index: usize,
) -> Result<FlowTrajectory<T>, ChartError> {
    let c = |x: f64| T::from(x).unwrap();
    let dir = if t1 >= t0 { T::one() } else { -T::one() };
    let span = (t1 - t0).abs();
    let tol = opts.tolerance;
    let n = y0.len();

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f = eval_field(chart, field, t, &y);
    let mut traj = FlowTrajectory { times: vec![t], states: vec![y.clone()], rates: vec![f.clone()] };
    if span == T::zero() {
        return Ok(traj);
    }
    let mut h = (span * c(1e-3)).min(tol.powf(c(0.2)) * c(0.1)).max(span * c(1e-8));
    let min_step = span * c(1e-14);
    let ts = [C2, C3, C4, C5, 1.0, 1.0];

    for _ in 0..opts.max_steps {
        if (t1 - t) * dir <= T::zero() {
            return Ok(traj);
        }
        let remaining = (t1 - t).abs();
        if h > remaining {
            h = remaining;
        }
        let mut k = vec![f.clone()];
        for stage in 0..6 {
            let yi: Vec<T> = (0..n)
                .map(|i| y[i] + dir * h * (0..=stage).fold(T::zero(), |acc, j| acc + c(A[stage][j]) * k[j][i]))
                .collect();
            k.push(eval_field(chart, field, t + dir * h * c(ts[stage]), &yi));
        }
        // Stage 7 of the first-same-as-last pair lands on the fifth-order solution.
        let y_new: Vec<T> = (0..n)
            .map(|i| y[i] + dir * h * (0..6).fold(T::zero(), |acc, j| acc + c(A[5][j]) * k[j][i]))
            .collect();
        let mut err = T::zero();
        for i in 0..n {
            let e = dir * h * (0..7).fold(T::zero(), |acc, j| acc + c(E[j]) * k[j][i]);
            let scale = tol + tol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            return Err(ChartError::FlowEscape { trajectory: index, t: t.to_f64().unwrap_or(f64::NAN) });
        }
        // The interpolant must also satisfy the ODE between nodes.
        let mid = FlowTrajectory {
            times: vec![t, t + dir * h],
            states: vec![y.clone(), y_new.clone()],
            rates: vec![f.clone(), k[6].clone()],
        };
        let tm = t + dir * h * c(0.5);
        let (qm, vm) = mid.interpolate(tm);
        let gm = eval_field(chart, field, tm, &qm);
        let defect = vm.iter().zip(&gm).fold(T::zero(), |acc, (a, b)| {
            acc.max((*a - *b).abs() / (tol + tol * b.abs()))
        });
        let defect = if defect.is_finite() { defect } else { c(1e6) };
        if err <= T::one() && defect <= T::one() {
            t = t + dir * h;
            y = y_new;
            f = k[6].clone();
            let norm = y.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
            if norm > opts.escape_radius {
                return Err(ChartError::FlowEscape { trajectory: index, t: t.to_f64().unwrap_or(f64::NAN) });
            }
            traj.times.push(t);
            traj.states.push(y.clone());
            traj.rates.push(f.clone());
        }
        let grow = |e: T, order: f64| if e == T::zero() { c(5.0) } else { (c(0.9) * e.powf(c(-1.0 / order))).min(c(5.0)).max(c(0.2)) };
        let factor = grow(err, 5.0).min(grow(defect, 3.0));
        h = h * factor;
        if h < min_step && (t1 - t).abs() > min_step {
            return Err(ChartError::StiffFlow { trajectory: index, t: t.to_f64().unwrap_or(f64::NAN) });
        }
    }
    Err(ChartError::StiffFlow { trajectory: index, t: t.to_f64().unwrap_or(f64::NAN) })
}

fn compile_frame<T: Float, C: Coefficient>(frame: &ReferenceFrame<C>) -> Result<Vec<NumericPolynomial<T>>, ChartError> {
    frame.components().iter().map(|g| g.compile::<T>().map_err(ChartError::from)).collect()
}

/// Integrates the characteristics of `frame` from each initial point.
pub fn adapted_flow<T: Float, C: Coefficient>(
    frame: &ReferenceFrame<C>,
    t0: T,
    t1: T,
    initial_points: &[Vec<T>],
    opts: &FlowOptions<T>,
) -> Result<FrameFlow<T>, ChartError> {
    if !(t1 > t0) {
        return Err(ChartError::InvalidFlow("t1 must exceed t0".into()));
    }
    if !(opts.tolerance > T::zero()) {
        return Err(ChartError::InvalidFlow("tolerance must be positive".into()));
    }
    let chart = frame.chart();
    let field = compile_frame::<T, C>(frame)?;
    let mut trajectories = Vec::with_capacity(initial_points.len());
    for (idx, y0) in initial_points.iter().enumerate() {
        if y0.len() != chart.dim() {
            return Err(crate::error::SymbolicError::DimensionMismatch { expected: chart.dim(), got: y0.len() }.into());
        }
        let mut start = y0.clone();
        wrap_into(chart, &mut start);
        trajectories.push(integrate(chart, &field, t0, t1, &start, opts, idx)?);
    }
    Ok(FrameFlow { t0, t1, tolerance: opts.tolerance, chart: chart.clone(), field, trajectories })
}

/// Adapted coordinates `q̄(t, q)`: follows the characteristic through
/// `(t, q)` back to the reference time `t0`.
pub fn adapted_coordinates<T: Float, C: Coefficient>(
    frame: &ReferenceFrame<C>,
    t0: T,
    t: T,
    q: &[T],
    opts: &FlowOptions<T>,
) -> Result<Vec<T>, ChartError> {
    let chart = frame.chart();
    let field = compile_frame::<T, C>(frame)?;
    let traj = integrate(chart, &field, t, t0, q, opts, 0)?;
    let mut end = traj.states.last().unwrap().clone();
    wrap_into(chart, &mut end);
    Ok(end)
}

impl<T: Float> FrameFlow<T> {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Position `q(t, q̄)` of trajectory `index`, circle coordinates wrapped.
    pub fn position(&self, index: usize, t: T) -> Vec<T> {
        let (mut q, _) = self.trajectories[index].interpolate(t);
        wrap_into(&self.chart, &mut q);
        q
    }

    pub fn end_points(&self) -> Vec<Vec<T>> {
        (0..self.trajectories.len()).map(|i| self.position(i, self.t1)).collect()
    }

    /// Largest defect `|dq/dt - Γ(t, q)|` of the interpolated trajectories,
    /// sampled at the nodes and step midpoints.
    pub fn max_residual(&self) -> T {
        let half = T::from(0.5).unwrap();
        let mut worst = T::zero();
        for traj in &self.trajectories {
            for k in 0..traj.times.len() {
                let mut samples = vec![traj.times[k]];
                if k + 1 < traj.times.len() {
                    samples.push((traj.times[k] + traj.times[k + 1]) * half);
                }
                for s in samples {
                    let (q, v) = traj.interpolate(s);
                    let g = eval_field(&self.chart, &self.field, s, &q);
                    for (a, b) in v.iter().zip(&g) {
                        worst = worst.max((*a - *b).abs());
                    }
                }
            }
        }
        worst
    }

    /// Least-squares fit of the sampled map by `q(t, q̄) = A(t) q̄ + b(t)`
    /// with entries polynomial in `t` of degree `time_degree`.
    ///
    /// Needs `m + 1` affinely independent initial points; the fit is exact
    /// (up to solver error) for affine frames.
    pub fn affine_fit(&self, samples: usize, time_degree: usize) -> Result<Vec<Polynomial<GaussianRational>>, ChartError> {
        let m = self.chart.dim();
        let n_traj = self.trajectories.len();
        if n_traj < m + 1 || samples < time_degree + 1 {
            return Err(ChartError::InvalidFlow("not enough trajectories or samples for an affine fit".into()));
        }
        let to64 = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let (t0, t1) = (to64(self.t0), to64(self.t1));
        let starts: Vec<Vec<f64>> = self.trajectories.iter().map(|tr| tr.states[0].iter().map(|&x| to64(x)).collect()).collect();

        // Rows: [q̄ (m), 1]; unknowns: row i of [A | b].
        let design = DMatrix::from_fn(n_traj, m + 1, |r, c| if c < m { starts[r][c] } else { 1.0 });
        let mut per_time: Vec<(f64, DMatrix<f64>)> = Vec::with_capacity(samples);
        for s in 0..samples {
            let t = if samples == 1 { t0 } else { t0 + (t1 - t0) * s as f64 / (samples - 1) as f64 };
            let tt = T::from(t).unwrap();
            let rhs = DMatrix::from_fn(n_traj, m, |r, c| to64(self.trajectories[r].interpolate(tt).0[c]));
            let svd = design.clone().svd(true, true);
            let coeffs = svd.solve(&rhs, 1e-12).map_err(|e| ChartError::InvalidFlow(e.to_string()))?;
            per_time.push((t, coeffs));
        }

        let vander = DMatrix::from_fn(samples, time_degree + 1, |r, k| per_time[r].0.powi(k as i32));
        let vsvd = vander.svd(true, true);
        let chart = &self.chart;
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let mut comp = Polynomial::zero(chart);
            for c in 0..=m {
                let series = DVector::from_fn(samples, |r, _| per_time[r].1[(c, i)]);
                let poly = vsvd.solve(&series, 1e-14).map_err(|e| ChartError::InvalidFlow(e.to_string()))?;
                for k in 0..=time_degree {
                    let coef = GaussianRational::from_f64(poly[k])
                        .ok_or_else(|| ChartError::InvalidFlow("non-finite fit coefficient".into()))?;
                    let mut term = Polynomial::var(chart, Var::Time).pow(k as u32).scale(&coef);
                    if c < m {
                        term = &term * &Polynomial::var(chart, Var::Coord(c));
                    }
                    comp = &comp + &term;
                }
            }
            out.push(comp);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::Coordinate;
    use crate::scalar::GaussianRational as G;

    type P = Polynomial<G>;

    fn rk4_oracle(f: impl Fn(f64, f64) -> f64, y0: f64, t1: f64, steps: usize) -> f64 {
        let h = t1 / steps as f64;
        let mut y = y0;
        for s in 0..steps {
            let t = s as f64 * h;
            let k1 = f(t, y);
            let k2 = f(t + h / 2.0, y + h / 2.0 * k1);
            let k3 = f(t + h / 2.0, y + h / 2.0 * k2);
            let k4 = f(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        y
    }

    #[test]
    fn constant_frame_translates() {
        let chart = Chart::cartesian(2);
        let frame = ReferenceFrame::constant(&chart, &[G::from_ratio(7, 10), G::from_int(-1)]).unwrap();
        let flow = adapted_flow(&frame, 0.0, 1.0, &[vec![0.0, 0.0]], &FlowOptions::default()).unwrap();
        let end = &flow.end_points()[0];
        assert!((end[0] - 0.7).abs() < 1e-12 && (end[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_frame_is_identity() {
        let chart = Chart::cartesian(1);
        let frame = ReferenceFrame::<G>::zero(&chart);
        let flow = adapted_flow(&frame, 0.0, 3.0, &[vec![1.5], vec![-2.0]], &FlowOptions::default()).unwrap();
        for t in [0.0, 0.7, 3.0] {
            assert!((flow.position(0, t)[0] - 1.5).abs() < 1e-14);
            assert!((flow.position(1, t)[0] + 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_growth_hits_e() {
        let chart = Chart::cartesian(1);
        let frame = ReferenceFrame::new(&chart, vec![P::var(&chart, Var::Coord(0))]).unwrap();
        let flow = adapted_flow(&frame, 0.0, 1.0, &[vec![1.0]], &FlowOptions::default()).unwrap();
        let end = flow.end_points()[0][0];
        let oracle = rk4_oracle(|_, y| y, 1.0, 1.0, 20_000);
        assert!((oracle - std::f64::consts::E).abs() < 1e-12);
        assert!((end - std::f64::consts::E).abs() < 1e-8, "end = {end}");
        assert!(flow.max_residual() < 1e-8);
    }

    #[test]
    fn blowup_is_reported_as_escape() {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        let frame = ReferenceFrame::new(&chart, vec![&q * &q]).unwrap();
        let err = adapted_flow(&frame, 0.0, 2.0, &[vec![1.0]], &FlowOptions::default()).unwrap_err();
        assert!(matches!(err, ChartError::FlowEscape { .. } | ChartError::StiffFlow { .. }));
    }

    #[test]
    fn circle_positions_wrap() {
        let chart = Chart::new("t", vec![Coordinate::circle("phi", 1.0)]).unwrap();
        let frame = ReferenceFrame::constant(&chart, &[G::from_ratio(3, 10)]).unwrap();
        let flow = adapted_flow(&frame, 0.0, 5.0, &[vec![0.2]], &FlowOptions::default()).unwrap();
        let end = flow.end_points()[0][0];
        assert!((end - 0.7).abs() < 1e-10, "end = {end}");
    }

    #[test]
    fn backward_pullback_recovers_start() {
        let chart = Chart::cartesian(1);
        let t = P::var(&chart, Var::Time);
        let q = P::var(&chart, Var::Coord(0));
        let frame = ReferenceFrame::new(&chart, vec![&q.scale(&G::from_ratio(1, 2)) + &t]).unwrap();
        let opts = FlowOptions::default();
        let flow = adapted_flow(&frame, 0.0, 1.0, &[vec![0.3]], &opts).unwrap();
        let end = flow.end_points()[0].clone();
        let back = adapted_coordinates(&frame, 0.0, 1.0, &end, &opts).unwrap();
        assert!((back[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn adapted_coordinates_are_constant_along_characteristics() {
        // ∂_q q̄ Γ + ∂_t q̄ = 0 by centered differences.
        let chart = Chart::cartesian(1);
        let t = P::var(&chart, Var::Time);
        let q = P::var(&chart, Var::Coord(0));
        let frame = ReferenceFrame::new(&chart, vec![&(&q * &t) + &P::one(&chart)]).unwrap();
        let opts = FlowOptions { tolerance: 1e-12, ..FlowOptions::default() };
        let (t_s, q_s, d) = (0.8, 0.4, 1e-4);
        let qbar = |t: f64, q: f64| adapted_coordinates(&frame, 0.0, t, &[q], &opts).unwrap()[0];
        let dq = (qbar(t_s, q_s + d) - qbar(t_s, q_s - d)) / (2.0 * d);
        let dt = (qbar(t_s + d, q_s) - qbar(t_s - d, q_s)) / (2.0 * d);
        let gamma = frame.velocity(t_s, &[q_s])[0];
        assert!((dq * gamma + dt).abs() < 1e-6);
    }
}
