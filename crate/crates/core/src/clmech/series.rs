use num_traits::Float;

use crate::clmech::{PhasePoint, Trajectory};

/// Values of an observable along a trajectory with a numerical time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    /// Centered differences inside, second-order one-sided at the ends.
    pub derivative: Vec<T>,
}

impl<T: Float> TimeSeries<T> {
    /// `max_k |f(t_k) - f(t_0)|`.
    pub fn max_deviation(&self) -> T {
        let v0 = self.values.first().copied().unwrap_or_else(T::zero);
        self.values.iter().fold(T::zero(), |acc, v| acc.max((*v - v0).abs()))
    }
}

fn differentiate<T: Float>(t: &[T], v: &[T]) -> Vec<T> {
    let n = v.len();
    match n {
        0 => vec![],
        1 => vec![T::zero()],
        2 => {
            let d = (v[1] - v[0]) / (t[1] - t[0]);
            vec![d, d]
        }
        _ => {
            let three = T::from(3.0).unwrap();
            let four = T::from(4.0).unwrap();
            let mut out = Vec::with_capacity(n);
            out.push((-three * v[0] + four * v[1] - v[2]) / (t[2] - t[0]));
            for k in 1..n - 1 {
                out.push((v[k + 1] - v[k - 1]) / (t[k + 1] - t[k - 1]));
            }
            out.push((three * v[n - 1] - four * v[n - 2] + v[n - 3]) / (t[n - 1] - t[n - 3]));
            out
        }
    }
}

/// Series `f(x(t))` along `tr`.
pub fn along_trajectory<T: Float>(f: impl Fn(&PhasePoint<T>) -> T, tr: &Trajectory<T>) -> TimeSeries<T> {
    let times = tr.times();
    let values: Vec<T> = tr.points.iter().map(f).collect();
    let derivative = differentiate(&times, &values);
    TimeSeries { times, values, derivative }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentVerdict<T> {
    pub name: String,
    pub max_deviation: T,
    pub conserved: bool,
}

/// A current is conserved when it never moves more than `tol` from its initial value.
pub fn conservation_report<T: Float>(
    currents: &[(&str, &dyn Fn(&PhasePoint<T>) -> T)],
    tr: &Trajectory<T>,
    tol: T,
) -> Vec<CurrentVerdict<T>> {
    currents
        .iter()
        .map(|(name, f)| {
            let dev = along_trajectory(f, tr).max_deviation();
            CurrentVerdict { name: name.to_string(), max_deviation: dev, conserved: dev <= tol }
        })
        .collect()
}
