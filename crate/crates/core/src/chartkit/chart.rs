use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::ChartError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Line,
    Circle { period: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coordinate {
    pub name: String,
    pub topology: Topology,
}

impl Coordinate {
    pub fn line(name: impl Into<String>) -> Self {
        Coordinate { name: name.into(), topology: Topology::Line }
    }

    pub fn circle(name: impl Into<String>, period: f64) -> Self {
        Coordinate { name: name.into(), topology: Topology::Circle { period } }
    }
}

/// Phase-space variable on the homogeneous momentum phase space.
///
/// The derived order `Time < Coord(_) < TimeMomentum < Momentum(_)` is the
/// canonical variable order used for monomials and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Time,
    Coord(usize),
    /// Momentum `p` conjugate to time.
    TimeMomentum,
    /// Momentum `p_k` conjugate to `q^k`.
    Momentum(usize),
}

impl Var {
    /// Index into an exponent vector for a chart of dimension `m`.
    pub fn slot(self, m: usize) -> usize {
        match self {
            Var::Time => 0,
            Var::Coord(i) => 1 + i,
            Var::TimeMomentum => 1 + m,
            Var::Momentum(i) => 2 + m + i,
        }
    }

    pub fn from_slot(slot: usize, m: usize) -> Var {
        match slot {
            0 => Var::Time,
            s if s <= m => Var::Coord(s - 1),
            s if s == m + 1 => Var::TimeMomentum,
            s => Var::Momentum(s - m - 2),
        }
    }

    pub fn is_momentum(self) -> bool {
        matches!(self, Var::TimeMomentum | Var::Momentum(_))
    }

    /// The canonically conjugate variable.
    pub fn conjugate(self) -> Var {
        match self {
            Var::Time => Var::TimeMomentum,
            Var::TimeMomentum => Var::Time,
            Var::Coord(i) => Var::Momentum(i),
            Var::Momentum(i) => Var::Coord(i),
        }
    }
}

/// Bundle coordinates `(t, q^1..q^m)` on the configuration space.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    time: String,
    coords: Vec<Coordinate>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.starts_with("p_")
        && name != "pi"
}

impl Chart {
    pub fn new(time: impl Into<String>, coords: Vec<Coordinate>) -> Result<Arc<Chart>, ChartError> {
        let time = time.into();
        if coords.is_empty() {
            return Err(ChartError::EmptyChart);
        }
        let mut seen = HashSet::new();
        for name in std::iter::once(&time).chain(coords.iter().map(|c| &c.name)) {
            if !valid_name(name) {
                return Err(ChartError::InvalidName(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(ChartError::DuplicateName(name.clone()));
            }
        }
        for c in &coords {
            if let Topology::Circle { period } = c.topology {
                if !(period.is_finite() && period > 0.0) {
                    return Err(ChartError::BadPeriod(c.name.clone()));
                }
            }
        }
        Ok(Arc::new(Chart { time, coords }))
    }

    /// Chart `(t, q1, .., qm)` with line coordinates.
    pub fn cartesian(m: usize) -> Arc<Chart> {
        let coords = (1..=m).map(|i| Coordinate::line(format!("q{i}"))).collect();
        Chart::new("t", coords).expect("cartesian chart is valid for m >= 1")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of phase-space variables `(t, q, p, p_k)`.
    pub fn n_vars(&self) -> usize {
        2 * self.coords.len() + 2
    }

    pub fn time_name(&self) -> &str {
        &self.time
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn topology(&self, i: usize) -> Topology {
        self.coords[i].topology
    }

    pub fn var_name(&self, var: Var) -> String {
        match var {
            Var::Time => self.time.clone(),
            Var::Coord(i) => self.coords[i].name.clone(),
            Var::TimeMomentum => format!("p_{}", self.time),
            Var::Momentum(i) => format!("p_{}", self.coords[i].name),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        if name == self.time {
            return Some(Var::Time);
        }
        if let Some(i) = self.coords.iter().position(|c| c.name == name) {
            return Some(Var::Coord(i));
        }
        let base = name.strip_prefix("p_")?;
        if base == self.time {
            return Some(Var::TimeMomentum);
        }
        self.coords.iter().position(|c| c.name == base).map(Var::Momentum)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let m = self.dim();
        (0..self.n_vars()).map(move |s| Var::from_slot(s, m))
    }

    /// Wraps circle coordinates of `q` into `[0, period)`.
    pub fn wrap(&self, q: &mut [f64]) {
        for (x, c) in q.iter_mut().zip(&self.coords) {
            if let Topology::Circle { period } = c.topology {
                *x = x.rem_euclid(period);
            }
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.time)?;
        for c in &self.coords {
            write!(f, ", {}", c.name)?;
        }
        write!(f, ")")
    }
}

/// True when both handles denote the same chart.
pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_round_trip() {
        let m = 3;
        for s in 0..2 * m + 2 {
            assert_eq!(Var::from_slot(s, m).slot(m), s);
        }
    }

    #[test]
    fn names_and_lookup() {
        let chart = Chart::new("t", vec![Coordinate::line("x"), Coordinate::circle("phi", 1.0)]).unwrap();
        assert_eq!(chart.lookup("phi"), Some(Var::Coord(1)));
        assert_eq!(chart.lookup("p_x"), Some(Var::Momentum(0)));
        assert_eq!(chart.lookup("p_t"), Some(Var::TimeMomentum));
        assert_eq!(chart.lookup("y"), None);
        assert_eq!(chart.var_name(Var::Momentum(1)), "p_phi");
    }

    #[test]
    fn rejects_bad_charts() {
        assert_eq!(Chart::new("t", vec![]), Err(ChartError::EmptyChart));
        assert!(matches!(
            Chart::new("t", vec![Coordinate::line("t")]),
            Err(ChartError::DuplicateName(_))
        ));
        assert!(matches!(
            Chart::new("t", vec![Coordinate::circle("a", 0.0)]),
            Err(ChartError::BadPeriod(_))
        ));
        assert!(matches!(
            Chart::new("t", vec![Coordinate::line("p_x")]),
            Err(ChartError::InvalidName(_))
        ));
    }

    #[test]
    fn wrapping() {
        let chart = Chart::new("t", vec![Coordinate::circle("phi", 2.0), Coordinate::line("x")]).unwrap();
        let mut q = [5.5, -3.0];
        chart.wrap(&mut q);
        assert!((q[0] - 1.5).abs() < 1e-15);
        assert_eq!(q[1], -3.0);
    }
}
