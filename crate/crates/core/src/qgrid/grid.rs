use std::f64::consts::PI;
use std::fmt;

use crate::chartkit::{Chart, Topology};
use crate::error::GridError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

/// Finite-difference scheme for first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Centered differences of the given even order (2, 4, 6 or 8).
    Central(u8),
    /// Fourier collocation; periodic axes only.
    Spectral,
}

impl Default for Stencil {
    fn default() -> Self {
        Stencil::Central(2)
    }
}

impl fmt::Display for Stencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stencil::Central(o) => write!(f, "central-{o}"),
            Stencil::Spectral => write!(f, "spectral"),
        }
    }
}

impl Stencil {
    fn half_width(self) -> Option<usize> {
        match self {
            Stencil::Central(o) => Some(o as usize / 2),
            Stencil::Spectral => None,
        }
    }
}

/// One grid direction. Periodic axes hold `n` nodes `a + j h` with
/// `h = (b - a)/n`; Dirichlet axes hold the `n` interior nodes `a + (j+1) h`
/// with `h = (b - a)/(n + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub n: usize,
    pub boundary: Boundary,
}

impl Axis {
    pub fn periodic(start: f64, end: f64, n: usize) -> Self {
        Axis { start, end, n, boundary: Boundary::Periodic }
    }

    /// Periodic axis `[0, period)`.
    pub fn circle(period: f64, n: usize) -> Self {
        Self::periodic(0.0, period, n)
    }

    pub fn dirichlet(start: f64, end: f64, n: usize) -> Self {
        Axis { start, end, n, boundary: Boundary::Dirichlet }
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => (self.end - self.start) / self.n as f64,
            Boundary::Dirichlet => (self.end - self.start) / (self.n + 1) as f64,
        }
    }

    pub fn node(&self, j: usize) -> f64 {
        let h = self.spacing();
        match self.boundary {
            Boundary::Periodic => self.start + j as f64 * h,
            Boundary::Dirichlet => self.start + (j + 1) as f64 * h,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    pub fn period(&self) -> Option<f64> {
        (self.boundary == Boundary::Periodic).then_some(self.end - self.start)
    }

    fn validate(&self) -> Result<(), GridError> {
        if self.n < 8 {
            return Err(GridError::InvalidGrid(format!("axis needs at least 8 nodes, got {}", self.n)));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start) {
            return Err(GridError::InvalidGrid(format!("bad extent [{}, {}]", self.start, self.end)));
        }
        Ok(())
    }

    /// Sparse rows of the 1D first-derivative matrix.
    pub(crate) fn first_derivative(&self, stencil: Stencil) -> Vec<Vec<(usize, f64)>> {
        let h = self.spacing();
        match stencil {
            Stencil::Spectral => spectral_first(self.n, self.end - self.start),
            Stencil::Central(order) => {
                let c = first_coefficients(order);
                self.banded_rows(|k| if k == 0 { 0.0 } else { k.signum() as f64 * c[k.unsigned_abs() - 1] / h }, c.len(), false)
            }
        }
    }

    /// Sparse rows of the 1D second-derivative matrix.
    ///
    /// With `odd_at_start` a Dirichlet axis is continued as an odd function
    /// through `start` instead of by zero; the matrix stays symmetric.
    pub(crate) fn second_derivative(&self, stencil: Stencil, odd_at_start: bool) -> Vec<Vec<(usize, f64)>> {
        let h2 = self.spacing().powi(2);
        match stencil {
            Stencil::Spectral => spectral_second(self.n, self.end - self.start),
            Stencil::Central(order) => {
                let (c0, c) = second_coefficients(order);
                self.banded_rows(|k| if k == 0 { c0 / h2 } else { c[k.unsigned_abs() - 1] / h2 }, c.len(), odd_at_start)
            }
        }
    }

    fn banded_rows(&self, coeff: impl Fn(isize) -> f64, width: usize, odd_at_start: bool) -> Vec<Vec<(usize, f64)>> {
        let n = self.n as isize;
        (0..n)
            .map(|i| {
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * width + 1);
                for k in -(width as isize)..=(width as isize) {
                    let mut c = coeff(k);
                    if c == 0.0 {
                        continue;
                    }
                    let j = i + k;
                    let j = match self.boundary {
                        Boundary::Periodic => j.rem_euclid(n),
                        Boundary::Dirichlet if (0..n).contains(&j) => j,
                        // Node -1 sits on the wall; node -2 - m mirrors node m.
                        Boundary::Dirichlet if odd_at_start && j < -1 => {
                            c = -c;
                            -2 - j
                        }
                        Boundary::Dirichlet => continue,
                    } as usize;
                    match row.iter_mut().find(|(c0, _)| *c0 == j) {
                        Some(e) => e.1 += c,
                        None => row.push((j, c)),
                    }
                }
                row.sort_by_key(|e| e.0);
                row
            })
            .collect()
    }
}

fn first_coefficients(order: u8) -> Vec<f64> {
    match order {
        2 => vec![1.0 / 2.0],
        4 => vec![2.0 / 3.0, -1.0 / 12.0],
        6 => vec![3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        8 => vec![4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0],
        _ => unreachable!("stencil order validated at grid construction"),
    }
}

fn second_coefficients(order: u8) -> (f64, Vec<f64>) {
    match order {
        2 => (-2.0, vec![1.0]),
        4 => (-5.0 / 2.0, vec![4.0 / 3.0, -1.0 / 12.0]),
        6 => (-49.0 / 18.0, vec![3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0]),
        8 => (-205.0 / 72.0, vec![8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0]),
        _ => unreachable!("stencil order validated at grid construction"),
    }
}

// Fourier collocation matrices for an even number of nodes on [0, 2π),
// rescaled to the period.
fn spectral_first(n: usize, period: f64) -> Vec<Vec<(usize, f64)>> {
    let h = 2.0 * PI / n as f64;
    let scale = 2.0 * PI / period;
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = i as f64 - j as f64;
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    (j, scale * 0.5 * sign / (d * h / 2.0).tan())
                })
                .collect()
        })
        .collect()
}

fn spectral_second(n: usize, period: f64) -> Vec<Vec<(usize, f64)>> {
    let h = 2.0 * PI / n as f64;
    let scale = (2.0 * PI / period).powi(2);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        (j, scale * (-PI * PI / (3.0 * h * h) - 1.0 / 6.0))
                    } else {
                        let d = i as f64 - j as f64;
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        (j, scale * -sign / (2.0 * (d * h / 2.0).sin().powi(2)))
                    }
                })
                .collect()
        })
        .collect()
}

/// How node weights of a radial grid are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialMeasure {
    /// Weight `h`; the half-form convention.
    Unit,
    /// Weight `r² h`, the Jacobian of spherical coordinates.
    Jacobian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Uniform,
    Radial(RadialMeasure),
}

/// Tensor-product grid over the fibre coordinates; the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    stencil: Stencil,
    measure: Measure,
    weights: Vec<f64>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>, stencil: Stencil) -> Result<Self, GridError> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(GridError::InvalidGrid(format!("grids have 1 to 3 axes, got {}", axes.len())));
        }
        for a in &axes {
            a.validate()?;
        }
        match stencil {
            Stencil::Central(2 | 4 | 6 | 8) => {
                let w = stencil.half_width().unwrap();
                if axes.iter().any(|a| a.boundary == Boundary::Periodic && a.n <= 2 * w) {
                    return Err(GridError::InvalidGrid("periodic axis too short for the stencil".into()));
                }
            }
            Stencil::Central(o) => return Err(GridError::InvalidGrid(format!("unsupported stencil order {o}"))),
            Stencil::Spectral => {
                if axes.iter().any(|a| a.boundary != Boundary::Periodic || a.n % 2 != 0) {
                    return Err(GridError::InvalidGrid("spectral stencil needs periodic axes with even n".into()));
                }
            }
        }
        let cell: f64 = axes.iter().map(Axis::spacing).product();
        let size = axes.iter().map(|a| a.n).product();
        Ok(Grid { axes, stencil, measure: Measure::Uniform, weights: vec![cell; size] })
    }

    /// Radial grid on `(0, r_max)` with `n` interior nodes starting at `r = h`.
    pub fn radial(r_max: f64, n: usize, measure: RadialMeasure, stencil: Stencil) -> Result<Self, GridError> {
        let mut g = Grid::new(vec![Axis::dirichlet(0.0, r_max, n)], stencil)?;
        g.measure = Measure::Radial(measure);
        if measure == RadialMeasure::Jacobian {
            let h = g.axes[0].spacing();
            g.weights = g.axes[0].nodes().iter().map(|r| r * r * h).collect();
        }
        Ok(g)
    }

    /// Radial grid over an arbitrary Dirichlet axis; fails if it reaches `r <= 0`.
    pub fn radial_axis(axis: Axis, measure: RadialMeasure, stencil: Stencil) -> Result<Self, GridError> {
        if axis.boundary != Boundary::Dirichlet {
            return Err(GridError::InvalidGrid("radial axes are Dirichlet".into()));
        }
        if axis.start < 0.0 || axis.node(0) <= 0.0 {
            return Err(GridError::GridTouchesOrigin);
        }
        let mut g = Grid::new(vec![axis], stencil)?;
        g.measure = Measure::Radial(measure);
        if measure == RadialMeasure::Jacobian {
            let h = g.axes[0].spacing();
            g.weights = g.axes[0].nodes().iter().map(|r| r * r * h).collect();
        }
        Ok(g)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }

    /// Stride of `axis` in the flattened node index.
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.n).product()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = idx % a.n;
            idx /= a.n;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx).iter().zip(&self.axes).map(|(&j, a)| a.node(j)).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.size()).map(|i| self.point(i)).collect()
    }

    /// Checks that axes match the chart's coordinates and circle periods.
    pub fn check_chart(&self, chart: &Chart) -> Result<(), GridError> {
        if chart.dim() != self.dim() {
            return Err(GridError::DimensionMismatch { expected: chart.dim(), got: self.dim() });
        }
        for (i, a) in self.axes.iter().enumerate() {
            if let Topology::Circle { period } = chart.topology(i) {
                let ok = a.period().is_some_and(|l| (l - period).abs() <= 1e-12 * period);
                if !ok {
                    return Err(GridError::InvalidGrid(format!(
                        "axis {i} must be periodic with period {period} to match the chart"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(rows: &[Vec<(usize, f64)>], v: &[f64]) -> Vec<f64> {
        rows.iter().map(|r| r.iter().map(|(j, c)| c * v[*j]).sum()).collect()
    }

    #[test]
    fn spacing_conventions() {
        let p = Axis::periodic(0.0, 1.0, 10);
        assert_eq!(p.spacing(), 0.1);
        assert_eq!(p.node(0), 0.0);
        let d = Axis::dirichlet(0.0, 1.0, 9);
        assert!((d.spacing() - 0.1).abs() < 1e-15);
        assert!((d.node(0) - 0.1).abs() < 1e-15 && (d.node(8) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(vec![Axis::periodic(0.0, 1.0, 4)], Stencil::Central(2)).is_err());
        assert!(Grid::new(vec![Axis::dirichlet(1.0, 0.0, 16)], Stencil::Central(2)).is_err());
        assert!(Grid::new(vec![Axis::dirichlet(0.0, 1.0, 16)], Stencil::Spectral).is_err());
        assert!(Grid::new(vec![Axis::periodic(0.0, 1.0, 16)], Stencil::Central(3)).is_err());
        let a = Axis::dirichlet(-1.0, 1.0, 16);
        assert_eq!(Grid::radial_axis(a, RadialMeasure::Unit, Stencil::Central(2)), Err(GridError::GridTouchesOrigin));
    }

    #[test]
    fn stencils_differentiate_sine_at_their_order() {
        for order in [2u8, 4, 6, 8] {
            let err = |n: usize| {
                let ax = Axis::circle(2.0 * PI, n);
                let x = ax.nodes();
                let v: Vec<f64> = x.iter().map(|x| x.sin()).collect();
                let d = apply(&ax.first_derivative(Stencil::Central(order)), &v);
                let d2 = apply(&ax.second_derivative(Stencil::Central(order), false), &v);
                let e1 = d.iter().zip(&x).map(|(d, x)| (d - x.cos()).abs()).fold(0.0, f64::max);
                let e2 = d2.iter().zip(&x).map(|(d, x)| (d + x.sin()).abs()).fold(0.0, f64::max);
                e1.max(e2)
            };
            let ratio = err(32) / err(64);
            let expect = 2f64.powi(order as i32);
            assert!((ratio / expect - 1.0).abs() < 0.1, "order {order}: ratio {ratio}");
        }
    }

    #[test]
    fn spectral_is_exact_on_resolved_modes() {
        let ax = Axis::circle(3.0, 32);
        let k = 2.0 * PI / 3.0 * 5.0;
        let x = ax.nodes();
        let v: Vec<f64> = x.iter().map(|x| (k * x).cos()).collect();
        let d = apply(&ax.first_derivative(Stencil::Spectral), &v);
        let d2 = apply(&ax.second_derivative(Stencil::Spectral, false), &v);
        for ((d, d2), x) in d.iter().zip(&d2).zip(&x) {
            assert!((d + k * (k * x).sin()).abs() < 1e-11);
            assert!((d2 + k * k * (k * x).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn flattening_and_weights() {
        let g = Grid::new(vec![Axis::dirichlet(0.0, 1.0, 9), Axis::periodic(0.0, 2.0, 8)], Stencil::Central(2)).unwrap();
        assert_eq!(g.size(), 72);
        assert_eq!(g.stride(0), 8);
        assert_eq!(g.multi_index(13), vec![1, 5]);
        assert!((g.weights()[0] - 0.1 * 0.25).abs() < 1e-15);
        let r = Grid::radial(1.0, 9, RadialMeasure::Jacobian, Stencil::Central(2)).unwrap();
        assert!((r.weights()[0] - 0.01 * 0.1).abs() < 1e-15);
        assert!(!r.is_uniform());
    }
}
