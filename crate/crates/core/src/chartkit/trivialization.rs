//! Reference frames induced by time-dependent affine trivializations.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chartkit::{Chart, ReferenceFrame, Var};
use crate::error::ChartError;
use crate::scalar::Coefficient;
use crate::symcore::Polynomial;

/// Affine map `q = A(t) q̄ + b(t)` with polynomial entries.
#[derive(Debug, Clone)]
pub struct AffineTrivialization<C: Coefficient> {
    chart: Arc<Chart>,
    linear: Vec<Vec<Polynomial<C>>>,
    offset: Vec<Polynomial<C>>,
}

impl<C: Coefficient> AffineTrivialization<C> {
    /// Reads `A` and `b` off components written in `(t, q̄)`; the chart's
    /// coordinate variables stand for `q̄`.
    pub fn from_components(chart: &Arc<Chart>, map: &[Polynomial<C>]) -> Result<Self, ChartError> {
        let m = chart.dim();
        if map.len() != m {
            return Err(crate::error::SymbolicError::DimensionMismatch { expected: m, got: map.len() }.into());
        }
        let coords: Vec<Var> = (0..m).map(Var::Coord).collect();
        let mut linear = Vec::with_capacity(m);
        let mut offset = Vec::with_capacity(m);
        for (i, comp) in map.iter().enumerate() {
            if !comp.is_momentum_free() {
                return Err(ChartError::NotAffine(i));
            }
            let (row, rest) = comp.linear_split(&coords).ok_or(ChartError::NotAffine(i))?;
            linear.push(row);
            offset.push(rest);
        }
        Ok(AffineTrivialization { chart: chart.clone(), linear, offset })
    }

    pub fn linear(&self) -> &[Vec<Polynomial<C>>] {
        &self.linear
    }

    pub fn offset(&self) -> &[Polynomial<C>] {
        &self.offset
    }

    pub fn determinant(&self) -> Polynomial<C> {
        determinant(&self.linear, &self.chart)
    }

    /// Connection `Γ^i(t, q) = ∂_t q^i(t, q̄)` re-expressed through `q̄ = A⁻¹(q - b)`.
    pub fn frame(&self) -> Result<ReferenceFrame<C>, ChartError> {
        let chart = &self.chart;
        let m = chart.dim();
        let det = self.determinant();
        if det.is_zero() {
            return Err(ChartError::NonInvertibleMap);
        }
        let adj = adjugate(&self.linear, chart);
        let a_dot: Vec<Vec<Polynomial<C>>> =
            self.linear.iter().map(|row| row.iter().map(|a| a.derivative(Var::Time)).collect()).collect();
        let shifted: Vec<Polynomial<C>> =
            (0..m).map(|j| &Polynomial::var(chart, Var::Coord(j)) - &self.offset[j]).collect();

        let mut comps = Vec::with_capacity(m);
        for i in 0..m {
            let mut numerator = Polynomial::zero(chart);
            for k in 0..m {
                if a_dot[i][k].is_zero() {
                    continue;
                }
                for (j, s) in shifted.iter().enumerate() {
                    numerator = &numerator + &(&(&a_dot[i][k] * &adj[k][j]) * s);
                }
            }
            let quotient = divide_by_time_polynomial(&numerator, &det).ok_or(ChartError::NonPolynomialResult)?;
            comps.push(&quotient + &self.offset[i].derivative(Var::Time));
        }
        ReferenceFrame::new(chart, comps)
    }
}

/// Frame of the trivialization `q = q(t, q̄)` given by affine components.
pub fn frame_from_trivialization<C: Coefficient>(
    chart: &Arc<Chart>,
    map: &[Polynomial<C>],
) -> Result<ReferenceFrame<C>, ChartError> {
    AffineTrivialization::from_components(chart, map)?.frame()
}

fn minor<C: Coefficient>(m: &[Vec<Polynomial<C>>], row: usize, col: usize) -> Vec<Vec<Polynomial<C>>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

fn determinant<C: Coefficient>(m: &[Vec<Polynomial<C>>], chart: &Arc<Chart>) -> Polynomial<C> {
    match m.len() {
        0 => Polynomial::one(chart),
        1 => m[0][0].clone(),
        n => (0..n).fold(Polynomial::zero(chart), |acc, j| {
            if m[0][j].is_zero() {
                return acc;
            }
            let term = &m[0][j] * &determinant(&minor(m, 0, j), chart);
            if j % 2 == 0 {
                &acc + &term
            } else {
                &acc - &term
            }
        }),
    }
}

fn adjugate<C: Coefficient>(m: &[Vec<Polynomial<C>>], chart: &Arc<Chart>) -> Vec<Vec<Polynomial<C>>> {
    let n = m.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = determinant(&minor(m, j, i), chart);
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        -&c
                    }
                })
                .collect()
        })
        .collect()
}

/// Exact quotient `num / den` where `den` depends on `t` only; `None` when
/// the division leaves a remainder.
pub(crate) fn divide_by_time_polynomial<C: Coefficient>(num: &Polynomial<C>, den: &Polynomial<C>) -> Option<Polynomial<C>> {
    let chart = num.chart();
    let tslot = Var::Time.slot(chart.dim());
    let den_deg = den.degree_in(Var::Time) as usize;
    let mut den_coeffs = vec![C::zero(); den_deg + 1];
    for (e, c) in den.terms() {
        debug_assert!(e.iter().enumerate().all(|(s, &k)| s == tslot || k == 0));
        den_coeffs[e[tslot] as usize] = c.clone();
    }
    let lead_inv = den_coeffs[den_deg].inverse()?;

    let mut groups: BTreeMap<Vec<u32>, Vec<C>> = BTreeMap::new();
    for (e, c) in num.terms() {
        let mut rest = e.clone();
        let k = rest[tslot] as usize;
        rest[tslot] = 0;
        let g = groups.entry(rest).or_default();
        if g.len() <= k {
            g.resize(k + 1, C::zero());
        }
        g[k] = c.clone();
    }

    let mut out = Polynomial::zero(chart);
    for (rest, mut coeffs) in groups {
        if coeffs.len() <= den_deg {
            if coeffs.iter().all(|c| c.is_zero()) {
                continue;
            }
            return None;
        }
        let qlen = coeffs.len() - den_deg;
        let mut quot = vec![C::zero(); qlen];
        for k in (0..qlen).rev() {
            let factor = coeffs[k + den_deg].clone() * lead_inv.clone();
            for (j, d) in den_coeffs.iter().enumerate() {
                coeffs[k + j] = coeffs[k + j].clone() - factor.clone() * d.clone();
            }
            quot[k] = factor;
        }
        if coeffs.iter().any(|c| !c.is_zero()) {
            return None;
        }
        for (k, c) in quot.into_iter().enumerate() {
            let mut e = rest.clone();
            e[tslot] = k as u32;
            out = &out + &Polynomial::monomial(chart, e, c);
        }
    }
    Some(out)
}
