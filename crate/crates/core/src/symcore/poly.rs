//! Sparse multivariate polynomials on the homogeneous momentum phase space.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::chartkit::chart::same_chart;
use crate::chartkit::{Chart, Var};
use crate::error::SymbolicError;
use crate::scalar::{Canonical, Coefficient, GaussianRational};

/// Exponent vector over `(t, q^1..q^m, p, p_1..p_m)`.
pub type Exponents = Vec<u32>;

/// Polynomial in the phase-space variables of a chart.
///
/// Terms are kept in a `BTreeMap` keyed by exponent vectors, so iteration
/// order is lexicographic on `(t, q.., p, p..)` and structural equality is
/// mathematical equality. Zero coefficients are never stored.
#[derive(Clone)]
pub struct Polynomial<C = GaussianRational> {
    chart: Arc<Chart>,
    terms: BTreeMap<Exponents, C>,
}

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        Polynomial { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(chart: &Arc<Chart>, c: C) -> Self {
        let exps = vec![0; chart.n_vars()];
        Self::monomial(chart, exps, c)
    }

    pub fn one(chart: &Arc<Chart>) -> Self {
        Self::constant(chart, C::one())
    }

    pub fn var(chart: &Arc<Chart>, var: Var) -> Self {
        let mut exps = vec![0; chart.n_vars()];
        exps[var.slot(chart.dim())] = 1;
        Self::monomial(chart, exps, C::one())
    }

    pub fn monomial(chart: &Arc<Chart>, exps: Exponents, c: C) -> Self {
        assert_eq!(exps.len(), chart.n_vars(), "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Polynomial { chart: chart.clone(), terms }
    }

    pub fn from_terms(chart: &Arc<Chart>, terms: impl IntoIterator<Item = (Exponents, C)>) -> Self {
        let mut p = Self::zero(chart);
        for (e, c) in terms {
            assert_eq!(e.len(), chart.n_vars(), "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exps: Exponents, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn same_chart(&self, other: &Self) -> bool {
        same_chart(&self.chart, &other.chart)
    }

    pub fn check_chart(&self, other: &Self) -> Result<(), SymbolicError> {
        if self.same_chart(other) {
            Ok(())
        } else {
            Err(SymbolicError::ChartMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &C)> {
        self.terms.iter()
    }

    /// The constant term.
    pub fn constant_term(&self) -> C {
        self.terms.get(&vec![0; self.chart.n_vars()]).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn degree_in(&self, var: Var) -> u32 {
        let s = var.slot(self.chart.dim());
        self.terms.keys().map(|e| e[s]).max().unwrap_or(0)
    }

    pub fn depends_on(&self, var: Var) -> bool {
        self.degree_in(var) > 0
    }

    /// Maximal total degree in the momenta `p, p_1..p_m`.
    pub fn momentum_degree(&self) -> u32 {
        let m = self.chart.dim();
        self.terms.keys().map(|e| e[m + 1..].iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Maximal total degree in the coordinates `q^1..q^m`.
    pub fn coordinate_degree(&self) -> u32 {
        let m = self.chart.dim();
        self.terms.keys().map(|e| e[1..=m].iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn is_momentum_free(&self) -> bool {
        self.momentum_degree() == 0
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(Coefficient::is_real)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(&self.chart);
        }
        let terms = self
            .terms
            .iter()
            .filter_map(|(e, v)| {
                let w = v.clone() * c.clone();
                (!w.is_zero()).then(|| (e.clone(), w))
            })
            .collect();
        Polynomial { chart: self.chart.clone(), terms }
    }

    pub fn conj(&self) -> Self {
        let terms = self.terms.iter().map(|(e, v)| (e.clone(), v.conj())).collect();
        Polynomial { chart: self.chart.clone(), terms }
    }

    /// Partial derivative with respect to `var`.
    pub fn derivative(&self, var: Var) -> Self {
        let s = var.slot(self.chart.dim());
        let mut out = Self::zero(&self.chart);
        for (e, c) in &self.terms {
            if e[s] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            let k = e2[s];
            e2[s] -= 1;
            out.add_term(e2, c.clone() * C::from_int(k as i64));
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.chart);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitutes `replacement` for every occurrence of `var`.
    pub fn substitute(&self, var: Var, replacement: &Self) -> Self {
        assert!(self.same_chart(replacement), "chart mismatch in substitute");
        let s = var.slot(self.chart.dim());
        let mut powers: Vec<Self> = vec![Self::one(&self.chart)];
        let mut out = Self::zero(&self.chart);
        for (e, c) in &self.terms {
            let k = e[s] as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap() * replacement;
                powers.push(next);
            }
            let mut rest = e.clone();
            rest[s] = 0;
            let base = Self::monomial(&self.chart, rest, c.clone());
            out = &out + &(&base * &powers[k]);
        }
        out
    }

    /// Splits into the coefficient of each listed variable (degree one) and a
    /// remainder free of them. Returns `None` if some term has total degree
    /// above one in the listed variables.
    pub fn linear_split(&self, vars: &[Var]) -> Option<(Vec<Self>, Self)> {
        let m = self.chart.dim();
        let slots: Vec<usize> = vars.iter().map(|v| v.slot(m)).collect();
        let mut coeffs = vec![Self::zero(&self.chart); vars.len()];
        let mut rest = Self::zero(&self.chart);
        for (e, c) in &self.terms {
            let deg: u32 = slots.iter().map(|&s| e[s]).sum();
            match deg {
                0 => rest.add_term(e.clone(), c.clone()),
                1 => {
                    let k = slots.iter().position(|&s| e[s] == 1).unwrap();
                    let mut e2 = e.clone();
                    e2[slots[k]] = 0;
                    coeffs[k].add_term(e2, c.clone());
                }
                _ => return None,
            }
        }
        Some((coeffs, rest))
    }

    /// Coefficientwise conversion into another ring.
    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut out = Polynomial::<D>::zero(&self.chart);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Evaluates at a full phase-space point `(t, q.., p, p..)`.
    pub fn eval_c64(&self, point: &[f64]) -> Complex64 {
        assert_eq!(point.len(), self.chart.n_vars(), "point dimension");
        let mut acc = Complex64::zero();
        for (e, c) in &self.terms {
            let mut v = c.to_c64();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    v *= x.powi(k as i32);
                }
            }
            acc += v;
        }
        acc
    }

    /// Real part of the value at `(t, q)` with all momenta set to zero.
    pub fn eval_tq(&self, t: f64, q: &[f64]) -> f64 {
        let mut point = vec![0.0; self.chart.n_vars()];
        point[0] = t;
        point[1..=q.len()].copy_from_slice(q);
        self.eval_c64(&point).re
    }

    /// Compiled real evaluator; fails on complex coefficients.
    pub fn compile<T: Float>(&self) -> Result<NumericPolynomial<T>, SymbolicError> {
        if !self.is_real() {
            return Err(SymbolicError::ComplexCoefficients);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (T::from(c.to_c64().re).unwrap_or_else(T::nan), e.clone()))
            .collect();
        Ok(NumericPolynomial { n_vars: self.chart.n_vars(), dim: self.chart.dim(), terms })
    }
}

impl<C: Coefficient> PartialEq for Polynomial<C> {
    fn eq(&self, other: &Self) -> bool {
        self.same_chart(other) && self.terms == other.terms
    }
}

impl<C: Coefficient> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl<C: Coefficient> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let m = self.chart.dim();
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(s, &x)| {
                    let name = self.chart.var_name(Var::from_slot(s, m));
                    if x == 1 {
                        name
                    } else {
                        format!("{name}^{x}")
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", Canonical(c))?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else if (-c.clone()).is_one() {
                write!(f, "-{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", Canonical(c), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: &Polynomial<C>) -> Polynomial<C> {
        assert!(self.same_chart(rhs), "chart mismatch in addition");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Coefficient> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: &Polynomial<C>) -> Polynomial<C> {
        assert!(self.same_chart(rhs), "chart mismatch in subtraction");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coefficient> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: &Polynomial<C>) -> Polynomial<C> {
        assert!(self.same_chart(rhs), "chart mismatch in multiplication");
        let mut out = Polynomial::zero(&self.chart);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect();
        Polynomial { chart: self.chart.clone(), terms }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl<C: Coefficient> $tr for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: Polynomial<C>) -> Polynomial<C> {
                (&self).$method(&rhs)
            }
        }
        impl<C: Coefficient> $tr<&Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coefficient> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        -&self
    }
}

/// Real polynomial compiled for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct NumericPolynomial<T> {
    n_vars: usize,
    dim: usize,
    terms: Vec<(T, Exponents)>,
}

impl<T: Float> NumericPolynomial<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value at a full phase-space point `(t, q.., p, p..)`.
    pub fn eval(&self, point: &[T]) -> T {
        debug_assert_eq!(point.len(), self.n_vars);
        self.terms.iter().fold(T::zero(), |acc, (c, e)| {
            let mut v = *c;
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    v = v * x.powi(k as i32);
                }
            }
            acc + v
        })
    }

    /// Value at `(t, q, p_k)` with the time momentum set to zero.
    pub fn eval_vertical(&self, t: T, q: &[T], p: &[T]) -> T {
        let mut point = Vec::with_capacity(self.n_vars);
        point.push(t);
        point.extend_from_slice(q);
        point.push(T::zero());
        point.extend_from_slice(p);
        self.eval(&point)
    }

    pub fn eval_tq(&self, t: T, q: &[T]) -> T {
        let zeros = vec![T::zero(); self.dim];
        self.eval_vertical(t, q, &zeros)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::gaussian;

    type P = Polynomial<GaussianRational>;

    fn q(chart: &Arc<Chart>) -> P {
        P::var(chart, Var::Coord(0))
    }

    #[test]
    fn no_zero_terms_after_cancellation() {
        let chart = Chart::cartesian(1);
        let x = q(&chart);
        let z = &x - &x;
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
        assert_eq!(z, P::zero(&chart));
    }

    #[test]
    fn product_and_derivative() {
        let chart = Chart::cartesian(1);
        let x = q(&chart);
        let p = P::var(&chart, Var::Momentum(0));
        let f = &(&x * &x) * &p; // q^2 p
        assert_eq!(f.derivative(Var::Coord(0)), (&x * &p).scale(&GaussianRational::from_int(2)));
        assert_eq!(f.derivative(Var::Momentum(0)), &x * &x);
        assert_eq!(f.momentum_degree(), 1);
        assert_eq!(f.to_string(), "q1^2*p_q1");
    }

    #[test]
    fn substitution_composes() {
        let chart = Chart::cartesian(1);
        let x = q(&chart);
        let t = P::var(&chart, Var::Time);
        let f = &x * &x;
        let shifted = f.substitute(Var::Coord(0), &(&x + &t));
        let expect = &(&(&x * &x) + &(&x * &t).scale(&GaussianRational::from_int(2))) + &(&t * &t);
        assert_eq!(shifted, expect);
    }

    #[test]
    fn canonical_print_order() {
        let chart = Chart::cartesian(2);
        let f = P::from_terms(
            &chart,
            vec![
                (vec![0, 0, 1, 0, 0, 0], gaussian((1, 2), (0, 1))),
                (vec![1, 0, 0, 0, 0, 0], -GaussianRational::from_int(1)),
                (vec![0, 0, 0, 0, 0, 0], gaussian((0, 1), (3, 1))),
            ],
        );
        assert_eq!(f.to_string(), "3*i + 1/2*q2 + -t");
    }

    #[test]
    fn linear_split_detects_nonlinear() {
        let chart = Chart::cartesian(1);
        let x = q(&chart);
        let p = P::var(&chart, Var::Momentum(0));
        let f = &(&x * &p) + &x;
        let (coeffs, rest) = f.linear_split(&[Var::Momentum(0)]).unwrap();
        assert_eq!(coeffs[0], x);
        assert_eq!(rest, x);
        assert!((&p * &p).linear_split(&[Var::Momentum(0)]).is_none());
    }

    #[test]
    fn compiled_matches_exact() {
        let chart = Chart::cartesian(1);
        let x = q(&chart);
        let t = P::var(&chart, Var::Time);
        let f = &(&x * &x).scale(&gaussian((3, 4), (0, 1))) - &t;
        let c = f.compile::<f64>().unwrap();
        assert!((c.eval_tq(0.5, &[2.0]) - 2.5).abs() < 1e-15);
        assert!((f.eval_tq(0.5, &[2.0]) - 2.5).abs() < 1e-15);
        assert!(P::constant(&chart, GaussianRational::imag_unit()).compile::<f64>().is_err());
    }
}
