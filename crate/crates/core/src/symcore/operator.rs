//! First-order differential operators with polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use crate::chartkit::chart::same_chart;
use crate::chartkit::{Chart, Var};
use crate::scalar::{Coefficient, GaussianRational};
use crate::symcore::Polynomial;

/// `a_0 + Σ_v a_v ∂/∂v` acting on polynomials of a chart.
#[derive(Clone)]
pub struct FirstOrderOperator<C = GaussianRational> {
    zeroth: Polynomial<C>,
    derivs: BTreeMap<Var, Polynomial<C>>,
}

impl<C: Coefficient> FirstOrderOperator<C> {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        FirstOrderOperator { zeroth: Polynomial::zero(chart), derivs: BTreeMap::new() }
    }

    pub fn identity(chart: &Arc<Chart>) -> Self {
        Self::multiplication(Polynomial::one(chart))
    }

    /// Multiplication by `f`.
    pub fn multiplication(f: Polynomial<C>) -> Self {
        FirstOrderOperator { zeroth: f, derivs: BTreeMap::new() }
    }

    /// `coeff ∂/∂var`.
    pub fn derivation(var: Var, coeff: Polynomial<C>) -> Self {
        let chart = coeff.chart().clone();
        let mut op = Self::zero(&chart);
        op.set_coefficient(var, coeff);
        op
    }

    pub fn from_parts(zeroth: Polynomial<C>, derivs: impl IntoIterator<Item = (Var, Polynomial<C>)>) -> Self {
        let mut op = Self::multiplication(zeroth);
        for (v, c) in derivs {
            let merged = &op.coefficient(v) + &c;
            op.set_coefficient(v, merged);
        }
        op
    }

    fn set_coefficient(&mut self, var: Var, coeff: Polynomial<C>) {
        assert!(same_chart(self.zeroth.chart(), coeff.chart()), "chart mismatch in operator");
        if coeff.is_zero() {
            self.derivs.remove(&var);
        } else {
            self.derivs.insert(var, coeff);
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.zeroth.chart()
    }

    pub fn zeroth(&self) -> &Polynomial<C> {
        &self.zeroth
    }

    /// Coefficient of `∂/∂var` (zero when absent).
    pub fn coefficient(&self, var: Var) -> Polynomial<C> {
        self.derivs.get(&var).cloned().unwrap_or_else(|| Polynomial::zero(self.chart()))
    }

    pub fn derivations(&self) -> impl Iterator<Item = (Var, &Polynomial<C>)> {
        self.derivs.iter().map(|(v, c)| (*v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.zeroth.is_zero() && self.derivs.is_empty()
    }

    /// True when the operator is a pure multiplication.
    pub fn is_multiplication(&self) -> bool {
        self.derivs.is_empty()
    }

    /// The derivation part `Σ_v a_v ∂/∂v`, i.e. the operator minus its zeroth-order term.
    pub fn vector_part(&self) -> Self {
        FirstOrderOperator { zeroth: Polynomial::zero(self.chart()), derivs: self.derivs.clone() }
    }

    pub fn apply(&self, f: &Polynomial<C>) -> Polynomial<C> {
        let mut out = &self.zeroth * f;
        for (v, c) in &self.derivs {
            out = &out + &(c * &f.derivative(*v));
        }
        out
    }

    /// Applies only the derivation part.
    pub fn derive(&self, f: &Polynomial<C>) -> Polynomial<C> {
        let mut out = Polynomial::zero(self.chart());
        for (v, c) in &self.derivs {
            out = &out + &(c * &f.derivative(*v));
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        FirstOrderOperator {
            zeroth: self.zeroth.scale(c),
            derivs: self
                .derivs
                .iter()
                .map(|(v, p)| (*v, p.scale(c)))
                .filter(|(_, p)| !p.is_zero())
                .collect(),
        }
    }

    /// Left multiplication by a polynomial: `(g·A) f = g (A f)`.
    pub fn premultiply(&self, g: &Polynomial<C>) -> Self {
        FirstOrderOperator::from_parts(&self.zeroth * g, self.derivs.iter().map(|(v, c)| (*v, c * g)))
    }

    /// Exact commutator `[self, other]`, first order because partials commute.
    pub fn commutator(&self, other: &Self) -> Self {
        assert!(same_chart(self.chart(), other.chart()), "chart mismatch in commutator");
        let zeroth = &self.derive(&other.zeroth) - &other.derive(&self.zeroth);
        let vars: std::collections::BTreeSet<Var> =
            self.derivs.keys().chain(other.derivs.keys()).copied().collect();
        let derivs = vars
            .into_iter()
            .map(|w| (w, &self.derive(&other.coefficient(w)) - &other.derive(&self.coefficient(w))));
        FirstOrderOperator::from_parts(zeroth, derivs)
    }

    /// Coefficientwise partial derivative in `var`; for `var = t` this is the
    /// commutator with `∂_t`.
    pub fn coefficient_derivative(&self, var: Var) -> Self {
        FirstOrderOperator::from_parts(
            self.zeroth.derivative(var),
            self.derivs.iter().map(|(v, c)| (*v, c.derivative(var))),
        )
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D + Copy) -> FirstOrderOperator<D> {
        FirstOrderOperator::from_parts(
            self.zeroth.map_coefficients(f),
            self.derivs.iter().map(|(v, c)| (*v, c.map_coefficients(f))),
        )
    }
}

impl<C: Coefficient> PartialEq for FirstOrderOperator<C> {
    fn eq(&self, other: &Self) -> bool {
        self.zeroth == other.zeroth && self.derivs == other.derivs
    }
}

impl<C: Coefficient> Add for &FirstOrderOperator<C> {
    type Output = FirstOrderOperator<C>;
    fn add(self, rhs: &FirstOrderOperator<C>) -> FirstOrderOperator<C> {
        FirstOrderOperator::from_parts(
            &self.zeroth + &rhs.zeroth,
            self.derivs.iter().chain(rhs.derivs.iter()).map(|(v, c)| (*v, c.clone())),
        )
    }
}

impl<C: Coefficient> Neg for &FirstOrderOperator<C> {
    type Output = FirstOrderOperator<C>;
    fn neg(self) -> FirstOrderOperator<C> {
        FirstOrderOperator { zeroth: -&self.zeroth, derivs: self.derivs.iter().map(|(v, c)| (*v, -c)).collect() }
    }
}

impl<C: Coefficient> Sub for &FirstOrderOperator<C> {
    type Output = FirstOrderOperator<C>;
    fn sub(self, rhs: &FirstOrderOperator<C>) -> FirstOrderOperator<C> {
        self + &(-rhs)
    }
}

impl<C: Coefficient> Add for FirstOrderOperator<C> {
    type Output = FirstOrderOperator<C>;
    fn add(self, rhs: FirstOrderOperator<C>) -> FirstOrderOperator<C> {
        &self + &rhs
    }
}

impl<C: Coefficient> Sub for FirstOrderOperator<C> {
    type Output = FirstOrderOperator<C>;
    fn sub(self, rhs: FirstOrderOperator<C>) -> FirstOrderOperator<C> {
        &self - &rhs
    }
}

impl<C: Coefficient> Neg for FirstOrderOperator<C> {
    type Output = FirstOrderOperator<C>;
    fn neg(self) -> FirstOrderOperator<C> {
        -&self
    }
}

impl<C: Coefficient> fmt::Display for FirstOrderOperator<C> {
    /// `{ <zeroth> ; D[v] <- <coeff> ; .. }` with derivations in canonical variable order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{ {}", self.zeroth)?;
        for (v, c) in &self.derivs {
            write!(f, " ; D[{}] <- {}", self.chart().var_name(*v), c)?;
        }
        write!(f, " }}")
    }
}

impl<C: Coefficient> fmt::Debug for FirstOrderOperator<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FirstOrderOperator{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Polynomial<GaussianRational>;
    type Op = FirstOrderOperator<GaussianRational>;

    #[test]
    fn canonical_pair_commutator_is_identity() {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        let d = Op::derivation(Var::Coord(0), P::one(&chart));
        let mul_q = Op::multiplication(q);
        assert_eq!(d.commutator(&mul_q), Op::identity(&chart));
    }

    #[test]
    fn dilation_commutator() {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        let d = Op::derivation(Var::Coord(0), P::one(&chart));
        let dil = Op::derivation(Var::Coord(0), q);
        assert_eq!(dil.commutator(&d), -&d);
    }

    #[test]
    fn self_commutator_vanishes() {
        let chart = Chart::cartesian(2);
        let q = P::var(&chart, Var::Coord(1));
        let t = P::var(&chart, Var::Time);
        let a = Op::from_parts(&q * &t, [(Var::Coord(0), &q * &q), (Var::Momentum(1), t.clone())]);
        assert!(a.commutator(&a).is_zero());
    }

    #[test]
    fn commutator_matches_composition_on_test_function() {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        let t = P::var(&chart, Var::Time);
        let a = Op::from_parts(&q * &q, [(Var::Coord(0), t.clone())]);
        let b = Op::from_parts(t.clone(), [(Var::Coord(0), &q * &q), (Var::Time, q.clone())]);
        let f = &(&q * &q * &q) + &(&t * &q);
        let direct = &a.apply(&b.apply(&f)) - &b.apply(&a.apply(&f));
        assert_eq!(a.commutator(&b).apply(&f), direct);
    }

    #[test]
    fn display_is_deterministic() {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        let op = Op::from_parts(q.clone(), [(Var::Momentum(0), -&q), (Var::Coord(0), q.clone())]);
        assert_eq!(op.to_string(), "{ q1 ; D[q1] <- q1 ; D[p_q1] <- -q1 }");
    }
}
