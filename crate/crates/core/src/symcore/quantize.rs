//! Prequantum and Schrödinger maps, the Dirac condition and the quantum connection.

use std::fmt;

use crate::chartkit::Var;
use crate::error::SymbolicError;
use crate::scalar::{Coefficient, GaussianRational};
use crate::symcore::mechanics::{poisson_t, poisson_v};
use crate::symcore::{FirstOrderOperator, Polynomial};

/// Which momentum phase space an observable lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseSpace {
    /// Vertical cotangent bundle, momenta `p_1..p_m`.
    Vertical,
    /// Homogeneous phase space, momenta `p, p_1..p_m`.
    Homogeneous,
}

impl PhaseSpace {
    /// Conjugate pairs `(momentum, configuration variable)` summed over by `λ`.
    pub fn pairs(self, m: usize) -> Vec<(Var, Var)> {
        let mut out = Vec::with_capacity(m + 1);
        if self == PhaseSpace::Homogeneous {
            out.push((Var::TimeMomentum, Var::Time));
        }
        out.extend((0..m).map(|k| (Var::Momentum(k), Var::Coord(k))));
        out
    }

    pub fn bracket<C: Coefficient>(self, f: &Polynomial<C>, g: &Polynomial<C>) -> Result<Polynomial<C>, SymbolicError> {
        match self {
            PhaseSpace::Vertical => poisson_v(f, g),
            PhaseSpace::Homogeneous => poisson_t(f, g),
        }
    }
}

impl fmt::Display for PhaseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseSpace::Vertical => "V",
            PhaseSpace::Homogeneous => "T",
        })
    }
}

/// Observable `a^λ(t, q) p_λ + b(t, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineObservable<C: Coefficient = GaussianRational> {
    space: PhaseSpace,
    momentum: Vec<Polynomial<C>>,
    base: Polynomial<C>,
}

impl<C: Coefficient> AffineObservable<C> {
    /// Reads the affine structure off a real polynomial.
    pub fn new(f: &Polynomial<C>, space: PhaseSpace) -> Result<Self, SymbolicError> {
        if !f.is_real() {
            return Err(SymbolicError::ComplexCoefficients);
        }
        Self::complexified(f, space)
    }

    /// As [`AffineObservable::new`] but admits complex coefficients. Both
    /// quantization maps are complex linear, so identities checked on these
    /// observables are the complex-bilinear extensions of the real ones.
    pub fn complexified(f: &Polynomial<C>, space: PhaseSpace) -> Result<Self, SymbolicError> {
        let chart = f.chart();
        if space == PhaseSpace::Vertical && f.depends_on(Var::TimeMomentum) {
            return Err(SymbolicError::DependsOnTimeMomentum(f.to_string()));
        }
        let vars: Vec<Var> = space.pairs(chart.dim()).into_iter().map(|(p, _)| p).collect();
        let not_affine = || SymbolicError::NotInQuantumAlgebra(f.to_string());
        let (momentum, base) = f.linear_split(&vars).ok_or_else(not_affine)?;
        if momentum.iter().any(|a| !a.is_momentum_free()) {
            return Err(not_affine());
        }
        Ok(AffineObservable { space, momentum, base })
    }

    /// Builds `a^λ p_λ + b` from its coefficients, `λ` ordered as in [`PhaseSpace::pairs`].
    pub fn from_coefficients(space: PhaseSpace, momentum: Vec<Polynomial<C>>, base: Polynomial<C>) -> Result<Self, SymbolicError> {
        let m = base.chart().dim();
        let expected = space.pairs(m).len();
        if momentum.len() != expected {
            return Err(SymbolicError::DimensionMismatch { expected, got: momentum.len() });
        }
        for a in momentum.iter().chain(std::iter::once(&base)) {
            base.check_chart(a)?;
            if !a.is_momentum_free() {
                return Err(SymbolicError::NotInQuantumAlgebra(a.to_string()));
            }
        }
        Ok(AffineObservable { space, momentum, base })
    }

    pub fn space(&self) -> PhaseSpace {
        self.space
    }

    pub fn momentum_coefficients(&self) -> &[Polynomial<C>] {
        &self.momentum
    }

    pub fn base(&self) -> &Polynomial<C> {
        &self.base
    }

    pub fn to_polynomial(&self) -> Polynomial<C> {
        let chart = self.base.chart();
        self.space
            .pairs(chart.dim())
            .iter()
            .zip(&self.momentum)
            .fold(self.base.clone(), |acc, ((p, _), a)| &acc + &(a * &Polynomial::var(chart, *p)))
    }
}

/// Kostant–Souriau operator `-i(∂^λf ∂_λ - ∂_λf ∂^λ) + (f - p_λ∂^λf)`.
pub fn prequantum_op<C: Coefficient>(f: &Polynomial<C>, space: PhaseSpace) -> FirstOrderOperator<C> {
    let chart = f.chart();
    let mi = -C::imag_unit();
    let mut derivs = Vec::new();
    let mut liouville = Polynomial::zero(chart);
    for (p, x) in space.pairs(chart.dim()) {
        let dp = f.derivative(p);
        derivs.push((p, f.derivative(x).scale(&C::imag_unit())));
        liouville = &liouville + &(&Polynomial::var(chart, p) * &dp);
        derivs.push((x, dp.scale(&mi)));
    }
    FirstOrderOperator::from_parts(f - &liouville, derivs)
}

/// Schrödinger operator with a configurable divergence factor; the true map uses ½.
pub fn schrodinger_op_with_divergence<C: Coefficient>(f: &AffineObservable<C>, divergence: &C) -> FirstOrderOperator<C> {
    let chart = f.base.chart();
    let mi = -C::imag_unit();
    let mut derivs = Vec::new();
    let mut div = Polynomial::zero(chart);
    for ((_, x), a) in f.space.pairs(chart.dim()).into_iter().zip(&f.momentum) {
        div = &div + &a.derivative(x);
        derivs.push((x, a.scale(&mi)));
    }
    let zeroth = &f.base + &div.scale(&(mi * divergence.clone()));
    FirstOrderOperator::from_parts(zeroth, derivs)
}

/// Deliberately wrong Schrödinger map whose divergence term sums every first
/// partial `∂_μ a^λ` of the coefficients over the base variables instead of
/// the trace. Exists so tests can show that the Dirac check catches it.
pub fn schrodinger_op_corrupted<C: Coefficient>(f: &AffineObservable<C>) -> FirstOrderOperator<C> {
    let chart = f.base.chart();
    let mi = -C::imag_unit();
    let half = C::from_ratio(1, 2);
    let base: Vec<Var> = std::iter::once(Var::Time).chain((0..chart.dim()).map(Var::Coord)).collect();
    let mut derivs = Vec::new();
    let mut div = Polynomial::zero(chart);
    for ((_, x), a) in f.space.pairs(chart.dim()).into_iter().zip(&f.momentum) {
        for v in &base {
            div = &div + &a.derivative(*v);
        }
        derivs.push((x, a.scale(&mi)));
    }
    let zeroth = &f.base + &div.scale(&(mi * half));
    FirstOrderOperator::from_parts(zeroth, derivs)
}

/// Schrödinger operator `-i a^λ∂_λ - (i/2)∂_λ a^λ + b`.
pub fn schrodinger_op<C: Coefficient>(f: &AffineObservable<C>) -> FirstOrderOperator<C> {
    schrodinger_op_with_divergence(f, &C::from_ratio(1, 2))
}

/// A quantization map together with the phase space it acts over.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantization<C: Coefficient = GaussianRational> {
    Prequantum(PhaseSpace),
    Schrodinger(PhaseSpace),
    /// Schrödinger map with the divergence factor ½ replaced. The Dirac
    /// condition holds for every constant factor; only Hermiticity singles out ½.
    SchrodingerWithDivergence(PhaseSpace, C),
    /// See [`schrodinger_op_corrupted`].
    CorruptedDivergence(PhaseSpace),
}

impl<C: Coefficient> Quantization<C> {
    pub fn space(&self) -> PhaseSpace {
        match self {
            Quantization::Prequantum(s)
            | Quantization::Schrodinger(s)
            | Quantization::SchrodingerWithDivergence(s, _)
            | Quantization::CorruptedDivergence(s) => *s,
        }
    }

    /// Image of `f`; Schrödinger maps admit complex affine inputs.
    pub fn apply(&self, f: &Polynomial<C>) -> Result<FirstOrderOperator<C>, SymbolicError> {
        match self {
            Quantization::Prequantum(s) => {
                if !f.is_real() {
                    return Err(SymbolicError::ComplexCoefficients);
                }
                Ok(prequantum_op(f, *s))
            }
            Quantization::Schrodinger(s) => Ok(schrodinger_op(&AffineObservable::complexified(f, *s)?)),
            Quantization::SchrodingerWithDivergence(s, c) => {
                Ok(schrodinger_op_with_divergence(&AffineObservable::complexified(f, *s)?, c))
            }
            Quantization::CorruptedDivergence(s) => Ok(schrodinger_op_corrupted(&AffineObservable::complexified(f, *s)?)),
        }
    }

    /// Prequantum image of a complex polynomial, defined by linearity.
    fn apply_linear(&self, f: &Polynomial<C>) -> Result<FirstOrderOperator<C>, SymbolicError> {
        match self {
            Quantization::Prequantum(s) => Ok(prequantum_op(f, *s)),
            _ => self.apply(f),
        }
    }
}

impl<C: Coefficient> fmt::Display for Quantization<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantization::Prequantum(s) => write!(f, "prequantum/{s}"),
            Quantization::Schrodinger(s) => write!(f, "schrodinger/{s}"),
            Quantization::SchrodingerWithDivergence(s, c) => {
                write!(f, "schrodinger/{s} (divergence factor {})", crate::scalar::Canonical(c))
            }
            Quantization::CorruptedDivergence(s) => write!(f, "schrodinger/{s} (corrupted divergence)"),
        }
    }
}

/// Outcome of a Dirac-condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracReport<C: Coefficient = GaussianRational> {
    /// `[f̂, ĝ]`
    pub commutator: FirstOrderOperator<C>,
    /// `-i` times the image of `{f, g}`
    pub expected: FirstOrderOperator<C>,
    /// `commutator - expected`; zero exactly when the check passes.
    pub witness: FirstOrderOperator<C>,
}

impl<C: Coefficient> DiracReport<C> {
    pub fn passed(&self) -> bool {
        self.witness.is_zero()
    }
}

/// Verifies `[f̂, ĝ] = -i (map of {f, g})` as an exact operator identity.
pub fn check_dirac<C: Coefficient>(
    f: &Polynomial<C>,
    g: &Polynomial<C>,
    map: &Quantization<C>,
) -> Result<DiracReport<C>, SymbolicError> {
    let fh = map.apply(f)?;
    let gh = map.apply(g)?;
    let bracket = map.space().bracket(f, g)?;
    let commutator = fh.commutator(&gh);
    let expected = map.apply_linear(&bracket)?.scale(&-C::imag_unit());
    let witness = &commutator - &expected;
    Ok(DiracReport { commutator, expected, witness })
}

/// Quantum connection `∇̂ f̂ = i[Ĥ*, f̂]` for an affine covariant Hamiltonian.
pub fn quantum_connection_bracket<C: Coefficient>(
    h_star: &AffineObservable<C>,
    f: &AffineObservable<C>,
) -> Result<FirstOrderOperator<C>, SymbolicError> {
    if h_star.space() != PhaseSpace::Homogeneous {
        return Err(SymbolicError::NotInQuantumAlgebra(format!(
            "{} (covariant Hamiltonian must include the time momentum)",
            h_star.to_polynomial()
        )));
    }
    if f.space() != PhaseSpace::Vertical {
        return Err(SymbolicError::DependsOnTimeMomentum(f.to_polynomial().to_string()));
    }
    h_star.base().check_chart(f.base())?;
    let hh = schrodinger_op(h_star);
    let fh = schrodinger_op(f);
    Ok(hh.commutator(&fh).scale(&C::imag_unit()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::Chart;
    use crate::scalar::GaussianRational as G;
    use std::sync::Arc;

    type P = Polynomial<G>;
    type Op = FirstOrderOperator<G>;

    fn i() -> G {
        G::imag_unit()
    }

    fn setup() -> (Arc<Chart>, P, P, P, P) {
        let chart = Chart::cartesian(1);
        let t = P::var(&chart, Var::Time);
        let q = P::var(&chart, Var::Coord(0));
        let pt = P::var(&chart, Var::TimeMomentum);
        let p = P::var(&chart, Var::Momentum(0));
        (chart, t, q, pt, p)
    }

    #[test]
    fn prequantum_examples() {
        let (chart, _, q, _, p) = setup();
        assert_eq!(prequantum_op(&p, PhaseSpace::Vertical), Op::derivation(Var::Coord(0), P::constant(&chart, -i())));
        let expect = Op::from_parts(q.clone(), [(Var::Momentum(0), P::constant(&chart, i()))]);
        assert_eq!(prequantum_op(&q, PhaseSpace::Vertical), expect);
        assert_eq!(prequantum_op(&P::one(&chart), PhaseSpace::Homogeneous), Op::identity(&chart));
    }

    #[test]
    fn schrodinger_examples() {
        let (chart, _, q, _, p) = setup();
        let sp = schrodinger_op(&AffineObservable::new(&p, PhaseSpace::Vertical).unwrap());
        assert_eq!(sp, Op::derivation(Var::Coord(0), P::constant(&chart, -i())));
        let b = &q * &q;
        let sb = schrodinger_op(&AffineObservable::new(&b, PhaseSpace::Vertical).unwrap());
        assert_eq!(sb, Op::multiplication(b));
        let sqp = schrodinger_op(&AffineObservable::new(&(&q * &p), PhaseSpace::Vertical).unwrap());
        let expect = Op::from_parts(P::constant(&chart, -i() * G::from_ratio(1, 2)), [(Var::Coord(0), q.scale(&-i()))]);
        assert_eq!(sqp, expect);
    }

    #[test]
    fn affine_observable_rejects() {
        let (_, _, q, pt, p) = setup();
        assert!(matches!(AffineObservable::new(&(&p * &p), PhaseSpace::Vertical), Err(SymbolicError::NotInQuantumAlgebra(_))));
        assert!(matches!(AffineObservable::new(&(&pt * &p), PhaseSpace::Homogeneous), Err(SymbolicError::NotInQuantumAlgebra(_))));
        assert!(matches!(AffineObservable::new(&pt, PhaseSpace::Vertical), Err(SymbolicError::DependsOnTimeMomentum(_))));
        assert_eq!(AffineObservable::new(&q.scale(&i()), PhaseSpace::Vertical), Err(SymbolicError::ComplexCoefficients));
        let f = &(&q * &p) + &pt;
        assert_eq!(AffineObservable::new(&f, PhaseSpace::Homogeneous).unwrap().to_polynomial(), f);
    }

    #[test]
    fn dirac_examples() {
        let (_, _, q, _, p) = setup();
        let schr = Quantization::Schrodinger(PhaseSpace::Vertical);
        let report = check_dirac(&(&q * &p), &p, &schr).unwrap();
        assert!(report.passed());
        assert_eq!(report.commutator, Op::derivation(Var::Coord(0), P::one(q.chart())));

        let pre = Quantization::Prequantum(PhaseSpace::Vertical);
        let report = check_dirac(&q, &p, &pre).unwrap();
        assert!(report.passed());
        assert_eq!(report.commutator, Op::multiplication(P::constant(q.chart(), i())));

        let f = &(&q * &q * &p) + &q;
        assert!(check_dirac(&f, &f, &schr).unwrap().passed());
        assert!(check_dirac(&f, &f, &pre).unwrap().commutator.is_zero());
    }

    #[test]
    fn corrupted_divergence_fails_dirac() {
        let (_, t, q, _, p) = setup();
        let bad = Quantization::CorruptedDivergence(PhaseSpace::Vertical);
        let report = check_dirac(&(&(&t * &q) * &p), &(&q * &p), &bad).unwrap();
        assert!(!report.passed());
        assert!(report.witness.is_multiplication());
    }

    #[test]
    fn any_constant_divergence_factor_satisfies_dirac() {
        let (_, t, q, _, p) = setup();
        let f = &(&(&q * &q) * &p) + &(&t * &p);
        let g = &(&q * &p) + &(&q * &q);
        for factor in [G::from_ratio(1, 3), G::from_int(-2), G::from_int(0)] {
            let map = Quantization::SchrodingerWithDivergence(PhaseSpace::Vertical, factor);
            assert!(check_dirac(&f, &g, &map).unwrap().passed());
        }
    }

    #[test]
    fn quantum_connection_examples() {
        let (chart, t, q, pt, p) = setup();
        let h0 = AffineObservable::new(&pt, PhaseSpace::Homogeneous).unwrap();
        let fp = AffineObservable::new(&p, PhaseSpace::Vertical).unwrap();
        assert!(quantum_connection_bracket(&h0, &fp).unwrap().is_zero());

        let f = AffineObservable::new(&(&(&t * &q) * &p), PhaseSpace::Vertical).unwrap();
        let got = quantum_connection_bracket(&h0, &f).unwrap();
        // i[-i∂_t, f̂] = ∂_t f̂ = -i q ∂_q - i/2
        let expect = Op::from_parts(P::constant(&chart, -i() * G::from_ratio(1, 2)), [(Var::Coord(0), q.scale(&-i()))]);
        assert_eq!(got, expect);

        let g = G::from_ratio(3, 4);
        let hg = AffineObservable::new(&(&pt + &p.scale(&g)), PhaseSpace::Homogeneous).unwrap();
        assert!(quantum_connection_bracket(&hg, &fp).unwrap().is_zero());
    }
}
