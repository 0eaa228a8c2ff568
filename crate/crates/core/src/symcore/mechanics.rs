//! Brackets and classical structures on the momentum phase spaces.
//!
//! Sign conventions follow the literal formulas: the vertical bracket is
//! `{f, g}_V = ∂^i f ∂_i g - ∂^i g ∂_i f`, so `{q, p}_V = -1`.

use crate::chartkit::{ReferenceFrame, Var, VectorField};
use crate::error::SymbolicError;
use crate::scalar::Coefficient;
use crate::symcore::{FirstOrderOperator, Polynomial};

fn vertical_part<C: Coefficient>(f: &Polynomial<C>, g: &Polynomial<C>) -> Polynomial<C> {
    let m = f.chart().dim();
    (0..m).fold(Polynomial::zero(f.chart()), |acc, i| {
        let (q, p) = (Var::Coord(i), Var::Momentum(i));
        let fwd = &f.derivative(p) * &g.derivative(q);
        let bwd = &g.derivative(p) * &f.derivative(q);
        &(&acc + &fwd) - &bwd
    })
}

/// Degenerate Poisson bracket of the vertical cotangent bundle.
pub fn poisson_v<C: Coefficient>(f: &Polynomial<C>, g: &Polynomial<C>) -> Result<Polynomial<C>, SymbolicError> {
    f.check_chart(g)?;
    Ok(vertical_part(f, g))
}

/// Canonical Poisson bracket of the homogeneous momentum phase space.
pub fn poisson_t<C: Coefficient>(f: &Polynomial<C>, g: &Polynomial<C>) -> Result<Polynomial<C>, SymbolicError> {
    f.check_chart(g)?;
    let time = &(&f.derivative(Var::TimeMomentum) * &g.derivative(Var::Time))
        - &(&g.derivative(Var::TimeMomentum) * &f.derivative(Var::Time));
    Ok(&time + &vertical_part(f, g))
}

fn require_vertical<C: Coefficient>(h: &Polynomial<C>) -> Result<(), SymbolicError> {
    if h.depends_on(Var::TimeMomentum) {
        Err(SymbolicError::DependsOnTimeMomentum(h.to_string()))
    } else {
        Ok(())
    }
}

/// Hamilton vector field `γ_H = ∂_t + ∂^k H ∂_k - ∂_k H ∂^k`.
pub fn hamilton_field<C: Coefficient>(h: &Polynomial<C>) -> Result<FirstOrderOperator<C>, SymbolicError> {
    if !h.is_real() {
        return Err(SymbolicError::ComplexCoefficients);
    }
    require_vertical(h)?;
    let chart = h.chart();
    let mut derivs = vec![(Var::Time, Polynomial::one(chart))];
    for k in 0..chart.dim() {
        derivs.push((Var::Coord(k), h.derivative(Var::Momentum(k))));
        derivs.push((Var::Momentum(k), -&h.derivative(Var::Coord(k))));
    }
    Ok(FirstOrderOperator::from_parts(Polynomial::zero(chart), derivs))
}

/// Covariant Hamiltonian `H* = p + H`.
pub fn covariant_hamiltonian<C: Coefficient>(h: &Polynomial<C>) -> Polynomial<C> {
    h + &Polynomial::var(h.chart(), Var::TimeMomentum)
}

/// Evolution bracket `{H*, ζ* f}_T`; it vanishes exactly for integrals of motion.
pub fn evolution_bracket<C: Coefficient>(h: &Polynomial<C>, f: &Polynomial<C>) -> Result<Polynomial<C>, SymbolicError> {
    poisson_t(&covariant_hamiltonian(h), f)
}

/// Energy `E_Γ = H - Γ^i p_i` relative to the frame.
pub fn energy_function<C: Coefficient>(h: &Polynomial<C>, frame: &ReferenceFrame<C>) -> Result<Polynomial<C>, SymbolicError> {
    if frame.dim() != h.chart().dim() {
        return Err(SymbolicError::DimensionMismatch { expected: h.chart().dim(), got: frame.dim() });
    }
    let hg = frame.hamiltonian();
    h.check_chart(&hg)?;
    Ok(h - &hg)
}

/// Symmetry current `T_u = p_i u^i - u^t H`.
pub fn symmetry_current<C: Coefficient>(u: &VectorField<C>, h: &Polynomial<C>) -> Result<Polynomial<C>, SymbolicError> {
    u.check_projectable()?;
    h.check_chart(&u.time)?;
    let chart = h.chart();
    let flux = u.components.iter().enumerate().fold(Polynomial::zero(chart), |acc, (i, ui)| {
        &acc + &(ui * &Polynomial::var(chart, Var::Momentum(i)))
    });
    Ok(&flux - &(&u.time * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::Chart;
    use crate::scalar::GaussianRational as G;
    use std::sync::Arc;

    type P = Polynomial<G>;

    fn vars(chart: &Arc<Chart>) -> (P, P, P, P) {
        (
            P::var(chart, Var::Time),
            P::var(chart, Var::Coord(0)),
            P::var(chart, Var::TimeMomentum),
            P::var(chart, Var::Momentum(0)),
        )
    }

    fn half() -> G {
        G::from_ratio(1, 2)
    }

    #[test]
    fn vertical_bracket_examples() {
        let chart = Chart::cartesian(1);
        let (t, q, _, p) = vars(&chart);
        assert_eq!(poisson_v(&(&q * &p), &p).unwrap(), -&p);
        assert!(poisson_v(&t, &(&q * &p)).unwrap().is_zero());
        assert_eq!(poisson_v(&q, &p).unwrap(), P::constant(&chart, G::from_int(-1)));
    }

    #[test]
    fn homogeneous_bracket_examples() {
        let chart = Chart::cartesian(1);
        let (t, q, pt, p) = vars(&chart);
        assert_eq!(poisson_t(&pt, &t).unwrap(), P::one(&chart));
        assert!(poisson_t(&p, &pt).unwrap().is_zero());
        assert!(poisson_t(&(&q * &q), &q).unwrap().is_zero());
    }

    #[test]
    fn chart_mismatch_is_an_error() {
        let a = Chart::cartesian(1);
        let b = Chart::cartesian(2);
        let err = poisson_v(&P::var(&a, Var::Coord(0)), &P::var(&b, Var::Coord(0)));
        assert_eq!(err, Err(SymbolicError::ChartMismatch));
    }

    #[test]
    fn hamilton_field_examples() {
        let chart = Chart::cartesian(1);
        let (_, _, _, p) = vars(&chart);
        let free = (&p * &p).scale(&half());
        let expect = FirstOrderOperator::from_parts(P::zero(&chart), [(Var::Time, P::one(&chart)), (Var::Coord(0), p.clone())]);
        assert_eq!(hamilton_field(&free).unwrap(), expect);
        assert_eq!(hamilton_field(&P::zero(&chart)).unwrap(), FirstOrderOperator::derivation(Var::Time, P::one(&chart)));

        let g = G::from_ratio(3, 2);
        let frame_h = p.scale(&g);
        let expect = FirstOrderOperator::from_parts(
            P::zero(&chart),
            [(Var::Time, P::one(&chart)), (Var::Coord(0), P::constant(&chart, g))],
        );
        assert_eq!(hamilton_field(&frame_h).unwrap(), expect);
        assert_eq!(hamilton_field(&p.scale(&G::imag_unit())), Err(SymbolicError::ComplexCoefficients));
    }

    #[test]
    fn evolution_bracket_examples() {
        let chart = Chart::cartesian(1);
        let (_, q, _, p) = vars(&chart);
        let h = (&p * &p).scale(&half());
        assert!(evolution_bracket(&h, &p).unwrap().is_zero());
        assert_eq!(evolution_bracket(&h, &q).unwrap(), p);
        assert!(evolution_bracket(&(&q * &p), &P::constant(&chart, G::from_int(5))).unwrap().is_zero());
    }

    #[test]
    fn evolution_bracket_is_lie_derivative_along_hamilton_field() {
        let chart = Chart::cartesian(1);
        let (t, q, _, p) = vars(&chart);
        let h = &(&(&p * &p).scale(&half()) + &(&q * &q * &q)) + &(&t * &q);
        let f = &(&t * &q * &p) + &(&q * &q);
        assert_eq!(evolution_bracket(&h, &f).unwrap(), hamilton_field(&h).unwrap().apply(&f));
    }

    #[test]
    fn covariant_hamiltonian_examples() {
        let chart = Chart::cartesian(1);
        let (_, q, pt, p) = vars(&chart);
        assert_eq!(covariant_hamiltonian(&P::zero(&chart)), pt);
        let g = G::from_ratio(2, 3);
        assert_eq!(covariant_hamiltonian(&p.scale(&g)), &pt + &p.scale(&g));
        let h = &(&p * &p).scale(&half()) + &(&q * &q);
        assert_eq!(covariant_hamiltonian(&h), &pt + &h);
    }

    #[test]
    fn energy_function_examples() {
        let chart = Chart::cartesian(1);
        let (_, q, _, p) = vars(&chart);
        let h = &(&p * &p).scale(&half()) + &(&q * &q * &q * &q);
        assert_eq!(energy_function(&h, &ReferenceFrame::zero(&chart)).unwrap(), h);
        let g = G::from_ratio(7, 10);
        let boosted = ReferenceFrame::constant(&chart, std::slice::from_ref(&g)).unwrap();
        assert_eq!(energy_function(&h, &boosted).unwrap(), &h - &p.scale(&g));
    }

    #[test]
    fn symmetry_current_examples() {
        let chart = Chart::cartesian(1);
        let (t, q, _, p) = vars(&chart);
        let h = &(&p * &p).scale(&half()) + &(&t * &q);
        let frame = ReferenceFrame::zero(&chart);
        // u = -∂_Γ gives the energy function.
        let u = frame.horizontal_lift().neg();
        assert_eq!(symmetry_current(&u, &h).unwrap(), energy_function(&h, &frame).unwrap());
        let d1 = VectorField::new(P::zero(&chart), vec![P::one(&chart)]).unwrap();
        assert_eq!(symmetry_current(&d1, &h).unwrap(), p);
        assert!(symmetry_current(&VectorField::zero(&chart), &h).unwrap().is_zero());
        let bad = VectorField::new(p.clone(), vec![P::zero(&chart)]).unwrap();
        assert!(matches!(symmetry_current(&bad, &h), Err(SymbolicError::NotProjectable(_))));
    }
}
