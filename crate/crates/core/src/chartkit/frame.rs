use std::sync::Arc;

use crate::chartkit::{Chart, Var};
use crate::error::{ChartError, SymbolicError};
use crate::scalar::{Coefficient, GaussianRational};
use crate::symcore::{FirstOrderOperator, Polynomial};

/// Connection `Γ = dt ⊗ (∂_t + Γ^i(t, q) ∂_i)` on the configuration bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFrame<C: Coefficient = GaussianRational> {
    chart: Arc<Chart>,
    components: Vec<Polynomial<C>>,
}

impl<C: Coefficient> ReferenceFrame<C> {
    pub fn new(chart: &Arc<Chart>, components: Vec<Polynomial<C>>) -> Result<Self, ChartError> {
        if components.len() != chart.dim() {
            return Err(SymbolicError::DimensionMismatch { expected: chart.dim(), got: components.len() }.into());
        }
        for (i, c) in components.iter().enumerate() {
            if !crate::chartkit::chart::same_chart(c.chart(), chart) {
                return Err(SymbolicError::ChartMismatch.into());
            }
            if !c.is_momentum_free() {
                return Err(ChartError::MomentumDependentFrame(i));
            }
        }
        Ok(ReferenceFrame { chart: chart.clone(), components })
    }

    /// The frame whose adapted coordinates are the chart itself.
    pub fn zero(chart: &Arc<Chart>) -> Self {
        ReferenceFrame { chart: chart.clone(), components: vec![Polynomial::zero(chart); chart.dim()] }
    }

    /// Constant observer velocity `Γ^i = G^i`.
    pub fn constant(chart: &Arc<Chart>, velocity: &[C]) -> Result<Self, ChartError> {
        let comps = velocity.iter().map(|g| Polynomial::constant(chart, g.clone())).collect();
        Self::new(chart, comps)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial<C>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial<C> {
        &self.components[i]
    }

    /// Components are affine in `q`.
    pub fn is_affine(&self) -> bool {
        self.components.iter().all(|c| c.coordinate_degree() <= 1)
    }

    pub fn is_time_independent(&self) -> bool {
        self.components.iter().all(|c| !c.depends_on(Var::Time))
    }

    /// `Γ^i(t, q)` evaluated as reals.
    pub fn velocity(&self, t: f64, q: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_tq(t, q)).collect()
    }

    /// The Hamiltonian `H_Γ = Γ^k p_k` defined by the frame.
    pub fn hamiltonian(&self) -> Polynomial<C> {
        self.components.iter().enumerate().fold(Polynomial::zero(&self.chart), |acc, (k, g)| {
            &acc + &(g * &Polynomial::var(&self.chart, Var::Momentum(k)))
        })
    }

    /// Horizontal lift `∂_Γ = ∂_t + Γ^i ∂_i` of the standard field on the time axis.
    pub fn horizontal_lift(&self) -> VectorField<C> {
        VectorField { time: Polynomial::one(&self.chart), components: self.components.clone() }
    }

    pub fn difference(&self, other: &Self) -> Result<Self, ChartError> {
        if self.dim() != other.dim() {
            return Err(SymbolicError::DimensionMismatch { expected: self.dim(), got: other.dim() }.into());
        }
        let comps = self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect();
        Self::new(&self.chart, comps)
    }
}

/// Relative velocity `q_t^i - Γ^i(t, q)` of a jet point with respect to the frame.
pub fn relative_velocity<C: Coefficient>(frame: &ReferenceFrame<C>, t: f64, q: &[f64], q_t: &[f64]) -> Vec<f64> {
    frame.velocity(t, q).iter().zip(q_t).map(|(g, v)| v - g).collect()
}

/// Vector field `u = u^t ∂_t + u^i ∂_i` on the configuration space.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<C: Coefficient = GaussianRational> {
    pub time: Polynomial<C>,
    pub components: Vec<Polynomial<C>>,
}

impl<C: Coefficient> VectorField<C> {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        VectorField { time: Polynomial::zero(chart), components: vec![Polynomial::zero(chart); chart.dim()] }
    }

    pub fn new(time: Polynomial<C>, components: Vec<Polynomial<C>>) -> Result<Self, SymbolicError> {
        let chart = time.chart().clone();
        if components.len() != chart.dim() {
            return Err(SymbolicError::DimensionMismatch { expected: chart.dim(), got: components.len() });
        }
        for c in &components {
            time.check_chart(c)?;
        }
        Ok(VectorField { time, components })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.time.chart()
    }

    pub fn neg(&self) -> Self {
        VectorField { time: -&self.time, components: self.components.iter().map(|c| -c).collect() }
    }

    /// Fails unless every component depends on `(t, q)` only.
    pub fn check_projectable(&self) -> Result<(), SymbolicError> {
        if !self.time.is_momentum_free() {
            return Err(SymbolicError::NotProjectable(format!("u^t = {}", self.time)));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !c.is_momentum_free() {
                return Err(SymbolicError::NotProjectable(format!("u^{} = {}", i + 1, c)));
            }
        }
        Ok(())
    }
}

/// Lift `ũ = u^t ∂_t + u^i ∂_i - (∂_i u^j) p_j ∂^i` onto the momentum phase space.
pub fn lift_vector_field<C: Coefficient>(u: &VectorField<C>) -> Result<FirstOrderOperator<C>, SymbolicError> {
    u.check_projectable()?;
    let chart = u.chart().clone();
    let m = chart.dim();
    let mut derivs = vec![(Var::Time, u.time.clone())];
    for (i, c) in u.components.iter().enumerate() {
        derivs.push((Var::Coord(i), c.clone()));
    }
    for i in 0..m {
        let mut coeff = Polynomial::zero(&chart);
        for (j, uj) in u.components.iter().enumerate() {
            coeff = &coeff + &(&uj.derivative(Var::Coord(i)) * &Polynomial::var(&chart, Var::Momentum(j)));
        }
        derivs.push((Var::Momentum(i), -&coeff));
    }
    Ok(FirstOrderOperator::from_parts(Polynomial::zero(&chart), derivs))
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Polynomial<GaussianRational>;

    #[test]
    fn relative_velocity_examples() {
        let chart = Chart::cartesian(1);
        let zero = ReferenceFrame::<GaussianRational>::zero(&chart);
        assert_eq!(relative_velocity(&zero, 0.3, &[1.0], &[2.5]), vec![2.5]);

        let g = ReferenceFrame::constant(&chart, &[GaussianRational::from_ratio(7, 10)]).unwrap();
        assert!(relative_velocity(&g, 1.0, &[4.0], &[0.7])[0].abs() < 1e-15);

        let lin = ReferenceFrame::new(&chart, vec![P::var(&chart, Var::Coord(0))]).unwrap();
        assert_eq!(relative_velocity(&lin, 0.0, &[2.0], &[1.0]), vec![-1.0]);
    }

    #[test]
    fn frames_reject_momenta() {
        let chart = Chart::cartesian(1);
        let bad = ReferenceFrame::new(&chart, vec![P::var(&chart, Var::Momentum(0))]);
        assert_eq!(bad, Err(ChartError::MomentumDependentFrame(0)));
    }

    #[test]
    fn lift_examples() {
        let chart = Chart::cartesian(1);
        let q = P::var(&chart, Var::Coord(0));
        let t = P::var(&chart, Var::Time);
        let p = P::var(&chart, Var::Momentum(0));

        let dt = VectorField::new(P::one(&chart), vec![P::zero(&chart)]).unwrap();
        assert_eq!(lift_vector_field(&dt).unwrap(), FirstOrderOperator::derivation(Var::Time, P::one(&chart)));

        let dil = VectorField::new(P::zero(&chart), vec![q.clone()]).unwrap();
        let expect = FirstOrderOperator::from_parts(P::zero(&chart), [(Var::Coord(0), q.clone()), (Var::Momentum(0), -&p)]);
        assert_eq!(lift_vector_field(&dil).unwrap(), expect);

        let shear = VectorField::new(P::zero(&chart), vec![t.clone()]).unwrap();
        assert_eq!(lift_vector_field(&shear).unwrap(), FirstOrderOperator::derivation(Var::Coord(0), t));

        let bad = VectorField::new(P::zero(&chart), vec![p]).unwrap();
        assert!(matches!(lift_vector_field(&bad), Err(SymbolicError::NotProjectable(_))));
    }
}
