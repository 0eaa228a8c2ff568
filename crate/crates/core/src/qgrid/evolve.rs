use num_complex::Complex64;

use super::linalg::ShiftedSolver;
use super::operator::GridOperator;
use super::wave::WaveFunction;
use crate::error::GridError;

/// Generator of the Schrödinger evolution `i ∂_t ψ = E(t) ψ`.
pub enum Generator<'a> {
    Static(&'a GridOperator),
    /// Rebuilt at each step midpoint.
    TimeDependent(&'a (dyn Fn(f64) -> Result<GridOperator, GridError> + Sync)),
}

#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    /// Record every this many steps; 0 records only the endpoints.
    pub record_every: usize,
    pub observables: Vec<(String, GridOperator)>,
    pub keep_states: bool,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub observables: Vec<(String, Vec<f64>)>,
    pub states: Vec<WaveFunction>,
    pub final_state: WaveFunction,
    pub steps: usize,
    pub dt: f64,
}

impl Evolution {
    /// Largest `|‖ψ(t)‖ - ‖ψ(0)‖|` over the recorded times.
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norms[0];
        self.norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }
}

fn cn_step(e: &GridOperator, psi: &mut [Complex64], dt: f64, solver: &ShiftedSolver) -> Result<(), GridError> {
    let ep = e.apply(psi);
    let half = Complex64::new(0.0, 0.5 * dt);
    for (v, ev) in psi.iter_mut().zip(&ep) {
        *v -= half * ev;
    }
    solver.solve_in_place(psi)
}

fn factor(e: &GridOperator, dt: f64) -> Result<ShiftedSolver, GridError> {
    ShiftedSolver::new(&e.scale(Complex64::new(0.0, 0.5 * dt)), Complex64::new(1.0, 0.0))
}

/// Crank–Nicolson propagation of `psi0` from `t0` to `t1` with step close to `dt`.
pub fn evolve(gen: Generator<'_>, psi0: &WaveFunction, t0: f64, t1: f64, dt: f64, opts: &EvolveOptions) -> Result<Evolution, GridError> {
    if !(dt.is_finite() && dt > 0.0 && t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(GridError::InvalidGrid(format!("bad time stepping: t0 = {t0}, t1 = {t1}, dt = {dt}")));
    }
    let grid = psi0.grid().clone();
    let check = |op: &GridOperator| -> Result<(), GridError> {
        if op.grid() != &grid {
            return Err(GridError::InvalidGrid("generator and state live on different grids".into()));
        }
        if !op.is_hermitian() {
            return Err(GridError::NotHermitian);
        }
        Ok(())
    };
    let steps = (((t1 - t0) / dt).round() as usize).max(usize::from(t1 > t0));
    let h = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };

    let mut psi = psi0.values().to_vec();
    let mut out = Evolution {
        times: Vec::new(),
        norms: Vec::new(),
        observables: opts.observables.iter().map(|(n, _)| (n.clone(), Vec::new())).collect(),
        states: Vec::new(),
        final_state: psi0.clone(),
        steps,
        dt: h,
    };
    let record = |t: f64, psi: &[Complex64], out: &mut Evolution| -> Result<(), GridError> {
        let state = WaveFunction::new(&grid, psi.to_vec())?;
        out.times.push(t);
        out.norms.push(state.norm());
        for ((_, op), (_, series)) in opts.observables.iter().zip(out.observables.iter_mut()) {
            series.push(state.expectation(op)?);
        }
        if opts.keep_states {
            out.states.push(state);
        }
        Ok(())
    };
    record(t0, &psi, &mut out)?;

    let fixed = match gen {
        Generator::Static(e) => {
            check(e)?;
            Some((e, factor(e, h)?))
        }
        Generator::TimeDependent(_) => None,
    };
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        match (&fixed, &gen) {
            (Some((e, solver)), _) => cn_step(e, &mut psi, h, solver)?,
            (None, Generator::TimeDependent(build)) => {
                let e = build(t + 0.5 * h)?;
                check(&e)?;
                cn_step(&e, &mut psi, h, &factor(&e, h)?)?;
            }
            (None, Generator::Static(_)) => unreachable!(),
        }
        let last = s + 1 == steps;
        if last || (opts.record_every > 0 && (s + 1) % opts.record_every == 0) {
            let tn = if last { t1 } else { t0 + (s + 1) as f64 * h };
            record(tn, &psi, &mut out)?;
        }
    }
    out.final_state = WaveFunction::new(&grid, psi)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgrid::assemble::kinetic_operator;
    use crate::qgrid::eigen::eigensolve;
    use crate::qgrid::grid::{Axis, Grid, Stencil};
    use std::sync::Arc;

    fn setup() -> (Arc<Grid>, GridOperator) {
        let g = Arc::new(Grid::new(vec![Axis::dirichlet(-8.0, 8.0, 200)], Stencil::Central(4)).unwrap());
        let v: Vec<f64> = g.points().iter().map(|q| 0.5 * q[0] * q[0]).collect();
        let e = kinetic_operator(&g, &[vec![1.0]]).unwrap().add(&GridOperator::diagonal(&g, &v)).unwrap();
        (g, e)
    }

    #[test]
    fn eigenstate_picks_up_phase() {
        let (_, e) = setup();
        let ground = eigensolve(&e, 1).unwrap().remove(0);
        let t1 = 2.0;
        let ev = evolve(Generator::Static(&e), &ground.state, 0.0, t1, 1e-3, &EvolveOptions::default()).unwrap();
        let expected = ground.state.values().iter().map(|v| v * Complex64::from_polar(1.0, -ground.value * t1)).collect();
        let expected = WaveFunction::new(ground.state.grid(), expected).unwrap();
        assert!(ev.final_state.max_abs_diff(&expected) < 1e-5);
        assert!(ev.norm_drift() < 1e-12);
        assert_eq!(ev.times, vec![0.0, 2.0]);
    }

    #[test]
    fn time_dependent_matches_static_when_constant() {
        let (g, e) = setup();
        let psi0 = WaveFunction::from_fn(&g, |q| Complex64::new((-(q[0] - 1.0).powi(2)).exp(), 0.0)).normalized().unwrap();
        let opts = EvolveOptions { record_every: 10, observables: vec![("energy".into(), e.clone())], keep_states: false };
        let a = evolve(Generator::Static(&e), &psi0, 0.0, 0.5, 0.01, &opts).unwrap();
        let build = |_t: f64| Ok(e.clone());
        let b = evolve(Generator::TimeDependent(&build), &psi0, 0.0, 0.5, 0.01, &opts).unwrap();
        assert!(a.final_state.max_abs_diff(&b.final_state) < 1e-12);
        assert_eq!(a.times.len(), 6);
        let energy = &a.observables[0].1;
        assert!(energy.iter().all(|x| (x - energy[0]).abs() < 1e-10));
    }

    #[test]
    fn rejects_bad_input() {
        let (g, e) = setup();
        let psi0 = WaveFunction::from_fn(&g, |_| Complex64::new(1.0, 0.0));
        assert!(evolve(Generator::Static(&e), &psi0, 0.0, 1.0, -0.1, &EvolveOptions::default()).is_err());
        let bad = e.scale(Complex64::new(0.0, 1.0));
        assert!(matches!(evolve(Generator::Static(&bad), &psi0, 0.0, 1.0, 0.1, &EvolveOptions::default()), Err(GridError::NotHermitian)));
    }
}
