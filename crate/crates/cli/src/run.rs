//! Execution of validated plans.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::json;

use frameq_core::chartkit::{adapted_coordinates, adapted_flow, FlowOptions, Var};
use frameq_core::clmech::{integrate_hamilton_on, PhaseFunction, SymbolicHamiltonian, Trajectory, write_trajectory_csv};
use frameq_core::qgrid::{
    eigensolve, eigensolve_near, evolve, frame_shift, write_evolution_csv, write_snapshot, write_spectrum_csv, Eigenpair,
    EvolveOptions, Generator, GridOperator, WaveFunction,
};
use frameq_core::symcore::{energy_function, verify_identities_with, Counterexample, IdentityConfig, IdentityReport};
use frameq_core::Frame;

use crate::prepare::*;
use crate::report::{json_num, num, Check, Csv, Outcome};

type RunResult = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs `plan`; numerical failures become a failed `run` check.
pub fn execute(plan: &Plan, corrupt_divergence: bool) -> Outcome {
    let r = match &plan.task {
        Task::Identities { seed, count } => Ok(identities(*seed, *count, corrupt_divergence)),
        Task::Adapted(t) => adapted(t),
        Task::Spectrum(t) => spectrum(t),
        Task::Shift(t) => shift(t),
        Task::Evolve(t) => evolve_task(t),
        Task::Classical(t) => classical(t),
    };
    r.unwrap_or_else(|e| Outcome { checks: vec![Check::flag("run", false, e)], ..Default::default() })
}

/// Verbatim rendering of a failing identity case.
pub fn render_counterexample(suite: &str, c: &Counterexample) -> String {
    let mut s = format!("counterexample in {suite}, case {}\n", c.case);
    for (k, v) in &c.inputs {
        s.push_str(&format!("  {k} = {v}\n"));
    }
    s.push_str(&format!("  witness = {}\n", c.witness));
    s
}

pub fn run_identities(seed: u64, count: usize, corrupt_divergence: bool) -> IdentityReport {
    let cfg = IdentityConfig { corrupt_divergence, ..Default::default() };
    verify_identities_with(seed, count, &cfg)
}

fn identities(seed: u64, count: usize, corrupt: bool) -> Outcome {
    let report = run_identities(seed, count, corrupt);
    let mut csv = Csv::new(&["suite", "cases", "failures"]);
    let mut out = Outcome::default();
    let mut witnesses = String::new();
    for s in &report.suites {
        csv.row(&[s.name.to_string(), s.cases.to_string(), s.failures.to_string()]);
        out.checks.push(Check::flag(s.name, s.passed(), format!("{} of {} cases failed", s.failures, s.cases)));
        if let Some(c) = &s.first_failure {
            witnesses.push_str(&render_counterexample(s.name, c));
        }
    }
    out.summary = vec![("seed".into(), json!(seed)), ("count".into(), json!(count))];
    out.files.push(("identities.csv".into(), csv.into_bytes()));
    if !witnesses.is_empty() {
        out.files.push(("counterexamples.txt".into(), witnesses.into_bytes()));
    }
    out
}

fn adapted(t: &AdaptedTask) -> RunResult {
    let opts = FlowOptions { tolerance: t.flow_tolerance, ..Default::default() };
    let flow = adapted_flow(&t.frame, t.t0, t.t1, &t.points, &opts).map_err(err)?;
    let chart = t.frame.chart();
    let m = chart.dim();
    let mut header = vec!["trajectory".to_string(), chart.time_name().to_string()];
    header.extend((0..m).map(|k| chart.var_name(Var::Coord(k))));
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for i in 0..t.points.len() {
        for s in 0..t.samples {
            let time = t.t0 + (t.t1 - t.t0) * s as f64 / (t.samples - 1) as f64;
            let mut row = vec![i.to_string(), num(time)];
            row.extend(flow.position(i, time).into_iter().map(num));
            csv.row(&row);
        }
    }
    let residual = flow.max_residual();
    let mut roundtrip: f64 = 0.0;
    for (i, end) in flow.end_points().iter().enumerate() {
        let back = adapted_coordinates(&t.frame, t.t0, t.t1, end, &opts).map_err(err)?;
        let mut start = t.points[i].clone();
        chart.wrap(&mut start);
        let scale = 1.0 + start.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let gap = back.iter().zip(&start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        roundtrip = roundtrip.max(gap / scale);
    }
    Ok(Outcome {
        checks: vec![Check::at_most("flow residual", residual, t.tolerance), Check::at_most("round trip", roundtrip, t.tolerance)],
        summary: vec![
            ("trajectories".into(), json!(t.points.len())),
            ("nodes".into(), json!(flow.trajectories.iter().map(|x| x.times.len()).sum::<usize>())),
        ],
        files: vec![("flow.csv".into(), csv.into_bytes())],
    })
}

fn solve(op: &GridOperator, count: usize, target: Option<f64>) -> Result<Vec<Eigenpair>, String> {
    match target {
        Some(x) => eigensolve_near(op, x, count),
        None => eigensolve(op, count),
    }
    .map_err(err)
}

fn expectation_checks(values: &[f64], expect: &[f64], tol: f64) -> Vec<Check> {
    expect
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut c = Check::at_most(format!("eigenvalue {i}"), (values[i] - e).abs(), tol);
            c.detail = format!("|{} - {}| = {} <= {}", num(values[i]), num(*e), num((values[i] - e).abs()), num(tol));
            c
        })
        .collect()
}

fn levels_json(pairs: &[Eigenpair]) -> serde_json::Value {
    json!(pairs.iter().map(|p| json_num(p.value)).collect::<Vec<_>>())
}

fn spectrum(t: &SpectrumTask) -> RunResult {
    let e = t.problem.energy(t.t).map_err(err)?;
    let pairs = solve(&e, t.count, t.target)?;
    let mut buf = Vec::new();
    write_spectrum_csv(&mut buf, &pairs).map_err(err)?;
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    Ok(Outcome {
        checks: expectation_checks(&values, &t.expect, t.tolerance),
        summary: vec![
            ("grid_size".into(), json!(t.problem.grid.size())),
            ("stencil".into(), json!(t.problem.grid.stencil().to_string())),
            ("max_residual".into(), json_num(worst)),
            ("eigenvalues".into(), levels_json(&pairs)),
        ],
        files: vec![("spectrum.csv".into(), buf)],
    })
}

fn is_constant(f: &Frame) -> bool {
    f.components().iter().all(|c| c.is_constant())
}

fn shift(t: &ShiftTask) -> RunResult {
    let p = &t.problem;
    let e = p.energy(t.t).map_err(err)?;
    let shifted = frame_shift(&e, &p.frame, &t.observer, t.t).map_err(err)?;
    let pairs = eigensolve(&shifted, t.count).map_err(err)?;
    let values: Vec<f64> = pairs.iter().map(|x| x.value).collect();
    let mut out = Outcome::default();
    let zero = vec![0.0; p.grid.dim()];
    let u: Vec<f64> =
        t.observer.velocity(t.t, &zero).iter().zip(p.frame.velocity(t.t, &zero)).map(|(a, b)| a - b).collect();
    let axes = p.grid.axes();
    let constant = is_constant(&p.frame) && is_constant(&t.observer);
    let rotor = constant && axes.len() == 1 && axes[0].period().is_some() && matches!(p.potential, Potential::Zero);
    let dirichlet = constant && axes.iter().all(|a| a.period().is_none());

    let table = if rotor {
        // Plane waves e^{inq}: E' = E + (Γ - Γ') 2πn/L.
        let period = axes[0].period().unwrap();
        let ns = pairs.iter().map(|x| x.state.fourier_index()).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let needed = (2 * ns.iter().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0) + 1).min(p.grid.size());
        let rest = eigensolve(&e, needed).map_err(err)?;
        let mut csv = Csv::new(&["n", "E", "E_shifted", "predicted", "abs_delta"]);
        let mut worst: f64 = 0.0;
        for (pair, &n) in pairs.iter().zip(&ns) {
            let guess = pair.state.expectation(&e).map_err(err)?;
            let rest_e = rest.iter().map(|r| r.value).fold(f64::NAN, |a, v| if a.is_nan() || (v - guess).abs() < (a - guess).abs() { v } else { a });
            let predicted = rest_e - u[0] * 2.0 * PI * n as f64 / period;
            let delta = (pair.value - predicted).abs();
            worst = worst.max(delta);
            csv.row(&[n.to_string(), num(rest_e), num(pair.value), num(predicted), num(delta)]);
        }
        out.checks.push(Check::at_most("max |delta|", worst, t.tolerance));
        csv
    } else if dirichlet {
        // Completing the square: E' = E - ½ u·m·u with u = Γ' - Γ.
        let rest = eigensolve(&e, t.count).map_err(err)?;
        let mu: Vec<f64> = p.mass.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect();
        let b = -0.5 * mu.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        let mut csv = Csv::new(&["index", "E", "E_shifted", "predicted", "abs_delta"]);
        let mut worst: f64 = 0.0;
        for (i, (r, s)) in rest.iter().zip(&pairs).enumerate() {
            let predicted = r.value + b;
            let delta = (s.value - predicted).abs();
            worst = worst.max(delta);
            csv.row(&[i.to_string(), num(r.value), num(s.value), num(predicted), num(delta)]);
        }
        out.checks.push(Check::at_most("max |delta|", worst, t.tolerance));
        out.summary.push(("constant_shift".into(), json_num(b)));
        if t.overlap {
            let neg: Vec<f64> = mu.iter().map(|x| -x).collect();
            let boosted = rest[0].state.boost(&neg).map_err(err)?;
            let overlap = boosted.inner(&pairs[0].state).norm();
            let mut c = Check::at_most("ground overlap defect", 1.0 - overlap, t.overlap_tolerance);
            c.detail = format!("1 - |<boosted ground, shifted ground>| = {} <= {}", num(1.0 - overlap), num(t.overlap_tolerance));
            out.checks.push(c);
            out.summary.push(("overlap".into(), json_num(overlap)));
        }
        csv
    } else {
        let mut csv = Csv::new(&["index", "E_shifted", "residual"]);
        for (i, s) in pairs.iter().enumerate() {
            csv.row(&[i.to_string(), num(s.value), num(s.residual)]);
        }
        csv
    };
    out.checks.extend(expectation_checks(&values, &t.expect, t.tolerance));
    out.summary.push(("eigenvalues".into(), levels_json(&pairs)));
    out.files.push(("shift.csv".into(), table.into_bytes()));
    Ok(out)
}

fn evolve_task(t: &EvolveTask) -> RunResult {
    let p = &t.problem;
    let e0 = p.energy(t.t0).map_err(err)?;
    let (psi0, level) = match &t.initial {
        WaveInit::Eigenstate(k) => {
            let pair = eigensolve(&e0, k + 1).map_err(err)?.remove(*k);
            (pair.state, Some(pair.value))
        }
        WaveInit::Gaussian { center, width, momentum } => {
            let psi = WaveFunction::from_fn(&p.grid, |q| {
                let r2: f64 = q.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
                let phase: f64 = q.iter().zip(momentum).map(|(x, k)| x * k).sum();
                Complex64::from_polar((-r2 / (4.0 * width * width)).exp(), phase)
            });
            (psi.normalized().map_err(err)?, None)
        }
    };
    let dynamic = p.is_time_dependent();
    let observables = if dynamic { Vec::new() } else { vec![("energy".to_string(), e0.clone())] };
    let opts = EvolveOptions { record_every: t.record_every, observables, keep_states: false };
    let build = |time: f64| p.energy(time);
    let gen = if dynamic { Generator::TimeDependent(&build) } else { Generator::Static(&e0) };
    let ev = evolve(gen, &psi0, t.t0, t.t1, t.dt, &opts).map_err(err)?;

    let mut out = Outcome::default();
    out.checks.push(Check::at_most("norm drift", ev.norm_drift(), t.norm_tolerance));
    if let (Some(value), false) = (level, dynamic) {
        let phase = Complex64::from_polar(1.0, -value * (t.t1 - t.t0));
        let expected = WaveFunction::new(&p.grid, psi0.values().iter().map(|v| v * phase).collect()).map_err(err)?;
        out.checks.push(Check::at_most("stationary phase error", ev.final_state.max_abs_diff(&expected), t.tolerance));
        out.summary.push(("eigenvalue".into(), json_num(value)));
    }
    out.summary.push(("steps".into(), json!(ev.steps)));
    out.summary.push(("dt".into(), json_num(ev.dt)));
    let mut csv = Vec::new();
    write_evolution_csv(&mut csv, &ev).map_err(err)?;
    let mut snap = Vec::new();
    write_snapshot(&mut snap, &ev.final_state).map_err(err)?;
    out.files.push(("evolution.csv".into(), csv));
    out.files.push(("final_state.frq".into(), snap));
    Ok(out)
}

fn classical(t: &ClassicalTask) -> RunResult {
    let h = SymbolicHamiltonian::<f64>::new(&t.hamiltonian).map_err(err)?;
    let tr = integrate_hamilton_on(&h, &t.chart, &t.x0, t.t1, t.dt).map_err(err)?;
    let energy = PhaseFunction::<f64>::new(&t.hamiltonian).map_err(err)?;
    let frame_energy = match &t.frame {
        Some(f) => Some(PhaseFunction::<f64>::new(&energy_function(&t.hamiltonian, f).map_err(err)?).map_err(err)?),
        None => None,
    };
    let n = tr.points.len();
    let every = t.record_every.max(1);
    let thin = Trajectory {
        points: tr.points.iter().enumerate().filter(|(i, _)| i % every == 0 || i + 1 == n).map(|(_, x)| x.clone()).collect(),
        dt: tr.dt,
        method: tr.method,
    };
    let e_of = |x: &frameq_core::clmech::PhasePoint<f64>| energy.eval(x);
    let mut columns: Vec<(&str, &dyn Fn(&frameq_core::clmech::PhasePoint<f64>) -> f64)> = vec![("energy", &e_of)];
    let fe_of = |x: &frameq_core::clmech::PhasePoint<f64>| frame_energy.as_ref().map_or(f64::NAN, |f| f.eval(x));
    if frame_energy.is_some() {
        columns.push(("frame_energy", &fe_of));
    }
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &thin, Some(&t.chart), &columns).map_err(err)?;

    let mut out = Outcome::default();
    let e0 = energy.eval(tr.first());
    let drift = tr.points.iter().map(|x| (energy.eval(x) - e0).abs()).fold(0.0, f64::max);
    if t.hamiltonian.depends_on(Var::Time) {
        out.summary.push(("energy_drift".into(), json_num(drift)));
    } else {
        out.checks.push(Check::at_most("energy drift", drift, t.tolerance));
    }
    let last = tr.last();
    out.summary.push(("steps".into(), json!(n - 1)));
    out.summary.push(("final_q".into(), json!(last.q.iter().map(|v| json_num(*v)).collect::<Vec<_>>())));
    out.summary.push(("final_p".into(), json!(last.p.iter().map(|v| json_num(*v)).collect::<Vec<_>>())));
    out.files.push(("trajectory.csv".into(), buf));
    Ok(out)
}
