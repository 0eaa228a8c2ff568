//! Validation of a [`Scenario`] into an executable [`Plan`].
//!
//! Everything that can be rejected without running the computation is
//! rejected here, so that input errors never leave partial reports behind.

use std::path::PathBuf;
use std::sync::Arc;

use frameq_core::chartkit::{Chart, Coordinate, ReferenceFrame};
use frameq_core::clmech::PhasePoint;
use frameq_core::qgrid::{inverse_mass, Axis, Grid, GridOperator, RadialMeasure, Stencil};
use frameq_core::symcore::{parse_polynomial, Expression};
use frameq_core::{Frame, GridError, PhasePolynomial};

use crate::scenario::*;

pub struct Plan {
    pub name: String,
    pub kind: Kind,
    pub output: Option<PathBuf>,
    pub task: Task,
}

pub enum Task {
    Identities { seed: u64, count: usize },
    Adapted(AdaptedTask),
    Spectrum(SpectrumTask),
    Shift(ShiftTask),
    Evolve(EvolveTask),
    Classical(ClassicalTask),
}

pub struct AdaptedTask {
    pub frame: Frame,
    pub t0: f64,
    pub t1: f64,
    pub points: Vec<Vec<f64>>,
    pub samples: usize,
    pub flow_tolerance: f64,
    pub tolerance: f64,
}

pub struct SpectrumTask {
    pub problem: GridProblem,
    pub t: f64,
    pub count: usize,
    pub target: Option<f64>,
    pub expect: Vec<f64>,
    pub tolerance: f64,
}

pub struct ShiftTask {
    pub problem: GridProblem,
    pub observer: Frame,
    pub t: f64,
    pub count: usize,
    pub expect: Vec<f64>,
    pub overlap: bool,
    pub tolerance: f64,
    pub overlap_tolerance: f64,
}

pub enum WaveInit {
    Eigenstate(usize),
    Gaussian { center: Vec<f64>, width: f64, momentum: Vec<f64> },
}

pub struct EvolveTask {
    pub problem: GridProblem,
    pub initial: WaveInit,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub record_every: usize,
    pub tolerance: f64,
    pub norm_tolerance: f64,
}

pub struct ClassicalTask {
    pub chart: Arc<Chart>,
    pub hamiltonian: PhasePolynomial,
    pub frame: Option<Frame>,
    pub x0: PhasePoint<f64>,
    pub t1: f64,
    pub dt: f64,
    pub record_every: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub enum Potential {
    Zero,
    Harmonic { omega: f64 },
    Quartic { lambda: f64 },
    Coulomb { charge: f64 },
    Expr(Expression),
}

impl Potential {
    pub fn eval(&self, chart: &Chart, t: f64, q: &[f64]) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { omega } => 0.5 * omega * omega * q.iter().map(|x| x * x).sum::<f64>(),
            Potential::Quartic { lambda } => lambda * q.iter().map(|x| x.powi(4)).sum::<f64>(),
            Potential::Coulomb { charge } => -charge / q[0],
            Potential::Expr(e) => {
                let lookup = |name: &str| {
                    if name == chart.time_name() {
                        return Some(t);
                    }
                    chart.coords().iter().position(|c| c.name == name).map(|i| q[i])
                };
                e.eval(&lookup).unwrap_or(f64::NAN)
            }
        }
    }

    fn depends_on_time(&self, chart: &Chart) -> bool {
        match self {
            Potential::Expr(e) => e.names().iter().any(|n| n == chart.time_name()),
            _ => false,
        }
    }
}

/// Energy operator of a concrete grid problem at any time.
pub struct GridProblem {
    pub chart: Arc<Chart>,
    pub grid: Arc<Grid>,
    pub mass: Vec<Vec<f64>>,
    pub potential: Potential,
    pub frame: Frame,
    pub angular_momentum: Option<i64>,
}

impl GridProblem {
    pub fn energy(&self, t: f64) -> Result<GridOperator, GridError> {
        let v = |q: &[f64]| self.potential.eval(&self.chart, t, q);
        match self.angular_momentum {
            Some(l) => frameq_core::qgrid::radial_operator(&|r| v(&[r]), l, self.mass[0][0], &self.grid),
            None => frameq_core::qgrid::build_energy_operator(&self.mass, &v, &self.frame, t, &self.grid),
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        self.potential.depends_on_time(&self.chart) || !self.frame.is_time_independent()
    }

    pub fn is_radial(&self) -> bool {
        self.angular_momentum.is_some()
    }
}

/// Collects diagnostics while validation keeps going.
#[derive(Default)]
struct Diags(Vec<Diagnostic>);

impl Diags {
    fn push(&mut self, field: impl Into<String>, msg: impl Into<String>) {
        self.0.push(Diagnostic::field(field, msg));
    }

    fn ok<T, E: std::fmt::Display>(&mut self, field: &str, r: Result<T, E>) -> Option<T> {
        r.map_err(|e| self.push(field, e.to_string())).ok()
    }

    fn require<'a, T>(&mut self, field: &str, v: &'a Option<T>) -> Option<&'a T> {
        if v.is_none() {
            self.push(field, "missing required field");
        }
        v.as_ref()
    }

    fn positive(&mut self, field: &str, v: f64) -> Option<f64> {
        if v.is_finite() && v > 0.0 {
            Some(v)
        } else {
            self.push(field, format!("must be positive and finite, got {v}"));
            None
        }
    }

    fn finite(&mut self, field: &str, v: f64) -> Option<f64> {
        if v.is_finite() {
            Some(v)
        } else {
            self.push(field, "must be finite");
            None
        }
    }
}

fn number(d: &mut Diags, field: &str, n: &Number) -> Option<f64> {
    let v = match n {
        Number::Value(v) => *v,
        Number::Expr(s) => d.ok(field, Expression::parse(s).and_then(|e| e.eval_constant()))?,
    };
    d.finite(field, v)
}

pub fn parse_stencil(s: &str) -> Result<Stencil, String> {
    match s {
        "spectral" => Ok(Stencil::Spectral),
        _ => match s.strip_prefix("central-").and_then(|o| o.parse::<u8>().ok()) {
            Some(o) if matches!(o, 2 | 4 | 6 | 8) => Ok(Stencil::Central(o)),
            _ => Err(format!("unknown stencil {s:?}; expected central-2, central-4, central-6, central-8 or spectral")),
        },
    }
}

fn chart(d: &mut Diags, s: &Scenario) -> Option<Arc<Chart>> {
    if let Some(c) = &s.chart {
        let mut coords = Vec::new();
        for (i, cs) in c.coordinates.iter().enumerate() {
            match &cs.period {
                Some(p) => {
                    let p = number(d, &format!("chart.coordinates[{i}].period"), p)?;
                    coords.push(Coordinate::circle(cs.name.clone(), p));
                }
                None => coords.push(Coordinate::line(cs.name.clone())),
            }
        }
        let time = c.time.clone().unwrap_or_else(|| "t".into());
        return d.ok("chart", Chart::new(time, coords));
    }
    let dim = s
        .grid
        .as_ref()
        .and_then(|g| g.axes.as_ref().map(Vec::len).or(g.radial.as_ref().map(|_| 1)))
        .or_else(|| s.frames.as_ref().and_then(|f| f.reference.as_ref().or(f.observer.as_ref()).map(Vec::len)))
        .or(match &s.initial {
            Some(InitialSpec::Point { q, .. }) => Some(q.len()),
            _ => None,
        })
        .unwrap_or(1);
    if s.grid.as_ref().is_some_and(|g| g.radial.is_some()) {
        return Chart::new("t", vec![Coordinate::line("r")]).ok();
    }
    if dim == 0 {
        d.push("chart", "dimension must be at least 1");
        return None;
    }
    Some(Chart::cartesian(dim))
}

fn frame(d: &mut Diags, field: &str, chart: &Arc<Chart>, comps: Option<&Vec<String>>) -> Option<Frame> {
    let Some(comps) = comps else { return Some(ReferenceFrame::zero(chart)) };
    if comps.len() != chart.dim() {
        d.push(field, format!("expected {} components, got {}", chart.dim(), comps.len()));
        return None;
    }
    let mut polys = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        polys.push(d.ok(&format!("{field}[{i}]"), parse_polynomial(c, chart))?);
    }
    d.ok(field, ReferenceFrame::new(chart, polys))
}

fn potential(d: &mut Diags, chart: &Chart, spec: Option<&PotentialSpec>, radial: bool) -> Option<Potential> {
    let field = "hamiltonian.potential";
    let builtin = |d: &mut Diags, b: &BuiltinPotential| -> Option<Potential> {
        let p = match b.name.as_str() {
            "zero" | "free" => Potential::Zero,
            "harmonic" => Potential::Harmonic { omega: b.omega.unwrap_or(1.0) },
            "quartic" => Potential::Quartic { lambda: b.lambda.unwrap_or(1.0) },
            "coulomb-radial" => {
                if !radial {
                    d.push(field, "coulomb-radial needs a radial grid");
                    return None;
                }
                Potential::Coulomb { charge: b.charge.unwrap_or(1.0) }
            }
            other => {
                d.push(field, format!("unknown builtin potential {other:?}; expected harmonic, quartic or coulomb-radial"));
                return None;
            }
        };
        let used = [("omega", b.omega.is_some(), "harmonic"), ("lambda", b.lambda.is_some(), "quartic"), ("charge", b.charge.is_some(), "coulomb-radial")];
        for (param, given, owner) in used {
            if given && b.name != owner {
                d.push(field, format!("parameter {param} does not apply to {:?}", b.name));
            }
        }
        for v in [b.omega, b.lambda, b.charge].into_iter().flatten() {
            d.finite(field, v)?;
        }
        Some(p)
    };
    match spec {
        None => Some(Potential::Zero),
        Some(PotentialSpec::Builtin(b)) => builtin(d, b),
        Some(PotentialSpec::Text(s)) => {
            if ["zero", "free", "harmonic", "quartic", "coulomb-radial"].contains(&s.as_str()) {
                let b = BuiltinPotential { name: s.clone(), omega: None, lambda: None, charge: None };
                return builtin(d, &b);
            }
            let e = d.ok(field, Expression::parse(s))?;
            for n in e.names() {
                if n != chart.time_name() && !chart.coords().iter().any(|c| c.name == n) {
                    d.push(field, format!("unknown variable {n:?} in potential"));
                    return None;
                }
            }
            Some(Potential::Expr(e))
        }
    }
}

fn grid(d: &mut Diags, s: &Scenario) -> Option<(Arc<Grid>, bool)> {
    let spec = d.require("grid", &s.grid)?;
    let stencil = match &spec.stencil {
        Some(st) => d.ok("grid.stencil", parse_stencil(st))?,
        None => Stencil::Central(2),
    };
    match (&spec.axes, &spec.radial) {
        (Some(_), Some(_)) => {
            d.push("grid", "give either axes or radial, not both");
            None
        }
        (None, None) => {
            d.push("grid", "missing axes or radial");
            None
        }
        (None, Some(r)) => {
            let r_max = number(d, "grid.radial.r_max", &r.r_max)?;
            let measure = match r.measure {
                Some(MeasureSpec::Jacobian) => RadialMeasure::Jacobian,
                _ => RadialMeasure::Unit,
            };
            let g = d.ok("grid.radial", Grid::radial(r_max, r.n, measure, stencil))?;
            Some((Arc::new(g), true))
        }
        (Some(axes), None) => {
            let mut out = Vec::new();
            for (i, a) in axes.iter().enumerate() {
                let f = format!("grid.axes[{i}]");
                let start = match &a.start {
                    Some(n) => number(d, &format!("{f}.start"), n)?,
                    None => 0.0,
                };
                let end = number(d, &format!("{f}.end"), &a.end)?;
                if end <= start {
                    d.push(format!("{f}.end"), "must exceed start");
                    return None;
                }
                out.push(match a.boundary {
                    BoundarySpec::Periodic => Axis::periodic(start, end, a.n),
                    BoundarySpec::Dirichlet => Axis::dirichlet(start, end, a.n),
                });
            }
            let g = d.ok("grid", Grid::new(out, stencil))?;
            Some((Arc::new(g), false))
        }
    }
}

fn mass(d: &mut Diags, spec: Option<&Vec<Vec<f64>>>, dim: usize) -> Option<Vec<Vec<f64>>> {
    let field = "hamiltonian.mass";
    let m = match spec {
        Some(m) => m.clone(),
        None => (0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
    };
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        d.push(field, format!("expected a {dim}×{dim} matrix"));
        return None;
    }
    d.ok(field, inverse_mass(&m))?;
    Some(m)
}

fn grid_problem(d: &mut Diags, s: &Scenario, chart: &Arc<Chart>) -> Option<GridProblem> {
    let (grid, radial) = grid(d, s)?;
    if let Err(e) = grid.check_chart(chart) {
        d.push("grid", e.to_string());
        return None;
    }
    let h = s.hamiltonian.clone().unwrap_or_default();
    if h.expression.is_some() {
        d.push("hamiltonian.expression", "grid scenarios take mass and potential, not an expression");
    }
    let mass = mass(d, h.mass.as_ref(), chart.dim())?;
    let potential = potential(d, chart, h.potential.as_ref(), radial)?;
    let reference = frame(d, "frames.reference", chart, s.frames.as_ref().and_then(|f| f.reference.as_ref()))?;
    let angular_momentum = match (radial, h.angular_momentum) {
        (true, l) => {
            let l = l.unwrap_or(0);
            if l < 0 {
                d.push("hamiltonian.angular_momentum", "must be nonnegative");
                return None;
            }
            if s.frames.is_some() {
                d.push("frames", "radial problems do not take frames");
                return None;
            }
            Some(l)
        }
        (false, Some(_)) => {
            d.push("hamiltonian.angular_momentum", "only applies to radial grids");
            return None;
        }
        (false, None) => None,
    };
    let t0 = s.time.as_ref().and_then(|t| t.t0).unwrap_or(0.0);
    let bad = grid.points().iter().any(|q| !potential.eval(chart, t0, q).is_finite());
    if bad {
        d.push("hamiltonian.potential", "not finite on every grid node");
        return None;
    }
    Some(GridProblem { chart: chart.clone(), grid, mass, potential, frame: reference, angular_momentum })
}

fn expected(d: &mut Diags, s: &Scenario) -> Vec<f64> {
    let Some(list) = s.expect.as_ref().and_then(|e| e.eigenvalues.as_ref()) else { return Vec::new() };
    list.iter().enumerate().filter_map(|(i, n)| number(d, &format!("expect.eigenvalues[{i}]"), n)).collect()
}

fn eigen_count(d: &mut Diags, s: &Scenario, n_expect: usize, size: usize) -> usize {
    let k = s.solver.eigenvalues.unwrap_or(5).max(n_expect);
    if k == 0 || k > size {
        d.push("solver.eigenvalues", format!("must lie in 1..={size}"));
    }
    k
}

/// Tolerances are validated up front in `prepare`.
fn tolerance(v: Option<f64>, default: f64) -> f64 {
    v.filter(|v| v.is_finite() && *v > 0.0).unwrap_or(default)
}

fn unused(d: &mut Diags, s: &Scenario, fields: &[&str]) {
    let present = [
        ("chart", s.chart.is_some()),
        ("frames", s.frames.is_some()),
        ("hamiltonian", s.hamiltonian.is_some()),
        ("grid", s.grid.is_some()),
        ("time", s.time.is_some()),
        ("initial", s.initial.is_some()),
        ("identities", s.identities.is_some()),
        ("flow", s.flow.is_some()),
        ("expect", s.expect.is_some()),
    ];
    for (name, given) in present {
        if given && !fields.contains(&name) {
            d.push(name, format!("not used by {} scenarios", s.kind));
        }
    }
}

/// Validates `s`, returning every problem found.
pub fn prepare(s: &Scenario) -> Result<Plan, Vec<Diagnostic>> {
    let mut d = Diags::default();
    if s.name.trim().is_empty() {
        d.push("name", "must not be empty");
    }
    let sv = &s.solver;
    for (field, v) in [
        ("solver.tolerance", sv.tolerance),
        ("solver.norm_tolerance", sv.norm_tolerance),
        ("solver.overlap_tolerance", sv.overlap_tolerance),
        ("solver.flow_tolerance", sv.flow_tolerance),
    ] {
        if let Some(v) = v {
            d.positive(field, v);
        }
    }
    let task = match s.kind {
        Kind::DiracCheck => identities(&mut d, s),
        Kind::AdaptedCoords => adapted(&mut d, s),
        Kind::Spectrum => spectrum(&mut d, s),
        Kind::FrameShift => shift(&mut d, s),
        Kind::Evolve => evolve(&mut d, s),
        Kind::Classical => classical(&mut d, s),
    };
    match task {
        Some(task) if d.0.is_empty() => {
            Ok(Plan { name: s.name.clone(), kind: s.kind, output: s.output.as_ref().map(PathBuf::from), task })
        }
        _ => {
            if d.0.is_empty() {
                d.push("", "invalid scenario");
            }
            Err(d.0)
        }
    }
}

fn identities(d: &mut Diags, s: &Scenario) -> Option<Task> {
    unused(d, s, &["identities"]);
    let spec = d.require("identities", &s.identities)?;
    if spec.count == 0 {
        d.push("identities.count", "must be at least 1");
    }
    Some(Task::Identities { seed: spec.seed, count: spec.count })
}

fn adapted(d: &mut Diags, s: &Scenario) -> Option<Task> {
    unused(d, s, &["chart", "frames", "flow"]);
    let chart = chart(d, s)?;
    let frames = d.require("frames", &s.frames)?;
    if frames.observer.is_some() {
        d.push("frames.observer", "adapted-coords integrates frames.reference only");
    }
    d.require("frames.reference", &frames.reference)?;
    let frame = frame(d, "frames.reference", &chart, frames.reference.as_ref())?;
    let flow = d.require("flow", &s.flow)?;
    let t0 = d.finite("flow.t0", flow.t0)?;
    let t1 = d.finite("flow.t1", flow.t1)?;
    if t1 <= t0 {
        d.push("flow.t1", "must exceed t0");
    }
    let m = chart.dim();
    let points = match &flow.points {
        Some(p) => p.clone(),
        None => {
            let mut p = vec![vec![0.0; m]];
            p.extend((0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()));
            p
        }
    };
    if points.is_empty() {
        d.push("flow.points", "must not be empty");
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != m || p.iter().any(|x| !x.is_finite()) {
            d.push(format!("flow.points[{i}]"), format!("expected {m} finite coordinates"));
        }
    }
    let samples = flow.samples.unwrap_or(11);
    if samples < 2 {
        d.push("flow.samples", "must be at least 2");
    }
    Some(Task::Adapted(AdaptedTask {
        frame,
        t0,
        t1,
        points,
        samples,
        flow_tolerance: tolerance(s.solver.flow_tolerance, 1e-10),
        tolerance: tolerance(s.solver.tolerance, 1e-8),
    }))
}

fn spectrum(d: &mut Diags, s: &Scenario) -> Option<Task> {
    unused(d, s, &["chart", "frames", "hamiltonian", "grid", "time", "expect"]);
    let chart = chart(d, s)?;
    if s.frames.as_ref().is_some_and(|f| f.observer.is_some()) {
        d.push("frames.observer", "spectrum uses frames.reference; use frame-shift to compare frames");
    }
    let problem = grid_problem(d, s, &chart)?;
    let expect = expected(d, s);
    if s.expect.as_ref().and_then(|e| e.overlap).is_some() {
        d.push("expect.overlap", "only applies to frame-shift scenarios");
    }
    let count = eigen_count(d, s, expect.len(), problem.grid.size());
    Some(Task::Spectrum(SpectrumTask {
        t: s.time.as_ref().and_then(|t| t.t0).unwrap_or(0.0),
        count,
        target: s.solver.target,
        expect,
        tolerance: tolerance(s.solver.tolerance, 1e-6),
        problem,
    }))
}

fn shift(d: &mut Diags, s: &Scenario) -> Option<Task> {
    unused(d, s, &["chart", "frames", "hamiltonian", "grid", "time", "expect"]);
    let chart = chart(d, s)?;
    let problem = grid_problem(d, s, &chart)?;
    if problem.is_radial() {
        d.push("grid.radial", "frame-shift needs a grid over the chart coordinates");
        return None;
    }
    let frames = d.require("frames", &s.frames)?;
    d.require("frames.observer", &frames.observer)?;
    let observer = frame(d, "frames.observer", &chart, frames.observer.as_ref())?;
    let expect = expected(d, s);
    let overlap = s.expect.as_ref().and_then(|e| e.overlap).unwrap_or(false);
    let constant = |f: &Frame| f.components().iter().all(|c| c.is_constant());
    if overlap && (!constant(&problem.frame) || !constant(&observer) || problem.grid.axes().iter().any(|a| a.period().is_some())) {
        d.push("expect.overlap", "needs constant frames on a Dirichlet grid");
    }
    let count = eigen_count(d, s, expect.len(), problem.grid.size());
    Some(Task::Shift(ShiftTask {
        t: s.time.as_ref().and_then(|t| t.t0).unwrap_or(0.0),
        count,
        expect,
        overlap,
        tolerance: tolerance(s.solver.tolerance, 1e-6),
        overlap_tolerance: tolerance(s.solver.overlap_tolerance, 1e-8),
        observer,
        problem,
    }))
}

fn time_span(d: &mut Diags, s: &Scenario) -> Option<(f64, f64, f64, usize)> {
    let t = d.require("time", &s.time)?;
    let t0 = d.finite("time.t0", t.t0.unwrap_or(0.0))?;
    let t1 = *d.require("time.t1", &t.t1)?;
    let t1 = d.finite("time.t1", t1)?;
    let dt = *d.require("time.dt", &t.dt)?;
    let dt = d.positive("time.dt", dt)?;
    if t1 <= t0 {
        d.push("time.t1", "must exceed t0");
        return None;
    }
    let steps = ((t1 - t0) / dt).round();
    if steps > 1e8 {
        d.push("time.dt", "more than 1e8 steps requested");
        return None;
    }
    let every = t.record_every.unwrap_or_else(|| ((steps as usize) / 100).max(1));
    Some((t0, t1, dt, every))
}

fn evolve(d: &mut Diags, s: &Scenario) -> Option<Task> {
    unused(d, s, &["chart", "frames", "hamiltonian", "grid", "time", "initial"]);
    let chart = chart(d, s)?;
    let problem = grid_problem(d, s, &chart)?;
    let (t0, t1, dt, record_every) = time_span(d, s)?;
    let initial = match d.require("initial", &s.initial)? {
        InitialSpec::Eigenstate(k) => {
            if *k >= problem.grid.size() {
                d.push("initial.eigenstate", "index exceeds the grid size");
            }
            WaveInit::Eigenstate(*k)
        }
        InitialSpec::Gaussian { center, width, momentum } => {
            let m = chart.dim();
            let momentum = momentum.clone().unwrap_or_else(|| vec![0.0; m]);
            if center.len() != m || momentum.len() != m {
                d.push("initial.gaussian", format!("center and momentum need {m} components"));
            }
            d.positive("initial.gaussian.width", *width);
            WaveInit::Gaussian { center: center.clone(), width: *width, momentum }
        }
        InitialSpec::Point { .. } => {
            d.push("initial.point", "evolve scenarios start from an eigenstate or a gaussian");
            return None;
        }
    };
    Some(Task::Evolve(EvolveTask {
        problem,
        initial,
        t0,
        t1,
        dt,
        record_every,
        tolerance: tolerance(s.solver.tolerance, 1e-6),
        norm_tolerance: tolerance(s.solver.norm_tolerance, 1e-10),
    }))
}

fn classical(d: &mut Diags, s: &Scenario) -> Option<Task> {
    unused(d, s, &["chart", "frames", "hamiltonian", "time", "initial"]);
    let chart = chart(d, s)?;
    let h = d.require("hamiltonian", &s.hamiltonian)?;
    if h.mass.is_some() || h.potential.is_some() || h.angular_momentum.is_some() {
        d.push("hamiltonian", "classical scenarios take an expression only");
    }
    let src = d.require("hamiltonian.expression", &h.expression)?;
    let hamiltonian = d.ok("hamiltonian.expression", parse_polynomial(src, &chart))?;
    if !hamiltonian.is_real() {
        d.push("hamiltonian.expression", "must be real");
    }
    if hamiltonian.depends_on(frameq_core::chartkit::Var::TimeMomentum) {
        d.push("hamiltonian.expression", "must not depend on the time momentum");
    }
    let frame = match s.frames.as_ref().and_then(|f| f.reference.as_ref()) {
        Some(c) => Some(self::frame(d, "frames.reference", &chart, Some(c))?),
        None => None,
    };
    if s.frames.as_ref().is_some_and(|f| f.observer.is_some()) {
        d.push("frames.observer", "classical scenarios use frames.reference only");
    }
    let (t0, t1, dt, record_every) = time_span(d, s)?;
    let (q, p) = match d.require("initial", &s.initial)? {
        InitialSpec::Point { q, p } => (q.clone(), p.clone()),
        _ => {
            d.push("initial", "classical scenarios start from a point {\"q\": [..], \"p\": [..]}");
            return None;
        }
    };
    let m = chart.dim();
    if q.len() != m || p.len() != m || q.iter().chain(&p).any(|x| !x.is_finite()) {
        d.push("initial.point", format!("q and p need {m} finite components"));
    }
    Some(Task::Classical(ClassicalTask {
        chart,
        hamiltonian,
        frame,
        x0: PhasePoint::new(t0, q, p),
        t1,
        dt,
        record_every,
        tolerance: tolerance(s.solver.tolerance, 1e-8),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn errors(text: &str) -> Vec<String> {
        match prepare(&parse_scenario(text).unwrap()) {
            Ok(_) => Vec::new(),
            Err(d) => d.iter().map(|x| x.to_string()).collect(),
        }
    }

    #[test]
    fn stencils_parse() {
        assert_eq!(parse_stencil("central-8").unwrap(), Stencil::Central(8));
        assert_eq!(parse_stencil("spectral").unwrap(), Stencil::Spectral);
        assert!(parse_stencil("central-3").is_err());
    }

    #[test]
    fn malformed_frame_is_reported() {
        let e = errors(
            r#"{"name": "x", "kind": "frame-shift",
                "grid": {"axes": [{"boundary": "dirichlet", "start": -1, "end": 1, "n": 32}]},
                "frames": {"observer": ["q1 +* 2"]}}"#,
        );
        assert_eq!(e.len(), 1, "{e:?}");
        assert!(e[0].starts_with("frames.observer[0]"), "{e:?}");
    }

    #[test]
    fn several_problems_are_collected() {
        let e = errors(
            r#"{"name": "", "kind": "spectrum",
                "grid": {"axes": [{"boundary": "dirichlet", "start": -1, "end": 1, "n": 32}]},
                "hamiltonian": {"potential": "q1^2 + y"},
                "solver": {"tolerance": -1}}"#,
        );
        assert!(e.iter().any(|x| x.starts_with("name")), "{e:?}");
        assert!(e.iter().any(|x| x.contains("unknown variable \"y\"")), "{e:?}");
        assert!(e.iter().any(|x| x.starts_with("solver.tolerance")), "{e:?}");
    }

    #[test]
    fn circle_chart_needs_matching_axis() {
        let e = errors(
            r#"{"name": "x", "kind": "spectrum",
                "chart": {"coordinates": [{"name": "phi", "period": "2*pi"}]},
                "grid": {"axes": [{"boundary": "periodic", "end": 6, "n": 32}]}}"#,
        );
        assert!(e.iter().any(|x| x.starts_with("grid")), "{e:?}");
    }

    #[test]
    fn potentials_evaluate() {
        let chart = Chart::cartesian(2);
        let mut d = Diags::default();
        let p = potential(&mut d, &chart, Some(&PotentialSpec::Text("q1^2 + t*q2".into())), false).unwrap();
        assert_eq!(p.eval(&chart, 2.0, &[3.0, 1.0]), 11.0);
        assert!(p.depends_on_time(&chart));
        let h = potential(&mut d, &chart, Some(&PotentialSpec::Text("harmonic".into())), false).unwrap();
        assert_eq!(h.eval(&chart, 0.0, &[1.0, 1.0]), 1.0);
        assert!(potential(&mut d, &chart, Some(&PotentialSpec::Text("coulomb-radial".into())), false).is_none());
        assert!(potential(&mut d, &chart, Some(&PotentialSpec::Text("quadratic-well".into())), false).is_none());
    }
}
