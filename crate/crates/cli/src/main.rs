//! `frameq`: scenario runner and identity checker.

mod builtins;
mod prepare;
mod report;
mod run;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prepare::{prepare, Plan};
use report::Outcome;
use scenario::*;

#[derive(Parser)]
#[command(name = "frameq", version, about = "Frame-dependent classical and quantum mechanics: identity checks and grid scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the symbolic identity suites on seeded random inputs.
    Check {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Test hook: quantize with a corrupted divergence term.
        #[arg(long, hide = true)]
        corrupt_divergence: bool,
    },
    /// Run a scenario file or a builtin scenario.
    Run {
        /// Scenario JSON file.
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        file: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        /// Report directory; overrides the scenario's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List builtin scenarios, or print one as JSON.
    Builtins { name: Option<String> },
    /// Integrate the adapted coordinates of a frame.
    Adapted {
        /// Frame components separated by `;` or `,`, e.g. "-y; x".
        #[arg(long, allow_hyphen_values = true)]
        frame: String,
        /// Coordinate names separated by commas; default q1, q2, ...
        #[arg(long)]
        coords: Option<String>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        /// Initial point such as "1,0"; repeatable.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
        #[arg(long, default_value_t = 11)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lowest eigenvalues of a one-dimensional energy operator.
    Spectrum {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 5)]
        eigenvalues: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum seen from a moving observer, with the predicted shift.
    Shift {
        #[command(flatten)]
        grid: GridArgs,
        /// Observer frame component.
        #[arg(long, allow_hyphen_values = true)]
        velocity: String,
        /// Reference frame component.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        reference: String,
        #[arg(long, default_value_t = 5)]
        eigenvalues: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crank-Nicolson evolution on a one-dimensional grid.
    Evolve {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long)]
        dt: f64,
        /// Start from this eigenstate of the energy operator.
        #[arg(long, conflicts_with = "gaussian")]
        eigenstate: Option<usize>,
        /// Start from a gaussian "center,width[,momentum]".
        #[arg(long, allow_hyphen_values = true)]
        gaussian: Option<String>,
        #[arg(long)]
        record_every: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Dirichlet interval "a,b".
    #[arg(long, conflicts_with = "period", allow_hyphen_values = true)]
    interval: Option<String>,
    /// Period of a circle coordinate, e.g. "2*pi".
    #[arg(long)]
    period: Option<String>,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value = "central-2")]
    stencil: String,
    /// Builtin name (harmonic, quartic, zero) or expression in the coordinate.
    #[arg(long, default_value = "harmonic", allow_hyphen_values = true)]
    potential: String,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value = "x")]
    coord: String,
}

fn input_error(lines: impl IntoIterator<Item = String>) -> ExitCode {
    for l in lines {
        eprintln!("error: {l}");
    }
    ExitCode::from(2)
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FRAMEQ_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| format!("FRAMEQ_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn split_numbers(s: &str, field: &str) -> Result<Vec<f64>, String> {
    s.split([',', ';'])
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("{field}: {x:?} is not a number")))
        .collect()
}

impl GridArgs {
    fn scenario(&self, name: &str, kind: Kind) -> Result<Scenario, String> {
        let (coord, axis) = match (&self.interval, &self.period) {
            (_, Some(p)) => (
                CoordinateSpec { name: self.coord.clone(), period: Some(Number::Expr(p.clone())) },
                AxisSpec { boundary: BoundarySpec::Periodic, start: None, end: Number::Expr(p.clone()), n: self.n },
            ),
            (iv, None) => {
                let ab = match iv {
                    Some(iv) => split_numbers(iv, "--interval")?,
                    None => vec![-10.0, 10.0],
                };
                let [a, b] = ab[..] else { return Err("--interval needs two numbers a,b".into()) };
                (
                    CoordinateSpec { name: self.coord.clone(), period: None },
                    AxisSpec { boundary: BoundarySpec::Dirichlet, start: Some(a.into()), end: b.into(), n: self.n },
                )
            }
        };
        Ok(Scenario {
            name: name.into(),
            kind,
            chart: Some(ChartSpec { time: None, coordinates: vec![coord] }),
            frames: None,
            hamiltonian: Some(HamiltonianSpec {
                mass: Some(vec![vec![self.mass]]),
                potential: Some(PotentialSpec::Text(self.potential.clone())),
                ..Default::default()
            }),
            grid: Some(GridSpec { axes: Some(vec![axis]), radial: None, stencil: Some(self.stencil.clone()) }),
            time: None,
            initial: None,
            identities: None,
            flow: None,
            solver: SolverSpec::default(),
            expect: None,
            output: None,
        })
    }
}

fn print_outcome(out: &Outcome) {
    for c in &out.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for (k, v) in &out.summary {
        println!("  {k} = {}", report::display_value(v));
    }
}

/// Runs a validated plan, writes or prints its report and maps the verdict to an exit code.
fn finish(plan: &Plan, out_dir: Option<&Path>, corrupt: bool) -> ExitCode {
    let outcome = run::execute(plan, corrupt);
    print_outcome(&outcome);
    match out_dir {
        Some(dir) => match outcome.write(dir, &plan.name, &plan.kind.to_string()) {
            Ok(files) => {
                for f in files {
                    println!("wrote {}", dir.join(f).display());
                }
            }
            Err(e) => {
                eprintln!("error: cannot write report to {}: {e}", dir.display());
                return ExitCode::from(1);
            }
        },
        None => {
            if let Some(t) = outcome.primary_table() {
                print!("{t}");
            }
        }
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_scenario(s: &Scenario, out: Option<PathBuf>, default_out: Option<PathBuf>) -> ExitCode {
    match prepare(s) {
        Ok(plan) => {
            let dir = out.or_else(|| plan.output.clone()).or(default_out);
            finish(&plan, dir.as_deref(), false)
        }
        Err(diags) => input_error(diags.iter().map(ToString::to_string)),
    }
}

fn check(seed: u64, count: usize, corrupt: bool) -> ExitCode {
    if count == 0 {
        return input_error(["--count must be at least 1".to_string()]);
    }
    let report = run::run_identities(seed, count, corrupt);
    for s in &report.suites {
        if s.passed() {
            println!("PASS {}: {} cases", s.name, s.cases);
        } else {
            println!("FAIL {}: {} of {} cases failed", s.name, s.failures, s.cases);
            if let Some(c) = &s.first_failure {
                print!("{}", run::render_counterexample(s.name, c));
            }
        }
    }
    if report.passed() {
        println!("all suites passed (seed {seed}, count {count})");
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return input_error([e]);
    }
    match cli.command {
        Command::Check { seed, count, corrupt_divergence } => check(seed, count, corrupt_divergence),
        Command::Builtins { name: None } => {
            for (n, d) in builtins::names() {
                println!("{n:<22} {d}");
            }
            ExitCode::SUCCESS
        }
        Command::Builtins { name: Some(n) } => match builtins::source(&n) {
            Some(s) => {
                println!("{s}");
                ExitCode::SUCCESS
            }
            None => input_error([format!("unknown builtin scenario {n:?}")]),
        },
        Command::Run { file, builtin, out } => {
            let text = match (&file, &builtin) {
                (Some(f), _) => match std::fs::read_to_string(f) {
                    Ok(t) => t,
                    Err(e) => return input_error([format!("cannot read {}: {e}", f.display())]),
                },
                (None, Some(b)) => match builtins::source(b) {
                    Some(s) => s.to_string(),
                    None => return input_error([format!("unknown builtin scenario {b:?}")]),
                },
                (None, None) => unreachable!("clap requires a file or --builtin"),
            };
            match parse_scenario(&text) {
                Ok(s) => run_scenario(&s, out, Some(PathBuf::from("frameq-report"))),
                Err(d) => input_error([d.to_string()]),
            }
        }
        Command::Adapted { frame, coords, t0, t1, points, samples, out } => {
            let comps: Vec<String> = frame.split([';', ',']).map(|s| s.trim().to_string()).collect();
            let chart = coords.map(|c| ChartSpec {
                time: None,
                coordinates: c.split(',').map(|n| CoordinateSpec { name: n.trim().to_string(), period: None }).collect(),
            });
            let pts = match points.iter().map(|p| split_numbers(p, "--point")).collect::<Result<Vec<_>, _>>() {
                Ok(p) => p,
                Err(e) => return input_error([e]),
            };
            let s = Scenario {
                name: "adapted".into(),
                kind: Kind::AdaptedCoords,
                chart,
                frames: Some(FramesSpec { reference: Some(comps), observer: None }),
                hamiltonian: None,
                grid: None,
                time: None,
                initial: None,
                identities: None,
                flow: Some(FlowSpec { t0, t1, points: (!pts.is_empty()).then_some(pts), samples: Some(samples) }),
                solver: SolverSpec::default(),
                expect: None,
                output: None,
            };
            run_scenario(&s, out, None)
        }
        Command::Spectrum { grid, eigenvalues, out } => match grid.scenario("spectrum", Kind::Spectrum) {
            Ok(mut s) => {
                s.solver.eigenvalues = Some(eigenvalues);
                run_scenario(&s, out, None)
            }
            Err(e) => input_error([e]),
        },
        Command::Shift { grid, velocity, reference, eigenvalues, out } => match grid.scenario("shift", Kind::FrameShift) {
            Ok(mut s) => {
                s.frames = Some(FramesSpec { reference: Some(vec![reference]), observer: Some(vec![velocity]) });
                s.solver.eigenvalues = Some(eigenvalues);
                run_scenario(&s, out, None)
            }
            Err(e) => input_error([e]),
        },
        Command::Evolve { grid, t1, dt, eigenstate, gaussian, record_every, out } => {
            let mut s = match grid.scenario("evolve", Kind::Evolve) {
                Ok(s) => s,
                Err(e) => return input_error([e]),
            };
            s.initial = Some(match gaussian {
                Some(g) => match split_numbers(&g, "--gaussian").as_deref() {
                    Ok([c, w]) => InitialSpec::Gaussian { center: vec![*c], width: *w, momentum: None },
                    Ok([c, w, k]) => InitialSpec::Gaussian { center: vec![*c], width: *w, momentum: Some(vec![*k]) },
                    Ok(_) => return input_error(["--gaussian needs center,width[,momentum]".to_string()]),
                    Err(e) => return input_error([e.clone()]),
                },
                None => InitialSpec::Eigenstate(eigenstate.unwrap_or(0)),
            });
            s.time = Some(TimeSpec { t0: Some(0.0), t1: Some(t1), dt: Some(dt), record_every });
            run_scenario(&s, out, None)
        }
    }
}
