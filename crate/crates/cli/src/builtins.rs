//! Named scenarios shipped with the binary, stored as scenario JSON.

const ROTATING_ROTOR: &str = r#"{
  "name": "rotating-rotor",
  "kind": "frame-shift",
  "chart": {"coordinates": [{"name": "phi", "period": "2*pi"}]},
  "grid": {"axes": [{"boundary": "periodic", "start": 0, "end": "2*pi", "n": 256}], "stencil": "spectral"},
  "frames": {"reference": ["0"], "observer": ["3/10"]},
  "solver": {"eigenvalues": 11, "tolerance": 1e-6}
}"#;

const BOOSTED_OSCILLATOR: &str = r#"{
  "name": "boosted-oscillator",
  "kind": "frame-shift",
  "chart": {"coordinates": [{"name": "x"}]},
  "grid": {"axes": [{"boundary": "dirichlet", "start": -12, "end": 12, "n": 1024}], "stencil": "central-8"},
  "hamiltonian": {"mass": [[1]], "potential": "harmonic"},
  "frames": {"reference": ["0"], "observer": ["7/10"]},
  "solver": {"eigenvalues": 4, "tolerance": 1e-6},
  "expect": {"eigenvalues": [0.255], "overlap": true}
}"#;

const COULOMB_RADIAL: &str = r#"{
  "name": "coulomb-radial",
  "kind": "spectrum",
  "grid": {"radial": {"r_max": 60, "n": 6000}, "stencil": "central-2"},
  "hamiltonian": {"potential": "coulomb-radial", "angular_momentum": 0},
  "solver": {"eigenvalues": 3, "tolerance": 5e-5},
  "expect": {"eigenvalues": ["-1/2", "-1/8", "-1/18"]}
}"#;

const OSCILLATOR_PHASE: &str = r#"{
  "name": "oscillator-phase",
  "kind": "evolve",
  "chart": {"coordinates": [{"name": "x"}]},
  "grid": {"axes": [{"boundary": "dirichlet", "start": -8, "end": 8, "n": 256}], "stencil": "central-4"},
  "hamiltonian": {"potential": "harmonic"},
  "initial": {"eigenstate": 0},
  "time": {"t0": 0, "t1": 10, "dt": 0.001, "record_every": 500},
  "solver": {"tolerance": 1e-6, "norm_tolerance": 1e-10}
}"#;

const DIRAC_IDENTITIES: &str = r#"{
  "name": "dirac-identities",
  "kind": "dirac-check",
  "identities": {"seed": 42, "count": 200}
}"#;

const CLASSICAL_OSCILLATOR: &str = r#"{
  "name": "classical-oscillator",
  "kind": "classical",
  "chart": {"coordinates": [{"name": "x"}]},
  "hamiltonian": {"expression": "p_x^2/2 + x^2/2"},
  "initial": {"point": {"q": [1], "p": [0]}},
  "time": {"t0": 0, "t1": 100, "dt": 0.001, "record_every": 1000},
  "solver": {"tolerance": 1e-8}
}"#;

const ROTATING_FLOW: &str = r#"{
  "name": "rotating-flow",
  "kind": "adapted-coords",
  "chart": {"coordinates": [{"name": "x"}, {"name": "y"}]},
  "frames": {"reference": ["-3/10*y", "3/10*x"]},
  "flow": {"t0": 0, "t1": 10, "samples": 21},
  "solver": {"tolerance": 1e-8}
}"#;

const ALL: &[(&str, &str, &str)] = &[
    ("rotating-rotor", ROTATING_ROTOR, "free rotor seen from a frame rotating at 0.3; E' = E - n*0.3"),
    ("boosted-oscillator", BOOSTED_OSCILLATOR, "harmonic oscillator in a frame moving at 0.7; ground E' = 0.255"),
    ("coulomb-radial", COULOMB_RADIAL, "radial Coulomb problem, l = 0; E_n = -1/(2n^2)"),
    ("oscillator-phase", OSCILLATOR_PHASE, "Crank-Nicolson evolution of the oscillator ground state over 10^4 steps"),
    ("dirac-identities", DIRAC_IDENTITIES, "symbolic identity suites on 200 seeded cases"),
    ("classical-oscillator", CLASSICAL_OSCILLATOR, "RK4 oscillator energy drift over t in [0, 100]"),
    ("rotating-flow", ROTATING_FLOW, "adapted coordinates of a rigidly rotating frame"),
];

pub fn names() -> impl Iterator<Item = (&'static str, &'static str)> {
    ALL.iter().map(|(n, _, d)| (*n, *d))
}

pub fn source(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _, _)| *n == name).map(|(_, s, _)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prepare::prepare;
    use crate::scenario::parse_scenario;

    #[test]
    fn builtins_validate() {
        for (name, _) in names() {
            let s = parse_scenario(source(name).unwrap()).unwrap();
            assert_eq!(s.name, name);
            if let Err(d) = prepare(&s) {
                panic!("{name}: {d:?}");
            }
        }
    }
}
