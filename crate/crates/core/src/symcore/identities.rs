//! Seeded random inputs and the exact identity suites run over them.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chartkit::{Chart, ReferenceFrame, Var};
use crate::scalar::{Coefficient, GaussianRational};
use crate::symcore::mechanics::{covariant_hamiltonian, energy_function, poisson_t, poisson_v};
use crate::symcore::quantize::{
    check_dirac, prequantum_op, schrodinger_op, AffineObservable, PhaseSpace, Quantization,
};
use crate::symcore::Polynomial;

type G = GaussianRational;
type P = Polynomial<G>;

fn coefficient(rng: &mut ChaCha8Rng, complex: bool) -> G {
    let re = G::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4));
    if !complex {
        return re;
    }
    let im = G::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4));
    re + im * G::imag_unit()
}

/// Random polynomial in the listed variables with total degree at most `degree`.
pub fn random_polynomial(rng: &mut ChaCha8Rng, chart: &Arc<Chart>, vars: &[Var], degree: u32, complex: bool) -> P {
    let m = chart.dim();
    let n_terms = rng.gen_range(1..=4);
    let mut out = P::zero(chart);
    for _ in 0..n_terms {
        let mut e = vec![0u32; chart.n_vars()];
        let d = rng.gen_range(0..=degree);
        for _ in 0..d {
            if vars.is_empty() {
                break;
            }
            e[vars[rng.gen_range(0..vars.len())].slot(m)] += 1;
        }
        out = &out + &P::monomial(chart, e, coefficient(rng, complex));
    }
    out
}

fn base_vars(chart: &Arc<Chart>) -> Vec<Var> {
    std::iter::once(Var::Time).chain((0..chart.dim()).map(Var::Coord)).collect()
}

/// Random function of `(t, q)` of degree at most `degree`.
pub fn random_base_function(rng: &mut ChaCha8Rng, chart: &Arc<Chart>, degree: u32, complex: bool) -> P {
    random_polynomial(rng, chart, &base_vars(chart), degree, complex)
}

/// Random `a^λ p_λ + b` whose coefficients have degree at most `degree`.
pub fn random_affine(rng: &mut ChaCha8Rng, chart: &Arc<Chart>, space: PhaseSpace, degree: u32, complex: bool) -> P {
    let mut out = random_base_function(rng, chart, degree, complex);
    for (p, _) in space.pairs(chart.dim()) {
        if rng.gen_bool(0.75) {
            let a = random_base_function(rng, chart, degree, complex);
            out = &out + &(&a * &P::var(chart, p));
        }
    }
    out
}

/// Random real polynomial with momentum degree at most `momentum_degree`.
pub fn random_phase_polynomial(
    rng: &mut ChaCha8Rng,
    chart: &Arc<Chart>,
    space: PhaseSpace,
    degree: u32,
    momentum_degree: u32,
) -> P {
    let momenta: Vec<Var> = space.pairs(chart.dim()).into_iter().map(|(p, _)| p).collect();
    let mut out = random_base_function(rng, chart, degree, false);
    for _ in 0..rng.gen_range(1..=3) {
        let mut mono = random_base_function(rng, chart, degree.saturating_sub(1), false);
        for _ in 0..rng.gen_range(1..=momentum_degree.max(1)) {
            mono = &mono * &P::var(chart, momenta[rng.gen_range(0..momenta.len())]);
        }
        out = &out + &mono;
    }
    out
}

/// Random frame with components affine in `q` and polynomial in `t`.
pub fn random_affine_frame(rng: &mut ChaCha8Rng, chart: &Arc<Chart>) -> ReferenceFrame<G> {
    let t = [Var::Time];
    let m = chart.dim();
    let comps = (0..m)
        .map(|_| {
            let mut c = random_polynomial(rng, chart, &t, 2, false);
            for j in 0..m {
                if rng.gen_bool(0.5) {
                    c = &c + &(&random_polynomial(rng, chart, &t, 1, false) * &P::var(chart, Var::Coord(j)));
                }
            }
            c
        })
        .collect();
    ReferenceFrame::new(chart, comps).expect("momentum-free components")
}

fn random_chart(rng: &mut ChaCha8Rng) -> Arc<Chart> {
    Chart::cartesian(rng.gen_range(1..=2))
}

fn random_space(rng: &mut ChaCha8Rng) -> PhaseSpace {
    if rng.gen_bool(0.5) {
        PhaseSpace::Vertical
    } else {
        PhaseSpace::Homogeneous
    }
}

/// Tunable knobs for [`verify_identities_with`].
#[derive(Debug, Clone)]
pub struct IdentityConfig {
    /// Runs the Schrödinger Dirac suites on the corrupted map instead of the real one.
    pub corrupt_divergence: bool,
    /// Maximal degree of random coefficient polynomials.
    pub degree: u32,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig { corrupt_divergence: false, degree: 3 }
    }
}

/// A failing case, rendered in canonical text.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub case: usize,
    pub inputs: Vec<(String, String)>,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<Counterexample>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub seed: u64,
    pub count: usize,
    pub suites: Vec<SuiteResult>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

type CaseResult = Option<(Vec<(String, String)>, String)>;

fn named(items: &[(&str, &dyn std::fmt::Display)]) -> Vec<(String, String)> {
    items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

struct Suite {
    name: &'static str,
    run: fn(&mut ChaCha8Rng, usize, &IdentityConfig) -> CaseResult,
}

fn schrodinger_map(space: PhaseSpace, cfg: &IdentityConfig) -> Quantization<G> {
    if cfg.corrupt_divergence {
        Quantization::CorruptedDivergence(space)
    } else {
        Quantization::Schrodinger(space)
    }
}

fn dirac_schrodinger(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let space = random_space(rng);
    let f = random_affine(rng, &chart, space, cfg.degree, false);
    let g = random_affine(rng, &chart, space, cfg.degree, false);
    let map = schrodinger_map(space, cfg);
    let report = check_dirac(&f, &g, &map).expect("affine inputs");
    (!report.passed()).then(|| (named(&[("space", &space), ("f", &f), ("g", &g)]), report.witness.to_string()))
}

fn dirac_schrodinger_complex(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let space = random_space(rng);
    let f = random_affine(rng, &chart, space, cfg.degree, true);
    let g = random_affine(rng, &chart, space, cfg.degree, true);
    let map = schrodinger_map(space, cfg);
    let report = check_dirac(&f, &g, &map).expect("affine inputs");
    (!report.passed()).then(|| (named(&[("space", &space), ("f", &f), ("g", &g)]), report.witness.to_string()))
}

fn dirac_prequantum(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let space = random_space(rng);
    let f = random_phase_polynomial(rng, &chart, space, cfg.degree, 2);
    let g = random_phase_polynomial(rng, &chart, space, cfg.degree, 2);
    let report = check_dirac(&f, &g, &Quantization::Prequantum(space)).expect("real inputs");
    (!report.passed()).then(|| (named(&[("space", &space), ("f", &f), ("g", &g)]), report.witness.to_string()))
}

fn jacobi(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let space = random_space(rng);
    let d = cfg.degree.min(3);
    let [f, g, h] = [(); 3].map(|_| random_phase_polynomial(rng, &chart, space, d, 2));
    let br = |a: &P, b: &P| space.bracket(a, b).expect("same chart");
    let cyclic = &(&br(&f, &br(&g, &h)) + &br(&g, &br(&h, &f))) + &br(&h, &br(&f, &g));
    (!cyclic.is_zero()).then(|| (named(&[("space", &space), ("f", &f), ("g", &g), ("h", &h)]), cyclic.to_string()))
}

fn antisymmetry_bilinearity(rng: &mut ChaCha8Rng, case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let space = random_space(rng);
    let f = random_phase_polynomial(rng, &chart, space, cfg.degree, 2);
    // The first case pairs f with itself.
    let g = if case == 0 { f.clone() } else { random_phase_polynomial(rng, &chart, space, cfg.degree, 2) };
    let h = random_phase_polynomial(rng, &chart, space, cfg.degree, 2);
    let c = G::from_ratio(rng.gen_range(-7..=7), rng.gen_range(1..=5));
    let br = |a: &P, b: &P| space.bracket(a, b).expect("same chart");
    let anti = &br(&f, &g) + &br(&g, &f);
    let lin = &br(&(&f.scale(&c) + &h), &g) - &(&br(&f, &g).scale(&c) + &br(&h, &g));
    let self_zero = br(&f, &f);
    let residual = &(&anti + &lin) + &self_zero;
    (!residual.is_zero()).then(|| (named(&[("space", &space), ("f", &f), ("g", &g), ("h", &h)]), residual.to_string()))
}

fn zeta_morphism(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let f = random_phase_polynomial(rng, &chart, PhaseSpace::Vertical, cfg.degree, 2);
    let g = random_phase_polynomial(rng, &chart, PhaseSpace::Vertical, cfg.degree, 2);
    let diff = &poisson_t(&f, &g).expect("chart") - &poisson_v(&f, &g).expect("chart");
    (!diff.is_zero()).then(|| (named(&[("f", &f), ("g", &g)]), diff.to_string()))
}

fn energy_frame_relation(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let h = random_phase_polynomial(rng, &chart, PhaseSpace::Vertical, cfg.degree, 2);
    let a = random_affine_frame(rng, &chart);
    let b = random_affine_frame(rng, &chart);
    let lhs = &energy_function(&h, &b).expect("dims") - &energy_function(&h, &a).expect("dims");
    let rhs = a.difference(&b).expect("dims").hamiltonian();
    let diff = &lhs - &rhs;
    (!diff.is_zero()).then(|| {
        let (fa, fb) = (format!("{:?}", a.components()), format!("{:?}", b.components()));
        (named(&[("H", &h), ("frame", &fa), ("frame'", &fb)]), diff.to_string())
    })
}

fn splitting(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let h = random_affine(rng, &chart, PhaseSpace::Vertical, cfg.degree, false);
    let a = random_affine_frame(rng, &chart);
    let b = random_affine_frame(rng, &chart);
    let quant_t = |f: &P| schrodinger_op(&AffineObservable::new(f, PhaseSpace::Homogeneous).expect("affine"));
    let quant_v = |f: &P| schrodinger_op(&AffineObservable::new(f, PhaseSpace::Vertical).expect("affine"));
    let hstar = |fr: &ReferenceFrame<G>| quant_t(&covariant_hamiltonian(&fr.hamiltonian()));
    let energy = |fr: &ReferenceFrame<G>| quant_v(&energy_function(&h, fr).expect("dims"));

    let lhs = &hstar(&a) + &energy(&a);
    let rhs = &hstar(&b) + &energy(&b);
    let total = quant_t(&covariant_hamiltonian(&h));

    // Independent assembly of the frame difference straight from the operator formula.
    let mi = -G::imag_unit();
    let half = G::from_ratio(1, 2);
    let mut explicit = crate::symcore::FirstOrderOperator::zero(&chart);
    for k in 0..chart.dim() {
        let d = a.component(k) - b.component(k);
        let shift = crate::symcore::FirstOrderOperator::from_parts(
            d.derivative(Var::Coord(k)).scale(&(mi.clone() * half.clone())),
            [(Var::Coord(k), d.scale(&mi))],
        );
        explicit = &explicit + &shift;
    }
    let diff_energy = &energy(&b) - &energy(&a);

    let res1 = &lhs - &rhs;
    let res2 = &lhs - &total;
    let res3 = &diff_energy - &explicit;
    let residual = &(&res1 + &res2) + &res3;
    (!(res1.is_zero() && res2.is_zero() && res3.is_zero())).then(|| {
        let (fa, fb) = (format!("{:?}", a.components()), format!("{:?}", b.components()));
        (named(&[("H", &h), ("frame", &fa), ("frame'", &fb)]), residual.to_string())
    })
}

fn time_functions(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let ft = random_polynomial(rng, &chart, &[Var::Time], cfg.degree, false);
    let g = random_affine(rng, &chart, PhaseSpace::Vertical, cfg.degree, false);
    let fh = schrodinger_op(&AffineObservable::new(&ft, PhaseSpace::Vertical).expect("affine"));
    let gh = schrodinger_op(&AffineObservable::new(&g, PhaseSpace::Vertical).expect("affine"));
    let comm = fh.commutator(&gh);
    let ok = fh == crate::symcore::FirstOrderOperator::multiplication(ft.clone()) && comm.is_zero();
    (!ok).then(|| (named(&[("f", &ft), ("g", &g)]), format!("{fh} / {comm}")))
}

fn prequantum_pullback(rng: &mut ChaCha8Rng, _case: usize, cfg: &IdentityConfig) -> CaseResult {
    let chart = random_chart(rng);
    let f = random_phase_polynomial(rng, &chart, PhaseSpace::Vertical, cfg.degree, 2);
    let vars: Vec<Var> = (0..chart.dim())
        .flat_map(|k| [Var::Coord(k), Var::Momentum(k)])
        .chain(std::iter::once(Var::Time))
        .collect();
    let section = random_polynomial(rng, &chart, &vars, cfg.degree, true);
    let v = prequantum_op(&f, PhaseSpace::Vertical).apply(&section);
    let t = prequantum_op(&f, PhaseSpace::Homogeneous).apply(&section);
    let diff = &v - &t;
    (!diff.is_zero()).then(|| (named(&[("f", &f), ("section", &section)]), diff.to_string()))
}

fn suites() -> Vec<Suite> {
    vec![
        Suite { name: "dirac-schrodinger", run: dirac_schrodinger },
        Suite { name: "dirac-schrodinger-complex", run: dirac_schrodinger_complex },
        Suite { name: "dirac-prequantum", run: dirac_prequantum },
        Suite { name: "jacobi", run: jacobi },
        Suite { name: "antisymmetry-bilinearity", run: antisymmetry_bilinearity },
        Suite { name: "zeta-morphism", run: zeta_morphism },
        Suite { name: "energy-frame-relation", run: energy_frame_relation },
        Suite { name: "splitting", run: splitting },
        Suite { name: "time-functions", run: time_functions },
        Suite { name: "prequantum-pullback", run: prequantum_pullback },
    ]
}

/// Names of the suites in the order they are run.
pub fn suite_names() -> Vec<&'static str> {
    suites().iter().map(|s| s.name).collect()
}

/// Deterministic generator for case `case` of suite `suite`.
pub fn case_rng(seed: u64, suite: usize, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((suite as u64) << 32) | case as u64);
    rng
}

/// Runs every suite on `count` seeded cases with default settings.
pub fn verify_identities(seed: u64, count: usize) -> IdentityReport {
    verify_identities_with(seed, count, &IdentityConfig::default())
}

pub fn verify_identities_with(seed: u64, count: usize, cfg: &IdentityConfig) -> IdentityReport {
    let suites = suites()
        .iter()
        .enumerate()
        .map(|(si, suite)| {
            let outcomes: Vec<CaseResult> =
                (0..count).into_par_iter().map(|c| (suite.run)(&mut case_rng(seed, si, c), c, cfg)).collect();
            let failures = outcomes.iter().filter(|o| o.is_some()).count();
            let first_failure = outcomes
                .into_iter()
                .enumerate()
                .find_map(|(case, o)| o.map(|(inputs, witness)| Counterexample { case, inputs, witness }));
            SuiteResult { name: suite.name, cases: count, failures, first_failure }
        })
        .collect();
    IdentityReport { seed, count, suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let report = verify_identities(7, 12);
        for s in &report.suites {
            assert!(s.passed(), "{} failed: {:?}", s.name, s.first_failure);
        }
    }

    #[test]
    fn corrupted_divergence_is_detected() {
        let cfg = IdentityConfig { corrupt_divergence: true, ..Default::default() };
        let report = verify_identities_with(42, 20, &cfg);
        let dirac = report.suites.iter().find(|s| s.name == "dirac-schrodinger").unwrap();
        assert!(!dirac.passed());
        assert!(!dirac.first_failure.as_ref().unwrap().witness.is_empty());
    }

    #[test]
    fn runs_are_deterministic() {
        assert_eq!(verify_identities(3, 5), verify_identities(3, 5));
    }

    #[test]
    fn affine_generators_stay_affine() {
        let mut rng = case_rng(1, 0, 0);
        let chart = Chart::cartesian(2);
        for _ in 0..50 {
            let f = random_affine(&mut rng, &chart, PhaseSpace::Homogeneous, 3, false);
            assert!(AffineObservable::new(&f, PhaseSpace::Homogeneous).is_ok());
            let fr = random_affine_frame(&mut rng, &chart);
            assert!(fr.is_affine());
        }
    }
}
