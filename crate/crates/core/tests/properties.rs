use std::sync::Arc;

use frameq_core::chartkit::Chart;
use frameq_core::qgrid::{
    build_energy_operator, frame_shift, radial_operator, read_snapshot, write_snapshot, Axis, Grid, RadialMeasure, Stencil,
    WaveFunction,
};
use frameq_core::symcore::{check_dirac, poisson_v, random_affine, random_affine_frame, random_phase_polynomial, PhaseSpace, Quantization};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn stencil() -> impl Strategy<Value = Stencil> {
    prop_oneof![Just(Stencil::Central(2)), Just(Stencil::Central(4)), Just(Stencil::Central(6)), Just(Stencil::Central(8))]
}

fn space(vertical: bool) -> PhaseSpace {
    if vertical {
        PhaseSpace::Vertical
    } else {
        PhaseSpace::Homogeneous
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn poisson_bracket_is_antisymmetric(seed in any::<u64>(), dim in 1usize..=2, vertical in any::<bool>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let chart = Chart::cartesian(dim);
        let f = random_phase_polynomial(&mut r, &chart, space(vertical), 3, 2);
        let g = random_phase_polynomial(&mut r, &chart, space(vertical), 3, 2);
        let sum = &poisson_v(&f, &g).unwrap() + &poisson_v(&g, &f).unwrap();
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn affine_observables_satisfy_dirac(seed in any::<u64>(), dim in 1usize..=2, vertical in any::<bool>(), complex in any::<bool>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let chart = Chart::cartesian(dim);
        let f = random_affine(&mut r, &chart, space(vertical), 3, complex);
        let g = random_affine(&mut r, &chart, space(vertical), 3, complex);
        let report = check_dirac(&f, &g, &Quantization::Schrodinger(space(vertical))).unwrap();
        prop_assert!(report.passed());
    }

    #[test]
    fn energy_operators_are_hermitian(seed in any::<u64>(), st in stencil(), n in 16usize..80, omega in 0.1f64..3.0, t in -2.0f64..2.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let chart = Chart::cartesian(1);
        let frame = random_affine_frame(&mut r, &chart);
        let grid = Arc::new(Grid::new(vec![Axis::dirichlet(-4.0, 4.0, n)], st).unwrap());
        let v = move |q: &[f64]| 0.5 * omega * omega * q[0] * q[0];
        let e = build_energy_operator(&[vec![1.0]], &v, &frame, t, &grid).unwrap();
        prop_assert!(e.hermiticity_defect() <= 1e-10 * (1.0 + e.max_abs()));
    }

    #[test]
    fn shifting_frames_is_consistent(seed in any::<u64>(), n in 16usize..64, t in -1.0f64..1.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let chart = Chart::cartesian(1);
        let a = random_affine_frame(&mut r, &chart);
        let b = random_affine_frame(&mut r, &chart);
        let grid = Arc::new(Grid::new(vec![Axis::dirichlet(-3.0, 3.0, n)], Stencil::Central(4)).unwrap());
        let zero = |_: &[f64]| 0.0;
        let ea = build_energy_operator(&[vec![1.0]], &zero, &a, t, &grid).unwrap();
        let eb = build_energy_operator(&[vec![1.0]], &zero, &b, t, &grid).unwrap();
        let shifted = frame_shift(&ea, &a, &b, t).unwrap();
        prop_assert!(shifted.sub(&eb).unwrap().max_abs() <= 1e-10 * (1.0 + eb.max_abs()));
        let back = frame_shift(&shifted, &b, &a, t).unwrap();
        prop_assert!(back.sub(&ea).unwrap().max_abs() <= 1e-10 * (1.0 + ea.max_abs()));
    }

    #[test]
    fn radial_operators_are_hermitian(n in 8usize..120, l in 0i64..4, st in stencil(), jacobian in any::<bool>()) {
        let measure = if jacobian { RadialMeasure::Jacobian } else { RadialMeasure::Unit };
        let grid = Arc::new(Grid::radial(20.0, n, measure, st).unwrap());
        let h = radial_operator(&|r: f64| -1.0 / r, l, 1.0, &grid).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-9 * (1.0 + h.max_abs()));
    }

    #[test]
    fn snapshots_round_trip(values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 8..40)) {
        let n = values.len();
        let grid = Arc::new(Grid::new(vec![Axis::dirichlet(0.0, 1.0, n)], Stencil::Central(2)).unwrap());
        let psi = WaveFunction::new(&grid, values.iter().map(|&(re, im)| Complex64::new(re, im)).collect()).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &psi).unwrap();
        let (shape, back) = read_snapshot(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(shape, vec![n]);
        prop_assert_eq!(back.as_slice(), psi.values());
    }
}

