use super::*;
use crate::space::MetricMeasureSpace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_points(m0: f64, m1: f64) -> MetricMeasureSpace {
    MetricMeasureSpace::build_point_cloud(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[m0, m1]).unwrap()
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> (MetricMeasureSpace, ScalarField) {
    let coords: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
    let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let space = MetricMeasureSpace::from_coords(&coords, &mu).unwrap();
    let u = ScalarField::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    (space, u)
}

#[test]
fn two_point_quadratic_splits_evenly() {
    let space = two_points(1.0, 1.0);
    let u = ScalarField::new(vec![0.0, 1.0]).unwrap();
    let prog = build_program(&space, &u, 1.0, 2.0, 2.0, NormMode::LpLq).unwrap();
    assert_eq!(prog.constraints().len(), 1);
    let r = solve(&prog, &SolverConfig::with_tol(1e-10)).unwrap();
    assert!((r.upper_bound - 0.5f64.sqrt()).abs() < 1e-8);
    assert!(r.lower_bound <= r.upper_bound && r.relative_gap() < 1e-9);
}

#[test]
fn single_constraint_matches_dual_norm_formula() {
    // min ||(g0, g1)||_{L^p(mu)} with g0 + g1 >= 1 equals (mu0^{1-p'} + mu1^{1-p'})^{-1/p'}
    for &(m0, m1) in &[(1.0, 3.0), (0.2, 0.7)] {
        for &p in &[1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let space = two_points(m0, m1);
            let u = ScalarField::new(vec![0.0, 1.0]).unwrap();
            let expect = if p == 1.0 {
                m0.min(m1)
            } else if p.is_infinite() {
                0.5
            } else {
                let pc = p / (p - 1.0);
                (m0.powf(1.0 - pc) + m1.powf(1.0 - pc)).powf(-1.0 / pc)
            };
            for method in [Method::Auto, Method::Barrier] {
                let cfg = SolverConfig { method, tol: 1e-9, max_iters: None };
                let r = sobolev_norm(&space, &u, 1.0, p, &cfg).unwrap();
                assert!((r.upper_bound - expect).abs() < 1e-6 * expect, "p={p} {method:?} {} vs {expect}", r.upper_bound);
            }
        }
    }
}

#[test]
fn constant_field_has_zero_norm() {
    let space = MetricMeasureSpace::build_periodic_grid(1, 8, 1.0).unwrap();
    let u = ScalarField::constant(8, 2.0);
    let prog = build_program(&space, &u, 0.5, 2.0, 2.0, NormMode::LpLq).unwrap();
    assert!(prog.constraints().is_empty());
    let r = solve(&prog, &SolverConfig::default()).unwrap();
    assert_eq!(r.upper_bound, 0.0);
}

#[test]
fn grid_program_size() {
    let space = MetricMeasureSpace::build_periodic_grid(1, 8, 1.0).unwrap();
    let u = ScalarField::new((0..8).map(|i| i as f64).collect()).unwrap();
    let prog = build_program(&space, &u, 0.5, 2.0, 2.0, NormMode::LpLq).unwrap();
    assert!(prog.constraints().len() <= 8 * 7 / 2);
}

#[test]
fn methods_agree_with_brute_force_on_three_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases = [(2.0, 2.0), (1.5, 3.0), (3.0, f64::INFINITY), (1.0, 1.0), (f64::INFINITY, 2.0), (2.0, 1.0)];
    for _ in 0..6 {
        let (space, u) = random_cloud(&mut rng, 3);
        for &(p, q) in &cases {
            for mode in [NormMode::LpLq, NormMode::LqLp] {
                let prog = build_program(&space, &u, 0.5, p, q, mode).unwrap();
                let brute = brute_force_norm(&prog, &ValueGrid::default()).unwrap();
                let bar = solve(&prog, &SolverConfig { method: Method::Barrier, tol: 1e-9, max_iters: None }).unwrap();
                assert!(
                    (bar.upper_bound - brute.value).abs() <= 1e-4 * brute.value,
                    "barrier p={p} q={q} {mode:?}: {} vs {}",
                    bar.upper_bound,
                    brute.value
                );
                if let Ok(d) = solve(&prog, &SolverConfig { method: Method::DualAscent, tol: 1e-9, max_iters: None }) {
                    assert!((d.upper_bound - brute.value).abs() <= 1e-4 * brute.value);
                    assert!(d.lower_bound <= brute.value * (1.0 + 1e-9));
                }
            }
        }
    }
}

#[test]
fn dual_and_barrier_agree_on_ten_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(p, q, mode) in &[
        (2.0, 4.0, NormMode::LpLq),
        (3.0, 1.5, NormMode::LqLp),
        (1.7, f64::INFINITY, NormMode::LpLq),
        (4.0, 4.0, NormMode::LqLp),
    ] {
        let (space, u) = random_cloud(&mut rng, 10);
        let prog = build_program(&space, &u, 0.5, p, q, mode).unwrap();
        let d = solve(&prog, &SolverConfig { method: Method::DualAscent, tol: 1e-9, max_iters: None }).unwrap();
        let b = solve(&prog, &SolverConfig { method: Method::Barrier, tol: 1e-10, max_iters: None }).unwrap();
        assert!(d.converged, "p={p} q={q}");
        assert!((d.upper_bound - b.upper_bound).abs() <= 1e-7 * b.upper_bound, "{} vs {}", d.upper_bound, b.upper_bound);
    }
}

#[test]
fn certificate_is_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (space, u) = random_cloud(&mut rng, 8);
    let r = optimal_norm(&space, &u, &NormParams::new(0.7, 2.0, 3.0, NormFamily::M).unwrap(), &SolverConfig::default())
        .unwrap();
    let Certificate::Sequence(seq) = &r.certificate else { panic!() };
    let rep = check_membership(&space, &u, seq, &GradientClassSpec::base(0.7)).unwrap();
    assert!(rep.rho_min <= 1.0 + 1e-12);
    let agg = crate::norms::aggregate(&space, seq, 2.0, 3.0, NormMode::LpLq);
    assert!((agg - r.upper_bound).abs() <= 1e-12 * agg);
}

#[test]
fn subunit_exponent_is_flagged() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (space, u) = random_cloud(&mut rng, 5);
    let prog = build_program(&space, &u, 0.5, 0.5, 2.0, NormMode::LpLq).unwrap();
    let r = solve(&prog, &SolverConfig::default()).unwrap();
    assert!(r.heuristic && r.lower_bound == 0.0 && r.upper_bound.is_finite());
}

#[test]
fn brute_force_refuses_large_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (space, u) = random_cloud(&mut rng, 6);
    let prog = build_program(&space, &u, 0.5, 2.0, 2.0, NormMode::LpLq).unwrap();
    if prog.n_variables() > 6 {
        assert!(matches!(brute_force_norm(&prog, &ValueGrid::default()), Err(Error::Resource { .. })));
    }
}

#[test]
fn repair_scales_or_falls_back() {
    let space = MetricMeasureSpace::build_periodic_grid(1, 4, 1.0).unwrap();
    let u = ScalarField::new(vec![0.0, 1.0, 0.0, 1.0]).unwrap();
    let w = space.window().unwrap();
    let g = GradientSequence::constant_in_scale(w, &[0.1; 4]).unwrap();
    let r = feasibility_repair(&space, &u, 0.5, &g).unwrap();
    assert!(!r.fallback && r.rho_min > 1.0);
    let rep = check_membership(&space, &u, &r.gradient, &GradientClassSpec::base(0.5)).unwrap();
    assert!(rep.rho_min <= 1.0 + 1e-12);
    let z = GradientSequence::zeros(w, 4);
    let r = feasibility_repair(&space, &u, 0.5, &z).unwrap();
    assert!(r.fallback);
    let rep = check_membership(&space, &u, &r.gradient, &GradientClassSpec::base(0.5)).unwrap();
    assert!(rep.rho_min <= 1.0 + 1e-12);
}
