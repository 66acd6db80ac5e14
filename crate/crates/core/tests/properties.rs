use hajlasz_core::gradients::{check_membership, transform_from_base, transform_to_base};
use hajlasz_core::lp_bands::{band_decompose, build_band_filters, covering_range, BandNormalization};
use hajlasz_core::norms::{bourdon_pajot_norm, check_median_bound, Ball};
use hajlasz_core::optimize::{build_program, brute_force_norm, solve, SolverConfig, ValueGrid};
use hajlasz_core::{GradientClass, GradientClassSpec, GradientSequence, MetricMeasureSpace, NormMode, ScalarField};
use proptest::prelude::*;

fn cloud(points: &[(f64, f64)], mu: &[f64]) -> MetricMeasureSpace {
    let coords: Vec<Vec<f64>> = points.iter().map(|&(a, b)| vec![a, b]).collect();
    MetricMeasureSpace::from_coords(&coords, mu).unwrap()
}

fn distinct(points: &[(f64, f64)]) -> bool {
    points.iter().enumerate().all(|(i, a)| points[..i].iter().all(|b| (a.0 - b.0).hypot(a.1 - b.1) > 1e-3))
}

fn pts(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), n).prop_filter("distinct", |p| distinct(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn euclidean_clouds_validate(p in pts(7), mu in prop::collection::vec(0.1..3.0f64, 7), alpha in 0.2..1.0f64) {
        let s = cloud(&p, &mu);
        prop_assert!(s.validate().is_ok());
        prop_assert!(s.snowflake(alpha).unwrap().validate().is_ok());
    }

    #[test]
    fn optimal_norm_is_homogeneous_and_shift_invariant(
        p in pts(4),
        u in prop::collection::vec(-1.0..1.0f64, 4),
        lambda in 0.1..5.0f64,
        shift in -3.0..3.0f64,
    ) {
        let s = cloud(&p, &[1.0; 4]);
        let f = ScalarField::new(u).unwrap();
        let cfg = SolverConfig::with_tol(1e-9);
        let base = solve(&build_program(&s, &f, 0.5, 2.0, 3.0, NormMode::LpLq).unwrap(), &cfg).unwrap().upper_bound;
        let g = f.scaled(-lambda).shifted(shift);
        let other = solve(&build_program(&s, &g, 0.5, 2.0, 3.0, NormMode::LpLq).unwrap(), &cfg).unwrap().upper_bound;
        prop_assert!((other - lambda * base).abs() <= 1e-6 * (1.0 + lambda * base));
    }

    #[test]
    fn lower_bound_never_exceeds_brute_force(p in pts(3), u in prop::collection::vec(-1.0..1.0f64, 3)) {
        let s = cloud(&p, &[1.0, 0.5, 2.0]);
        let f = ScalarField::new(u).unwrap();
        for mode in [NormMode::LpLq, NormMode::LqLp] {
            let prog = build_program(&s, &f, 0.7, 2.0, 2.0, mode).unwrap();
            let r = solve(&prog, &SolverConfig::with_tol(1e-8)).unwrap();
            let b = brute_force_norm(&prog, &ValueGrid::default()).unwrap();
            prop_assert!(r.lower_bound <= b.value * (1.0 + 1e-9));
            prop_assert!(r.upper_bound <= b.value * (1.0 + 1e-4) + 1e-12);
        }
    }

    #[test]
    fn median_chain_holds(
        u in prop::collection::vec(-2.0..2.0f64, 16),
        center in 0usize..16,
        radius in 0.05..0.6f64,
        c in -2.0..2.0f64,
        delta in 0.05..1.0f64,
    ) {
        let s = MetricMeasureSpace::build_periodic_grid(1, 16, 1.0).unwrap();
        let f = ScalarField::new(u).unwrap();
        prop_assert!(check_median_bound(&s, &f, Ball { center, radius }, c, delta).is_ok(), "median chain failed");
    }

    #[test]
    fn tail_transforms_round_trip(
        g in prop::collection::vec(0.0..2.0f64, 8 * 3),
        eps in 0.05..0.5f64,
        nn in 0i32..3,
        upper in any::<bool>(),
    ) {
        let s = MetricMeasureSpace::build_periodic_grid(1, 8, 1.0).unwrap();
        let w = s.window().unwrap();
        let levels: Vec<Vec<f64>> = g.chunks(8).take(w.len()).map(|c| c.to_vec()).collect();
        let grad = GradientSequence::from_levels(w, levels).unwrap();
        // any field dominated by the base gradient
        let u: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 }).collect();
        let u = ScalarField::new(u).unwrap();
        let base = GradientClassSpec::base(0.6);
        let rho = check_membership(&s, &u, &grad, &base).unwrap().rho_min;
        prop_assume!(rho.is_finite() && rho > 0.0);
        let grad = grad.scaled(rho);
        let class = if upper {
            GradientClass::UpperTail { epsilon: eps, n: nn }
        } else {
            GradientClass::LowerTail { epsilon: eps, n: nn }
        };
        let spec = GradientClassSpec { class, s: 0.6 };
        let h = transform_from_base(&grad, &spec).unwrap();
        prop_assert!(check_membership(&s, &u, &h, &spec).unwrap().rho_min <= 1.0 + 1e-9);
        let back = transform_to_base(&h, &spec, w).unwrap();
        prop_assert!(check_membership(&s, &u, &back, &base).unwrap().rho_min <= 1.0 + 1e-9);
    }

    #[test]
    fn bands_reconstruct_mean_free_part(u in prop::collection::vec(-1.0..1.0f64, 64)) {
        let s = MetricMeasureSpace::build_periodic_grid(1, 64, 1.0).unwrap();
        let bank = build_band_filters(&s, covering_range(&s.periodic_grid().unwrap()), 1.0, BandNormalization::Partition).unwrap();
        let mean = u.iter().sum::<f64>() / 64.0;
        let rec = band_decompose(&ScalarField::new(u.clone()).unwrap(), &bank).unwrap().reconstruct();
        for (r, v) in rec.iter().zip(&u) {
            prop_assert!((r - (v - mean)).abs() < 1e-9);
        }
    }

    #[test]
    fn bourdon_pajot_matches_direct_sum(p in pts(5), mu in prop::collection::vec(0.2..2.0f64, 5), u in prop::collection::vec(-1.0..1.0f64, 5)) {
        let s = cloud(&p, &mu);
        let (sm, pe) = (0.4, 2.5);
        let mut total = 0.0;
        for x in 0..5 {
            for y in 0..5 {
                if x == y {
                    continue;
                }
                let d = s.dist(x, y);
                let open: f64 = (0..5).filter(|&z| s.dist(x, z) < d).map(|z| mu[z]).sum();
                total += mu[x] * mu[y] * (u[x] - u[y]).abs().powf(pe) / (d.powf(sm * pe) * open);
            }
        }
        let v = bourdon_pajot_norm(&s, &ScalarField::new(u).unwrap(), sm, pe).unwrap();
        prop_assert!((v - total.powf(1.0 / pe)).abs() <= 1e-10 * (1.0 + v));
    }
}
