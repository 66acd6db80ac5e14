use hajlasz_core::backend::{evaluate_norm, Backend};
use hajlasz_core::fields::{generate_family, lipschitz_constant};
use hajlasz_core::gradients::{check_membership, difference_gradient};
use hajlasz_core::norms::aggregate;
use hajlasz_core::optimize::{feasibility_repair, optimal_norm, SolverConfig};
use hajlasz_core::qcmap::{analyze_distortion, AnalysisConfig, MapFamily, MapSample};
use hajlasz_core::{FamilyKind, FunctionFamilySpec, GradientClassSpec, MetricMeasureSpace, NormFamily, NormMode, NormParams};

#[test]
fn repaired_difference_gradient_bounds_the_optimum() {
    let s = MetricMeasureSpace::build_periodic_grid(1, 16, 1.0).unwrap();
    let fam = FunctionFamilySpec::new(FamilyKind::TrigPolynomial { degree: 3 }, 4, (0.5, 1.0), 9);
    for u in generate_family(&s, &fam).unwrap() {
        let opt = optimal_norm(&s, &u, &NormParams::new(0.5, 2.0, 2.0, NormFamily::M).unwrap(), &SolverConfig::default())
            .unwrap();
        let h = difference_gradient(&s, &u, 0.5, 2.0, 1).unwrap();
        let fixed = feasibility_repair(&s, &u, 0.5, &h).unwrap();
        assert!(check_membership(&s, &u, &fixed.gradient, &GradientClassSpec::base(0.5)).unwrap().is_member());
        let candidate = aggregate(&s, &fixed.gradient, 2.0, 2.0, NormMode::LpLq);
        assert!(opt.lower_bound <= candidate * (1.0 + 1e-9));
    }
}

#[test]
fn lipschitz_family_respects_its_constant() {
    let s = MetricMeasureSpace::build_euclidean_grid(2, 9, 1.0).unwrap();
    let fam = FunctionFamilySpec::new(FamilyKind::LipschitzRandom { anchors: 4, lipschitz: 2.0 }, 6, (1.0, 1.0), 3);
    for u in generate_family(&s, &fam).unwrap() {
        assert!(lipschitz_constant(&s, &u).unwrap() <= 2.0 + 1e-9);
    }
}

#[test]
fn families_are_reproducible() {
    let s = MetricMeasureSpace::build_periodic_grid(2, 8, 1.0).unwrap();
    let fam = FunctionFamilySpec::new(FamilyKind::TrigPolynomial { degree: 2 }, 3, (0.5, 2.0), 42);
    assert_eq!(generate_family(&s, &fam).unwrap(), generate_family(&s, &fam).unwrap());
}

#[test]
fn backends_agree_up_to_constants_on_a_smooth_field() {
    let s = MetricMeasureSpace::build_periodic_grid(1, 32, 1.0).unwrap();
    let fam = FunctionFamilySpec::new(FamilyKind::TrigPolynomial { degree: 2 }, 1, (1.0, 1.0), 1);
    let u = &generate_family(&s, &fam).unwrap()[0];
    let m = NormParams::new(0.5, 2.0, 2.0, NormFamily::M).unwrap();
    let f = NormParams::new(0.5, 2.0, 2.0, NormFamily::F).unwrap();
    let bp = NormParams::new(0.5, 2.0, 2.0, NormFamily::BP).unwrap();
    let values = [
        evaluate_norm(&s, u, &m, &Backend::Optimal(SolverConfig::default())).unwrap().value,
        evaluate_norm(&s, u, &f, &Backend::littlewood_paley()).unwrap().value,
        evaluate_norm(&s, u, &bp, &Backend::Difference { k0: 1 }).unwrap().value,
    ];
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(lo > 0.0 && hi / lo < 50.0, "{values:?}");
}

#[test]
fn isometry_of_a_cloud_is_undistorted() {
    let coords: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.61).cos()]).collect();
    let s = MetricMeasureSpace::from_coords(&coords, &[1.0; 30]).unwrap();
    let (c, d) = (0.6f64, 0.8f64);
    let rot = MapFamily::Linear([[c, -d, 0.0], [d, c, 0.0], [0.0, 0.0, 1.0]]);
    let m = MapSample::exact_image(&s, rot).unwrap();
    let a = analyze_distortion(&m, &AnalysisConfig::default()).unwrap();
    assert!((a.h_global - 1.0).abs() < 1e-9);
    assert!(a.eta_samples.iter().all(|&(t, r)| (t - r).abs() < 1e-9 * t.max(1.0)));
}

#[test]
fn identity_image_of_a_grid_keeps_every_norm() {
    let s = MetricMeasureSpace::build_euclidean_grid(2, 12, 1.0).unwrap();
    let m = MapSample::exact_image(&s, MapFamily::Identity).unwrap();
    let fam = FunctionFamilySpec::new(FamilyKind::LipschitzRandom { anchors: 3, lipschitz: 1.0 }, 3, (1.0, 1.0), 6);
    let cases = [
        (NormParams::new(0.5, 4.0, 4.0, NormFamily::M).unwrap(), Backend::Difference { k0: 1 }),
        (NormParams::new(0.5, 2.0, 2.0, NormFamily::BP).unwrap(), Backend::Difference { k0: 2 }),
        (NormParams::new(0.5, 2.0, 2.0, NormFamily::M).unwrap(), Backend::Optimal(SolverConfig::with_tol(1e-8))),
    ];
    for u in generate_family(m.target(), &fam).unwrap() {
        for (params, backend) in &cases {
            let a = evaluate_norm(m.target(), &u, params, backend).unwrap().value;
            let b = evaluate_norm(&s, &m.compose(&u).unwrap(), params, backend).unwrap().value;
            assert!((a / b - 1.0).abs() < 1e-6, "{backend:?}: {a} vs {b}");
        }
    }
}
