use gms::baselines::{self, MEstimatorConfig};
use gms::numerics::recovery_error;
use gms::recovery::{self, Batch, EigenMode, Reduction, DEFAULT_KERNEL_TOL};
use gms::solver::{IrlsConfig, StopReason};
use gms::synthdata::{self, SyntheticConfig, SyntheticSample};
use gms::GmsError;

/// Scaled-down failure case: too few outliers to fill the complement.
fn few_outliers(seed: u64) -> SyntheticSample {
    synthdata::generate(&SyntheticConfig::haystack(60, 10, 40, 8).with_seed(seed)).unwrap()
}

#[test]
fn plain_gms_fails_without_enough_outliers() {
    let s = few_outliers(1);
    let r = recovery::gms_with(&s.points, Some(8), &IrlsConfig::default(), Reduction::None).unwrap();
    assert!(r.solve.degenerate);
    assert!(recovery_error(&r.subspace, &s.l_star).unwrap() > 1.0);
    let r = recovery::gms_with(&s.points, None, &IrlsConfig::default(), Reduction::None).unwrap();
    assert_eq!(r.estimated_dim, Some(18), "the rank of the data");
}

#[test]
fn gms2_recovers_the_failure_case() {
    for seed in 0..3 {
        let s = few_outliers(seed);
        let r = recovery::gms2(&s.points, Some(8), None, &IrlsConfig::default(), seed).unwrap();
        assert!(recovery_error(&r.subspace, &s.l_star).unwrap() < 1e-6);
        assert!(r.pipeline_notes.iter().any(|n| n.contains("artificial")));
        let r = recovery::gms2(&s.points, None, None, &IrlsConfig::default(), seed).unwrap();
        assert_eq!(r.estimated_dim, Some(8));
    }
}

#[test]
fn gms2_validates_arguments() {
    let s = few_outliers(0);
    let cfg = IrlsConfig::default();
    assert!(recovery::gms2(&s.points, Some(8), Some(0), &cfg, 0).is_err());
    assert!(recovery::gms2(&s.points, Some(18), None, &cfg, 0).is_err());
}

#[test]
fn ridge_bisection_finds_the_kernel() {
    let s = few_outliers(2);
    let r = recovery::gms_lambda_bisection(&s.points, 8, &IrlsConfig::default(), (1e-2, 1e4), DEFAULT_KERNEL_TOL)
        .unwrap();
    assert_eq!(recovery::kernel_dimension(&r.spectrum, DEFAULT_KERNEL_TOL).unwrap(), 8);
    assert!(recovery_error(&r.subspace, &s.l_star).unwrap() < 1e-8);
    assert!(r.lambda.unwrap() > 0.0);
}

#[test]
fn ridge_bracket_without_target_kernel_is_an_error() {
    let s = synthdata::generate(&SyntheticConfig::haystack(30, 30, 6, 2).with_seed(1)).unwrap();
    let e = recovery::gms_lambda_bisection(&s.points, 2, &IrlsConfig::default(), (1e6, 1e6), DEFAULT_KERNEL_TOL)
        .unwrap_err();
    assert!(matches!(e, GmsError::Bracket { target: 2, .. }), "{e}");
}

#[test]
fn egms_with_positive_batches_recovers() {
    let s = few_outliers(3);
    let r = recovery::egms(&s.points, 8, &IrlsConfig::default(), Batch::positive()).unwrap();
    assert!(recovery_error(&r.subspace, &s.l_star).unwrap() < 1e-6);
    assert!(r.solves <= 5);
    assert_eq!(r.deflation_vectors.len(), 32);
}

/// Every deflation but the last keeps L* intact. The last one need not: on
/// the projected data the first condition can fail even when it holds on
/// the original points, so only the early steps are asserted.
#[test]
fn egms_deflates_away_from_the_inliers() {
    let s = synthdata::generate(&SyntheticConfig::haystack(60, 60, 6, 2).with_seed(4)).unwrap();
    let r = recovery::egms(&s.points, 2, &IrlsConfig::default(), Batch::Fixed(1)).unwrap();
    assert_eq!(r.solves, 4);
    assert_eq!(r.deflation_vectors.len(), 4);
    let p = s.l_star.projector();
    for v in &r.deflation_vectors[..3] {
        assert!((&p * v).norm() < 1e-8);
    }
    let b = r.subspace.basis();
    assert!((b.transpose() * b - nalgebra::DMatrix::identity(2, 2)).amax() < 1e-10);
}

#[test]
fn robust_eigenvectors_are_orthonormal_in_both_modes() {
    let s = synthdata::generate(&SyntheticConfig::haystack(60, 60, 5, 2).with_seed(6)).unwrap();
    for mode in [EigenMode::InverseOrder, EigenMode::EgmsSequence] {
        let vs = recovery::robust_eigenvectors(&s.points, &IrlsConfig::default(), mode).unwrap();
        assert_eq!(vs.len(), 5);
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.dot(b) - expected).abs() < 1e-8, "{mode:?} {i} {j}");
            }
        }
    }
}

#[test]
fn m_estimator_objective_decreases() {
    let s = synthdata::generate(&SyntheticConfig::haystack(60, 60, 8, 2).with_eta(0.05).with_seed(7)).unwrap();
    let m = baselines::common_m_estimator(&s.points, &MEstimatorConfig::default()).unwrap();
    let t = &m.report.objective_trace;
    for w in t.windows(2) {
        assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
    }
    assert_eq!(m.report.stop_reason, StopReason::StepTolerance);
}

#[test]
fn m_estimator_stops_at_the_condition_limit_on_dense_haystack() {
    let s = synthdata::generate(&SyntheticConfig::haystack(125, 125, 50, 5).with_seed(8)).unwrap();
    let m = baselines::common_m_estimator(&s.points, &MEstimatorConfig::default()).unwrap();
    assert_eq!(m.report.stop_reason, StopReason::ConditionLimit);
    assert!(m.report.degenerate);
    assert!(recovery_error(&m.subspace(5).unwrap(), &s.l_star).unwrap() < 1e-4);
}
