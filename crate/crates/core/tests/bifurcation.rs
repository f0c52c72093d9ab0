mod common;

use common::references;
use mayerwave::bifurcation::{
    boundary_curve, evaluate_point, find_crossing, mu_grid, sign_change_brackets,
    stability_scan, sweep_grid, sweep_mu, BoundaryFamily, ScanVerdict, DEFAULT_TOL,
};
use mayerwave::{CardioParams, ControlVariant, ModelError};

fn params() -> CardioParams {
    CardioParams::default()
}

#[test]
fn unstressed_volume_sweep_changes_sign_once_near_eighteen() {
    let v = ControlVariant::unstressed_volume(4.0, 0.0).unwrap();
    let pts = sweep_mu(&params(), &v, 1.0, 40.0, 40).unwrap();
    assert!(pts.windows(2).all(|w| w[1].mu > w[0].mu));
    let brackets = sign_change_brackets(&pts);
    assert_eq!(brackets.len(), 1, "{brackets:?}");
    let (lo, hi) = brackets[0];
    assert!(lo >= 17.0 && hi <= 19.0, "{lo} {hi}");
}

#[test]
fn venous_compliance_sweep_changes_sign_near_twenty_four() {
    let v = ControlVariant::venous_compliance(1.5, 0.0).unwrap();
    let pts = sweep_mu(&params(), &v, 1.0, 40.0, 40).unwrap();
    let brackets = sign_change_brackets(&pts);
    assert_eq!(brackets.len(), 1);
    assert!(brackets[0].0 >= 23.0 && brackets[0].1 <= 25.0, "{brackets:?}");
}

#[test]
fn heart_rate_sweep_has_no_unstable_pair() {
    let v = ControlVariant::heart_rate(80.0, 40.0).unwrap();
    let pts = sweep_mu(&params(), &v, 1.0, 100.0, 100).unwrap();
    for p in &pts {
        assert!(!p.is_failed(), "{p:?}");
        if let Some(re) = p.pair_real_part() {
            assert!(re < 0.0, "mu={} re={re}", p.mu);
        }
        assert!(p.max_real_part().unwrap() < 0.0);
    }
}

#[test]
fn crossing_examples() {
    let p = params();
    let c = find_crossing(&p, &ControlVariant::unstressed_volume(4.0, 0.0).unwrap(), 10.0, 30.0, DEFAULT_TOL).unwrap();
    assert!((c.mu_star - 18.0).abs() <= 1.0, "{c}");
    assert_eq!(c.bracket, (10.0, 30.0));
    // 20 / 2^n ≤ 1e-6 needs n = 25 halvings.
    assert_eq!(c.bisection_iterations, 25);

    let c = find_crossing(&p, &ControlVariant::unstressed_volume(1.0, 1.5).unwrap(), 50.0, 90.0, DEFAULT_TOL).unwrap();
    assert!((c.mu_star - 71.0).abs() <= 1.0, "{c}");

    let c = find_crossing(&p, &ControlVariant::venous_compliance(1.0, 0.25).unwrap(), 20.0, 50.0, DEFAULT_TOL).unwrap();
    assert!((c.mu_star - 36.0).abs() <= 1.0, "{c}");
    assert!((7.0..=12.0).contains(&c.period_s));
    assert!((c.period_s - 60.0 * 2.0 * std::f64::consts::PI / c.omega_star).abs() < 1e-12);
}

#[test]
fn invalid_brackets_are_reported() {
    let p = params();
    let v = ControlVariant::unstressed_volume(4.0, 0.0).unwrap();
    assert!(matches!(find_crossing(&p, &v, 1.0, 5.0, DEFAULT_TOL), Err(ModelError::InvalidBracket { .. })));
    assert!(matches!(find_crossing(&p, &v, 30.0, 10.0, DEFAULT_TOL), Err(ModelError::InvalidBracket { .. })));
    // The heart-rate loop loses its pair at high gain.
    let hr = ControlVariant::heart_rate(160.0, 0.0).unwrap();
    assert!(matches!(find_crossing(&p, &hr, 1.0, 50.0, DEFAULT_TOL), Err(ModelError::InvalidBracket { .. })));
}

#[test]
fn crossings_are_sound_on_both_sides() {
    let p = params();
    for r in references() {
        let c = find_crossing(&p, &r.variant, r.quoted_mu_star - 5.0, r.quoted_mu_star + 5.0, DEFAULT_TOL).unwrap();
        for delta in [1e-3, 1e-4] {
            let below = evaluate_point(&p, &r.variant, c.mu_star - delta).pair_real_part().unwrap();
            let above = evaluate_point(&p, &r.variant, c.mu_star + delta).pair_real_part().unwrap();
            assert!(below < 0.0 && above > 0.0, "{} ±{delta}: {below} {above}", r.label);
        }
        assert!((7.0..=12.0).contains(&c.period_s), "{}: {c}", r.label);
        assert!(c.real_eigenvalue < 0.0);
    }
}

#[test]
fn scan_examples() {
    let p = params();
    for v in [
        ControlVariant::systemic_resistance(35.0, 0.0).unwrap(),
        ControlVariant::heart_rate(40.0, 60.0).unwrap(),
    ] {
        let verdict = stability_scan(&p, &v, 100.0).unwrap();
        assert!(matches!(verdict, ScanVerdict::StableUpToMuMax { failed_points: 0, .. }), "{v}: {verdict}");
    }
    let verdict = stability_scan(&p, &ControlVariant::unstressed_volume(3.0, 0.5).unwrap(), 100.0).unwrap();
    match verdict {
        ScanVerdict::CrossingFound(c) => assert!((c.mu_star - 24.0).abs() <= 1.0, "{c}"),
        other => panic!("{other}"),
    }
}

#[test]
fn halving_the_grid_step_keeps_the_brackets() {
    let p = params();
    for r in references() {
        let coarse = sweep_grid(&p, &r.variant, &mu_grid(1.0, 100.0, 100).unwrap());
        let fine = sweep_grid(&p, &r.variant, &mu_grid(1.0, 100.0, 199).unwrap());
        let bc = sign_change_brackets(&coarse);
        let bf = sign_change_brackets(&fine);
        assert_eq!(bc.len(), 1, "{}", r.label);
        assert_eq!(bf.len(), 1, "{}", r.label);
        assert!(bf[0].0 >= bc[0].0 && bf[0].1 <= bc[0].1, "{}: {bc:?} vs {bf:?}", r.label);
    }
}

#[test]
fn boundary_examples() {
    let p = params();
    let vd = boundary_curve(&p, BoundaryFamily::UnstressedVolume, &[0.0, 0.5, 1.0, 1.5], 100.0).unwrap();
    assert!(vd.is_strictly_increasing());
    let mu: Vec<f64> = vd.points.iter().map(|b| b.crossing().unwrap().mu_star).collect();
    for (got, want) in mu.iter().zip([18.0, 24.0, 36.0, 71.0]) {
        assert!((got - want).abs() <= 1.0, "{mu:?}");
    }

    let csv = boundary_curve(&p, BoundaryFamily::VenousCompliance, &[0.0, 0.25, 0.5], 100.0).unwrap();
    assert!(csv.is_strictly_increasing());
    for (b, want) in csv.points.iter().zip([24.0, 36.0, 71.0]) {
        assert!((b.crossing().unwrap().mu_star - want).abs() <= 1.0);
    }

    let a = vd.points[1].crossing().unwrap().mu_star;
    let b = csv.points[0].crossing().unwrap().mu_star;
    assert!((a - b).abs() <= 2.0 * DEFAULT_TOL, "{a} vs {b}");
}

#[test]
fn boundary_marks_stable_points_and_rejects_bad_grids() {
    let p = params();
    let curve = boundary_curve(&p, BoundaryFamily::UnstressedVolume, &[1.5, 1.9], 100.0).unwrap();
    assert!(curve.points[0].crossing().is_some());
    assert!(curve.points[1].crossing().is_none());
    assert!(boundary_curve(&p, BoundaryFamily::UnstressedVolume, &[1.0, 0.5], 100.0).is_err());
    assert!(boundary_curve(&p, BoundaryFamily::VenousCompliance, &[0.8], 100.0).is_err());
}

#[test]
fn sweep_order_is_independent_of_scheduling() {
    let p = params();
    let v = ControlVariant::venous_compliance(0.5, 0.5).unwrap();
    let a = sweep_mu(&p, &v, 1.0, 100.0, 300).unwrap();
    let b = sweep_mu(&p, &v, 1.0, 100.0, 300).unwrap();
    assert_eq!(a, b);
}
