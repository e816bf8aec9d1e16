mod common;

use common::*;
use proptest::prelude::*;
use qfsp::classifier::{self as cl, Expr, FamilySpec, ModeFamily, Outcome, Thresholds};
use qfsp::QuasifreeForm;

fn thermal(nus: &[f64]) -> QuasifreeForm {
    QuasifreeForm::thermal(&space(nus.len()), nus).unwrap()
}

fn tau_form(tau: f64) -> QuasifreeForm {
    thermal(&[tau.sinh().powi(2)])
}

#[test]
fn norm_bounds_between_fock_and_thermal() {
    let fock = fock_form(1);
    for nu in [0.1, 1.0, 3.0] {
        let (a, b) = cl::norm_equivalence_bounds(&fock, &thermal(&[nu])).unwrap();
        let want = (1.0 + 2.0 * nu).sqrt();
        assert!((a - want).abs() < 1e-12 && (b - want).abs() < 1e-12);
    }
}

#[test]
fn norm_bounds_of_identical_forms_are_one() {
    let f = thermal(&[0.2, 0.8]);
    let (a, b) = cl::norm_equivalence_bounds(&f, &f).unwrap();
    assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
}

#[test]
fn discriminant_of_thermal_pair_is_scalar() {
    for (t, t2) in [(0.4, 0.9), (1.2, 0.3), (0.7, 0.7)] {
        let m = cl::discriminant(&tau_form(t), &tau_form(t2)).unwrap();
        let want = 1.0 - (2.0 * (t2 - t)).exp();
        for i in 0..2 {
            assert!((m[(i, i)].re - want).abs() < 1e-10, "{m}");
            assert!(m[(i, 1 - i)].norm() < 1e-10);
        }
        let hs = cl::hs_discriminant(&tau_form(t), &tau_form(t2)).unwrap();
        assert!((hs - 2.0 * want * want).abs() < 1e-9);
    }
}

#[test]
fn discriminant_is_additive_over_modes() {
    let (a, b) = (thermal(&[0.3, 1.5]), thermal(&[0.6, 0.2]));
    let joint = cl::hs_discriminant(&a, &b).unwrap();
    let split = cl::hs_discriminant(&thermal(&[0.3]), &thermal(&[0.6])).unwrap()
        + cl::hs_discriminant(&thermal(&[1.5]), &thermal(&[0.2])).unwrap();
    assert!((joint - split).abs() < 1e-10);
}

#[test]
fn pair_report_flags_cross_case() {
    let r = cl::classify_pair(&fock_form(1), &thermal(&[0.5]), 1e-9).unwrap();
    assert!(r.cross_case);
    let r = cl::classify_pair(&thermal(&[0.1]), &thermal(&[0.5]), 1e-9).unwrap();
    assert!(!r.cross_case);
}

#[test]
fn state_distance_bounds_agree() {
    let (a, b) = (tau_form(0.5), tau_form(0.8));
    let det = cl::state_distance_lower_bound(&a, &b).unwrap();
    let ov = cl::state_distance_via_overlap(&a, &b).unwrap();
    assert!((det - ov).abs() < 1e-10);
    assert!(det > 0.0 && det < 2.0);
    assert!(cl::state_distance_lower_bound(&a, &a).unwrap().abs() < 1e-12);
    assert!(cl::state_distance_lower_bound(&fock_form(1), &b).is_err());
}

#[test]
fn parser_evaluates_expressions() {
    let cases = [("k", 3.0, 3.0), ("1/k", 4.0, 0.25), ("0.5 + 1/sqrt(k)", 4.0, 1.0), ("2*(k-1)^2", 3.0, 8.0), ("-(k)", 2.0, -2.0)];
    for (src, k, want) in cases {
        assert!((Expr::parse(src).unwrap().eval(k) - want).abs() < 1e-14, "{src}");
    }
    for bad in ["", "1 +", "k k", "sqrt(", "2**k", "log(k)"] {
        assert!(Expr::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn family_verdicts() {
    let th = Thresholds::default();
    let eq = cl::classify_family(&ModeFamily::thermal("0.5 + 1/k", "0.5", 10_000).unwrap(), &th).unwrap();
    assert_eq!(eq.outcome, Outcome::Equivalent, "{}", eq.reason);
    let ineq = cl::classify_family(&ModeFamily::thermal("0.5 + 1/sqrt(k)", "0.5", 10_000).unwrap(), &th).unwrap();
    assert_eq!(ineq.outcome, Outcome::Inequivalent, "{}", ineq.reason);
    let cross = cl::classify_family(&ModeFamily::thermal("0", "0.3", 100).unwrap(), &th).unwrap();
    assert_eq!(cross.outcome, Outcome::Inequivalent);
    assert!(cross.cross_case);
    let short = cl::classify_family(&ModeFamily::thermal("0.5 + 1/k", "0.5", 3).unwrap(), &th).unwrap();
    assert_eq!(short.outcome, Outcome::Inconclusive);
}

#[test]
fn identical_family_is_equivalent() {
    let v = cl::classify_family(&ModeFamily::thermal("0.3", "0.3", 50).unwrap(), &Thresholds::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Equivalent);
    assert!(v.total < 1e-20);
    assert!(v.tail_bound.unwrap() < 1e-18);
}

#[test]
fn csv_has_one_row_per_block() {
    let v = cl::classify_family(&ModeFamily::thermal("0.5 + 1/k", "0.5", 12).unwrap(), &Thresholds::default()).unwrap();
    let csv = v.csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,t_k,partial_sum,alpha_k,beta_k"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn explicit_generator_round_trip() {
    let pair = |a: f64, b: f64| {
        serde_json::json!({ "form": serde_json::to_value(thermal(&[a])).unwrap(), "form_prime": serde_json::to_value(thermal(&[b])).unwrap() })
    };
    let blocks: Vec<_> = (1..=6).map(|k| pair(0.2, 0.2 + 1.0 / (k * k) as f64)).collect();
    let spec: FamilySpec = serde_json::from_value(serde_json::json!({
        "generator": { "kind": "explicit", "blocks": blocks },
        "n_max": 6
    }))
    .unwrap();
    let fam = ModeFamily::from_spec(&spec).unwrap();
    let (f, g) = fam.block(2).unwrap();
    assert!((g.sigma() - thermal(&[0.45]).sigma()).norm() < 1e-14);
    assert!((f.sigma() - thermal(&[0.2]).sigma()).norm() < 1e-14);
    let v = cl::classify_family(&fam, &Thresholds::default()).unwrap();
    assert_eq!(v.blocks.len(), 6);

    let mut short = spec.clone();
    short.n_max = 7;
    assert!(ModeFamily::from_spec(&short).is_err());
}

#[test]
fn invalid_block_is_reported_with_index() {
    let bad = serde_json::json!({ "space": serde_json::to_value(space(1)).unwrap(), "Sigma": [[[0,0],[0,0]],[[0,0],[0,0]]] });
    let good = serde_json::to_value(thermal(&[0.2])).unwrap();
    let spec: FamilySpec = serde_json::from_value(serde_json::json!({
        "generator": { "kind": "explicit", "blocks": [
            { "form": good, "form_prime": good },
            { "form": good, "form_prime": bad }
        ]},
        "n_max": 2
    }))
    .unwrap();
    let err = cl::classify_family(&ModeFamily::from_spec(&spec).unwrap(), &Thresholds::default()).unwrap_err();
    assert!(matches!(err, qfsp::Error::Block { index: 2, .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn discriminant_vanishes_only_on_the_diagonal(t in 0.05f64..2.0, d in -1.0f64..1.0) {
        let t2 = (t + d).max(0.05);
        let hs = cl::hs_discriminant(&tau_form(t), &tau_form(t2)).unwrap();
        prop_assert!(hs >= 0.0);
        if (t2 - t).abs() > 1e-3 {
            prop_assert!(hs > 0.0);
        } else {
            prop_assert!(hs < 1e-4);
        }
    }

    #[test]
    fn norm_bounds_are_reciprocal(nu in 0.0f64..4.0, nu2 in 0.0f64..4.0) {
        let (a, b) = cl::norm_equivalence_bounds(&thermal(&[nu]), &thermal(&[nu2])).unwrap();
        let (a2, b2) = cl::norm_equivalence_bounds(&thermal(&[nu2]), &thermal(&[nu])).unwrap();
        prop_assert!((a * b2 - 1.0).abs() < 1e-10);
        prop_assert!((b * a2 - 1.0).abs() < 1e-10);
    }
}
