mod common;

use std::sync::Arc;

use symgrowth::group::GroupContext;
use symgrowth::neighbourhood::theorem_for_instance;
use symgrowth::{generate, theorem_main, verify_certificate, Certificate, GSet, InstanceSpec, Rational};

fn interval() -> (InstanceSpec, GSet) {
    let spec = InstanceSpec::from_json(
        r#"{"group": {"type": "cyclic", "n": 20}, "set": {"type": "interval", "start": 0, "length": 5}}"#,
    )
    .unwrap();
    let a = generate(&spec).unwrap();
    (spec, a)
}

#[test]
fn honest_certificates_verify() {
    let (spec, a) = interval();
    let cert = theorem_for_instance(&spec, &a, 2).unwrap();
    let report = verify_certificate(&cert, &a).unwrap();
    assert!(report.overall, "{:?}", report.failures().collect::<Vec<_>>());

    let g = Arc::new(GroupContext::cyclic(20).unwrap());
    let h = GSet::from_codes(&g, [0, 5, 10, 15]).unwrap();
    let cert = theorem_main(&h, 3).unwrap();
    assert_eq!(cert.s, h);
    assert!(verify_certificate(&cert, &h).unwrap().overall);
}

#[test]
fn element_outside_target_is_caught() {
    // A²A⁻² is a proper subset here, so there is something to inject
    let g = Arc::new(GroupContext::cyclic(64).unwrap());
    let a = GSet::from_codes(&g, 0..5).unwrap();
    let cert = theorem_main(&a, 2).unwrap();
    let mut bad = cert.clone();
    let mut elems: Vec<_> = cert.s.iter().collect();
    elems.retain(|x| x.code() != 1);
    elems.push(g.element(32).unwrap());
    bad.s = GSet::new(&g, elems).unwrap();
    let report = verify_certificate(&bad, &a).unwrap();
    assert!(!report.overall);
    assert!(report.failures().any(|c| c.name == "power_in_target"));
}

#[test]
fn ledger_perturbations_are_caught() {
    let (spec, a) = interval();
    let cert = theorem_for_instance(&spec, &a, 2).unwrap();
    for i in 0..cert.ledger.len() {
        let mut bad = cert.clone();
        bad.ledger[i].lhs = &bad.ledger[i].lhs + &Rational::one();
        assert!(
            !verify_certificate(&bad, &a).unwrap().overall,
            "lhs of {}",
            cert.ledger[i].name
        );
        let mut bad = cert.clone();
        bad.ledger[i].rhs = &bad.ledger[i].rhs + &Rational::new(1u64, 7u64);
        assert!(
            !verify_certificate(&bad, &a).unwrap().overall,
            "rhs of {}",
            cert.ledger[i].name
        );
    }
    let mut bad = cert.clone();
    bad.ledger.pop();
    assert!(!verify_certificate(&bad, &a).unwrap().overall);
}

#[test]
fn trace_and_flag_tampering_is_caught() {
    let (spec, a) = interval();
    let cert = theorem_for_instance(&spec, &a, 2).unwrap();
    let mut bad = cert.clone();
    bad.trace.steps[0].level_set_size += 1;
    assert!(!verify_certificate(&bad, &a).unwrap().overall);
    let mut bad = cert.clone();
    bad.verified = false;
    assert!(!verify_certificate(&bad, &a).unwrap().overall);
    let mut bad = cert.clone();
    bad.epsilon = Rational::new(1u64, 2u64);
    assert!(!verify_certificate(&bad, &a).unwrap().overall);
}

#[test]
fn wrong_instance_is_caught() {
    let (spec, a) = interval();
    let cert = theorem_for_instance(&spec, &a, 2).unwrap();
    let other = GSet::from_codes(a.ctx(), 0..6).unwrap();
    assert!(!verify_certificate(&cert, &other).unwrap().overall);
}

#[test]
fn whole_suite_verifies_after_round_trip() {
    for case in common::suite() {
        let a = generate(&case.spec).unwrap();
        let cert = theorem_for_instance(&case.spec, &a, case.k).unwrap();
        let back = Certificate::from_json(&cert.to_canonical_json().unwrap()).unwrap();
        let report = verify_certificate(&back, &a).unwrap();
        assert!(
            report.overall,
            "{}: {:?}",
            case.name,
            report.failures().collect::<Vec<_>>()
        );
    }
}
