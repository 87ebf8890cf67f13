mod common;

use common::{coeff, mutation_corpus};
use num_bigint::BigInt;
use proptest::prelude::*;
use surgery_core::contact_certifier::{branch, verify_certificate, Branch, CertifyError, Rule};
use surgery_core::contact_diagram::NormalizeChoices;
use surgery_core::rationals::{min_k_negative, prop7_transform, unit_fraction};
use surgery_core::smooth_topology::h1_diagram;
use surgery_core::{certify_tight, check_certificate, SurgeryCoefficient};

fn small_slopes() -> Vec<SurgeryCoefficient> {
    let mut out: Vec<SurgeryCoefficient> = Vec::new();
    for p in -10i64..=10 {
        for q in 1i64..=10 {
            let r = SurgeryCoefficient::new(p, q).unwrap();
            if !r.is_integer_value(1) && !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

#[test]
fn every_small_slope_certifies() {
    for r in small_slopes() {
        let cert = certify_tight(&r).unwrap();
        assert_eq!(verify_certificate(&cert), Ok(()), "r = {r}");
    }
}

#[test]
fn slope_one_never_yields_a_claim() {
    assert_eq!(certify_tight(&coeff("1")), Err(CertifyError::ExcludedSlope));
    assert_eq!(
        certify_tight(&coeff("2/2")),
        Err(CertifyError::ExcludedSlope)
    );
    assert!(branch(&coeff("1")).is_err());
}

#[test]
fn intermediate_nodes_pass_the_homology_oracle() {
    for r in small_slopes() {
        let cert = certify_tight(&r).unwrap();
        for n in &cert.nodes {
            let d = n
                .diagram
                .dg_normalize(&NormalizeChoices::default())
                .unwrap();
            let h = h1_diagram(&d).unwrap();
            assert!(h.is_cyclic(), "r = {r}, node {}", n.id);
            assert_eq!(
                Some(h.order()),
                n.manifold.h1_order(),
                "r = {r}, node {}",
                n.id
            );
        }
    }
}

#[test]
fn chain_length_is_cf_length_plus_v_chain() {
    for r in small_slopes() {
        let cert = certify_tight(&r).unwrap();
        match branch(&r).unwrap() {
            Branch::Stein => assert!(cert.edges.is_empty(), "r = {r}"),
            Branch::VChain { k, m } => {
                let cancel = cert
                    .edges
                    .iter()
                    .filter(|e| e.from.starts_with('D'))
                    .count();
                let vk = cert
                    .edges
                    .iter()
                    .filter(|e| e.from.starts_with('V') && e.from != "V1_alt")
                    .count();
                assert_eq!(cancel, m, "r = {r}");
                assert_eq!(vk as u64, k.saturating_sub(1).max(1), "r = {r}");
                let r4 = cert.steps.iter().filter(|s| s.rule == Rule::R4).count();
                // one per cancellation plus the V1_alt derivation
                assert_eq!(r4, m + 1, "r = {r}");
            }
        }
    }
}

#[test]
fn stein_branch_is_exactly_zero_to_one() {
    for r in small_slopes() {
        let stein = matches!(branch(&r).unwrap(), Branch::Stein);
        let in_range = !r.is_negative()
            && r.finite()
                .is_some_and(|q| q < &num_rational::BigRational::from_integer(BigInt::from(1)));
        assert_eq!(stein, in_range, "r = {r}");
    }
}

#[test]
fn r5_always_cites_a_resolvable_injective_triangle() {
    use surgery_core::contact_certifier::Premise;
    use surgery_core::floer_engine::triangle_solve;
    for r in ["2", "3", "10/9", "-7/2"] {
        let cert = certify_tight(&coeff(r)).unwrap();
        for s in cert.steps.iter().filter(|s| s.rule == Rule::R5) {
            let Premise::Step { index } = s.premises[2] else {
                panic!()
            };
            let exact = &cert.steps[index];
            assert_eq!(exact.rule, Rule::Exact);
            let Premise::Triangle { solution, .. } = &exact.premises[4] else {
                panic!()
            };
            let (a, b, c) = solution.dimensions();
            assert!(solution.f_injective);
            assert_eq!(triangle_solve(a, b, c).unwrap(), *solution);
        }
    }
}

#[test]
fn mutation_corpus_is_rejected() {
    let corpus = mutation_corpus();
    assert!(corpus.len() >= 50, "only {} mutations", corpus.len());
    for (slope, name, cert) in &corpus {
        assert!(
            !check_certificate(cert),
            "r = {slope}: `{name}` was accepted"
        );
    }
}

#[test]
fn emitted_certificates_are_deterministic() {
    let a = serde_json::to_string(&certify_tight(&coeff("-5/3")).unwrap()).unwrap();
    let b = serde_json::to_string(&certify_tight(&coeff("-5/3")).unwrap()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn transformed_coefficient_is_never_zero(p in 1i64..200, q in 1i64..200) {
        let rp = SurgeryCoefficient::new(p, q).unwrap();
        let k = unit_fraction(&rp).unwrap_or_else(|| min_k_negative(&rp).unwrap());
        let rpp = prop7_transform(&rp, k).unwrap();
        prop_assert!(!rpp.is_zero());
        prop_assert!(rpp.is_infinite() || rpp.is_negative());
    }

    #[test]
    fn certificates_verify(p in -30i64..30, q in 1i64..30) {
        let r = SurgeryCoefficient::new(p, q).unwrap();
        prop_assume!(!r.is_integer_value(1));
        let cert = certify_tight(&r).unwrap();
        prop_assert_eq!(verify_certificate(&cert), Ok(()));
    }
}
