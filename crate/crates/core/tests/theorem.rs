use std::time::Duration;

use codegraph_core::verify::{certify_in, classify, CertifyOptions, TheoremContext, Verdict};
use codegraph_core::{grassmann_aut_group, Certificate, FVector, Field, GraphAutomorphism, LinearMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const F2: Field = Field::BINARY;

fn certify(ctx: &TheoremContext, opts: CertifyOptions) -> Certificate {
    certify_in(ctx, &CertifyOptions { omit_timing: true, ..opts }).unwrap().0
}

#[test]
fn n4_certificate() {
    let ctx = TheoremContext::new(4).unwrap();
    let cert = certify(&ctx, CertifyOptions { jobs: 2, ..CertifyOptions::default() });
    assert!(cert.conclusive(), "{cert:?}");
    assert_eq!(cert.unclassified, 0);
    assert_eq!(cert.soundness_failures, 0);
    assert_eq!(cert.cross_check_mismatches, Some(0));
    assert!(cert.orbit_counts_consistent);
    // regression values: the two orbits of the group of order 40320
    assert_eq!(cert.group_order, 40320);
    assert_eq!((cert.embeddings_total, cert.extendable, cert.exceptional), (80640, 40320, 40320));
    assert_eq!(cert.enumerated, cert.embeddings_total);
    assert_eq!(cert.distinct_restrictions, Some(40320));
    assert_eq!(cert.distinct_g_h, Some(40320));
    assert!(cert.extendable_witness_unique && cert.exceptional_witness_unique);
    assert_eq!(cert.witness_multiplicity.h_extensions, 0);
    assert!(!cert.h_is_restriction);
    assert!(!cert.p_upper_n_in_h);
    assert_eq!(cert.lemma_chain.lemma5_hypothesis_met, 40320);
}

#[test]
fn n4_orbit_reduction_matches_full_search() {
    let ctx = TheoremContext::new(4).unwrap();
    let full = certify(&ctx, CertifyOptions::default());
    for depth in 2..=6 {
        let reduced = certify(&ctx, CertifyOptions { orbit_depth: depth, ..CertifyOptions::default() });
        assert!(reduced.conclusive(), "depth {depth}");
        assert_eq!(reduced.edge_orbit, 630);
        assert!(reduced.enumerated < full.enumerated);
        assert_eq!(
            (reduced.embeddings_total, reduced.extendable, reduced.exceptional, reduced.unclassified),
            (full.embeddings_total, full.extendable, full.exceptional, full.unclassified),
            "depth {depth}"
        );
        assert_eq!(reduced.lemma_chain, full.lemma_chain, "depth {depth}");
    }
    let bad = CertifyOptions { orbit_depth: 1, ..CertifyOptions::default() };
    assert!(certify_in(&ctx, &bad).is_err());
}

#[test]
fn search_order_does_not_change_the_result() {
    let ctx = TheoremContext::new(4).unwrap();
    let a = certify(&ctx, CertifyOptions::default());
    let b = certify(&ctx, CertifyOptions { reverse_ties: true, ..CertifyOptions::default() });
    assert_eq!(
        (a.embeddings_total, a.extendable, a.exceptional, a.unclassified, a.lemma_chain),
        (b.embeddings_total, b.extendable, b.exceptional, b.unclassified, b.lemma_chain)
    );
}

#[test]
fn certificate_and_witnesses_do_not_depend_on_jobs() {
    let ctx = TheoremContext::new(4).unwrap();
    let run = |jobs| {
        let opts = CertifyOptions { jobs, witnesses: true, omit_timing: true, orbit_depth: 3, ..CertifyOptions::default() };
        certify_in(&ctx, &opts).unwrap()
    };
    let (c1, d1) = run(1);
    let (c3, d3) = run(3);
    assert_eq!(c1, c3);
    assert_eq!(d1, d3);
    assert_eq!(d1.unwrap().matches("# ").count() as u64, c1.enumerated);
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> LinearMap {
    loop {
        let rows: Vec<FVector> = (0..n)
            .map(|_| FVector::new(F2, &(0..n).map(|_| rng.gen_range(0..2)).collect::<Vec<_>>()).unwrap())
            .collect();
        if let Ok(m) = LinearMap::new(F2, &rows) {
            return m;
        }
    }
}

fn check_known_maps(ctx: &TheoremContext, a: &GraphAutomorphism) {
    let vertices = ctx.target().vertices();
    let restricted = ctx.restriction_of(a);
    match classify(ctx, &restricted).verdict {
        Verdict::Extendable(g) => assert!(g.same_action(a, vertices)),
        other => panic!("restriction classified as {}", other.label()),
    }
    let through_h = ctx.composed_with_h(a);
    match classify(ctx, &through_h).verdict {
        Verdict::Exceptional(g) => assert!(g.same_action(a, vertices)),
        other => panic!("g∘h classified as {}", other.label()),
    }
}

#[test]
fn every_n4_automorphism_is_recovered() {
    let ctx = TheoremContext::new(4).unwrap();
    for a in grassmann_aut_group(4, 2, F2).unwrap().elements().unwrap() {
        check_known_maps(&ctx, &a);
    }
}

#[test]
fn sampled_n5_automorphisms_are_recovered() {
    let ctx = TheoremContext::new(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    assert!(matches!(classify(&ctx, ctx.identity_embedding()).verdict, Verdict::Extendable(_)));
    assert!(matches!(classify(&ctx, ctx.h_embedding()).verdict, Verdict::Exceptional(_)));
    for _ in 0..500 {
        let a = GraphAutomorphism::linear(random_invertible(&mut rng, 5), 2);
        check_known_maps(&ctx, &a);
    }
}

#[test]
fn n5_needs_a_budget_and_flags_a_tripped_one() {
    let ctx = TheoremContext::new(5).unwrap();
    assert!(certify_in(&ctx, &CertifyOptions::default()).is_err());
    let opts = CertifyOptions { jobs: 2, budget: Some(Duration::from_millis(300)), ..CertifyOptions::default() };
    let cert = certify(&ctx, opts);
    assert!(!cert.complete);
    assert!(!cert.conclusive());
    assert_eq!(cert.unclassified, 0);
    assert_eq!(cert.soundness_failures, 0);
    assert!(cert.lemma_chain.all_pass());
    assert!(cert.p_upper_n_in_h);
    assert!(cert.extendable_witness_unique && cert.exceptional_witness_unique);
}

#[test]
fn corrupted_target_is_caught() {
    let mut ctx = TheoremContext::new(4).unwrap();
    let ident = ctx.identity_embedding().to_vec();
    let (u, v) = (0..13).flat_map(|u| (0..13).map(move |v| (u, v))).find(|&(u, v)| ctx.pattern().has_edge(u, v)).unwrap();
    ctx.toggle_target_edge(ident[u] as usize, ident[v] as usize);
    let cert = certify(&ctx, CertifyOptions::default());
    assert!(cert.complete);
    assert!(!cert.orbit_counts_consistent);
    assert!(!cert.conclusive());
    assert!(cert.extendable < 40320);
}
