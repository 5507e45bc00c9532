mod common;

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use symgrowth::group::GroupContext;
use symgrowth::neighbourhood::{lemma_step, proposition_run, termination_bound};
use symgrowth::oracle::{oracle_product, oracle_quadruples, oracle_sym};
use symgrowth::set::{conv_table, inverse_set, pair_energy, power, product, product_chain};
use symgrowth::symmetry::{check_iterated, check_nesting, check_submultiplicativity};
use symgrowth::{sym_set, GSet, Rational};

fn groups() -> &'static [Arc<GroupContext>] {
    static GROUPS: OnceLock<Vec<Arc<GroupContext>>> = OnceLock::new();
    GROUPS.get_or_init(common::backends)
}

fn codes(max: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(any::<u64>(), 1..=max)
}

fn set_in(g: &Arc<GroupContext>, raw: &[u64]) -> GSet {
    GSet::from_codes(g, raw.iter().map(|c| c % g.order())).unwrap()
}

fn group() -> impl Strategy<Value = usize> {
    0..groups().len()
}

fn fraction() -> impl Strategy<Value = (u64, u64)> {
    (1u64..12).prop_flat_map(|q| (0..=q, Just(q)))
}

#[test]
fn group_axioms_on_every_backend() {
    // 2000 triples per backend
    for g in groups() {
        let mut rng = symgrowth::prng::SplitMix::new(g.order());
        let e = g.identity();
        for _ in 0..2000 {
            let [x, y, z] = [0; 3].map(|_| g.element(rng.below(g.order())).unwrap());
            assert_eq!(g.op(g.op(x, y), z), g.op(x, g.op(y, z)));
            assert_eq!(g.op(x, e), x);
            assert_eq!(g.op(e, x), x);
            assert_eq!(g.op(x, g.inv(x)), e);
            assert_eq!(g.op(g.inv(x), x), e);
            assert_eq!(g.from_components(&g.components(x)).unwrap(), x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn product_matches_oracle_and_associates(gi in group(), a in codes(12), b in codes(12), c in codes(12)) {
        let g = &groups()[gi];
        let (a, b, c) = (set_in(g, &a), set_in(g, &b), set_in(g, &c));
        let ab = product(&a, &b).unwrap();
        prop_assert_eq!(&ab, &oracle_product(&a, &b).unwrap());
        let left = product(&ab, &c).unwrap();
        let right = product(&a, &product(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(&left, &product_chain(&[&a, &b, &c]).unwrap());
        prop_assert_eq!(inverse_set(&ab), product(&inverse_set(&b), &inverse_set(&a)).unwrap());
    }

    #[test]
    fn power_is_iterated_product(gi in group(), a in codes(8), k in 0u32..4) {
        let g = &groups()[gi];
        let a = set_in(g, &a);
        let mut acc = GSet::identity_set(g);
        for _ in 0..k {
            acc = product(&acc, &a).unwrap();
        }
        prop_assert_eq!(power(&a, k).unwrap(), acc);
    }

    #[test]
    fn convolution_total_mass(gi in group(), a in codes(15), b in codes(15)) {
        let g = &groups()[gi];
        let (a, b) = (set_in(g, &a), set_in(g, &b));
        let t = conv_table(&a, &b).unwrap();
        prop_assert_eq!(t.total(), (a.len() * b.len()) as u64);
        prop_assert_eq!(t.domain(), &product(&a, &b).unwrap());
    }

    #[test]
    fn energy_identity_and_cauchy_schwarz(gi in group(), a in codes(20), mask in any::<u64>()) {
        let g = &groups()[gi];
        let a = set_in(g, &a);
        let kept: Vec<_> = a.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, x)| x).collect();
        let ap = if kept.is_empty() { GSet::new(g, [a.elements()[0]]).unwrap() } else { GSet::new(g, kept).unwrap() };
        let e = pair_energy(&a, &ap, &a, &ap).unwrap();
        prop_assert_eq!(e, pair_energy(&inverse_set(&a), &a, &ap, &inverse_set(&ap)).unwrap());
        prop_assert_eq!(e, oracle_quadruples(&a, &ap, &a, &ap).unwrap());
        let own = pair_energy(&ap, &ap, &ap, &ap).unwrap();
        let n1 = ap.len() as u64;
        let sq = product(&ap, &ap).unwrap().len() as u64;
        let apa = product(&ap, &a).unwrap().len() as u64;
        prop_assert!(Rational::from(own) >= Rational::new(n1.pow(4), sq));
        prop_assert!(Rational::from(own) >= Rational::new(n1.pow(4), apa));
        prop_assert!(e >= own);
    }

    #[test]
    fn symmetry_sets(gi in group(), a in codes(16), (p, q) in fraction(), (p2, q2) in fraction()) {
        let g = &groups()[gi];
        let a = set_in(g, &a);
        let (hi, lo) = {
            let x = Rational::new(p.max(1), q);
            let y = Rational::new(p2.max(1), q2);
            if x >= y { (x, y) } else { (y, x) }
        };
        let sym = sym_set(&a, &hi).unwrap();
        prop_assert!(sym.is_symmetric_neighbourhood());
        prop_assert_eq!(sym.members(), &oracle_sym(&a, &hi).unwrap());
        prop_assert!(check_nesting(&a, &hi, &lo).unwrap());
    }

    #[test]
    fn submultiplicativity(gi in group(), a in codes(16), e1 in 0u64..12, e2 in 0u64..12, k in 1u32..5) {
        let g = &groups()[gi];
        let a = set_in(g, &a);
        let q = 24;
        let (eps, eps2) = (Rational::new(e1, q), Rational::new(e2, q));
        prop_assert!(check_submultiplicativity(&a, &eps, &eps2).unwrap());
        if e1 * (k as u64) < q {
            prop_assert!(check_iterated(&a, &eps, k).unwrap());
        }
    }

    #[test]
    fn dichotomy_never_violates_its_ledger(gi in group(), a in codes(14), e in 1u64..=10) {
        let g = &groups()[gi];
        let a = set_in(g, &a);
        let eps = Rational::new(e, 10);
        let out = lemma_step(&a, &a, &eps).unwrap();
        prop_assert!(out.ledger.iter().all(|x| x.holds));
        if e == 10 {
            prop_assert!(proposition_run(&a, &eps).is_err());
        } else {
            let run = proposition_run(&a, &eps).unwrap();
            prop_assert!(run.trace.i0 <= termination_bound(&run.trace.k0, &eps));
            prop_assert!(run.aprime.is_subset(&a));
        }
    }

    #[test]
    fn katz_koester_containment(gi in group(), a in codes(14), b in codes(14)) {
        // (A ∩ xA)B ⊆ AB ∩ xAB
        let g = &groups()[gi];
        let a = set_in(g, &a);
        let b = set_in(g, &b);
        for x in product(&a, &inverse_set(&a)).unwrap().iter().take(6) {
            let ax = a.overlap_with_translate(x).unwrap();
            if ax.is_empty() {
                continue;
            }
            let lhs = product(&ax, &b).unwrap();
            let ab = product(&a, &b).unwrap();
            let rhs = ab.intersection(&ab.left_translate(x).unwrap()).unwrap();
            prop_assert!(lhs.is_subset(&rhs));
        }
    }
}
