//! Algebraic invariants as properties over random small inputs.

mod common;

use proptest::prelude::*;

use extcat::extension::{find_isomorphism, hom_set, iso_classes, ExtMorphism, MorphismConfig, DEFAULT_BUDGET};
use extcat::generate::{generate_instances, Profile};
use extcat::instance::{parse_instance_str, serialize_instance, Instance};
use extcat::order::{build_preorder, is_reflexive, is_transitive};
use extcat::rational::Rat;
use extcat::sets::{compose, disjoint_union, set_pullback, test_objects, verify_universal, FinMap, FinSet, UniversalWitness};

fn table(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..k, n)
}

fn map(n: usize, k: usize, t: Vec<usize>) -> FinMap {
    FinMap::new(FinSet::numbered("x", n), FinSet::numbered("y", k), t).unwrap()
}

fn profile() -> impl Strategy<Value = Profile> {
    (0..Profile::ALL.len()).prop_map(|i| Profile::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn rational_text_round_trips(n in -50i64..50, d in 1i64..12) {
        let r = Rat::new(n, d).unwrap();
        prop_assert_eq!(r.to_string().parse::<Rat>().unwrap(), r);
        prop_assert_eq!(r - r, Rat::ZERO);
        prop_assert_eq!(r + (-r), Rat::ZERO);
    }

    #[test]
    fn composition_is_associative_with_identities(
        a in table(3, 4), b in table(4, 2), c in table(2, 3)
    ) {
        let x = FinSet::numbered("x", 3);
        let y = FinSet::numbered("y", 4);
        let z = FinSet::numbered("z", 2);
        let w = FinSet::numbered("w", 3);
        let f = FinMap::new(x.clone(), y.clone(), a).unwrap();
        let g = FinMap::new(y.clone(), z.clone(), b).unwrap();
        let h = FinMap::new(z, w, c).unwrap();
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(compose(&FinMap::identity(&x), &f).unwrap(), f.clone());
        prop_assert_eq!(compose(&f, &FinMap::identity(&y)).unwrap(), f);
    }

    #[test]
    fn set_pullbacks_are_universal(a in table(3, 3), b in table(2, 3)) {
        let f = map(3, 3, a);
        let g = FinMap::new(FinSet::numbered("z", 2), FinSet::numbered("y", 3), b).unwrap();
        let pb = set_pullback(&f, &g).unwrap();
        let w = UniversalWitness::Pullback { f, g, apex: pb.apex, left: pb.left, right: pb.right, tests: test_objects(2) };
        prop_assert!(verify_universal(&w));
    }

    #[test]
    fn disjoint_unions_are_coproducts(sizes in proptest::collection::vec(0usize..3, 1..3)) {
        let summands: Vec<FinSet> = sizes.iter().enumerate().map(|(i, &n)| FinSet::numbered(&format!("s{i}_"), n)).collect();
        let (apex, injections) = disjoint_union(&summands);
        let w = UniversalWitness::Coproduct { summands, apex, injections, tests: test_objects(2) };
        prop_assert!(verify_universal(&w));
    }

    #[test]
    fn instance_files_round_trip(seed in 0u64..500, p in profile()) {
        let file = generate_instances(seed, p, 1).remove(0);
        let text = serialize_instance(&file);
        let back = parse_instance_str(&text).unwrap();
        prop_assert_eq!(serialize_instance(&back), text);
        prop_assert_eq!(back, file);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    // identities, closure under composition, and iso classes as a partition
    #[test]
    fn hom_sets_form_a_category(seed in 0u64..500, p in profile()) {
        let inst = Instance::resolve(generate_instances(seed, p, 1).remove(0)).unwrap();
        let ctx = inst.context("ctx").unwrap().clone();
        let mut members: Vec<_> = inst.extensions_over("ctx").into_iter().map(|(_, e)| e.clone()).collect();
        members.truncate(4);
        for cfg in [MorphismConfig::strict(), MorphismConfig::lax()] {
            let homs: Vec<Vec<Vec<ExtMorphism>>> = members
                .iter()
                .map(|a| members.iter().map(|b| hom_set(&ctx, a, b, &cfg, DEFAULT_BUDGET).unwrap()).collect())
                .collect();
            for (i, a) in members.iter().enumerate() {
                prop_assert!(homs[i][i].contains(&ExtMorphism::identity(a)));
                for j in 0..members.len() {
                    for k in 0..members.len() {
                        for m in &homs[i][j] {
                            for n in &homs[j][k] {
                                prop_assert!(homs[i][k].contains(&m.then(n).unwrap()));
                            }
                        }
                    }
                }
            }
            let classes = iso_classes(&ctx, &members, &cfg, DEFAULT_BUDGET).unwrap();
            let mut seen: Vec<usize> = classes.iter().flatten().copied().collect();
            seen.sort();
            prop_assert_eq!(seen, (0..members.len()).collect::<Vec<_>>());
            for c in &classes {
                for &x in c {
                    prop_assert!(find_isomorphism(&ctx, &members[c[0]], &members[x], &cfg, DEFAULT_BUDGET).unwrap().is_some());
                }
            }
        }
    }

    #[test]
    fn preorders_of_generated_classes(seed in 0u64..500, p in profile()) {
        let inst = Instance::resolve(generate_instances(seed, p, 1).remove(0)).unwrap();
        let cfg = inst.morphism_config().unwrap();
        for n in inst.class_names() {
            let (_, cl) = inst.class(n, &cfg, DEFAULT_BUDGET).unwrap();
            let pre = build_preorder(&cl).unwrap();
            prop_assert!(is_reflexive(&pre) && is_transitive(&pre));
        }
    }
}
