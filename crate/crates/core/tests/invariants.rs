use gdes::cycling::{lcm_of, orbit_length};
use gdes::group::GroupSpec;
use gdes::smallgroup::{materialize, streaming_sign, ExplicitPerm};
use gdes::specdoc::{parse_spec, small_des, spec_to_json};
use gdes::Word;
use proptest::prelude::*;

fn group_strategy() -> impl Strategy<Value = GroupSpec> {
    prop::collection::vec(2u32..8, 1..3).prop_map(|m| GroupSpec::new(m).unwrap())
}

fn word_in(g: GroupSpec, len: usize) -> impl Strategy<Value = Word> {
    let order = g.order() as u32;
    prop::collection::vec(0..order, len).prop_map(move |n| Word::new(g.clone(), n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_add_sub_inverse((a, b) in group_strategy().prop_flat_map(|g| (word_in(g.clone(), 6), word_in(g, 6)))) {
        prop_assert_eq!(a.add(&b).unwrap().sub(&b).unwrap(), a.clone());
        prop_assert_eq!(a.add(&a.neg()).unwrap(), Word::zero(a.group().clone(), 6));
    }

    #[test]
    fn word_text_and_int_round_trip(w in group_strategy().prop_flat_map(|g| word_in(g, 5))) {
        let g = w.group().clone();
        prop_assert_eq!(Word::parse(&w.to_string(), &g, 5).unwrap(), w.clone());
        prop_assert_eq!(Word::from_biguint(&w.to_biguint(), &g, 5).unwrap(), w);
    }

    #[test]
    fn small_des_decrypts(n in prop::sample::select(vec![2u32, 3, 5, 7, 11]), seed in 0u64..20, k in any::<u64>(), m in any::<u64>()) {
        let spec = small_des(n, seed).unwrap();
        let g = spec.group().clone();
        let k = Word::from_u64(k % (n as u64).pow(10), &g, 10).unwrap();
        let m = Word::from_u64(m % (n as u64).pow(8), &g, 8).unwrap();
        let c = spec.encrypt(&k, &m).unwrap();
        prop_assert_eq!(spec.decrypt(&k, &c).unwrap(), m);
    }

    #[test]
    fn edes_decrypts(k in 0u64..3486784401, m in 0u64..387420489) {
        let spec = gdes::edes::edes_spec();
        let g = spec.group().clone();
        let k = Word::from_u64(k, &g, 20).unwrap();
        let m = Word::from_u64(m, &g, 18).unwrap();
        prop_assert_eq!(spec.decrypt(&k, &spec.encrypt(&k, &m).unwrap()).unwrap(), m);
    }

    #[test]
    fn perm_compose_inverse_is_identity(p in Just((0u32..12).collect::<Vec<_>>()).prop_shuffle()) {
        let p = ExplicitPerm::new(p).unwrap();
        prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
        prop_assert_eq!(p.sign(), p.inverse().sign());
        let q = ExplicitPerm::transposition(12, 0, 5);
        prop_assert_eq!(p.compose(&q).unwrap().sign(), -p.sign());
    }

    #[test]
    fn orbit_length_divides_permutation_order(seed in 0u64..8, k in 0u64..1024, m in 0u64..256) {
        let spec = small_des(2, seed).unwrap();
        let g = spec.group().clone();
        let k = Word::from_u64(k, &g, 10).unwrap();
        let p = materialize(&spec, &k).unwrap();
        let order = lcm_of(p.cycle_lengths().into_iter().map(|l| l as u64));
        let r = orbit_length(&spec, &k, &Word::from_u64(m, &g, 8).unwrap(), 1 << 20).unwrap();
        let len = r.length.unwrap();
        prop_assert_eq!(len as usize, p.cycle_length_of(m as usize));
        prop_assert_eq!(order % len, 0u32.into());
    }

    #[test]
    fn streaming_sign_matches_explicit(seed in 0u64..8, k in 0u64..59049) {
        let spec = small_des(3, seed).unwrap();
        let k = Word::from_u64(k, spec.group(), 10).unwrap();
        prop_assert_eq!(streaming_sign(&spec, &k).unwrap().sign, materialize(&spec, &k).unwrap().sign());
    }

    #[test]
    fn spec_documents_round_trip(n in prop::sample::select(vec![2u32, 3, 4, 5]), seed in any::<u64>()) {
        let spec = small_des(n, seed).unwrap();
        let text = spec_to_json(&spec);
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(spec_to_json(&back), text);
    }
}
