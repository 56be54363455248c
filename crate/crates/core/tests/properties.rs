mod common;

use common::*;
use parasymm::automata::{complement, intersect, PredicateAutomaton};
use parasymm::emptiness::{check_emptiness, Emptiness, Limits};
use parasymm::formula::parse_formula;
use parasymm::hoare::{max_boolean_basis, normalize, sparam, Checker};
use parasymm::program::{instantiate, OracleResult};
use parasymm::topology::{Node, Structure};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn structure(pick: u8) -> Structure {
    match pick % 3 {
        0 => Structure::ring(3).unwrap(),
        1 => Structure::star(3),
        _ => Structure::ring(2).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membership_matches_recursive_oracle(seed in any::<u64>(), pick in any::<u8>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = structure(pick);
        let pa = random_pa(&s, false, &mut rng);
        for _ in 0..10 {
            let w = random_word(&pa.alphabet, s.finite_nodes().unwrap(), 4, &mut rng);
            prop_assert_eq!(pa.accepts(&w).unwrap(), oracle_accepts(&pa, &w));
        }
    }

    #[test]
    fn automaton_json_round_trips(seed in any::<u64>(), pick in any::<u8>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let pa = random_pa(&structure(pick), false, &mut rng);
        let text = pa.to_json().unwrap();
        let back = PredicateAutomaton::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
        prop_assert_eq!(back, pa);
    }

    #[test]
    fn formula_text_round_trips(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let pa = random_pa(&Structure::ring(3).unwrap(), false, &mut rng);
        for f in pa.delta.values().chain(std::iter::once(&pa.start)) {
            prop_assert_eq!(&parse_formula(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn boolean_operations_are_pointwise(seed in any::<u64>(), pick in any::<u8>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = structure(pick);
        let a = random_pa(&s, false, &mut rng);
        let b = random_pa(&s, false, &mut rng);
        let co = complement(&a).unwrap();
        let meet = intersect(&a, &b).unwrap();
        for _ in 0..8 {
            let w = random_word(&a.alphabet, s.finite_nodes().unwrap(), 3, &mut rng);
            let (x, y) = (oracle_accepts(&a, &w), oracle_accepts(&b, &w));
            prop_assert_eq!(co.accepts(&w).unwrap(), !x);
            prop_assert_eq!(meet.accepts(&w).unwrap(), x && y);
        }
    }

    #[test]
    fn emptiness_verdicts_are_sound(seed in any::<u64>(), pick in any::<u8>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = if pick % 2 == 0 { Structure::ring(2).unwrap() } else { Structure::star(2) };
        let pa = random_pa(&s, false, &mut rng);
        let limits = Limits { max_steps: 5_000, ..Limits::default() };
        let on = check_emptiness(&pa, limits).unwrap();
        match &on {
            Emptiness::NonEmpty(w, _) => prop_assert!(oracle_accepts(&pa, w)),
            Emptiness::Empty(_) => {
                for w in all_words(&letters(&pa.alphabet, s.finite_nodes().unwrap()), 3) {
                    prop_assert!(!oracle_accepts(&pa, &w));
                }
            }
            Emptiness::Unknown(..) => {}
        }
        let off = check_emptiness(&pa, Limits { pruning: false, ..limits }).unwrap();
        match (&on, &off) {
            (Emptiness::Empty(_), Emptiness::Empty(_)) | (Emptiness::NonEmpty(..), Emptiness::NonEmpty(..)) => {}
            (Emptiness::Unknown(..), _) | (_, Emptiness::Unknown(..)) => {}
            _ => prop_assert!(false, "pruning changed the verdict: {:?} vs {:?}", on, off),
        }
    }

    #[test]
    fn symmetric_automata_accept_rotated_words(seed in any::<u64>(), k in 0u32..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let s = Structure::ring(4).unwrap();
        let pa = random_pa(&s, true, &mut rng);
        for _ in 0..8 {
            let w = random_word(&pa.alphabet, s.finite_nodes().unwrap(), 3, &mut rng);
            prop_assert_eq!(pa.accepts(&w).unwrap(), pa.accepts(&rotate(&w, 4, k)).unwrap());
        }
    }

    #[test]
    fn parametrized_triples_stay_valid(idx in any::<prop::sample::Index>(), k in 0u32..4) {
        let p = program("token_ring");
        let r = Structure::ring(4).unwrap();
        let basis = max_boolean_basis(&p, &r).unwrap();
        let t = idx.get(&basis);
        let target: Vec<Node> = t.node_tuple().iter().map(|n| match n {
            Node::Proc(i) => Node::Proc((i + k) % 4),
            Node::Data(i) => Node::Data((i + k) % 4),
            n => n.clone(),
        }).collect();
        let moved = sparam(&r, t, &target).unwrap();
        let mut ch = Checker::new(&p, &r);
        prop_assert!(ch.valid(&moved).unwrap(), "{}", moved);
        for n in normalize(&r, &moved, 2).unwrap() {
            prop_assert!(n.is_normal(&r).unwrap());
            prop_assert!(ch.valid(&n).unwrap(), "{}", n);
        }
    }
}

#[test]
fn oracle_traces_replay() {
    for (file, n) in [
        ("token_ring_broken", 3),
        ("token_ring", 3),
        ("star_mutex_broken", 0),
    ] {
        let p = program(file);
        let s = if n > 0 {
            Structure::ring(n).unwrap()
        } else {
            Structure::star(3)
        };
        let inst = instantiate(&p, &s).unwrap();
        if let OracleResult::Unsafe(w) = inst.oracle_check(1_000_000) {
            assert!(inst.run_feasible(&w).unwrap());
            assert!(inst.is_error_run(&w).unwrap());
        }
    }
}
