use super::*;
use crate::formula::parse_formula;
use crate::program::parse_word;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn ring3_pa(
    delta: &[(&str, &str, &str)],
    preds: &[(&str, usize)],
    start: &str,
    acc: &[&str],
) -> PredicateAutomaton {
    let pa = PredicateAutomaton {
        structure: Structure::ring(3).unwrap(),
        alphabet: vec![name("a"), name("b")],
        predicates: preds.iter().map(|(q, n)| (name(q), *n)).collect(),
        delta: delta
            .iter()
            .map(|(q, s, g)| ((name(q), name(s)), f(g)))
            .collect(),
        start: f(start),
        accepting: acc.iter().map(|q| name(q)).collect(),
    };
    pa.validate().unwrap();
    pa
}

fn cfg(atoms: &[(&str, &[Node])]) -> Configuration {
    atoms.iter().map(|(q, ns)| GroundAtom::new(q, ns)).collect()
}

#[test]
fn successors_of_empty_and_split() {
    let pa = ring3_pa(
        &[("q", "a", "or($q(v1), $r(v0))")],
        &[("q", 1), ("r", 1)],
        "$q(#P0)",
        &["r"],
    );
    let l = Letter::new("a", Node::Proc(1));
    assert_eq!(
        pa.successors(&Configuration::new(), &l).unwrap(),
        vec![Configuration::new()]
    );
    let c = cfg(&[("q", &[Node::Proc(0)])]);
    let succ = pa.successors(&c, &l).unwrap();
    assert_eq!(
        succ,
        vec![
            cfg(&[("q", &[Node::Proc(0)])]),
            cfg(&[("r", &[Node::Proc(1)])])
        ]
    );
    // no entry for `b`: dead configuration
    assert!(pa
        .successors(&c, &Letter::new("b", Node::Proc(1)))
        .unwrap()
        .is_empty());
}

#[test]
fn semantic_delta_keeps_the_frame_disjunct() {
    let pa = ring3_pa(
        &[(
            "at",
            "a",
            "or(and(eq(v1, v0), $src(v0)), and(not(eq(v1, v0)), $at(v1)))",
        )],
        &[("at", 1), ("src", 1)],
        "true",
        &[],
    );
    let g = pa
        .semantic_delta(
            &GroundAtom::new("at", &[Node::Proc(2)]),
            &Letter::new("a", Node::Proc(0)),
        )
        .unwrap();
    assert_eq!(g, f("$at(#P2)"));
    let g = pa
        .semantic_delta(
            &GroundAtom::new("at", &[Node::Proc(0)]),
            &Letter::new("a", Node::Proc(0)),
        )
        .unwrap();
    assert_eq!(g, f("$src(#P0)"));
    let nullary = ring3_pa(
        &[("z", "a", "true"), ("z", "b", "and($z, p(v0))")],
        &[("z", 0)],
        "$z",
        &[],
    );
    let z = GroundAtom::new("z", &[]);
    assert_eq!(
        nullary
            .semantic_delta(&z, &Letter::new("a", Node::Data(1)))
            .unwrap(),
        Formula::True
    );
    assert_eq!(
        nullary
            .semantic_delta(&z, &Letter::new("b", Node::Data(1)))
            .unwrap(),
        Formula::False
    );
}

#[test]
fn membership_reads_right_to_left() {
    // accepts words whose last letter is `b` at a process, preceded by
    // anything
    let pa = ring3_pa(
        &[
            ("s", "b", "and(p(v0), $t)"),
            ("t", "a", "$t"),
            ("t", "b", "$t"),
        ],
        &[("s", 0), ("t", 0)],
        "$s",
        &["t"],
    );
    assert!(pa.accepts(&parse_word("a@P0 b@P1").unwrap()).unwrap());
    assert!(!pa.accepts(&parse_word("b@P1 a@P0").unwrap()).unwrap());
    assert!(!pa.accepts(&parse_word("b@E1").unwrap()).unwrap());
    assert!(!pa.accepts(&[]).unwrap());
    let eps = ring3_pa(&[], &[("t", 0)], "$t", &["t"]);
    assert!(eps.accepts(&[]).unwrap());
    assert!(pa.accepts(&parse_word("b@P7").unwrap()).is_err());
}

#[test]
fn complement_and_intersection() {
    let pa = ring3_pa(
        &[
            ("s", "b", "and(p(v0), $t)"),
            ("t", "a", "$t"),
            ("t", "b", "$t"),
        ],
        &[("s", 0), ("t", 0)],
        "$s",
        &["t"],
    );
    let co = complement(&pa).unwrap();
    let both = intersect(&pa, &pa).unwrap();
    assert!(both.predicates.contains_key("s_1") && both.predicates.contains_key("s_2"));
    let meet = intersect(&pa, &co).unwrap();
    for w in ["", "a@P0", "b@P0", "a@E0 b@P2", "b@E2", "b@P1 a@P1"] {
        let w = parse_word(w).unwrap();
        let x = pa.accepts(&w).unwrap();
        assert_eq!(co.accepts(&w).unwrap(), !x);
        assert_eq!(complement(&co).unwrap().accepts(&w).unwrap(), x);
        assert_eq!(both.accepts(&w).unwrap(), x);
        assert!(!meet.accepts(&w).unwrap());
    }
    let never = ring3_pa(&[], &[("t", 0)], "false", &[]);
    assert!(complement(&never)
        .unwrap()
        .accepts(&parse_word("a@P0 b@E1").unwrap())
        .unwrap());
    let mut other = pa.clone();
    other.alphabet.push(name("c"));
    assert!(matches!(
        intersect(&pa, &other),
        Err(Error::AlphabetMismatch(_))
    ));
}

#[test]
fn validation_rejects_bad_transitions() {
    let mut pa = ring3_pa(&[("t", "a", "$t")], &[("t", 0)], "$t", &["t"]);
    pa.delta.insert((name("t"), name("a")), f("not($t)"));
    assert!(pa.validate().is_err());
    pa.delta.insert((name("t"), name("a")), f("$t(v0)"));
    assert!(matches!(pa.validate(), Err(Error::Arity { .. })));
    pa.delta
        .insert((name("t"), name("a")), f("and($t, eq(v3, v0))"));
    assert!(pa.validate().is_err());
}

#[test]
fn json_round_trip() {
    let pa = ring3_pa(
        &[
            ("s", "b", "and(p(v0), $t)"),
            ("t", "a", "$t"),
            ("t", "b", "$t"),
        ],
        &[("s", 0), ("t", 0)],
        "$s",
        &["t"],
    );
    let text = pa.to_json().unwrap();
    let back = PredicateAutomaton::from_json(&text).unwrap();
    assert_eq!(back, pa);
    assert_eq!(back.to_json().unwrap(), text);
}
