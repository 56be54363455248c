//! Helpers shared by the integration tests: random automata, word
//! enumeration, and a membership oracle that evaluates transition formulas
//! recursively instead of through configurations.

#![allow(dead_code)]

use std::collections::BTreeMap;

use parasymm::automata::{delta_var, PredicateAutomaton};
use parasymm::formula::{eval_ground, eval_term, name, parse_formula, Atom, Formula, Name};
use parasymm::program::{Letter, ProgramSpec};
use parasymm::topology::{Kind, Node, Structure};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn program(file: &str) -> ProgramSpec {
    let path = format!("{}/programs/{file}.json", env!("CARGO_MANIFEST_DIR"));
    ProgramSpec::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub const SYMBOLS: [(&str, usize); 3] = [("z", 0), ("q", 1), ("r", 1)];

/// Terms a transition may use, given the arity of the symbol being read.
fn terms(s: &Structure, arity: usize) -> Vec<String> {
    let mut out = vec!["v0".to_string()];
    if arity == 1 {
        out.push("v1".into());
    }
    match s.kind() {
        Kind::Star => out.push("g()".into()),
        Kind::Ring { .. } => {
            out.push("l(v0)".into());
            out.push("r(v0)".into());
        }
        Kind::Forest { .. } => {}
    }
    out
}

fn literal(s: &Structure, ts: &[String], rng: &mut StdRng) -> String {
    let a = ts.choose(rng).unwrap();
    let b = ts.choose(rng).unwrap();
    let lit = match (s.kind(), rng.gen_range(0..2)) {
        (Kind::Ring { .. }, 0) => format!("p({a})"),
        _ => format!("eq({a}, {b})"),
    };
    if rng.gen_bool(0.5) {
        format!("not({lit})")
    } else {
        lit
    }
}

fn state_atom(ts: &[String], rng: &mut StdRng) -> String {
    let (q, k) = SYMBOLS.choose(rng).unwrap();
    if *k == 0 {
        return format!("${q}");
    }
    format!("${q}({})", ts.choose(rng).unwrap())
}

fn formula(s: &Structure, ts: &[String], depth: usize, rng: &mut StdRng) -> String {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..10) {
            0..=5 => state_atom(ts, rng),
            6..=8 => literal(s, ts, rng),
            _ => "true".into(),
        };
    }
    let n = rng.gen_range(2..=3);
    let parts: Vec<String> = (0..n).map(|_| formula(s, ts, depth - 1, rng)).collect();
    let op = if rng.gen_bool(0.5) { "and" } else { "or" };
    format!("{op}({})", parts.join(", "))
}

/// A random automaton over `{a, b}` with a nullary and two unary symbols.
///
/// With `closed`, the start formula names no node except the star center,
/// so its language is closed under local symmetry.
pub fn random_pa(s: &Structure, closed: bool, rng: &mut StdRng) -> PredicateAutomaton {
    let mut delta = BTreeMap::new();
    for (q, k) in SYMBOLS {
        for sigma in ["a", "b"] {
            if rng.gen_bool(0.85) {
                let f = formula(s, &terms(s, k), 2, rng);
                delta.insert((name(q), name(sigma)), parse_formula(&f).unwrap());
            }
        }
    }
    let start = if closed {
        match s.kind() {
            Kind::Star if rng.gen_bool(0.5) => "$q(g())".to_string(),
            _ => "$z".to_string(),
        }
    } else {
        let nodes = s.finite_nodes().unwrap();
        let n = nodes.choose(rng).unwrap();
        match rng.gen_range(0..3) {
            0 => "$z".to_string(),
            1 => format!("$q(#{n})"),
            _ => format!("or($z, and($q(#{n}), $r(#{n})))"),
        }
    };
    let accepting = SYMBOLS
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(|(q, _)| name(q))
        .collect();
    let pa = PredicateAutomaton {
        structure: s.clone(),
        alphabet: vec![name("a"), name("b")],
        predicates: SYMBOLS.iter().map(|(q, k)| (name(q), *k)).collect(),
        delta,
        start: parse_formula(&start).unwrap(),
        accepting,
    };
    pa.validate().unwrap();
    pa
}

pub fn random_word(
    alphabet: &[Name],
    nodes: &[Node],
    max_len: usize,
    rng: &mut StdRng,
) -> Vec<Letter> {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| Letter {
            command: alphabet.choose(rng).unwrap().clone(),
            node: nodes.choose(rng).unwrap().clone(),
        })
        .collect()
}

/// Every word up to `max_len` letters.
pub fn all_words(letters: &[Letter], max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for w in &layer {
            for l in letters {
                let mut v = w.clone();
                v.push(l.clone());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn letters(alphabet: &[Name], nodes: &[Node]) -> Vec<Letter> {
    alphabet
        .iter()
        .flat_map(|c| {
            nodes.iter().map(move |n| Letter {
                command: c.clone(),
                node: n.clone(),
            })
        })
        .collect()
}

/// Membership by direct recursion: `q(args)` holds at position `i` when the
/// transition of `q` on the `i`-th letter, instantiated with the letter's
/// node and `args`, holds at `i - 1`.
pub fn oracle_accepts(pa: &PredicateAutomaton, w: &[Letter]) -> bool {
    eval(pa, w, w.len(), &pa.start)
}

fn eval(pa: &PredicateAutomaton, w: &[Letter], pos: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::And(gs) => gs.iter().all(|g| eval(pa, w, pos, g)),
        Formula::Or(gs) => gs.iter().any(|g| eval(pa, w, pos, g)),
        Formula::Atom(Atom::State(q, ts)) => {
            let args: Vec<Node> = ts
                .iter()
                .map(|t| eval_term(&pa.structure, t, &BTreeMap::new()).unwrap())
                .collect();
            holds(pa, w, pos, q, &args)
        }
        other => eval_ground(&pa.structure, other).unwrap(),
    }
}

fn holds(pa: &PredicateAutomaton, w: &[Letter], pos: usize, q: &Name, args: &[Node]) -> bool {
    if pos == 0 {
        return pa.accepting.contains(q);
    }
    let l = &w[pos - 1];
    let Some(g) = pa.delta.get(&(q.clone(), l.command.clone())) else {
        return false;
    };
    let vars: Vec<Name> = (0..=args.len()).map(delta_var).collect();
    let mut nodes = vec![l.node.clone()];
    nodes.extend(args.iter().cloned());
    eval(pa, w, pos - 1, &g.instantiate(&vars, &nodes))
}

/// A random injective renaming of threads, fixing the center.
pub fn shuffle_threads(w: &[Letter], pool: u32, rng: &mut StdRng) -> Vec<Letter> {
    let mut ids: Vec<u32> = (0..pool).collect();
    ids.shuffle(rng);
    w.iter()
        .map(|l| {
            let node = match l.node {
                Node::Thread(i) => Node::Thread(ids[i as usize]),
                ref n => n.clone(),
            };
            Letter {
                command: l.command.clone(),
                node,
            }
        })
        .collect()
}

/// Rotate a ring word by `k` positions.
pub fn rotate(w: &[Letter], size: u32, k: u32) -> Vec<Letter> {
    w.iter()
        .map(|l| {
            let node = match l.node {
                Node::Proc(i) => Node::Proc((i + k) % size),
                Node::Data(i) => Node::Data((i + k) % size),
                ref n => n.clone(),
            };
            Letter {
                command: l.command.clone(),
                node,
            }
        })
        .collect()
}
