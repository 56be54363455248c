//! Backward coverability search for predicate automaton emptiness.
//!
//! Configurations are explored from the initial cubes, one letter at a
//! time (reading words right to left). A configuration is only expanded if
//! no expanded configuration covers it, which is what makes the search
//! terminate on monadic automata over homogeneous topologies.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use serde::Serialize;

use crate::automata::{complement, intersect, Configuration, DeltaCache, PredicateAutomaton};
use crate::error::Result;
use crate::program::{word_to_string, Letter};
use crate::topology::{candidates, Covering, Node};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Expansions before giving up.
    pub max_steps: usize,
    /// Largest configuration support, in nodes, before giving up.
    pub max_support: usize,
    /// Skip configurations covered by an expanded one.
    pub pruning: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 100_000,
            max_support: 32,
            pruning: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub expansions: usize,
    pub generated: usize,
    pub pruned: usize,
    pub largest_support: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Emptiness {
    Empty(Stats),
    /// A word accepted by the automaton, in reading order.
    NonEmpty(Vec<Letter>, Stats),
    Unknown(String, Stats),
}

impl Emptiness {
    pub fn stats(&self) -> &Stats {
        match self {
            Emptiness::Empty(s) | Emptiness::NonEmpty(_, s) | Emptiness::Unknown(_, s) => s,
        }
    }
}

fn support(c: &Configuration) -> Vec<Node> {
    let set: BTreeSet<&Node> = c.iter().flat_map(|a| a.args.iter()).collect();
    set.into_iter().cloned().collect()
}

/// Successors of `c` on one letter per class of `(b, support of c)` and
/// per command. Every successor on any letter is covered by one of these.
pub fn repr_succ(
    a: &PredicateAutomaton,
    c: &Configuration,
) -> Result<Vec<(Letter, Configuration)>> {
    repr_succ_cached(a, c, &mut DeltaCache::new())
}

fn repr_succ_cached(
    a: &PredicateAutomaton,
    c: &Configuration,
    cache: &mut DeltaCache,
) -> Result<Vec<(Letter, Configuration)>> {
    let mut out = Vec::new();
    for b in candidates(&a.structure, &support(c))? {
        for sigma in &a.alphabet {
            let letter = Letter {
                command: sigma.clone(),
                node: b.clone(),
            };
            for next in a.successors_cached(c, &letter, cache)? {
                out.push((letter.clone(), next));
            }
        }
    }
    Ok(out)
}

struct Entry {
    config: Configuration,
    parent: Option<(usize, Letter)>,
}

/// Decide whether the automaton accepts some word.
///
/// Entries are taken shortest-trail first, smaller configurations first
/// among equals, then in insertion order, so results are reproducible.
pub fn check_emptiness(a: &PredicateAutomaton, limits: Limits) -> Result<Emptiness> {
    let covering = Covering::new(&a.structure)?;
    let mut stats = Stats::default();
    let mut entries: Vec<Entry> = Vec::new();
    let mut queue: BinaryHeap<Reverse<(usize, usize, usize)>> = BinaryHeap::new();
    let mut seen: HashSet<Configuration> = HashSet::new();
    let mut closed: Vec<usize> = Vec::new();
    let mut cache = DeltaCache::new();

    let push = |config: Configuration,
                parent: Option<(usize, Letter)>,
                depth: usize,
                entries: &mut Vec<Entry>,
                queue: &mut BinaryHeap<Reverse<(usize, usize, usize)>>,
                seen: &mut HashSet<Configuration>,
                stats: &mut Stats| {
        if !seen.insert(config.clone()) {
            return;
        }
        stats.generated += 1;
        let id = entries.len();
        queue.push(Reverse((depth, config.len(), id)));
        entries.push(Entry { config, parent });
    };
    for c in a.start_configurations()? {
        push(c, None, 0, &mut entries, &mut queue, &mut seen, &mut stats);
    }

    while let Some(Reverse((depth, _, id))) = queue.pop() {
        let c = entries[id].config.clone();
        if a.is_accepting(&c) {
            return Ok(Emptiness::NonEmpty(trail(&entries, id), stats));
        }
        if limits.pruning {
            let mut covered = false;
            for &old in closed.iter().rev() {
                if covering.covers(&entries[old].config, &c)? {
                    covered = true;
                    break;
                }
            }
            if covered {
                stats.pruned += 1;
                continue;
            }
        }
        let n = support(&c).len();
        stats.largest_support = stats.largest_support.max(n);
        if n > limits.max_support {
            return Ok(Emptiness::Unknown(
                format!("support of {n} nodes exceeds {}", limits.max_support),
                stats,
            ));
        }
        if stats.expansions >= limits.max_steps {
            return Ok(Emptiness::Unknown(
                format!("{} expansions", limits.max_steps),
                stats,
            ));
        }
        stats.expansions += 1;
        closed.push(id);
        for (letter, next) in repr_succ_cached(a, &c, &mut cache)? {
            push(
                next,
                Some((id, letter)),
                depth + 1,
                &mut entries,
                &mut queue,
                &mut seen,
                &mut stats,
            );
        }
    }
    Ok(Emptiness::Empty(stats))
}

/// Letters from an entry back to an initial configuration. Since words are
/// read right to left, this is already reading order.
fn trail(entries: &[Entry], mut id: usize) -> Vec<Letter> {
    let mut w = Vec::new();
    while let Some((p, l)) = &entries[id].parent {
        w.push(l.clone());
        id = *p;
    }
    w
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inclusion {
    Included(Stats),
    Counterexample(Vec<Letter>, Stats),
    Unknown(String, Stats),
}

/// Decide `L(program) ⊆ L(proof)` through emptiness of the program
/// automaton intersected with the complement of the proof automaton.
pub fn inclusion_check(
    program: &PredicateAutomaton,
    proof: &PredicateAutomaton,
    limits: Limits,
) -> Result<Inclusion> {
    let meet = intersect(program, &complement(proof)?)?;
    Ok(match check_emptiness(&meet, limits)? {
        Emptiness::Empty(s) => Inclusion::Included(s),
        Emptiness::NonEmpty(w, s) => Inclusion::Counterexample(w, s),
        Emptiness::Unknown(m, s) => Inclusion::Unknown(m, s),
    })
}

impl std::fmt::Display for Inclusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Inclusion::Included(_) => write!(f, "included"),
            Inclusion::Counterexample(w, _) => write!(f, "counterexample: {}", word_to_string(w)),
            Inclusion::Unknown(m, _) => write!(f, "unknown: {m}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{name, parse_formula};
    use crate::hoare::max_boolean_basis;
    use crate::program::{instantiate, ProgramSpec};
    use crate::topology::Structure;
    use crate::translate::{add_initialization, basis_to_pa, program_to_pa};

    fn pa(
        s: Structure,
        delta: &[(&str, &str, &str)],
        preds: &[(&str, usize)],
        start: &str,
        acc: &[&str],
    ) -> PredicateAutomaton {
        let pa = PredicateAutomaton {
            structure: s,
            alphabet: vec![name("a"), name("b")],
            predicates: preds.iter().map(|(q, n)| (name(q), *n)).collect(),
            delta: delta
                .iter()
                .map(|(q, s, g)| ((name(q), name(s)), parse_formula(g).unwrap()))
                .collect(),
            start: parse_formula(start).unwrap(),
            accepting: acc.iter().map(|q| name(q)).collect(),
        };
        pa.validate().unwrap();
        pa
    }

    #[test]
    fn trivial_cases() {
        let s = Structure::star_limit();
        let never = pa(s.clone(), &[], &[("t", 0)], "false", &[]);
        let r = check_emptiness(&never, Limits::default()).unwrap();
        assert_eq!(r, Emptiness::Empty(Stats::default()));
        let eps = pa(s, &[], &[("t", 0)], "$t", &["t"]);
        assert!(
            matches!(check_emptiness(&eps, Limits::default()).unwrap(), Emptiness::NonEmpty(w, _) if w.is_empty())
        );
    }

    #[test]
    fn representative_letters_on_the_star() {
        let s = Structure::star_limit();
        let a = pa(
            s,
            &[("q", "a", "$q(v0)"), ("q", "b", "$q(v0)")],
            &[("q", 1)],
            "true",
            &[],
        );
        let succ = repr_succ(&a, &Configuration::new()).unwrap();
        let nodes: BTreeSet<String> = succ.iter().map(|(l, _)| l.node.to_string()).collect();
        assert_eq!(nodes.len(), 2);
        assert_eq!(succ.len(), 4);
        let c = [crate::formula::GroundAtom::new("q", &[Node::Thread(0)])]
            .into_iter()
            .collect();
        let succ = repr_succ(&a, &c).unwrap();
        let nodes: BTreeSet<Node> = succ.iter().map(|(l, _)| l.node.clone()).collect();
        assert_eq!(nodes.len(), 3);
        assert!(nodes.contains(&Node::Center) && nodes.contains(&Node::Thread(0)));
    }

    #[test]
    fn witness_needs_two_threads() {
        // accepts `a@x b@y` with x, y distinct threads
        let s = Structure::star_limit();
        let a = pa(
            s,
            &[
                ("s", "b", "and(not(eq(v0, g())), $t(v0))"),
                ("t", "a", "and(not(eq(v1, v0)), not(eq(v0, g())))"),
            ],
            &[("s", 0), ("t", 1)],
            "$s",
            &[],
        );
        let Emptiness::NonEmpty(w, _) = check_emptiness(&a, Limits::default()).unwrap() else {
            panic!()
        };
        assert!(a.accepts(&w).unwrap());
        assert_eq!(w.len(), 2);
        assert_ne!(w[0].node, w[1].node);
    }

    #[test]
    fn pruning_does_not_change_verdicts() {
        let s = Structure::star_limit();
        // grows an unbounded set of threads, never accepting
        let a = pa(
            s,
            &[("q", "a", "and($q(v1), $q(v0))")],
            &[("q", 1)],
            "$q(#T0)",
            &[],
        );
        let on = check_emptiness(&a, Limits::default()).unwrap();
        assert!(matches!(on, Emptiness::Empty(_)));
        let off = check_emptiness(
            &a,
            Limits {
                max_steps: 200,
                pruning: false,
                ..Limits::default()
            },
        )
        .unwrap();
        assert!(matches!(off, Emptiness::Unknown(..)));
    }

    #[test]
    fn token_ring_inclusion() {
        let r = Structure::ring(3).unwrap();
        for (text, safe) in [
            (include_str!("../programs/token_ring.json"), true),
            (include_str!("../programs/token_ring_broken.json"), false),
        ] {
            let p = ProgramSpec::from_json(text).unwrap();
            let ap = program_to_pa(&p, &r).unwrap();
            let b = max_boolean_basis(&p, &r).unwrap();
            let ah = add_initialization(
                &basis_to_pa(&b, &r, &p.alphabet(), p.domain_size())
                    .unwrap()
                    .automaton,
            );
            match inclusion_check(&ap, &ah, Limits::default()).unwrap() {
                Inclusion::Included(_) => assert!(safe),
                Inclusion::Counterexample(w, _) => {
                    assert!(!safe);
                    let inst = instantiate(&p, &r).unwrap();
                    assert!(
                        inst.run_feasible(&w).unwrap() && inst.is_error_run(&w).unwrap(),
                        "{}",
                        word_to_string(&w)
                    );
                }
                Inclusion::Unknown(m, _) => panic!("{m}"),
            }
        }
    }

    #[test]
    fn empty_basis_yields_an_error_run() {
        let r = Structure::ring(3).unwrap();
        let p = ProgramSpec::from_json(include_str!("../programs/token_ring.json")).unwrap();
        let ap = program_to_pa(&p, &r).unwrap();
        let ah = add_initialization(&basis_to_pa(&[], &r, &p.alphabet(), 2).unwrap().automaton);
        let Inclusion::Counterexample(w, _) = inclusion_check(&ap, &ah, Limits::default()).unwrap()
        else {
            panic!()
        };
        assert!(instantiate(&p, &r).unwrap().is_error_run(&w).unwrap());
    }
}
