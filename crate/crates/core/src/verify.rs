//! The end-to-end decision procedure and the refinement loop.
//!
//! Both compare the error runs of the program against the words refuted by
//! a basis of Hoare triples. Maximal mode uses the full Boolean basis up
//! front; refine mode grows a basis from the counterexamples it meets.

use std::collections::{BTreeMap, BTreeSet};

use crate::emptiness::{inclusion_check, Inclusion, Limits, Stats};
use crate::error::{Error, Result};
use crate::formula::{simplify, Formula, Term};
use crate::hoare::{max_boolean_basis, HoareTriple};
use crate::program::{instantiate, Letter, ProgramSpec};
use crate::topology::{Kind, Node, Path, Structure};
use crate::translate::{add_initialization, basis_to_pa, program_to_pa};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Maximal,
    Refine,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub mode: Mode,
    pub limits: Limits,
    /// Starting basis for refine mode; ignored in maximal mode.
    pub basis: Vec<HoareTriple>,
    pub max_rounds: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            mode: Mode::Maximal,
            limits: Limits::default(),
            basis: Vec::new(),
            max_rounds: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    /// A feasible error run, and its copy inside a finite member.
    Unsafe {
        witness: Vec<Letter>,
        instance: Structure,
        replay: Vec<Letter>,
    },
    Unknown(String),
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Safe => 0,
            Verdict::Unsafe { .. } => 1,
            Verdict::Unknown(_) => 2,
        }
    }
}

/// One inclusion check of the refinement loop.
#[derive(Clone, Debug)]
pub struct Round {
    pub basis_size: usize,
    pub counterexample: Option<Vec<Letter>>,
    pub feasible: bool,
    /// The triples added for an infeasible counterexample refute it.
    pub refuted: bool,
    pub stats: Stats,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub verdict: Verdict,
    pub basis: Vec<HoareTriple>,
    pub rounds: Vec<Round>,
}

pub fn verify(spec: &ProgramSpec, s: &Structure, opts: &Options) -> Result<Report> {
    spec.validate_for(s)?;
    let program = program_to_pa(spec, s)?;
    let mut basis = match opts.mode {
        Mode::Maximal => max_boolean_basis(spec, s)?,
        Mode::Refine => opts.basis.clone(),
    };
    let mut rounds = Vec::new();
    loop {
        if rounds.len() >= opts.max_rounds {
            let verdict = Verdict::Unknown(format!("no verdict after {} rounds", opts.max_rounds));
            return Ok(Report {
                verdict,
                basis,
                rounds,
            });
        }
        let proof = add_initialization(
            &basis_to_pa(&basis, s, &spec.alphabet(), spec.domain_size())?.automaton,
        );
        let mut round = Round {
            basis_size: basis.len(),
            counterexample: None,
            feasible: false,
            refuted: false,
            stats: Stats::default(),
        };
        let w = match inclusion_check(&program, &proof, opts.limits)? {
            Inclusion::Included(stats) => {
                round.stats = stats;
                rounds.push(round);
                return Ok(Report {
                    verdict: Verdict::Safe,
                    basis,
                    rounds,
                });
            }
            Inclusion::Unknown(m, stats) => {
                round.stats = stats;
                rounds.push(round);
                return Ok(Report {
                    verdict: Verdict::Unknown(m),
                    basis,
                    rounds,
                });
            }
            Inclusion::Counterexample(w, stats) => {
                round.stats = stats;
                w
            }
        };
        round.counterexample = Some(w.clone());
        let (instance, replay) = embed_word(s, &w)?;
        let inst = instantiate(spec, &instance)?;
        if inst.run_feasible(&replay)? && inst.is_error_run(&replay)? {
            round.feasible = true;
            rounds.push(round);
            let verdict = Verdict::Unsafe {
                witness: w,
                instance,
                replay,
            };
            return Ok(Report {
                verdict,
                basis,
                rounds,
            });
        }
        if opts.mode == Mode::Maximal {
            rounds.push(round);
            let verdict =
                Verdict::Unknown("the maximal basis left an infeasible counterexample".into());
            return Ok(Report {
                verdict,
                basis,
                rounds,
            });
        }
        let before = basis.len();
        for t in refinement_triples(spec, s, &w)? {
            if !basis.contains(&t) {
                basis.push(t);
            }
        }
        let check = add_initialization(
            &basis_to_pa(&basis, s, &spec.alphabet(), spec.domain_size())?.automaton,
        );
        round.refuted = check.accepts(&w)?;
        rounds.push(round);
        if !round_refuted(&rounds) || basis.len() == before {
            let verdict = Verdict::Unknown("refinement made no progress".into());
            return Ok(Report {
                verdict,
                basis,
                rounds,
            });
        }
    }
}

fn round_refuted(rounds: &[Round]) -> bool {
    rounds.last().is_some_and(|r| r.refuted)
}

/// `mu(n) in values`, or `None` when every value is allowed.
fn member(n: &Node, values: &BTreeSet<u64>, domain: u64) -> Option<Formula> {
    if values.len() as u64 == domain {
        return None;
    }
    let t = Term::Node(n.clone());
    Some(simplify(&Formula::or(
        values
            .iter()
            .map(|&x| Formula::data(t.clone(), x))
            .collect(),
    )))
}

fn conj(fs: Vec<Formula>) -> Formula {
    simplify(&Formula::and(fs))
}

/// A state over `nodes` as a conjunction of data atoms.
fn state_formula(nodes: &[Node], vals: &[u64]) -> Formula {
    conj(
        nodes
            .iter()
            .zip(vals)
            .map(|(n, &x)| Formula::data(Term::Node(n.clone()), x))
            .collect(),
    )
}

fn states_formula(nodes: &[Node], states: &BTreeSet<Vec<u64>>) -> Formula {
    simplify(&Formula::or(
        states.iter().map(|v| state_formula(nodes, v)).collect(),
    ))
}

/// Triples refuting an infeasible error run, built from strongest
/// postconditions along it, starting from the all-zero state.
///
/// A per-node approximation is tried first since its triples generalize
/// across node tuples. If it does not block the run, triples over the exact
/// joint postconditions of every node the run touches are used instead.
pub fn refinement_triples(
    spec: &ProgramSpec,
    s: &Structure,
    w: &[Letter],
) -> Result<Vec<HoareTriple>> {
    let domain = spec.domain_size();
    let bw = spec.bitwidth;
    let mut steps = Vec::with_capacity(w.len());
    for l in w {
        steps.push(
            spec.local_letter(s, l)?
                .map(|(_, local)| (local.rw, local.table)),
        );
    }

    let nodes: Vec<Node> = steps
        .iter()
        .flatten()
        .flat_map(|(rw, _)| rw.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    // per-node sets
    let mut out = Vec::new();
    let mut sets: BTreeMap<Node, BTreeSet<u64>> = nodes
        .iter()
        .map(|n| (n.clone(), BTreeSet::from([0])))
        .collect();
    // false stays false through the rest of the run
    let tail = |i: usize, mut out: Vec<HoareTriple>| {
        for l in &w[i + 1..] {
            let t = HoareTriple::new(Formula::False, vec![l.clone()], Formula::False);
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    };
    for (i, (l, step)) in w.iter().zip(&steps).enumerate() {
        let word = vec![l.clone()];
        let Some((rw, table)) = step else {
            out.push(HoareTriple::new(Formula::True, word, Formula::False));
            return Ok(tail(i, out));
        };
        let ins: Vec<BTreeSet<u64>> = rw.iter().map(|n| sets[n].clone()).collect();
        let pre = conj(
            rw.iter()
                .zip(&ins)
                .filter_map(|(n, v)| member(n, v, domain))
                .collect(),
        );
        let mut outs = vec![BTreeSet::new(); rw.len()];
        for input in cartesian(&ins) {
            if let Some(o) = table.apply(&input, bw) {
                for (j, x) in o.into_iter().enumerate() {
                    outs[j].insert(x);
                }
            }
        }
        if outs.iter().any(|o| o.is_empty()) {
            out.push(HoareTriple::new(pre, word, Formula::False));
            return Ok(tail(i, out));
        }
        for (n, o) in rw.iter().zip(&outs) {
            if let Some(post) = member(n, o, domain) {
                out.push(HoareTriple::new(pre.clone(), word.clone(), post));
            }
        }
        for (n, v) in &sets {
            if !rw.contains(n) {
                if let Some(f) = member(n, v, domain) {
                    out.push(HoareTriple::new(f.clone(), word.clone(), f));
                }
            }
        }
        for (n, o) in rw.iter().zip(outs) {
            sets.insert(n.clone(), o);
        }
    }

    // joint sets over every touched node
    out.clear();
    let pos = |n: &Node| nodes.iter().position(|m| m == n).unwrap();
    let mut states = BTreeSet::from([vec![0u64; nodes.len()]]);
    for (i, (l, step)) in w.iter().zip(&steps).enumerate() {
        let pre = states_formula(&nodes, &states);
        let Some((rw, table)) = step else {
            unreachable!("blocked letters are handled above")
        };
        let idx: Vec<usize> = rw.iter().map(pos).collect();
        let mut next = BTreeSet::new();
        for v in &states {
            let input: Vec<u64> = idx.iter().map(|&i| v[i]).collect();
            if let Some(o) = table.apply(&input, bw) {
                let mut u = v.clone();
                for (&i, x) in idx.iter().zip(o) {
                    u[i] = x;
                }
                next.insert(u);
            }
        }
        let post = if next.is_empty() {
            Formula::False
        } else {
            states_formula(&nodes, &next)
        };
        out.push(HoareTriple::new(pre, vec![l.clone()], post));
        if next.is_empty() {
            return Ok(tail(i, out));
        }
        states = next;
    }
    Err(Error::InvalidProgram(
        "the run is feasible; no refuting triples exist".into(),
    ))
}

fn cartesian(sets: &[BTreeSet<u64>]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for s in sets {
        out = out
            .into_iter()
            .flat_map(|p| {
                s.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// The smallest finite member containing a copy of the word's nodes, and
/// the word moved into it. Finite structures are returned unchanged.
pub fn embed_word(s: &Structure, w: &[Letter]) -> Result<(Structure, Vec<Letter>)> {
    if s.is_finite() {
        return Ok((s.clone(), w.to_vec()));
    }
    let (fin, map): (Structure, BTreeMap<Node, Node>) = match s.kind() {
        Kind::Star => {
            let threads: BTreeSet<u32> = w
                .iter()
                .filter_map(|l| {
                    if let Node::Thread(i) = l.node {
                        Some(i)
                    } else {
                        None
                    }
                })
                .collect();
            let m = w
                .iter()
                .map(|l| {
                    let n = match &l.node {
                        Node::Thread(i) => {
                            Node::Thread(threads.iter().position(|t| t == i).unwrap() as u32)
                        }
                        n => n.clone(),
                    };
                    (l.node.clone(), n)
                })
                .collect();
            (Structure::star(threads.len().max(1) as u32), m)
        }
        Kind::Forest { height } => {
            let mut prefixes: BTreeSet<(u32, Path)> = BTreeSet::new();
            for l in w {
                if let Node::Forest { tree, path } = &l.node {
                    for k in 0..=path.len() {
                        prefixes.insert((*tree, path[..k].iter().copied().collect()));
                    }
                }
            }
            let trees: Vec<u32> = prefixes
                .iter()
                .map(|(t, _)| *t)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let mut branching = 1;
            let mut new_path: BTreeMap<(u32, Path), Path> = BTreeMap::new();
            // BTreeSet order visits parents before children and siblings in order
            for (t, p) in &prefixes {
                let q = match p.split_last() {
                    None => Path::new(),
                    Some((last, parent)) => {
                        let parent: Path = parent.iter().copied().collect();
                        let mut q = new_path[&(*t, parent.clone())].clone();
                        if parent.len().is_multiple_of(2) {
                            let rank = prefixes
                                .iter()
                                .filter(|(t2, p2)| {
                                    t2 == t
                                        && p2.len() == p.len()
                                        && p2.starts_with(&parent)
                                        && p2[parent.len()] < *last
                                })
                                .count() as u32;
                            branching = branching.max(rank + 1);
                            q.push(rank);
                        } else {
                            q.push(0);
                        }
                        q
                    }
                };
                new_path.insert((*t, p.clone()), q);
            }
            let m = w
                .iter()
                .map(|l| {
                    let Node::Forest { tree, path } = &l.node else {
                        unreachable!()
                    };
                    let t = trees.iter().position(|x| x == tree).unwrap() as u32;
                    (
                        l.node.clone(),
                        Node::Forest {
                            tree: t,
                            path: new_path[&(*tree, path.clone())].clone(),
                        },
                    )
                })
                .collect();
            (
                Structure::forest(height, branching, trees.len().max(1) as u32)?,
                m,
            )
        }
        Kind::Ring { .. } => unreachable!("rings are finite"),
    };
    Ok((fin, rename(w, &map)))
}

fn rename(w: &[Letter], m: &BTreeMap<Node, Node>) -> Vec<Letter> {
    w.iter()
        .map(|l| Letter {
            command: l.command.clone(),
            node: m[&l.node].clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hoare::Checker;
    use crate::program::parse_word;

    fn load(text: &str) -> ProgramSpec {
        ProgramSpec::from_json(text).unwrap()
    }

    #[test]
    fn star_embedding_renumbers_threads() {
        let w = parse_word("acquire@T7 acquire@T2 check@T7").unwrap();
        let (fin, v) = embed_word(&Structure::star_limit(), &w).unwrap();
        assert_eq!(fin, Structure::star(2));
        assert_eq!(
            crate::program::word_to_string(&v),
            "acquire@T1 acquire@T0 check@T1"
        );
    }

    #[test]
    fn forest_embedding_compresses_children() {
        let w = vec![
            Letter::new("a", Node::forest(4, &[5, 0, 3])),
            Letter::new("a", Node::forest(4, &[2, 0, 3])),
            Letter::new("a", Node::forest(9, &[])),
        ];
        let (fin, v) = embed_word(&Structure::forest_limit(5).unwrap(), &w).unwrap();
        assert_eq!(fin, Structure::forest(5, 2, 2).unwrap());
        let nodes: Vec<String> = v.iter().map(|l| l.node.to_string()).collect();
        assert_eq!(nodes, ["F0:1.0.0", "F0:0.0.0", "F1:"]);
    }

    #[test]
    fn maximal_mode_on_ring() {
        let r = Structure::ring(3).unwrap();
        let safe = verify(
            &load(include_str!("../programs/token_ring.json")),
            &r,
            &Options::default(),
        )
        .unwrap();
        assert_eq!(safe.verdict, Verdict::Safe);
        let broken = verify(
            &load(include_str!("../programs/token_ring_broken.json")),
            &r,
            &Options::default(),
        )
        .unwrap();
        assert!(matches!(broken.verdict, Verdict::Unsafe { .. }));
    }

    #[test]
    fn refinement_triples_are_valid() {
        let p = load(include_str!("../programs/star_mutex.json"));
        let s = Structure::star_limit();
        let w = parse_word("acquire@T0 acquire@T1 check@T1").unwrap();
        let ts = refinement_triples(&p, &s, &w).unwrap();
        assert_eq!(ts.last().unwrap().post, Formula::False);
        let mut ch = Checker::new(&p, &s);
        for t in &ts {
            assert!(ch.valid(t).unwrap(), "{t}");
        }
    }

    #[test]
    fn refine_mode_on_star_mutex() {
        for (text, safe) in [
            (include_str!("../programs/star_mutex.json"), true),
            (include_str!("../programs/star_mutex_broken.json"), false),
        ] {
            let opts = Options {
                mode: Mode::Refine,
                ..Options::default()
            };
            let r = verify(&load(text), &Structure::star_limit(), &opts).unwrap();
            assert_eq!(r.verdict == Verdict::Safe, safe, "{:?}", r.verdict);
            assert!(r
                .rounds
                .iter()
                .all(|x| x.counterexample.is_none() || x.feasible || x.refuted));
        }
    }
}
