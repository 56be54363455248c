use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::valid::Frame;
use super::{ground_assertion, HoareTriple};
use crate::error::{Error, Result};
use crate::formula::{parse_formula, simplify, vars, Atom, Formula, Name, Term};
use crate::program::{instantiate, GlobalState, Letter, ProgramSpec};
use crate::topology::{Node, Structure};

/// `forall u1..uk. body`, with `body` free of node quantifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AshcroftInvariant {
    pub width: usize,
    pub body: Formula,
}

#[derive(Serialize, Deserialize)]
struct RawInvariant {
    width: usize,
    body: String,
}

impl AshcroftInvariant {
    pub fn new(width: usize, body: Formula) -> Result<AshcroftInvariant> {
        let allowed: BTreeSet<Name> = vars("u", 1, width).into_iter().collect();
        if let Some(v) = body.free_vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(Error::Schema(format!(
                "invariant variable `{v}` outside u1..u{width}"
            )));
        }
        if body.mentions_state() {
            return Err(Error::ForbiddenAtom(
                "automaton atom in an invariant".into(),
            ));
        }
        Ok(AshcroftInvariant { width, body })
    }

    pub fn from_json(text: &str) -> Result<AshcroftInvariant> {
        let raw: RawInvariant = serde_json::from_str(text)?;
        AshcroftInvariant::new(raw.width, parse_formula(&raw.body)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawInvariant {
            width: self.width,
            body: self.body.to_string(),
        })
        .expect("plain strings serialize")
    }

    /// `body[u := tuple]`, ground and simplified.
    pub fn instance(&self, s: &Structure, tuple: &[Node]) -> Result<Formula> {
        ground_assertion(s, &self.body.instantiate(&vars("u", 1, self.width), tuple))
    }

    /// The conjunction of all instances over the carrier of `s`.
    pub fn over(&self, s: &Structure) -> Result<Formula> {
        let mut conj = Vec::new();
        for t in node_tuples(s.finite_nodes()?, self.width) {
            conj.push(self.instance(s, &t)?);
        }
        Ok(simplify(&Formula::And(conj)))
    }
}

fn node_tuples(nodes: &[Node], k: usize) -> Vec<Vec<Node>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                nodes.iter().map(move |n| {
                    let mut u = t.clone();
                    u.push(n.clone());
                    u
                })
            })
            .collect();
    }
    out
}

/// A failed condition with the state that witnesses it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    pub condition: &'static str,
    pub state: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AshcroftReport {
    pub init: bool,
    pub cont: bool,
    pub safe: bool,
    pub failures: Vec<CheckFailure>,
}

impl AshcroftReport {
    pub fn passed(&self) -> bool {
        self.init && self.cont && self.safe
    }
}

const MAX_STATES: u64 = 20_000_000;

fn show(spec: &ProgramSpec, nodes: &[Node], st: &GlobalState) -> String {
    nodes
        .iter()
        .enumerate()
        .map(|(i, n)| format!("{n}:{}={}", spec.locations[st.loc[i] as usize], st.val[i]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Check the three invariant conditions on a finite structure by
/// enumerating every state: initial states satisfy the invariant, every
/// step preserves it, and no state satisfying it has a node at the error
/// location.
pub fn ashcroft_check(
    spec: &ProgramSpec,
    s: &Structure,
    inv: &AshcroftInvariant,
) -> Result<AshcroftReport> {
    let inst = instantiate(spec, s)?;
    let nodes = inst.nodes().to_vec();
    let n = nodes.len();
    let (nl, d) = (spec.locations.len() as u64, spec.domain_size());
    let total = nl
        .checked_pow(n as u32)
        .and_then(|a| d.checked_pow(n as u32).and_then(|b| a.checked_mul(b)));
    if total.is_none_or(|t| t > MAX_STATES) {
        return Err(Error::Limit(format!(
            "{} has too many states to enumerate",
            s.label()
        )));
    }
    let frame = Frame::new(nodes.clone(), nodes.clone());
    let phi = frame.compile(spec, &inv.over(s)?)?;
    let holds = |st: &GlobalState| {
        let loc: Vec<usize> = st.loc.iter().map(|&l| l as usize).collect();
        phi.eval(&st.val, &loc)
    };
    let mut report = AshcroftReport {
        init: true,
        cont: true,
        safe: true,
        failures: Vec::new(),
    };
    let mut st = GlobalState {
        loc: vec![0; n],
        val: vec![0; n],
    };
    loop {
        loop {
            let is_init = st.loc.iter().all(|&l| l as usize == spec.init);
            let ok = holds(&st);
            if is_init && !ok && report.init {
                report.init = false;
                report.failures.push(CheckFailure {
                    condition: "init",
                    state: show(spec, &nodes, &st),
                });
            }
            if ok {
                if report.safe && inst.is_error(&st) {
                    report.safe = false;
                    report.failures.push(CheckFailure {
                        condition: "safe",
                        state: show(spec, &nodes, &st),
                    });
                }
                if report.cont {
                    for (c, a, next) in inst.successors(&st) {
                        if !holds(&next) {
                            report.cont = false;
                            report.failures.push(CheckFailure {
                                condition: "cont",
                                state: format!(
                                    "{} --{}@{}-->",
                                    show(spec, &nodes, &st),
                                    spec.commands[c].name,
                                    nodes[a]
                                ),
                            });
                            break;
                        }
                    }
                }
            }
            if !bump(&mut st.val, d) {
                break;
            }
        }
        if !bump_loc(&mut st.loc, nl as u16) {
            break;
        }
    }
    Ok(report)
}

fn bump(v: &mut [u64], base: u64) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

fn bump_loc(v: &mut [u16], base: u16) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

fn loc_atom(n: &Node, l: &Name) -> Formula {
    Formula::loc(Term::Node(n.clone()), l)
}

/// The extended triples read off an invariant on a finite structure:
///
/// * Init: `{all nodes at init} eps {body[a]}` for every tuple `a`;
/// * Cont: `{inv} c@a0 {body[a]}` for every command `c` enabled at `a0`;
/// * Safe: `{inv} eps {not(loc(b, err))}` for every node `b`.
pub fn extract_triples(
    spec: &ProgramSpec,
    s: &Structure,
    inv: &AshcroftInvariant,
) -> Result<Vec<HoareTriple>> {
    let nodes = s.finite_nodes()?;
    let all = inv.over(s)?;
    let init = &spec.locations[spec.init];
    let at_init = Formula::And(nodes.iter().map(|n| loc_atom(n, init)).collect());
    let tuples = node_tuples(nodes, inv.width);
    let mut posts = Vec::with_capacity(tuples.len());
    for t in &tuples {
        posts.push(inv.instance(s, t)?);
    }
    let mut out = Vec::new();
    for p in &posts {
        out.push(HoareTriple::extended(
            at_init.clone(),
            Vec::new(),
            p.clone(),
        ));
    }
    for a0 in nodes {
        for &c in spec.enabled(s, a0)? {
            let word = vec![Letter {
                command: spec.commands[c].name.clone(),
                node: a0.clone(),
            }];
            for p in &posts {
                out.push(HoareTriple::extended(all.clone(), word.clone(), p.clone()));
            }
        }
    }
    let err = &spec.locations[spec.err];
    for b in nodes {
        out.push(HoareTriple::extended(
            all.clone(),
            Vec::new(),
            Formula::not(loc_atom(b, err)),
        ));
    }
    Ok(out)
}

fn fix_locations(f: &Formula, nodes: &[Node], lambda: &[usize], spec: &ProgramSpec) -> Formula {
    let g = f
        .map_atoms::<()>(&mut |a| {
            Ok(match a {
                Atom::Loc(Term::Node(n), l) => match nodes.iter().position(|m| m == n) {
                    Some(i) => {
                        if spec.locations[lambda[i]] == *l {
                            Formula::True
                        } else {
                            Formula::False
                        }
                    }
                    None => Formula::Atom(a.clone()),
                },
                _ => Formula::Atom(a.clone()),
            })
        })
        .expect("infallible");
    simplify(&g)
}

/// Standard triples obtained by substituting location maps into extended
/// triples: for every `lambda` on the nodes with location atoms (and the
/// command node) that the word can execute from, reaching `lambda'`, the
/// triple `{pre[lambda]} word {post[lambda']}`. Triples that hold
/// trivially (pre `false` or post `true`) are omitted.
pub fn deextend(
    spec: &ProgramSpec,
    s: &Structure,
    triples: &[HoareTriple],
) -> Result<Vec<HoareTriple>> {
    let mut out: Vec<HoareTriple> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for t in triples {
        let t = super::ground_triple(s, t)?;
        let mut locs = BTreeSet::new();
        for f in [&t.pre, &t.post] {
            f.visit_atoms(&mut |a| {
                if let Atom::Loc(Term::Node(n), _) = a {
                    locs.insert(n.clone());
                }
            });
        }
        locs.extend(t.word.iter().map(|l| l.node.clone()));
        let locs: Vec<Node> = locs.into_iter().collect();
        let mut steps = Vec::new();
        let mut runnable = true;
        for l in &t.word {
            let c = spec
                .command_index(&l.command)
                .ok_or_else(|| Error::UnknownSymbol(l.command.to_string()))?;
            runnable &= spec.enabled(s, &l.node)?.contains(&c);
            steps.push((c, locs.iter().position(|m| *m == l.node).unwrap()));
        }
        if !runnable {
            continue;
        }
        let mut lambda = vec![0usize; locs.len()];
        loop {
            let mut after = lambda.clone();
            let mut ok = true;
            for &(c, i) in &steps {
                let cmd = &spec.commands[c];
                if after[i] != cmd.src {
                    ok = false;
                    break;
                }
                after[i] = cmd.tgt;
            }
            if ok {
                let pre = fix_locations(&t.pre, &locs, &lambda, spec);
                let post = fix_locations(&t.post, &locs, &after, spec);
                if pre != Formula::False && post != Formula::True {
                    let n = HoareTriple::new(pre, t.word.clone(), post);
                    if seen.insert(n.clone()) {
                        out.push(n);
                    }
                }
            }
            let mut carry = true;
            for x in lambda.iter_mut().rev() {
                *x += 1;
                if *x < spec.locations.len() {
                    carry = false;
                    break;
                }
                *x = 0;
            }
            if carry {
                break;
            }
        }
    }
    Ok(out)
}
