use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::{ground_triple, HoareTriple};
use crate::error::{Error, Result};
use crate::formula::{Atom, Formula, Name, Term};
use crate::program::{ProgramSpec, Table};
use crate::topology::{Node, Structure};

/// A starting state from which the triple fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub data: Vec<(Node, u64)>,
    pub locations: Vec<(Node, Name)>,
}

pub(super) enum Compiled {
    Const(bool),
    Data(usize, u64),
    Loc(usize, usize),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
}

impl Compiled {
    pub(super) fn eval(&self, val: &[u64], loc: &[usize]) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Data(i, x) => val[*i] == *x,
            Compiled::Loc(i, l) => loc[*i] == *l,
            Compiled::Not(g) => !g.eval(val, loc),
            Compiled::And(gs) => gs.iter().all(|g| g.eval(val, loc)),
            Compiled::Or(gs) => gs.iter().any(|g| g.eval(val, loc)),
        }
    }
}

pub(super) struct Frame {
    data: Vec<Node>,
    locs: Vec<Node>,
    data_idx: HashMap<Node, usize>,
    loc_idx: HashMap<Node, usize>,
}

impl Frame {
    pub(super) fn new(data: Vec<Node>, locs: Vec<Node>) -> Frame {
        Frame {
            data_idx: data
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, n)| (n, i))
                .collect(),
            loc_idx: locs
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, n)| (n, i))
                .collect(),
            data,
            locs,
        }
    }

    pub(super) fn compile(&self, spec: &ProgramSpec, f: &Formula) -> Result<Compiled> {
        Ok(match f {
            Formula::True => Compiled::Const(true),
            Formula::False => Compiled::Const(false),
            Formula::Atom(Atom::Data(Term::Node(n), x)) => Compiled::Data(self.data_idx[n], *x),
            Formula::Atom(Atom::Loc(Term::Node(n), l)) => {
                let li = spec
                    .location_index(l)
                    .ok_or_else(|| Error::UnknownSymbol(l.to_string()))?;
                Compiled::Loc(self.loc_idx[n], li)
            }
            Formula::Atom(a) => {
                return Err(Error::ForbiddenAtom(format!("{a} in a ground assertion")))
            }
            Formula::Not(g) => Compiled::Not(Box::new(self.compile(spec, g)?)),
            Formula::And(gs) => Compiled::And(
                gs.iter()
                    .map(|g| self.compile(spec, g))
                    .collect::<Result<_>>()?,
            ),
            Formula::Or(gs) => Compiled::Or(
                gs.iter()
                    .map(|g| self.compile(spec, g))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

fn loc_nodes(f: &Formula, out: &mut BTreeSet<Node>) {
    f.visit_atoms(&mut |a| {
        if let Atom::Loc(Term::Node(n), _) = a {
            out.insert(n.clone());
        }
    });
}

struct Step<'a> {
    cmd: usize,
    loc_node: Option<usize>,
    rw: Vec<usize>,
    table: &'a Table,
}

type PreStates = Rc<Vec<(Vec<usize>, Vec<u64>)>>;

/// Validity checking by exhaustive enumeration of the data values (and,
/// for extended triples, locations) of the nodes a triple mentions.
///
/// States satisfying a pre are cached, so checking many triples with a
/// shared pre enumerates once.
pub struct Checker<'a> {
    spec: &'a ProgramSpec,
    structure: Structure,
    cache: HashMap<(Formula, Vec<Node>, Vec<Node>), PreStates>,
}

impl<'a> Checker<'a> {
    pub fn new(spec: &'a ProgramSpec, s: &Structure) -> Checker<'a> {
        Checker {
            spec,
            structure: s.clone(),
            cache: HashMap::new(),
        }
    }

    pub fn valid(&mut self, t: &HoareTriple) -> Result<bool> {
        Ok(self.check(t)?.is_none())
    }

    pub fn check(&mut self, t: &HoareTriple) -> Result<Option<Counterexample>> {
        let s = self.structure.clone();
        let t = ground_triple(&s, t)?;
        if !t.extended
            && (t.pre.atoms().iter().chain(t.post.atoms().iter()))
                .any(|a| matches!(a, Atom::Loc(..)))
        {
            return Err(Error::ForbiddenAtom(
                "location atom in a standard triple".into(),
            ));
        }
        let mut data: BTreeSet<Node> = t.pre.nodes().into_iter().chain(t.post.nodes()).collect();
        let mut locs = BTreeSet::new();
        loc_nodes(&t.pre, &mut locs);
        loc_nodes(&t.post, &mut locs);
        let mut raw_steps = Vec::new();
        for l in &t.word {
            let cmd = self
                .spec
                .command_index(&l.command)
                .ok_or_else(|| Error::UnknownSymbol(l.command.to_string()))?;
            if t.extended && !self.spec.enabled(&s, &l.node)?.contains(&cmd) {
                return Ok(None);
            }
            let Some(local) = self.spec.local(&s, cmd, &l.node)? else {
                return Ok(None);
            };
            data.extend(local.rw.iter().cloned());
            if t.extended {
                locs.insert(l.node.clone());
            }
            raw_steps.push((cmd, l.node.clone(), local.rw, local.table));
        }
        let data: Vec<Node> = data.into_iter().collect();
        let locs: Vec<Node> = locs.into_iter().collect();
        let frame = Frame::new(data, locs);
        let steps: Vec<Step> = raw_steps
            .into_iter()
            .map(|(cmd, node, rw, table)| Step {
                cmd,
                table,
                loc_node: t.extended.then(|| frame.loc_idx[&node]),
                rw: rw.iter().map(|n| frame.data_idx[n]).collect(),
            })
            .collect();
        let states = self.pre_states(&t.pre, &frame)?;
        let post = frame.compile(self.spec, &t.post)?;
        let bw = self.spec.bitwidth;
        'states: for (loc0, val0) in states.iter() {
            let (mut loc, mut val) = (loc0.clone(), val0.clone());
            for st in &steps {
                let c = &self.spec.commands[st.cmd];
                if let Some(i) = st.loc_node {
                    if loc[i] != c.src {
                        continue 'states;
                    }
                    loc[i] = c.tgt;
                }
                let input: Vec<u64> = st.rw.iter().map(|&i| val[i]).collect();
                let Some(out) = st.table.apply(&input, bw) else {
                    continue 'states;
                };
                for (&i, o) in st.rw.iter().zip(out) {
                    val[i] = o;
                }
            }
            if !post.eval(&val, &loc) {
                return Ok(Some(Counterexample {
                    data: frame
                        .data
                        .iter()
                        .cloned()
                        .zip(val0.iter().copied())
                        .collect(),
                    locations: frame
                        .locs
                        .iter()
                        .cloned()
                        .zip(loc0.iter().map(|&l| self.spec.locations[l].clone()))
                        .collect(),
                }));
            }
        }
        Ok(None)
    }

    fn pre_states(&mut self, pre: &Formula, frame: &Frame) -> Result<PreStates> {
        let key = (pre.clone(), frame.data.clone(), frame.locs.clone());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let compiled = frame.compile(self.spec, pre)?;
        let d = self.spec.domain_size();
        let nl = self.spec.locations.len();
        let mut out = Vec::new();
        let mut loc = vec![0usize; frame.locs.len()];
        loop {
            let mut val = vec![0u64; frame.data.len()];
            loop {
                if compiled.eval(&val, &loc) {
                    out.push((loc.clone(), val.clone()));
                }
                if !odometer(&mut val, d) {
                    break;
                }
            }
            if !odometer_usize(&mut loc, nl) {
                break;
            }
        }
        let out = Rc::new(out);
        self.cache.insert(key, out.clone());
        Ok(out)
    }
}

fn odometer(v: &mut [u64], base: u64) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

fn odometer_usize(v: &mut [usize], base: usize) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

/// A state from which `t` fails, if any.
pub fn check_triple(
    spec: &ProgramSpec,
    s: &Structure,
    t: &HoareTriple,
) -> Result<Option<Counterexample>> {
    Checker::new(spec, s).check(t)
}

pub fn triple_valid(spec: &ProgramSpec, s: &Structure, t: &HoareTriple) -> Result<bool> {
    Ok(check_triple(spec, s, t)?.is_none())
}
