//! Predicate automata over a structure: alternating automata whose
//! letters are command/node pairs and whose transitions are positive
//! formulas mixing automaton predicates with structure atoms. Words are
//! read from right to left.

mod json;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::formula::{
    dualize, eval_term, eval_with, name, simplify, to_dnf, Atom, Formula, GroundAtom, Name,
    NoState, Term,
};
use crate::program::Letter;
use crate::topology::{Node, Structure};

pub use json::PA_SCHEMA;

/// A finite set of ground automaton atoms.
pub type Configuration = BTreeSet<GroundAtom>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateAutomaton {
    pub structure: Structure,
    pub alphabet: Vec<Name>,
    /// Predicate symbols with their arities.
    pub predicates: BTreeMap<Name, usize>,
    /// Missing entries mean `false`.
    pub delta: BTreeMap<(Name, Name), Formula>,
    pub start: Formula,
    pub accepting: BTreeSet<Name>,
}

fn state_positive(f: &Formula, neg: bool) -> bool {
    match f {
        Formula::True | Formula::False => true,
        Formula::Atom(a) => !(neg && a.is_state()),
        Formula::Not(g) => state_positive(g, !neg),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(|g| state_positive(g, neg)),
    }
}

/// `v0, v1, ...`: `v0` names the letter's node, `v1..` the atom arguments.
pub fn delta_var(i: usize) -> Name {
    name(&format!("v{i}"))
}

/// Keep only the minimal configurations.
pub fn absorb(mut cs: Vec<Configuration>) -> Vec<Configuration> {
    cs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    cs.dedup();
    let mut out: Vec<Configuration> = Vec::with_capacity(cs.len());
    for c in cs {
        if !out.iter().any(|o| o.is_subset(&c)) {
            out.push(c);
        }
    }
    out
}

const MAX_PRODUCT: usize = 200_000;

/// Cubes of the conjunction of several DNFs, minimal ones only.
pub fn product(dnfs: &[Rc<Vec<Configuration>>]) -> Result<Vec<Configuration>> {
    let mut acc = vec![Configuration::new()];
    for d in dnfs {
        if d.is_empty() {
            return Ok(Vec::new());
        }
        let mut next = Vec::with_capacity(acc.len() * d.len());
        for a in &acc {
            for b in d.iter() {
                next.push(a.union(b).cloned().collect());
            }
        }
        if next.len() > MAX_PRODUCT {
            return Err(Error::Limit(format!(
                "more than {MAX_PRODUCT} successor cubes"
            )));
        }
        acc = absorb(next);
    }
    Ok(acc)
}

/// Per-query cache of atom transitions as DNFs.
pub type DeltaCache = HashMap<(GroundAtom, Letter), Rc<Vec<Configuration>>>;

fn cube_to_config(c: &BTreeSet<Atom>) -> Result<Configuration> {
    c.iter()
        .map(|a| GroundAtom::from_atom(a).ok_or_else(|| Error::NotGround(a.to_string())))
        .collect()
}

impl PredicateAutomaton {
    /// Check arities, variables and positivity of every transition.
    pub fn validate(&self) -> Result<()> {
        let check_states = |f: &Formula, bound: usize| -> Result<()> {
            if !state_positive(f, false) {
                return Err(Error::ForbiddenAtom(format!(
                    "negated automaton predicate in {f}"
                )));
            }
            for a in f.atoms() {
                if let Atom::State(q, ts) = a {
                    match self.predicates.get(q) {
                        None => return Err(Error::UnknownSymbol(q.to_string())),
                        Some(&ar) if ar != ts.len() => {
                            return Err(Error::Arity {
                                name: q.to_string(),
                                expected: ar,
                                found: ts.len(),
                            })
                        }
                        _ => {}
                    }
                }
                if matches!(a, Atom::Data(..) | Atom::Loc(..)) {
                    return Err(Error::ForbiddenAtom(format!(
                        "{a} in an automaton transition"
                    )));
                }
            }
            let allowed: BTreeSet<Name> = (0..=bound).map(delta_var).collect();
            if let Some(v) = f.free_vars().into_iter().find(|v| !allowed.contains(v)) {
                return Err(Error::NotGround(format!("variable `{v}`")));
            }
            Ok(())
        };
        for ((q, sigma), f) in &self.delta {
            let ar = *self
                .predicates
                .get(q)
                .ok_or_else(|| Error::UnknownSymbol(q.to_string()))?;
            if !self.alphabet.contains(sigma) {
                return Err(Error::UnknownSymbol(sigma.to_string()));
            }
            check_states(f, ar)?;
        }
        check_states(&self.start, 0)?;
        if !self.start.is_ground() {
            return Err(Error::NotGround(format!("start formula {}", self.start)));
        }
        for q in &self.accepting {
            if !self.predicates.contains_key(q) {
                return Err(Error::UnknownSymbol(q.to_string()));
            }
        }
        Ok(())
    }

    /// Largest predicate arity.
    pub fn arity(&self) -> usize {
        self.predicates.values().copied().max().unwrap_or(0)
    }

    pub fn is_monadic(&self) -> bool {
        self.arity() <= 1
    }

    /// Evaluate structure atoms and node terms of `f` under `env`.
    fn ground(&self, f: &Formula, env: &BTreeMap<Name, Node>) -> Result<Formula> {
        let s = &self.structure;
        let g = f.map_atoms(&mut |a: &Atom| -> Result<Formula> {
            Ok(match a {
                Atom::State(q, ts) => Formula::Atom(Atom::State(
                    q.clone(),
                    ts.iter()
                        .map(|t| eval_term(s, t, env).map(Term::Node))
                        .collect::<Result<_>>()?,
                )),
                _ => {
                    if eval_with(s, &Formula::Atom(a.clone()), env, &NoState)? {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
            })
        })?;
        Ok(simplify(&g))
    }

    /// The transition of one atom on one letter, with structure atoms
    /// decided.
    pub fn semantic_delta(&self, atom: &GroundAtom, letter: &Letter) -> Result<Formula> {
        let Some(f) = self
            .delta
            .get(&(atom.symbol.clone(), letter.command.clone()))
        else {
            return Ok(Formula::False);
        };
        let mut env = BTreeMap::new();
        env.insert(delta_var(0), letter.node.clone());
        for (i, a) in atom.args.iter().enumerate() {
            env.insert(delta_var(i + 1), a.clone());
        }
        self.ground(f, &env)
    }

    pub fn start_configurations(&self) -> Result<Vec<Configuration>> {
        let g = self.ground(&self.start, &BTreeMap::new())?;
        to_dnf(&g)?.iter().map(cube_to_config).collect()
    }

    fn atom_dnf(
        &self,
        atom: &GroundAtom,
        letter: &Letter,
        cache: &mut DeltaCache,
    ) -> Result<Rc<Vec<Configuration>>> {
        let key = (atom.clone(), letter.clone());
        if let Some(hit) = cache.get(&key) {
            return Ok(hit.clone());
        }
        let f = self.semantic_delta(atom, letter)?;
        let d: Vec<Configuration> = to_dnf(&f)?
            .iter()
            .map(cube_to_config)
            .collect::<Result<_>>()?;
        let d = Rc::new(d);
        cache.insert(key, d.clone());
        Ok(d)
    }

    /// Minimal cubes of the conjunction of the atoms' transitions.
    pub fn successors_cached(
        &self,
        c: &Configuration,
        letter: &Letter,
        cache: &mut DeltaCache,
    ) -> Result<Vec<Configuration>> {
        let mut dnfs = Vec::with_capacity(c.len());
        for a in c {
            let d = self.atom_dnf(a, letter, cache)?;
            if d.is_empty() {
                return Ok(Vec::new());
            }
            dnfs.push(d);
        }
        dnfs.sort_by_key(|d| d.len());
        product(&dnfs)
    }

    pub fn successors(&self, c: &Configuration, letter: &Letter) -> Result<Vec<Configuration>> {
        self.successors_cached(c, letter, &mut DeltaCache::new())
    }

    pub fn is_accepting(&self, c: &Configuration) -> bool {
        c.iter().all(|a| self.accepting.contains(&a.symbol))
    }

    /// Membership, by depth-first search over cube choices memoized on
    /// position and configuration.
    pub fn accepts(&self, word: &[Letter]) -> Result<bool> {
        for l in word {
            if !self.structure.contains(&l.node) {
                return Err(Error::NotInStructure(l.node.to_string()));
            }
        }
        let mut cache = DeltaCache::new();
        let mut seen: HashSet<(usize, Configuration)> = HashSet::new();
        let mut stack: Vec<(usize, Configuration)> = self
            .start_configurations()?
            .into_iter()
            .map(|c| (word.len(), c))
            .collect();
        while let Some((pos, c)) = stack.pop() {
            if pos == 0 {
                if self.is_accepting(&c) {
                    return Ok(true);
                }
                continue;
            }
            if !seen.insert((pos, c.clone())) {
                continue;
            }
            for next in self.successors_cached(&c, &word[pos - 1], &mut cache)? {
                stack.push((pos - 1, next));
            }
        }
        Ok(false)
    }

    fn check_compatible(&self, other: &PredicateAutomaton) -> Result<()> {
        let a: BTreeSet<&Name> = self.alphabet.iter().collect();
        let b: BTreeSet<&Name> = other.alphabet.iter().collect();
        if a != b {
            return Err(Error::AlphabetMismatch(format!(
                "{:?} vs {:?}",
                self.alphabet, other.alphabet
            )));
        }
        if self.structure != other.structure {
            return Err(Error::VocabularyMismatch(format!(
                "{} vs {}",
                self.structure.label(),
                other.structure.label()
            )));
        }
        Ok(())
    }

    /// Rename predicate symbols.
    pub fn rename(&self, f: &impl Fn(&Name) -> Name) -> PredicateAutomaton {
        PredicateAutomaton {
            structure: self.structure.clone(),
            alphabet: self.alphabet.clone(),
            predicates: self.predicates.iter().map(|(q, &a)| (f(q), a)).collect(),
            delta: self
                .delta
                .iter()
                .map(|((q, s), g)| ((f(q), s.clone()), rename_states(g, f)))
                .collect(),
            start: rename_states(&self.start, f),
            accepting: self.accepting.iter().map(f).collect(),
        }
    }
}

pub fn rename_states(g: &Formula, f: &impl Fn(&Name) -> Name) -> Formula {
    g.map_atoms::<()>(&mut |a| {
        Ok(Formula::Atom(match a {
            Atom::State(q, ts) => Atom::State(f(q), ts.clone()),
            _ => a.clone(),
        }))
    })
    .expect("infallible")
}

/// Product automaton accepting the intersection of the languages.
/// Symbols used by both sides get `_1` and `_2` suffixes.
pub fn intersect(a: &PredicateAutomaton, b: &PredicateAutomaton) -> Result<PredicateAutomaton> {
    a.check_compatible(b)?;
    let clash: BTreeSet<Name> = a
        .predicates
        .keys()
        .filter(|q| b.predicates.contains_key(*q))
        .cloned()
        .collect();
    let tag = |suffix: &'static str| {
        let clash = clash.clone();
        move |q: &Name| {
            if clash.contains(q) {
                name(&format!("{q}{suffix}"))
            } else {
                q.clone()
            }
        }
    };
    let (a, b) = (a.rename(&tag("_1")), b.rename(&tag("_2")));
    let mut out = a.clone();
    out.predicates.extend(b.predicates);
    out.delta.extend(b.delta);
    out.accepting.extend(b.accepting);
    out.start = Formula::and(vec![a.start, b.start]);
    Ok(out)
}

/// The dual automaton: symbols get a `co_` prefix, transitions and the
/// start formula are dualized and the non-accepting symbols become
/// accepting.
pub fn complement(a: &PredicateAutomaton) -> Result<PredicateAutomaton> {
    let co = |q: &Name| name(&format!("co_{q}"));
    let mut delta = BTreeMap::new();
    for q in a.predicates.keys() {
        for sigma in &a.alphabet {
            let f = a
                .delta
                .get(&(q.clone(), sigma.clone()))
                .cloned()
                .unwrap_or(Formula::False);
            delta.insert((co(q), sigma.clone()), simplify(&dualize(&f, &co)?));
        }
    }
    Ok(PredicateAutomaton {
        structure: a.structure.clone(),
        alphabet: a.alphabet.clone(),
        predicates: a.predicates.iter().map(|(q, &ar)| (co(q), ar)).collect(),
        delta,
        start: simplify(&dualize(&a.start, &co)?),
        accepting: a
            .predicates
            .keys()
            .filter(|q| !a.accepting.contains(*q))
            .map(co)
            .collect(),
    })
}

#[cfg(test)]
mod tests;
