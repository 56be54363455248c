use std::collections::{BTreeSet, HashMap, HashSet};

use super::{ground_triple, sparam, HoareTriple};
use crate::error::{Error, Result};
use crate::formula::{Atom, Formula, Term};
use crate::program::Letter;
use crate::topology::{Node, Structure};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    Derived,
    NotDerived,
    /// The search visited more states than allowed without a derivation.
    BoundExceeded,
}

type Obligations = BTreeSet<Formula>;

fn tuples(nodes: &[Node], k: usize, cur: &mut Vec<Node>, out: &mut Vec<Vec<Node>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for n in nodes {
        cur.push(n.clone());
        tuples(nodes, k, cur, out);
        cur.pop();
    }
}

fn is_zero_atom(f: &Formula) -> bool {
    matches!(f, Formula::Atom(Atom::Data(Term::Node(_), 0)))
}

/// Bounded search for a derivation of `{true} word {false}` from `basis`
/// on a finite structure, using sequencing with conjunct-set entailment,
/// conjunction, and every symmetric instance of the basis triples.
///
/// With `zero_init`, leftover obligations stating that a node holds 0 are
/// discharged at the start of the word.
pub fn derive_member(
    basis: &[HoareTriple],
    word: &[Letter],
    s: &Structure,
    max_states: usize,
    zero_init: bool,
) -> Result<Derivation> {
    let nodes = s.finite_nodes()?;
    let letters: HashSet<&Letter> = word.iter().collect();
    let mut index: HashMap<(Letter, Formula), Vec<Obligations>> = HashMap::new();
    for t in basis {
        if t.word.len() != 1 {
            return Err(Error::NotNormal(format!(
                "basis triple over several commands: {t}"
            )));
        }
        let k = t.node_tuple().len();
        let mut targets = Vec::new();
        tuples(nodes, k, &mut Vec::new(), &mut targets);
        for target in targets {
            let inst = match sparam(s, t, &target) {
                Ok(i) => ground_triple(s, &i)?,
                Err(Error::NotLocallyIsomorphic) => continue,
                Err(e) => return Err(e),
            };
            if !letters.contains(&inst.word[0]) {
                continue;
            }
            let pre: Obligations = inst.pre.conjuncts().into_iter().collect();
            for psi in inst.post.conjuncts() {
                let opts = index.entry((inst.word[0].clone(), psi)).or_default();
                if !opts.contains(&pre) {
                    opts.push(pre.clone());
                }
            }
        }
    }
    let mut seen: HashSet<(usize, Obligations)> = HashSet::new();
    let mut stack = vec![(word.len(), Obligations::from([Formula::False]))];
    let mut exceeded = false;
    while let Some((pos, obl)) = stack.pop() {
        if pos == 0 {
            if obl.iter().all(|f| zero_init && is_zero_atom(f)) {
                return Ok(Derivation::Derived);
            }
            continue;
        }
        if !seen.insert((pos, obl.clone())) {
            continue;
        }
        if seen.len() > max_states {
            exceeded = true;
            break;
        }
        let letter = &word[pos - 1];
        let mut acc: Vec<Obligations> = vec![Obligations::new()];
        for psi in &obl {
            let Some(opts) = index.get(&(letter.clone(), psi.clone())) else {
                acc.clear();
                break;
            };
            let mut next = Vec::new();
            for a in &acc {
                for o in opts {
                    let u: Obligations = a.union(o).cloned().collect();
                    if !next.contains(&u) {
                        next.push(u);
                    }
                }
            }
            acc = next;
        }
        stack.extend(acc.into_iter().map(|o| (pos - 1, o)));
    }
    Ok(if exceeded {
        Derivation::BoundExceeded
    } else {
        Derivation::NotDerived
    })
}
