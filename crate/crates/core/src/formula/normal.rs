use std::collections::BTreeSet;

use super::{Atom, Formula, Name, Term};
use crate::error::{Error, Result};

/// A conjunction of atoms.
pub type Cube = BTreeSet<Atom>;

const MAX_CUBES: usize = 200_000;

/// Constant folding, flattening and duplicate removal.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(Atom::Eq(a, b)) if a == b => Formula::True,
        Formula::Atom(Atom::Eq(Term::Node(a), Term::Node(b))) => {
            if a == b {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => match simplify(g) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(h) => *h,
            h => Formula::not(h),
        },
        Formula::And(gs) => junction(gs, true),
        Formula::Or(gs) => junction(gs, false),
    }
}

fn junction(gs: &[Formula], conj: bool) -> Formula {
    let (unit, zero) = if conj {
        (Formula::True, Formula::False)
    } else {
        (Formula::False, Formula::True)
    };
    let mut out: Vec<Formula> = Vec::new();
    let push = |g: Formula, out: &mut Vec<Formula>| {
        if !out.contains(&g) {
            out.push(g);
        }
    };
    for g in gs {
        let g = simplify(g);
        if g == zero {
            return zero;
        }
        if g == unit {
            continue;
        }
        match g {
            Formula::And(hs) if conj => hs.into_iter().for_each(|h| push(h, &mut out)),
            Formula::Or(hs) if !conj => hs.into_iter().for_each(|h| push(h, &mut out)),
            g => push(g, &mut out),
        }
    }
    match out.len() {
        0 => unit,
        1 => out.pop().unwrap(),
        _ if conj => Formula::And(out),
        _ => Formula::Or(out),
    }
}

/// Negation normal form: negations only directly above atoms.
pub fn nnf(f: &Formula) -> Formula {
    fn go(f: &Formula, neg: bool) -> Formula {
        match (f, neg) {
            (Formula::True, false) | (Formula::False, true) => Formula::True,
            (Formula::True, true) | (Formula::False, false) => Formula::False,
            (Formula::Atom(_), false) => f.clone(),
            (Formula::Atom(_), true) => Formula::not(f.clone()),
            (Formula::Not(g), _) => go(g, !neg),
            (Formula::And(gs), false) | (Formula::Or(gs), true) => {
                Formula::And(gs.iter().map(|g| go(g, neg)).collect())
            }
            (Formula::Or(gs), false) | (Formula::And(gs), true) => {
                Formula::Or(gs.iter().map(|g| go(g, neg)).collect())
            }
        }
    }
    go(f, false)
}

/// Negate a formula that is positive in automaton atoms, replacing each
/// automaton predicate `q` by `rename(q)`.
pub fn dualize(f: &Formula, rename: &impl Fn(&Name) -> Name) -> Result<Formula> {
    fn go(f: &Formula, rename: &impl Fn(&Name) -> Name) -> Result<Formula> {
        Ok(match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(Atom::State(q, ts)) => Formula::Atom(Atom::State(rename(q), ts.clone())),
            Formula::Atom(_) => Formula::not(f.clone()),
            Formula::Not(g) => match g.as_ref() {
                Formula::Atom(Atom::State(q, _)) => {
                    return Err(Error::ForbiddenAtom(format!(
                        "negated automaton predicate `{q}`"
                    )))
                }
                Formula::Atom(_) => (**g).clone(),
                _ => unreachable!("input is in negation normal form"),
            },
            Formula::And(gs) => {
                Formula::Or(gs.iter().map(|g| go(g, rename)).collect::<Result<_>>()?)
            }
            Formula::Or(gs) => {
                Formula::And(gs.iter().map(|g| go(g, rename)).collect::<Result<_>>()?)
            }
        })
    }
    go(&nnf(f), rename)
}

fn absorb(mut cubes: Vec<Cube>) -> Vec<Cube> {
    cubes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    cubes.dedup();
    let mut out: Vec<Cube> = Vec::with_capacity(cubes.len());
    for c in cubes {
        if !out.iter().any(|o| o.is_subset(&c)) {
            out.push(c);
        }
    }
    out
}

/// Disjunctive normal form of a negation-free formula.
///
/// Cubes that contain another cube are dropped, so the result is the set of
/// minimal cubes, ordered by size.
pub fn to_dnf(f: &Formula) -> Result<Vec<Cube>> {
    Ok(match f {
        Formula::True => vec![Cube::new()],
        Formula::False => Vec::new(),
        Formula::Atom(a) => vec![Cube::from([a.clone()])],
        Formula::Not(_) => {
            return Err(Error::ForbiddenAtom(format!(
                "negation in a positive formula: {f}"
            )))
        }
        Formula::Or(gs) => {
            let mut all = Vec::new();
            for g in gs {
                all.extend(to_dnf(g)?);
            }
            absorb(all)
        }
        Formula::And(gs) => {
            let mut acc = vec![Cube::new()];
            for g in gs {
                let d = to_dnf(g)?;
                if d.is_empty() {
                    return Ok(Vec::new());
                }
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for a in &acc {
                    for b in &d {
                        next.push(a.union(b).cloned().collect());
                    }
                }
                if next.len() > MAX_CUBES {
                    return Err(Error::Limit(format!("DNF exceeds {MAX_CUBES} cubes")));
                }
                acc = absorb(next);
            }
            acc
        }
    })
}
