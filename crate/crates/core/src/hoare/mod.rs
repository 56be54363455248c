//! Assertions over data and location atoms, Hoare triples and their
//! validity, the maximal Boolean basis, bounded proof search and the
//! Ashcroft-invariant layer.

mod ashcroft;
mod basis;
mod derive;
mod valid;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::{eval_term, simplify, Atom, Formula, Term};
use crate::program::{word_to_string, Letter};
use crate::topology::{local_iso, neighbourhood, Node, Structure};

pub use ashcroft::{
    ashcroft_check, deextend, extract_triples, AshcroftInvariant, AshcroftReport, CheckFailure,
};
pub use basis::{basis_from_json, basis_to_json, max_boolean_basis, BASIS_SCHEMA};
pub use derive::{derive_member, Derivation};
pub use valid::{check_triple, triple_valid, Checker, Counterexample};

/// `{pre} word {post}`. Extended triples may use location atoms and only
/// follow transitions of enabled commands from their source location.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HoareTriple {
    pub pre: Formula,
    pub word: Vec<Letter>,
    pub post: Formula,
    pub extended: bool,
}

impl fmt::Display for HoareTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = if self.word.is_empty() {
            "eps".to_string()
        } else {
            word_to_string(&self.word)
        };
        write!(f, "{{{}}} {} {{{}}}", self.pre, w, self.post)
    }
}

impl fmt::Debug for HoareTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn sorted_nodes(f: &Formula) -> Vec<Node> {
    let set: BTreeSet<Node> = f.nodes().into_iter().collect();
    set.into_iter().collect()
}

impl HoareTriple {
    pub fn new(pre: Formula, word: Vec<Letter>, post: Formula) -> HoareTriple {
        HoareTriple {
            pre,
            word,
            post,
            extended: false,
        }
    }

    pub fn extended(pre: Formula, word: Vec<Letter>, post: Formula) -> HoareTriple {
        HoareTriple {
            pre,
            word,
            post,
            extended: true,
        }
    }

    /// Pre nodes (sorted), word nodes, post nodes (sorted).
    pub fn node_tuple(&self) -> Vec<Node> {
        let mut out = sorted_nodes(&self.pre);
        out.extend(self.word.iter().map(|l| l.node.clone()));
        out.extend(sorted_nodes(&self.post));
        out
    }

    /// Single-command triple whose post is not a conjunction and whose pre
    /// only mentions nodes of the neighbourhood of the command node and the
    /// post nodes.
    pub fn is_normal(&self, s: &Structure) -> Result<bool> {
        if self.word.len() != 1 || matches!(self.post, Formula::And(_) | Formula::True) {
            return Ok(false);
        }
        let mut anchors = vec![self.word[0].node.clone()];
        anchors.extend(self.post.nodes());
        let allowed: BTreeSet<Node> = neighbourhood(s, &anchors)?.into_iter().collect();
        Ok(self.pre.nodes().iter().all(|n| allowed.contains(n)))
    }

    fn map_nodes(&self, f: &impl Fn(&Node) -> Node) -> HoareTriple {
        HoareTriple {
            pre: self.pre.map_nodes(f),
            word: self
                .word
                .iter()
                .map(|l| Letter {
                    command: l.command.clone(),
                    node: f(&l.node),
                })
                .collect(),
            post: self.post.map_nodes(f),
            extended: self.extended,
        }
    }
}

/// Evaluate every term to a node, decide structure atoms and simplify.
/// Automaton atoms are rejected.
pub fn ground_assertion(s: &Structure, f: &Formula) -> Result<Formula> {
    let env = Default::default();
    let g = f.map_atoms(&mut |a: &Atom| -> Result<Formula> {
        let node = |t: &Term| eval_term(s, t, &env).map(Term::Node);
        Ok(match a {
            Atom::Pred(..) | Atom::Eq(..) => {
                if crate::formula::eval_ground(s, &Formula::Atom(a.clone()))? {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            Atom::Data(t, x) => Formula::Atom(Atom::Data(node(t)?, *x)),
            Atom::Loc(t, l) => Formula::Atom(Atom::Loc(node(t)?, l.clone())),
            Atom::State(q, _) => {
                return Err(Error::ForbiddenAtom(format!(
                    "automaton atom ${q} in an assertion"
                )))
            }
        })
    })?;
    Ok(simplify(&g))
}

/// Ground both assertions of a triple.
pub fn ground_triple(s: &Structure, t: &HoareTriple) -> Result<HoareTriple> {
    Ok(HoareTriple {
        pre: ground_assertion(s, &t.pre)?,
        word: t.word.clone(),
        post: ground_assertion(s, &t.post)?,
        extended: t.extended,
    })
}

/// Move a triple along the local isomorphism from its node tuple to
/// `target`.
pub fn sparam(s: &Structure, t: &HoareTriple, target: &[Node]) -> Result<HoareTriple> {
    let source = t.node_tuple();
    if source.len() != target.len() {
        return Err(Error::LengthMismatch(source.len(), target.len()));
    }
    let pairs = local_iso(s, &source, s, target)?.ok_or(Error::NotLocallyIsomorphic)?;
    let map: HashMap<Node, Node> = pairs.into_iter().collect();
    Ok(t.map_nodes(&|n| map.get(n).cloned().unwrap_or_else(|| n.clone())))
}

/// Replace `mu(x, v)` atoms by their truth under `mu(x) = value`.
pub fn fix_data(f: &Formula, x: &Node, value: u64) -> Formula {
    let g = f
        .map_atoms::<()>(&mut |a| {
            Ok(match a {
                Atom::Data(Term::Node(n), v) if n == x => {
                    if *v == value {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
                _ => Formula::Atom(a.clone()),
            })
        })
        .expect("infallible");
    simplify(&g)
}

/// Split a single-command triple into normal-form triples, one per post
/// conjunct, eliminating pre nodes outside the neighbourhood of the
/// command node and the conjunct's nodes by a disjunction over the data
/// domain. Posts equal to `true` are dropped.
pub fn normalize(s: &Structure, t: &HoareTriple, domain: u64) -> Result<Vec<HoareTriple>> {
    if t.word.len() != 1 {
        return Err(Error::NotNormal(format!(
            "expected a single command in {t}"
        )));
    }
    if t.extended {
        return Err(Error::NotNormal(
            "extended triples are not normalized".into(),
        ));
    }
    let t = ground_triple(s, t)?;
    let b = &t.word[0].node;
    let mut out = Vec::new();
    for psi in t.post.conjuncts() {
        let mut anchors = vec![b.clone()];
        anchors.extend(psi.nodes());
        let allowed: BTreeSet<Node> = neighbourhood(s, &anchors)?.into_iter().collect();
        let mut pre = t.pre.clone();
        for x in pre.nodes() {
            if !allowed.contains(&x) {
                pre = simplify(&Formula::Or(
                    (0..domain).map(|v| fix_data(&pre, &x, v)).collect(),
                ));
            }
        }
        let n = HoareTriple::new(pre, t.word.clone(), psi);
        if !out.contains(&n) {
            out.push(n);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::program::{parse_word, ProgramSpec};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn token_ring() -> ProgramSpec {
        ProgramSpec::from_json(include_str!("../../programs/token_ring.json")).unwrap()
    }

    // In the classic ring picture on four processes, e1, e2, e4 and v3 are
    // E1, E2, E0 and P2 here.
    fn frame(e: &str) -> HoareTriple {
        HoareTriple::new(
            f(&format!("not(mu(#{e}, 1))")),
            parse_word("pass@P2").unwrap(),
            f(&format!("not(mu(#{e}, 1))")),
        )
    }

    #[test]
    fn frame_triple_is_valid_and_moves_by_symmetry() {
        let r = Structure::ring(4).unwrap();
        let p = token_ring();
        let t = frame("E1");
        assert!(triple_valid(&p, &r, &t).unwrap());
        let moved = sparam(&r, &t, &[Node::Data(0), Node::Proc(2), Node::Data(0)]).unwrap();
        assert_eq!(moved, frame("E0"));
        assert_eq!(sparam(&r, &t, &t.node_tuple()).unwrap(), t);
        assert!(matches!(
            sparam(&r, &t, &[Node::Data(2), Node::Proc(2), Node::Data(2)]),
            Err(Error::NotLocallyIsomorphic)
        ));
        // E2 is written by P2, so the frame fails there.
        assert!(!triple_valid(&p, &r, &frame("E2")).unwrap());
    }

    #[test]
    fn vacuous_and_blocking() {
        let r = Structure::ring(3).unwrap();
        let p = token_ring();
        let w = parse_word("clear@P0").unwrap();
        assert!(triple_valid(
            &p,
            &r,
            &HoareTriple::new(Formula::False, w.clone(), Formula::False)
        )
        .unwrap());
        assert!(
            !triple_valid(&p, &r, &HoareTriple::new(Formula::True, w, Formula::False)).unwrap()
        );
        // pass is blocked unless r(P0) = E1 holds 1
        let blocked = HoareTriple::new(
            f("mu(#E1, 0)"),
            parse_word("pass@P0").unwrap(),
            Formula::False,
        );
        assert!(triple_valid(&p, &r, &blocked).unwrap());
    }

    #[test]
    fn normalize_splits_and_projects() {
        let r = Structure::ring(3).unwrap();
        let p = token_ring();
        let t = HoareTriple::new(
            f("and(mu(#E1, 1), mu(#E2, 0))"),
            parse_word("pass@P0").unwrap(),
            f("and(mu(#E0, 1), mu(#E1, 0))"),
        );
        let ns = normalize(&r, &t, 2).unwrap();
        assert_eq!(ns.len(), 2);
        // E2 is outside N(P0, E0) and N(P0, E1), so it is projected away.
        assert!(ns.iter().all(|n| n.pre == f("mu(#E1, 1)")));
        assert!(ns.iter().all(|n| n.is_normal(&r).unwrap()));
        assert!(ns.iter().all(|n| triple_valid(&p, &r, n).unwrap()));
        let single = HoareTriple::new(
            f("mu(#E1, 1)"),
            parse_word("pass@P0").unwrap(),
            f("mu(#E0, 1)"),
        );
        assert_eq!(normalize(&r, &single, 2).unwrap(), vec![single]);
    }

    #[test]
    fn projected_pre_keeps_validity_on_three_nodes() {
        let s = Structure::star(2);
        let p = ProgramSpec::from_json(include_str!("../../programs/star_mutex.json")).unwrap();
        // T1 only appears in the pre and is unrelated to the command node.
        let t = HoareTriple::new(
            f("and(mu(#C, 0), mu(#T1, 1))"),
            parse_word("acquire@T0").unwrap(),
            f("mu(#C, 1)"),
        );
        let ns = normalize(&s, &t, 2).unwrap();
        assert_eq!(ns[0].pre, f("mu(#C, 0)"));
        assert_eq!(
            triple_valid(&p, &s, &t).unwrap(),
            triple_valid(&p, &s, &ns[0]).unwrap()
        );
    }
}
