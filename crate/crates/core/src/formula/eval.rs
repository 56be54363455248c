use std::collections::BTreeMap;

use super::{Atom, Formula, Name, Term};
use crate::error::{Error, Result};
use crate::topology::{Node, Structure};

/// Bound on term nesting during evaluation.
pub const CLOSURE_BOUND: usize = 64;

/// Interpretation of the atoms that are not part of the structure.
pub trait Interp {
    fn data(&self, node: &Node, value: u64) -> Result<bool> {
        let _ = value;
        Err(Error::ForbiddenAtom(format!("data atom at {node}")))
    }

    fn loc(&self, node: &Node, loc: &str) -> Result<bool> {
        Err(Error::ForbiddenAtom(format!(
            "location atom loc({node}, {loc})"
        )))
    }

    fn state(&self, symbol: &str, args: &[Node]) -> Result<bool> {
        let _ = args;
        Err(Error::ForbiddenAtom(format!("automaton atom ${symbol}")))
    }
}

/// Interprets only the structure vocabulary.
pub struct NoState;

impl Interp for NoState {}

pub fn eval_term(s: &Structure, t: &Term, env: &BTreeMap<Name, Node>) -> Result<Node> {
    fn go(s: &Structure, t: &Term, env: &BTreeMap<Name, Node>, depth: usize) -> Result<Node> {
        if depth > CLOSURE_BOUND {
            return Err(Error::ClosureBound(CLOSURE_BOUND));
        }
        match t {
            Term::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| Error::NotGround(v.to_string())),
            Term::Node(n) => {
                if s.contains(n) {
                    Ok(n.clone())
                } else {
                    Err(Error::NotInStructure(n.to_string()))
                }
            }
            Term::App(f, args) => {
                let args = args
                    .iter()
                    .map(|a| go(s, a, env, depth + 1))
                    .collect::<Result<Vec<_>>>()?;
                s.apply(f, &args)
            }
        }
    }
    go(s, t, env, 0)
}

fn eval_atom(
    s: &Structure,
    a: &Atom,
    env: &BTreeMap<Name, Node>,
    interp: &dyn Interp,
) -> Result<bool> {
    let terms = |ts: &[Term]| {
        ts.iter()
            .map(|t| eval_term(s, t, env))
            .collect::<Result<Vec<_>>>()
    };
    match a {
        Atom::Pred(p, ts) => s.holds(p, &terms(ts)?),
        Atom::Eq(x, y) => Ok(eval_term(s, x, env)? == eval_term(s, y, env)?),
        Atom::State(q, ts) => interp.state(q, &terms(ts)?),
        Atom::Data(t, x) => interp.data(&eval_term(s, t, env)?, *x),
        Atom::Loc(t, l) => interp.loc(&eval_term(s, t, env)?, l),
    }
}

/// Evaluate with short-circuiting connectives.
pub fn eval_with(
    s: &Structure,
    f: &Formula,
    env: &BTreeMap<Name, Node>,
    interp: &dyn Interp,
) -> Result<bool> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom(a) => eval_atom(s, a, env, interp),
        Formula::Not(g) => Ok(!eval_with(s, g, env, interp)?),
        Formula::And(gs) => {
            for g in gs {
                if !eval_with(s, g, env, interp)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_with(s, g, env, interp)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Truth of a closed formula over the structure vocabulary.
pub fn eval_ground(s: &Structure, f: &Formula) -> Result<bool> {
    eval_with(s, f, &BTreeMap::new(), &NoState)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn ring_terms() {
        let r = Structure::ring(4).unwrap();
        let f = parse_formula("and(d(l(#P3)), eq(r(#P3), #E0), p(#P3))").unwrap();
        assert!(eval_ground(&r, &f).unwrap());
    }

    #[test]
    fn errors() {
        let r = Structure::ring(4).unwrap();
        assert_eq!(
            eval_ground(&r, &parse_formula("d(x)").unwrap()),
            Err(Error::NotGround("x".into()))
        );
        assert!(matches!(
            eval_ground(&r, &parse_formula("d(#E9)").unwrap()),
            Err(Error::NotInStructure(_))
        ));
        assert!(matches!(
            eval_ground(&r, &parse_formula("$q(#E0)").unwrap()),
            Err(Error::ForbiddenAtom(_))
        ));
        assert!(matches!(
            eval_ground(&r, &parse_formula("zz(#E0)").unwrap()),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn deep_terms_hit_the_bound() {
        let r = Structure::ring(3).unwrap();
        let mut t = String::from("#E0");
        for _ in 0..70 {
            t = format!("l({t})");
        }
        let f = parse_formula(&format!("d({t})")).unwrap();
        assert_eq!(eval_ground(&r, &f), Err(Error::ClosureBound(CLOSURE_BOUND)));
    }
}
