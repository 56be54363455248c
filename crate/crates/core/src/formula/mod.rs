//! Terms and quantifier-free formulas.
//!
//! One formula type serves three roles. Over the structure vocabulary it
//! describes node configurations (`Pred`, `Eq`). With `Data` and `Loc` atoms
//! it is an assertion about the valuation and location map of a global
//! state. With `State` atoms it is the transition language of a predicate
//! automaton.

mod eval;
mod normal;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::topology::Node;

pub use eval::{eval_ground, eval_term, eval_with, Interp, NoState, CLOSURE_BOUND};
pub use normal::{dualize, nnf, simplify, to_dnf, Cube};
pub use parse::{parse_formula, parse_term};

/// Interned symbol or variable name.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    App(Name, Vec<Term>),
    Node(Node),
}

impl Term {
    pub fn var(v: &str) -> Term {
        Term::Var(name(v))
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(name(f), args)
    }

    pub fn height(&self) -> usize {
        match self {
            Term::Var(_) | Term::Node(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::height).max().unwrap_or(0),
        }
    }

    pub fn substitute(&self, map: &BTreeMap<Name, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect())
            }
            Term::Node(_) => self.clone(),
        }
    }

    pub fn map_nodes(&self, f: &impl Fn(&Node) -> Node) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::App(g, args) => {
                Term::App(g.clone(), args.iter().map(|a| a.map_nodes(f)).collect())
            }
            Term::Node(n) => Term::Node(f(n)),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Node(_) => {}
        }
    }

    fn collect_nodes(&self, out: &mut Vec<Node>) {
        match self {
            Term::Var(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_nodes(out)),
            Term::Node(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Structure predicate `p(t1,...)`.
    Pred(Name, Vec<Term>),
    Eq(Term, Term),
    /// Automaton predicate `$q(t1,...)`.
    State(Name, Vec<Term>),
    /// `mu(t, x)`: the data value stored at `t` is `x`.
    Data(Term, u64),
    /// `loc(t, l)`: the node `t` is at control location `l`.
    Loc(Term, Name),
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Pred(_, ts) | Atom::State(_, ts) => ts.iter().collect(),
            Atom::Eq(a, b) => vec![a, b],
            Atom::Data(t, _) | Atom::Loc(t, _) => vec![t],
        }
    }

    pub fn substitute(&self, map: &BTreeMap<Name, Term>) -> Atom {
        let s = |ts: &Vec<Term>| ts.iter().map(|t| t.substitute(map)).collect();
        match self {
            Atom::Pred(p, ts) => Atom::Pred(p.clone(), s(ts)),
            Atom::State(q, ts) => Atom::State(q.clone(), s(ts)),
            Atom::Eq(a, b) => Atom::Eq(a.substitute(map), b.substitute(map)),
            Atom::Data(t, x) => Atom::Data(t.substitute(map), *x),
            Atom::Loc(t, l) => Atom::Loc(t.substitute(map), l.clone()),
        }
    }

    pub fn map_nodes(&self, f: &impl Fn(&Node) -> Node) -> Atom {
        let m = |ts: &Vec<Term>| ts.iter().map(|t| t.map_nodes(f)).collect();
        match self {
            Atom::Pred(p, ts) => Atom::Pred(p.clone(), m(ts)),
            Atom::State(q, ts) => Atom::State(q.clone(), m(ts)),
            Atom::Eq(a, b) => Atom::Eq(a.map_nodes(f), b.map_nodes(f)),
            Atom::Data(t, x) => Atom::Data(t.map_nodes(f), *x),
            Atom::Loc(t, l) => Atom::Loc(t.map_nodes(f), l.clone()),
        }
    }

    pub fn is_state(&self) -> bool {
        matches!(self, Atom::State(..))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Eq(a, b))
    }

    pub fn pred(p: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::Pred(name(p), args))
    }

    pub fn state(q: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::State(name(q), args))
    }

    pub fn data(t: Term, x: u64) -> Formula {
        Formula::Atom(Atom::Data(t, x))
    }

    pub fn loc(t: Term, l: &str) -> Formula {
        Formula::Atom(Atom::Loc(t, name(l)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn substitute(&self, map: &BTreeMap<Name, Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.substitute(map)),
            Formula::Not(f) => Formula::not(f.substitute(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(map)).collect()),
        }
    }

    /// Substitute node constants for variables.
    pub fn instantiate(&self, vars: &[Name], nodes: &[Node]) -> Formula {
        let map = vars
            .iter()
            .cloned()
            .zip(nodes.iter().map(|n| Term::Node(n.clone())))
            .collect();
        self.substitute(&map)
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| out.push(a));
        out
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| a.terms().iter().for_each(|t| t.collect_vars(&mut out)));
        out
    }

    /// Node constants in order of first occurrence.
    pub fn nodes(&self) -> Vec<Node> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |a| a.terms().iter().for_each(|t| t.collect_nodes(&mut out)));
        out
    }

    pub fn is_ground(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Top-level conjuncts, with nested conjunctions flattened.
    pub fn conjuncts(&self) -> Vec<Formula> {
        match self {
            Formula::True => Vec::new(),
            Formula::And(fs) => fs.iter().flat_map(Formula::conjuncts).collect(),
            _ => vec![self.clone()],
        }
    }

    /// Replace every atom by a formula, keeping the connectives.
    pub fn map_atoms<E>(
        &self,
        f: &mut impl FnMut(&Atom) -> std::result::Result<Formula, E>,
    ) -> std::result::Result<Formula, E> {
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => f(a)?,
            Formula::Not(g) => Formula::not(g.map_atoms(f)?),
            Formula::And(gs) => Formula::And(
                gs.iter()
                    .map(|g| g.map_atoms(f))
                    .collect::<std::result::Result<_, E>>()?,
            ),
            Formula::Or(gs) => Formula::Or(
                gs.iter()
                    .map(|g| g.map_atoms(f))
                    .collect::<std::result::Result<_, E>>()?,
            ),
        })
    }

    pub fn map_nodes(&self, f: &impl Fn(&Node) -> Node) -> Formula {
        self.map_atoms::<()>(&mut |a| Ok(Formula::Atom(a.map_nodes(f))))
            .expect("infallible")
    }

    pub fn mentions_state(&self) -> bool {
        self.atoms().iter().any(|a| a.is_state())
    }
}

/// An automaton predicate applied to nodes: an element of a configuration.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub symbol: Name,
    pub args: SmallVec<[Node; 2]>,
}

impl GroundAtom {
    pub fn new(symbol: &str, args: &[Node]) -> GroundAtom {
        GroundAtom {
            symbol: name(symbol),
            args: args.iter().cloned().collect(),
        }
    }

    pub fn to_atom(&self) -> Atom {
        Atom::State(
            self.symbol.clone(),
            self.args.iter().map(|n| Term::Node(n.clone())).collect(),
        )
    }

    /// Converts a state atom whose arguments are node constants.
    pub fn from_atom(a: &Atom) -> Option<GroundAtom> {
        match a {
            Atom::State(q, ts) => Some(GroundAtom {
                symbol: q.clone(),
                args: ts
                    .iter()
                    .map(|t| match t {
                        Term::Node(n) => Some(n.clone()),
                        _ => None,
                    })
                    .collect::<Option<_>>()?,
            }),
            _ => None,
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            write_list(f, &self.args)?;
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Node(n) => write!(f, "#{n}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                write_list(f, args)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let app = |f: &mut fmt::Formatter<'_>, prefix: &str, p: &str, ts: &[Term]| {
            write!(f, "{prefix}{p}")?;
            if !ts.is_empty() {
                write!(f, "(")?;
                write_list(f, ts)?;
                write!(f, ")")?;
            }
            Ok(())
        };
        match self {
            Atom::Pred(p, ts) => app(f, "", p, ts),
            Atom::State(q, ts) => app(f, "$", q, ts),
            Atom::Eq(a, b) => write!(f, "eq({a}, {b})"),
            Atom::Data(t, x) => write!(f, "mu({t}, {x})"),
            Atom::Loc(t, l) => write!(f, "loc({t}, {l})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "not({g})"),
            Formula::And(gs) => {
                write!(f, "and(")?;
                write_list(f, gs)?;
                write!(f, ")")
            }
            Formula::Or(gs) => {
                write!(f, "or(")?;
                write_list(f, gs)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Variable names `prefix1..prefixn` or `prefix0..` as requested.
pub fn vars(prefix: &str, start: usize, count: usize) -> Vec<Name> {
    (start..start + count)
        .map(|i| name(&format!("{prefix}{i}")))
        .collect()
}
