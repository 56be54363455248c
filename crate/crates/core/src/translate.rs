//! Translations into predicate automata: the error runs of a program, the
//! language of a proof space generated by a normal-form basis, and
//! zero initialization of the latter.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::automata::{delta_var, PredicateAutomaton};
use crate::error::{Error, Result};
use crate::formula::{name, simplify, Atom, Formula, Name, Term};
use crate::hoare::{normalize, HoareTriple};
use crate::program::ProgramSpec;
use crate::topology::{class_formula_over, eq_classes, neighbourhood_terms, Node, Structure};

fn at(loc: &Name) -> Name {
    name(&format!("at_{loc}"))
}

/// Disjunction of the class formulas, over `v0`, of the node classes on
/// which each command is enabled.
fn enabled_formulas(spec: &ProgramSpec, s: &Structure) -> Result<Vec<Formula>> {
    let classes = eq_classes(s, 1)?;
    let v0 = [delta_var(0)];
    let mut out = vec![Vec::new(); spec.commands.len()];
    for class in &classes {
        let rep = &class.representative[0];
        let chi = class_formula_over(s, std::slice::from_ref(rep), &v0)?;
        for &c in spec.enabled(s, rep)? {
            out[c].push(chi.clone());
        }
    }
    Ok(out.into_iter().map(|d| simplify(&Formula::Or(d))).collect())
}

/// A monadic automaton accepting exactly the error runs of the program:
/// sequences of enabled commands whose locations thread from the initial
/// location and that leave some node at the error location.
///
/// `at_l(a)` asks that node `a` is at `l` before the letters read so far,
/// `I` checks every letter's source location and node class, and `err`
/// waits for a command entering the error location.
pub fn program_to_pa(spec: &ProgramSpec, s: &Structure) -> Result<PredicateAutomaton> {
    spec.validate_for(s)?;
    let enabled = enabled_formulas(spec, s)?;
    let (v0, v1) = (Term::Var(delta_var(0)), Term::Var(delta_var(1)));
    let (i_sym, err_sym) = (name("I"), name("err"));
    let mut predicates: BTreeMap<Name, usize> = spec.locations.iter().map(|l| (at(l), 1)).collect();
    predicates.insert(i_sym.clone(), 0);
    predicates.insert(err_sym.clone(), 0);
    let mut delta = BTreeMap::new();
    for (c, cmd) in spec.commands.iter().enumerate() {
        let src = Formula::state(&at(&spec.locations[cmd.src]), vec![v0.clone()]);
        for (li, l) in spec.locations.iter().enumerate() {
            let same = Formula::eq(v1.clone(), v0.clone());
            let mut alts = Vec::new();
            if cmd.tgt == li {
                alts.push(Formula::and(vec![same.clone(), src.clone()]));
            }
            alts.push(Formula::and(vec![
                Formula::not(same),
                Formula::state(&at(l), vec![v1.clone()]),
            ]));
            delta.insert((at(l), cmd.name.clone()), simplify(&Formula::Or(alts)));
        }
        delta.insert(
            (i_sym.clone(), cmd.name.clone()),
            simplify(&Formula::and(vec![
                Formula::state("I", vec![]),
                src.clone(),
                enabled[c].clone(),
            ])),
        );
        let err = if cmd.tgt == spec.err {
            Formula::True
        } else {
            Formula::state("err", vec![])
        };
        delta.insert((err_sym.clone(), cmd.name.clone()), err);
    }
    let pa = PredicateAutomaton {
        structure: s.clone(),
        alphabet: spec.alphabet(),
        predicates,
        delta,
        start: Formula::and(vec![
            Formula::state("I", vec![]),
            Formula::state("err", vec![]),
        ]),
        accepting: [i_sym, at(&spec.locations[spec.init])]
            .into_iter()
            .collect(),
    };
    pa.validate()?;
    Ok(pa)
}

/// An assertion with its nodes replaced by `x1, x2, ...` in order of first
/// occurrence, plus those nodes.
fn abstract_nodes(f: &Formula) -> (Formula, Vec<Node>) {
    let nodes = f.nodes();
    let idx: HashMap<&Node, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let g = f
        .map_atoms::<()>(&mut |a| {
            let swap = |t: &Term| abstract_term(t, &idx);
            Ok(Formula::Atom(match a {
                Atom::Data(t, x) => Atom::Data(swap(t), *x),
                Atom::Loc(t, l) => Atom::Loc(swap(t), l.clone()),
                Atom::Pred(p, ts) => Atom::Pred(p.clone(), ts.iter().map(swap).collect()),
                Atom::State(q, ts) => Atom::State(q.clone(), ts.iter().map(swap).collect()),
                Atom::Eq(x, y) => Atom::Eq(swap(x), swap(y)),
            }))
        })
        .expect("infallible");
    (g, nodes)
}

fn abstract_term(t: &Term, idx: &HashMap<&Node, usize>) -> Term {
    match t {
        Term::Node(n) => Term::Var(name(&format!("x{}", idx[n] + 1))),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| abstract_term(a, idx)).collect(),
        ),
        Term::Var(_) => t.clone(),
    }
}

/// The automaton of a basis together with what its symbols stand for.
#[derive(Clone, Debug)]
pub struct BasisAutomaton {
    pub automaton: PredicateAutomaton,
    /// Symbol to the assertion it names, over `x1, x2, ...`.
    pub labels: BTreeMap<Name, String>,
    /// For each normal-form triple, the transition entry it contributes to.
    pub provenance: Vec<(HoareTriple, Name, Name)>,
}

#[derive(Default)]
struct Names {
    by_shape: HashMap<Formula, Name>,
    labels: BTreeMap<Name, String>,
    arity: BTreeMap<Name, usize>,
    next: usize,
}

impl Names {
    /// Canonical symbol of an assertion, and its argument nodes.
    fn of(&mut self, f: &Formula) -> (Name, Vec<Node>) {
        let (shape, nodes) = abstract_nodes(f);
        if let Some(q) = self.by_shape.get(&shape) {
            return (q.clone(), nodes);
        }
        let q = match &shape {
            Formula::False => name("bot"),
            Formula::True => name("top"),
            Formula::Atom(Atom::Data(Term::Var(_), x)) => name(&format!("mu{x}")),
            _ => {
                self.next += 1;
                name(&format!("h{}", self.next))
            }
        };
        self.labels.insert(q.clone(), shape.to_string());
        self.arity.insert(q.clone(), nodes.len());
        self.by_shape.insert(shape, q.clone());
        (q, nodes)
    }
}

/// The automaton recognising the words `w` with `{true} w {false}`
/// derivable from the basis.
///
/// Every triple is first split into normal form. A triple
/// `{phi_1 and ... and phi_k} c@b {psi}` contributes the disjunct
/// `[phi_1](t_1) and ... and [phi_k](t_k) and chi` to the transition of
/// `[psi]` on `c`, where `chi` is the class formula of `(b, nodes of psi)`
/// over `v0, v1, ...` and `t_i` are terms over those variables naming the
/// nodes of `phi_i`.
pub fn basis_to_pa(
    basis: &[HoareTriple],
    s: &Structure,
    alphabet: &[Name],
    domain: u64,
) -> Result<BasisAutomaton> {
    let mut names = Names::default();
    names.of(&Formula::False);
    let mut entries: BTreeMap<(Name, Name), Vec<Formula>> = BTreeMap::new();
    let mut provenance = Vec::new();
    let mut normal = Vec::new();
    for t in basis {
        for n in normalize(s, t, domain)? {
            if !normal.contains(&n) {
                normal.push(n);
            }
        }
    }
    for t in &normal {
        let letter = &t.word[0];
        if !alphabet.contains(&letter.command) {
            return Err(Error::AlphabetMismatch(format!(
                "basis command `{}`",
                letter.command
            )));
        }
        let (q, cs) = names.of(&t.post);
        let mut anchors = vec![letter.node.clone()];
        anchors.extend(cs.iter().cloned());
        let vars: Vec<Name> = (0..anchors.len()).map(delta_var).collect();
        let chi = class_formula_over(s, &anchors, &vars)?;
        let terms: HashMap<Node, Term> = neighbourhood_terms(s, &anchors, &vars)?
            .into_iter()
            .collect();
        let mut conj = Vec::new();
        for phi in t.pre.conjuncts() {
            let (p, ns) = names.of(&phi);
            let args = ns
                .iter()
                .map(|n| {
                    terms.get(n).cloned().ok_or_else(|| {
                        Error::NotNormal(format!(
                            "{n} is not a term over the command and post nodes in {t}"
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            conj.push(Formula::Atom(Atom::State(p, args)));
        }
        conj.push(chi);
        entries
            .entry((q.clone(), letter.command.clone()))
            .or_default()
            .push(Formula::and(conj));
        provenance.push((t.clone(), q, letter.command.clone()));
    }
    let delta = entries
        .into_iter()
        .map(|(k, alts)| (k, Formula::or(alts)))
        .collect();
    let automaton = PredicateAutomaton {
        structure: s.clone(),
        alphabet: alphabet.to_vec(),
        predicates: names.arity.clone(),
        delta,
        start: Formula::state("bot", vec![]),
        accepting: BTreeSet::new(),
    };
    automaton.validate()?;
    Ok(BasisAutomaton {
        automaton,
        labels: names.labels,
        provenance,
    })
}

/// Accept at the start of a word every obligation that a node holds 0.
pub fn add_initialization(a: &PredicateAutomaton) -> PredicateAutomaton {
    let mut out = a.clone();
    let zero = name("mu0");
    out.predicates.entry(zero.clone()).or_insert(1);
    out.accepting.insert(zero);
    out
}
