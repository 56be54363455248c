use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{local_iso, neighbourhood, Kind, Node, Path, Structure};
use crate::error::{Error, Result};
use crate::formula::{eval_ground, name, vars, Formula, Name, Term};

/// A class of `d`-tuples under local isomorphism.
#[derive(Clone, Debug)]
pub struct EqClass {
    pub representative: Vec<Node>,
    /// Characteristic formula over `u1..ud`.
    pub formula: Formula,
}

/// A minimal-height term for every node of `N(anchors)`, where the `i`-th
/// anchor is named by `vars[i]`. Nodes come in neighbourhood order.
pub fn neighbourhood_terms(
    s: &Structure,
    anchors: &[Node],
    vars: &[Name],
) -> Result<Vec<(Node, Term)>> {
    if anchors.len() != vars.len() {
        return Err(Error::LengthMismatch(anchors.len(), vars.len()));
    }
    let mut out: Vec<(Node, Term)> = Vec::new();
    let mut seen: HashMap<Node, usize> = HashMap::new();
    let mut push = |n: Node, t: Term, out: &mut Vec<(Node, Term)>| {
        if !seen.contains_key(&n) {
            seen.insert(n.clone(), out.len());
            out.push((n, t));
        }
    };
    for (a, v) in anchors.iter().zip(vars) {
        if !s.contains(a) {
            return Err(Error::NotInStructure(a.to_string()));
        }
        push(a.clone(), Term::Var(v.clone()), &mut out);
    }
    for (f, ar) in &s.vocabulary().functions {
        if *ar == 0 {
            push(s.apply(f, &[])?, Term::App(f.clone(), Vec::new()), &mut out);
        }
    }
    let mut i = 0;
    while i < out.len() {
        let (x, tx) = out[i].clone();
        for (f, ar) in &s.vocabulary().functions {
            if *ar == 1 {
                let y = s.apply(f, std::slice::from_ref(&x))?;
                push(y, Term::App(f.clone(), vec![tx.clone()]), &mut out);
            }
        }
        i += 1;
    }
    Ok(out)
}

fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut code| {
        let mut t = vec![0; k];
        for slot in t.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        t
    })
}

/// The characteristic formula of the class of `tuple`, over variables
/// `u1..ud`.
///
/// It fixes a minimal-height term for every node of the neighbourhood and
/// states which of these terms are equal, every predicate fact and its
/// negation, and every function fact between them. A tuple of any
/// structure with the same vocabulary satisfies it exactly when it is
/// locally isomorphic to `tuple`.
pub fn class_formula(s: &Structure, tuple: &[Node]) -> Result<Formula> {
    class_formula_over(s, tuple, &vars("u", 1, tuple.len()))
}

/// As [`class_formula`], naming the tuple entries by `names`.
pub fn class_formula_over(s: &Structure, tuple: &[Node], names: &[Name]) -> Result<Formula> {
    let terms = neighbourhood_terms(s, tuple, names)?;
    let term_of: HashMap<&Node, &Term> = terms.iter().map(|(n, t)| (n, t)).collect();
    let mut conj = Vec::new();
    for (a, v) in tuple.iter().zip(names) {
        let t = term_of[a];
        if *t != Term::Var(v.clone()) {
            conj.push(Formula::eq(t.clone(), Term::Var(v.clone())));
        }
    }
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            conj.push(Formula::not(Formula::eq(
                terms[i].1.clone(),
                terms[j].1.clone(),
            )));
        }
    }
    for (f, ar) in &s.vocabulary().functions {
        if *ar == 0 {
            let lhs = Term::App(f.clone(), Vec::new());
            let rhs = term_of[&s.apply(f, &[])?].clone();
            if lhs != rhs {
                conj.push(Formula::eq(lhs, rhs));
            }
        } else {
            for (x, tx) in &terms {
                let lhs = Term::App(f.clone(), vec![tx.clone()]);
                let rhs = term_of[&s.apply(f, std::slice::from_ref(x))?].clone();
                if lhs != rhs {
                    conj.push(Formula::eq(lhs, rhs));
                }
            }
        }
    }
    let nodes: Vec<&Node> = terms.iter().map(|(n, _)| n).collect();
    for (p, ar) in &s.vocabulary().predicates {
        for idx in tuples(nodes.len(), *ar) {
            let args: Vec<Node> = idx.iter().map(|&i| nodes[i].clone()).collect();
            let atom = Formula::pred(p, idx.iter().map(|&i| terms[i].1.clone()).collect());
            conj.push(if s.holds(p, &args)? {
                atom
            } else {
                Formula::not(atom)
            });
        }
    }
    Ok(match conj.len() {
        0 => Formula::True,
        1 => conj.pop().unwrap(),
        _ => Formula::And(conj),
    })
}

/// Nodes `b` covering every class of `(b, anchors)`.
///
/// For a finite structure this is the whole carrier. For a limit it is one
/// node per orbit of the automorphisms fixing the anchors: existing nodes
/// of the anchors' trees or the center, plus fresh nodes placed at each
/// possible distance from them.
pub fn candidates(s: &Structure, anchors: &[Node]) -> Result<Vec<Node>> {
    if let Some(nodes) = s.nodes() {
        return Ok(nodes.to_vec());
    }
    for a in anchors {
        if !s.contains(a) {
            return Err(Error::NotInStructure(a.to_string()));
        }
    }
    match s.kind() {
        Kind::Star => {
            let mut out = vec![Node::Center];
            let mut used = BTreeSet::new();
            for a in anchors {
                if let Node::Thread(i) = a {
                    if used.insert(*i) {
                        out.push(a.clone());
                    }
                }
            }
            let fresh = (0..).find(|i| !used.contains(i)).unwrap();
            out.push(Node::Thread(fresh));
            Ok(out)
        }
        Kind::Forest { height } => forest_candidates(s, anchors, height as usize),
        Kind::Ring { .. } => unreachable!("rings are finite"),
    }
}

fn forest_candidates(s: &Structure, anchors: &[Node], height: usize) -> Result<Vec<Node>> {
    let closure = neighbourhood(s, anchors)?;
    // Every prefix of a neighbourhood path, grouped by tree.
    let mut skeleton: BTreeMap<u32, BTreeSet<Path>> = BTreeMap::new();
    for n in &closure {
        if let Node::Forest { tree, path } = n {
            let set = skeleton.entry(*tree).or_default();
            for k in 0..=path.len() {
                set.insert(path[..k].iter().copied().collect());
            }
        }
    }
    let mut out = Vec::new();
    for (tree, paths) in &skeleton {
        for p in paths {
            out.push(Node::Forest {
                tree: *tree,
                path: p.clone(),
            });
        }
        for p in paths {
            if p.len() % 2 != 0 || p.len() + 1 >= height {
                continue;
            }
            let used: BTreeSet<u32> = paths
                .iter()
                .filter(|q| q.len() == p.len() + 1 && q.starts_with(p))
                .map(|q| q[p.len()])
                .collect();
            let fresh = (0..).find(|i| !used.contains(i)).unwrap();
            let mut q = p.clone();
            q.push(fresh);
            while q.len() < height {
                out.push(Node::Forest {
                    tree: *tree,
                    path: q.clone(),
                });
                q.push(0);
            }
        }
    }
    let fresh_tree = (0..).find(|t| !skeleton.contains_key(t)).unwrap();
    let mut q = Path::new();
    while q.len() < height {
        out.push(Node::Forest {
            tree: fresh_tree,
            path: q.clone(),
        });
        q.push(0);
    }
    Ok(out)
}

fn dedupe_key(s: &Structure, t: &[Node]) -> Result<(usize, Vec<usize>)> {
    let pattern = t
        .iter()
        .map(|x| t.iter().position(|y| y == x).unwrap())
        .collect();
    Ok((neighbourhood(s, t)?.len(), pattern))
}

/// Representatives of the classes of `d`-tuples, each with its
/// characteristic formula, in a deterministic order.
pub fn eq_classes(s: &Structure, d: usize) -> Result<Vec<EqClass>> {
    let reps = class_representatives(s, d)?;
    reps.into_iter()
        .map(|r| {
            Ok(EqClass {
                formula: class_formula(s, &r)?,
                representative: r,
            })
        })
        .collect()
}

fn push_new(
    s: &Structure,
    t: Vec<Node>,
    buckets: &mut HashMap<(usize, Vec<usize>), Vec<usize>>,
    out: &mut Vec<Vec<Node>>,
) -> Result<()> {
    let key = dedupe_key(s, &t)?;
    let bucket = buckets.entry(key).or_default();
    for &i in bucket.iter() {
        if local_iso(s, &out[i], s, &t)?.is_some() {
            return Ok(());
        }
    }
    bucket.push(out.len());
    out.push(t);
    Ok(())
}

fn class_representatives(s: &Structure, d: usize) -> Result<Vec<Vec<Node>>> {
    let mut out = Vec::new();
    let mut buckets = HashMap::new();
    if let Some(nodes) = s.nodes() {
        for idx in tuples(nodes.len(), d) {
            let t = idx.iter().map(|&i| nodes[i].clone()).collect();
            push_new(s, t, &mut buckets, &mut out)?;
        }
        return Ok(out);
    }
    if d == 0 {
        return Ok(vec![Vec::new()]);
    }
    // In a homogeneous structure every class of (d+1)-tuples extends a
    // representative of its d-prefix by one candidate node.
    for prefix in class_representatives(s, d - 1)? {
        for b in candidates(s, &prefix)? {
            let mut t = prefix.clone();
            t.push(b);
            push_new(s, t, &mut buckets, &mut out)?;
        }
    }
    Ok(out)
}

/// A node `b` with `chi[u1 := b]` true, where `chi` may mention node
/// constants but no variable other than `u1`.
pub fn solve(s: &Structure, chi: &Formula) -> Result<Option<Node>> {
    let u1 = name("u1");
    if let Some(v) = chi.free_vars().into_iter().find(|v| *v != u1) {
        return Err(Error::NotGround(v.to_string()));
    }
    for b in candidates(s, &chi.nodes())? {
        if eval_ground(
            s,
            &chi.instantiate(std::slice::from_ref(&u1), std::slice::from_ref(&b)),
        )? {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::eval_with;
    use crate::formula::NoState;
    use crate::topology::locally_isomorphic;

    #[test]
    fn star_class_counts() {
        let s = Structure::star_limit();
        assert_eq!(eq_classes(&s, 1).unwrap().len(), 2);
        assert_eq!(eq_classes(&s, 2).unwrap().len(), 5);
        assert_eq!(eq_classes(&s, 3).unwrap().len(), 15);
    }

    #[test]
    fn star_center_formula() {
        let s = Structure::star_limit();
        let f = class_formula(&s, &[Node::Center]).unwrap();
        assert_eq!(f.to_string(), "eq(g(), u1)");
        let g = class_formula(&s, &[Node::Thread(4)]).unwrap();
        assert_eq!(g.to_string(), "not(eq(u1, g()))");
    }

    #[test]
    fn forest_single_nodes_by_depth() {
        let f = Structure::forest_limit(5).unwrap();
        assert_eq!(eq_classes(&f, 1).unwrap().len(), 5);
    }

    #[test]
    fn class_formula_characterises_ring_classes() {
        let r = Structure::ring(4).unwrap();
        let nodes = r.nodes().unwrap().to_vec();
        let u = vars("u", 1, 2);
        for a in &nodes {
            for b in &nodes {
                let chi = class_formula(&r, &[a.clone(), b.clone()]).unwrap();
                for x in &nodes {
                    for y in &nodes {
                        let env = u.iter().cloned().zip([x.clone(), y.clone()]).collect();
                        let sat = eval_with(&r, &chi, &env, &NoState).unwrap();
                        let iso = locally_isomorphic(
                            &r,
                            &[a.clone(), b.clone()],
                            &r,
                            &[x.clone(), y.clone()],
                        )
                        .unwrap();
                        assert_eq!(sat, iso, "{a} {b} vs {x} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn solve_finds_fresh_sibling() {
        let f = Structure::forest_limit(3).unwrap();
        let a = Node::forest(0, &[0]);
        let target = [Node::forest(0, &[1]), a.clone()];
        let chi = class_formula(&f, &target).unwrap();
        let chi = chi.instantiate(&[name("u2")], std::slice::from_ref(&a));
        let b = solve(&f, &chi).unwrap().unwrap();
        assert!(locally_isomorphic(&f, &[b, a.clone()], &f, &target).unwrap());
        let none = Formula::and(vec![
            Formula::eq(Term::var("u1"), Term::Node(a.clone())),
            Formula::not(Formula::eq(Term::var("u1"), Term::Node(a))),
        ]);
        assert_eq!(solve(&f, &none).unwrap(), None);
    }
}
