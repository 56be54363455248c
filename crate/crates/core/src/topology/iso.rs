use std::collections::{HashMap, VecDeque};

use super::{Node, Structure};
use crate::error::{Error, Result};
use crate::formula::CLOSURE_BOUND;

/// Closure of `nodes` under the function symbols, seeds first, then in
/// discovery order. Constants belong to every neighbourhood.
pub fn neighbourhood(s: &Structure, nodes: &[Node]) -> Result<Vec<Node>> {
    let mut out: Vec<Node> = Vec::new();
    let push = |n: Node, out: &mut Vec<Node>| {
        if !out.contains(&n) {
            out.push(n);
        }
    };
    for n in nodes {
        if !s.contains(n) {
            return Err(Error::NotInStructure(n.to_string()));
        }
        push(n.clone(), &mut out);
    }
    for (f, ar) in &s.vocabulary().functions {
        if *ar == 0 {
            push(s.apply(f, &[])?, &mut out);
        }
    }
    let mut i = 0;
    while i < out.len() {
        if out.len() > CLOSURE_BOUND * (nodes.len() + 1) {
            return Err(Error::ClosureBound(CLOSURE_BOUND));
        }
        let x = out[i].clone();
        for (f, ar) in &s.vocabulary().functions {
            if *ar == 1 {
                let y = s.apply(f, std::slice::from_ref(&x))?;
                push(y, &mut out);
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Matching {
    fwd: HashMap<Node, Node>,
    bwd: HashMap<Node, Node>,
    order: Vec<Node>,
    queue: VecDeque<Node>,
}

impl Matching {
    fn add(&mut self, x: Node, y: Node) -> bool {
        match (self.fwd.get(&x), self.bwd.get(&y)) {
            (Some(y2), _) if *y2 != y => false,
            (_, Some(x2)) if *x2 != x => false,
            (Some(_), _) => true,
            _ => {
                self.fwd.insert(x.clone(), y.clone());
                self.bwd.insert(y, x.clone());
                self.order.push(x.clone());
                self.queue.push_back(x);
                true
            }
        }
    }
}

/// The local isomorphism `N(xs) -> N(ys)` sending `xs` to `ys`, if any.
///
/// The candidate map pairs `t(xs)` with `t(ys)` for every term `t`; it is a
/// local isomorphism exactly when it is a well defined bijection that
/// preserves and reflects every predicate.
pub fn local_iso(
    s: &Structure,
    xs: &[Node],
    t: &Structure,
    ys: &[Node],
) -> Result<Option<Vec<(Node, Node)>>> {
    if !s.kind().same_vocabulary(&t.kind()) {
        return Err(Error::VocabularyMismatch(format!(
            "{} vs {}",
            s.label(),
            t.label()
        )));
    }
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    for x in xs {
        if !s.contains(x) {
            return Err(Error::NotInStructure(x.to_string()));
        }
    }
    for y in ys {
        if !t.contains(y) {
            return Err(Error::NotInStructure(y.to_string()));
        }
    }
    let mut m = Matching {
        fwd: HashMap::new(),
        bwd: HashMap::new(),
        order: Vec::new(),
        queue: VecDeque::new(),
    };
    for (x, y) in xs.iter().zip(ys) {
        if !m.add(x.clone(), y.clone()) {
            return Ok(None);
        }
    }
    for (f, ar) in &s.vocabulary().functions {
        if *ar == 0 && !m.add(s.apply(f, &[])?, t.apply(f, &[])?) {
            return Ok(None);
        }
    }
    while let Some(x) = m.queue.pop_front() {
        let y = m.fwd[&x].clone();
        for (f, ar) in &s.vocabulary().functions {
            if *ar == 1 {
                let fx = s.apply(f, std::slice::from_ref(&x))?;
                let fy = t.apply(f, std::slice::from_ref(&y))?;
                if !m.add(fx, fy) {
                    return Ok(None);
                }
            }
        }
    }
    let dom = m.order;
    let img: Vec<Node> = dom.iter().map(|x| m.fwd[x].clone()).collect();
    if !s.same_atomic_type(&dom, t, &img) {
        return Ok(None);
    }
    Ok(Some(dom.into_iter().zip(img).collect()))
}

pub fn locally_isomorphic(s: &Structure, xs: &[Node], t: &Structure, ys: &[Node]) -> Result<bool> {
    Ok(local_iso(s, xs, t, ys)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_symmetry_example() {
        // Labels e1, e2, e4 and v3 of the classic ring picture are E1, E2, E0 and P2.
        let r = Structure::ring(4).unwrap();
        let (e1, e2, e4, v3) = (Node::Data(1), Node::Data(2), Node::Data(0), Node::Proc(2));
        let a = [e1.clone(), v3.clone(), e1];
        assert!(locally_isomorphic(&r, &a, &r, &[e4.clone(), v3.clone(), e4]).unwrap());
        assert!(!locally_isomorphic(&r, &a, &r, &[e2.clone(), v3, e2]).unwrap());
    }

    #[test]
    fn star_single_nodes() {
        let s = Structure::star_limit();
        assert!(!locally_isomorphic(&s, &[Node::Center], &s, &[Node::Thread(0)]).unwrap());
        assert!(locally_isomorphic(&s, &[Node::Thread(3)], &s, &[Node::Thread(0)]).unwrap());
        assert!(locally_isomorphic(
            &Structure::star(2),
            &[Node::Thread(1)],
            &s,
            &[Node::Thread(9)]
        )
        .unwrap());
    }

    #[test]
    fn forest_circle_neighbourhood() {
        let f = Structure::forest_limit(5).unwrap();
        let c = Node::forest(0, &[2, 0, 1]);
        let n = neighbourhood(&f, std::slice::from_ref(&c)).unwrap();
        assert_eq!(
            n,
            vec![c, Node::forest(0, &[2, 0]), Node::forest(0, &[2, 0, 1, 0])]
        );
    }

    #[test]
    fn errors() {
        let r = Structure::ring(3).unwrap();
        let s = Structure::star(1);
        assert!(matches!(
            local_iso(&r, &[], &s, &[]),
            Err(Error::VocabularyMismatch(_))
        ));
        assert!(matches!(
            local_iso(&r, &[Node::Proc(0)], &r, &[]),
            Err(Error::LengthMismatch(1, 0))
        ));
        assert!(matches!(
            neighbourhood(&r, &[Node::Proc(5)]),
            Err(Error::NotInStructure(_))
        ));
    }
}
