//! Topologies, neighbourhoods and local symmetry.
//!
//! Three families are built in. A star has a center `C` reachable from
//! every thread through the constant `g`. A ring alternates process nodes
//! `P<i>` and data nodes `E<i>`, with `l(P i) = E i` and
//! `r(P i) = E (i+1 mod n)`. A forest of height `h` has rectangles at even
//! depth and circles at odd depth; `u` and `d` move from a circle to its
//! parent and to its single child, and fix rectangles. The binary predicate
//! `p<i>` holds when two nodes have their lowest common ancestor at depth
//! `i` (`pm1` for nodes in different trees).
//!
//! The star and forest limits are infinite and homogeneous. Finite members
//! and substructures keep an explicit carrier.

mod classes;
mod covering;
mod iso;
mod node;
mod sub;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::formula::{name, Name};

pub use classes::{
    candidates, class_formula, class_formula_over, eq_classes, neighbourhood_terms, solve, EqClass,
};
pub use covering::{automorphisms, covers, Covering};
pub use iso::{local_iso, locally_isomorphic, neighbourhood};
pub use node::{Node, Path};
pub use sub::{isomorphic, sub_k, sub_k_family};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Star,
    Ring { size: u32 },
    Forest { height: u32 },
}

impl Kind {
    /// True when two kinds share a vocabulary.
    pub fn same_vocabulary(&self, other: &Kind) -> bool {
        match (self, other) {
            (Kind::Star, Kind::Star) | (Kind::Ring { .. }, Kind::Ring { .. }) => true,
            (Kind::Forest { height: a }, Kind::Forest { height: b }) => a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub functions: Vec<(Name, usize)>,
    pub predicates: Vec<(Name, usize)>,
}

impl Vocabulary {
    fn of(kind: Kind) -> Vocabulary {
        match kind {
            Kind::Star => Vocabulary {
                functions: vec![(name("g"), 0)],
                predicates: Vec::new(),
            },
            Kind::Ring { .. } => Vocabulary {
                functions: vec![(name("l"), 1), (name("r"), 1)],
                predicates: vec![(name("d"), 1), (name("p"), 1)],
            },
            Kind::Forest { height } => Vocabulary {
                functions: vec![(name("u"), 1), (name("d"), 1)],
                predicates: (-1..height as i64)
                    .map(|i| (name(&lca_predicate(i)), 2))
                    .collect(),
            },
        }
    }
}

/// Name of the forest predicate for common-ancestor depth `i`.
pub fn lca_predicate(i: i64) -> String {
    if i < 0 {
        "pm1".to_string()
    } else {
        format!("p{i}")
    }
}

fn parse_lca_predicate(p: &str) -> Option<i64> {
    if p == "pm1" {
        return Some(-1);
    }
    let digits = p.strip_prefix('p')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// A structure: one topology kind plus either an explicit finite carrier or
/// the infinite limit of the family.
#[derive(Clone)]
pub struct Structure {
    kind: Kind,
    carrier: Option<Arc<Vec<Node>>>,
    members: Option<Arc<HashSet<Node>>>,
    vocabulary: Arc<Vocabulary>,
    label: String,
    /// Bound on rectangle branching for finite forests.
    branching: Option<u32>,
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Structures compare by kind and label, which determine the carrier.
impl PartialEq for Structure {
    fn eq(&self, other: &Structure) -> bool {
        self.kind == other.kind && self.label == other.label
    }
}

impl Eq for Structure {}

impl Structure {
    fn build(
        kind: Kind,
        carrier: Option<Vec<Node>>,
        label: String,
        branching: Option<u32>,
    ) -> Structure {
        let members = carrier
            .as_ref()
            .map(|c| Arc::new(c.iter().cloned().collect::<HashSet<_>>()));
        Structure {
            kind,
            carrier: carrier.map(Arc::new),
            members,
            vocabulary: Arc::new(Vocabulary::of(kind)),
            label,
            branching,
        }
    }

    /// The infinite star: a center and threads `T0, T1, ...`.
    pub fn star_limit() -> Structure {
        Structure::build(Kind::Star, None, "star".into(), None)
    }

    pub fn star(threads: u32) -> Structure {
        let mut nodes = vec![Node::Center];
        nodes.extend((0..threads).map(Node::Thread));
        Structure::build(Kind::Star, Some(nodes), format!("star({threads})"), None)
    }

    pub fn ring(size: u32) -> Result<Structure> {
        if size < 2 {
            return Err(Error::InvalidProgram(format!(
                "a ring needs at least two process nodes, got {size}"
            )));
        }
        let mut nodes: Vec<Node> = (0..size).map(Node::Proc).collect();
        nodes.extend((0..size).map(Node::Data));
        Ok(Structure::build(
            Kind::Ring { size },
            Some(nodes),
            format!("ring({size})"),
            None,
        ))
    }

    fn check_height(height: u32) -> Result<()> {
        if height == 0 || height.is_multiple_of(2) {
            return Err(Error::InvalidProgram(format!(
                "forest height must be odd so leaves are rectangles, got {height}"
            )));
        }
        Ok(())
    }

    /// The infinite forest of height `h`: infinitely many trees, rectangles
    /// with infinitely many children.
    pub fn forest_limit(height: u32) -> Result<Structure> {
        Structure::check_height(height)?;
        Ok(Structure::build(
            Kind::Forest { height },
            None,
            format!("forest({height})"),
            None,
        ))
    }

    /// `trees` trees of height `h` whose rectangles have `branching` children.
    pub fn forest(height: u32, branching: u32, trees: u32) -> Result<Structure> {
        Structure::check_height(height)?;
        if branching == 0 || trees == 0 {
            return Err(Error::InvalidProgram(
                "forest parameters must be positive".into(),
            ));
        }
        let mut nodes = Vec::new();
        for t in 0..trees {
            let mut frontier: Vec<Path> = vec![Path::new()];
            while let Some(p) = frontier.pop() {
                nodes.push(Node::Forest {
                    tree: t,
                    path: p.clone(),
                });
                if p.len() + 1 < height as usize {
                    let kids = if p.len() % 2 == 0 { branching } else { 1 };
                    for k in (0..kids).rev() {
                        let mut q = p.clone();
                        q.push(k);
                        frontier.push(q);
                    }
                }
            }
        }
        Ok(Structure::build(
            Kind::Forest { height },
            Some(nodes),
            format!("forest({height},{branching},{trees})"),
            Some(branching),
        ))
    }

    /// The substructure generated by `nodes`.
    pub fn substructure(&self, nodes: &[Node]) -> Result<Structure> {
        let carrier = neighbourhood(self, nodes)?;
        let label = format!(
            "{}[{}]",
            self.label,
            carrier
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(Structure::build(
            self.kind,
            Some(carrier),
            label,
            self.branching,
        ))
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_finite(&self) -> bool {
        self.carrier.is_some()
    }

    /// The limits are homogeneous; finite structures are treated as not.
    pub fn is_homogeneous(&self) -> bool {
        self.carrier.is_none()
    }

    pub fn nodes(&self) -> Option<&[Node]> {
        self.carrier.as_deref().map(Vec::as_slice)
    }

    pub fn finite_nodes(&self) -> Result<&[Node]> {
        self.nodes().ok_or(Error::InfiniteStructure)
    }

    pub fn size(&self) -> Option<usize> {
        self.carrier.as_ref().map(|c| c.len())
    }

    pub fn contains(&self, n: &Node) -> bool {
        if let Some(m) = &self.members {
            return m.contains(n);
        }
        match (self.kind, n) {
            (Kind::Star, Node::Center | Node::Thread(_)) => true,
            (Kind::Forest { height }, Node::Forest { path, .. }) => {
                path.len() < height as usize
                    && path.iter().enumerate().all(|(i, &k)| i % 2 == 0 || k == 0)
            }
            _ => false,
        }
    }

    fn member(&self, n: &Node) -> Result<()> {
        if self.contains(n) {
            Ok(())
        } else {
            Err(Error::NotInStructure(n.to_string()))
        }
    }

    fn arity_check(name: &str, expected: usize, args: &[Node]) -> Result<()> {
        if args.len() == expected {
            Ok(())
        } else {
            Err(Error::Arity {
                name: name.to_string(),
                expected,
                found: args.len(),
            })
        }
    }

    /// Interpretation of a function symbol.
    pub fn apply(&self, f: &str, args: &[Node]) -> Result<Node> {
        for a in args {
            self.member(a)?;
        }
        let out = match (self.kind, f) {
            (Kind::Star, "g") => {
                Structure::arity_check(f, 0, args)?;
                Node::Center
            }
            (Kind::Ring { size }, "l" | "r") => {
                Structure::arity_check(f, 1, args)?;
                match &args[0] {
                    Node::Proc(i) if f == "l" => Node::Data(*i),
                    Node::Proc(i) => Node::Data((i + 1) % size),
                    other => other.clone(),
                }
            }
            (Kind::Forest { .. }, "u" | "d") => {
                Structure::arity_check(f, 1, args)?;
                match &args[0] {
                    Node::Forest { tree, path } if path.len() % 2 == 1 => {
                        let mut p = path.clone();
                        if f == "u" {
                            p.pop();
                        } else {
                            p.push(0);
                        }
                        Node::Forest {
                            tree: *tree,
                            path: p,
                        }
                    }
                    other => other.clone(),
                }
            }
            _ => return Err(Error::UnknownSymbol(f.to_string())),
        };
        self.member(&out)?;
        Ok(out)
    }

    /// Interpretation of a predicate symbol.
    pub fn holds(&self, p: &str, args: &[Node]) -> Result<bool> {
        for a in args {
            self.member(a)?;
        }
        match (self.kind, p) {
            (Kind::Ring { .. }, "d" | "p") => {
                Structure::arity_check(p, 1, args)?;
                Ok(match &args[0] {
                    Node::Proc(_) => p == "p",
                    _ => p == "d",
                })
            }
            (Kind::Forest { height }, _) => match parse_lca_predicate(p) {
                Some(i) if i < height as i64 => {
                    Structure::arity_check(p, 2, args)?;
                    Ok(lca_depth(&args[0], &args[1]) == i)
                }
                _ => Err(Error::UnknownSymbol(p.to_string())),
            },
            _ => Err(Error::UnknownSymbol(p.to_string())),
        }
    }

    /// True when `xs` in `self` and `ys` in `other` satisfy the same
    /// predicate atoms. Both slices must have equal length.
    pub(crate) fn same_atomic_type(&self, xs: &[Node], other: &Structure, ys: &[Node]) -> bool {
        match self.kind {
            Kind::Star => true,
            Kind::Ring { .. } => xs
                .iter()
                .zip(ys)
                .all(|(x, y)| matches!(x, Node::Proc(_)) == matches!(y, Node::Proc(_))),
            Kind::Forest { .. } => {
                let _ = other;
                (0..xs.len()).all(|i| {
                    (i..xs.len()).all(|j| lca_depth(&xs[i], &xs[j]) == lca_depth(&ys[i], &ys[j]))
                })
            }
        }
    }

    /// Node class names used to key program code: `center`/`thread`,
    /// `proc`/`data`, and `depth<i>` for forests.
    pub fn class_name(&self, n: &Node) -> Result<String> {
        self.member(n)?;
        Ok(match n {
            Node::Center => "center".into(),
            Node::Thread(_) => "thread".into(),
            Node::Proc(_) => "proc".into(),
            Node::Data(_) => "data".into(),
            Node::Forest { path, .. } => format!("depth{}", path.len()),
        })
    }

    /// All class names of the family, each with a representative node of
    /// the canonical member returned by [`Structure::reference`].
    pub fn class_names(&self) -> Vec<(String, Node)> {
        match self.kind {
            Kind::Star => vec![
                ("center".into(), Node::Center),
                ("thread".into(), Node::Thread(0)),
            ],
            Kind::Ring { .. } => vec![
                ("proc".into(), Node::Proc(0)),
                ("data".into(), Node::Data(0)),
            ],
            Kind::Forest { height } => (0..height as usize)
                .map(|d| (format!("depth{d}"), Node::forest(0, &vec![0; d])))
                .collect(),
        }
    }

    /// Text form accepted by [`parse_topology`]; `None` for substructures.
    pub fn selector(&self) -> Option<String> {
        if self.label.contains('[') {
            return None;
        }
        let inner = |l: &str| -> Option<String> {
            Some(l[l.find('(')? + 1..l.len() - 1].replace(',', ":"))
        };
        Some(match self.kind {
            Kind::Star if self.carrier.is_none() => "star".into(),
            Kind::Star => format!("star:{}", inner(&self.label)?),
            Kind::Ring { size } => format!("ring:{size}"),
            Kind::Forest { .. } => format!("forest:{}", inner(&self.label)?),
        })
    }

    /// A member of the family in which every node class is represented.
    pub fn reference(&self) -> Structure {
        match self.kind {
            Kind::Star => Structure::star_limit(),
            Kind::Ring { .. } => Structure::ring(3).expect("valid size"),
            Kind::Forest { height } => Structure::forest_limit(height).expect("valid height"),
        }
    }
}

/// Parse a topology selector: `star`, `star:<n>`, `ring:<n>`,
/// `forest:<h>` or `forest:<h>:<branching>:<trees>`.
pub fn parse_topology(sel: &str) -> Result<Structure> {
    let parts: Vec<&str> = sel.split(':').collect();
    let num = |s: &str| -> Result<u32> {
        s.parse().map_err(|_| Error::Parse {
            offset: 0,
            message: format!("bad number `{s}` in topology `{sel}`"),
        })
    };
    match parts.as_slice() {
        ["star"] => Ok(Structure::star_limit()),
        ["star", n] => Ok(Structure::star(num(n)?)),
        ["ring", n] => Structure::ring(num(n)?),
        ["forest", h] => Structure::forest_limit(num(h)?),
        ["forest", h, k, l] => Structure::forest(num(h)?, num(k)?, num(l)?),
        _ => Err(Error::Parse {
            offset: 0,
            message: format!("unknown topology `{sel}`"),
        }),
    }
}

/// Depth of the lowest common ancestor, `-1` across trees.
pub fn lca_depth(a: &Node, b: &Node) -> i64 {
    match (a, b) {
        (Node::Forest { tree: t1, path: p1 }, Node::Forest { tree: t2, path: p2 }) => {
            if t1 != t2 {
                -1
            } else {
                p1.iter().zip(p2.iter()).take_while(|(x, y)| x == y).count() as i64
            }
        }
        _ => -1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_round_trip() {
        for sel in ["star", "star:3", "ring:4", "forest:3", "forest:5:2:1"] {
            assert_eq!(parse_topology(sel).unwrap().selector().unwrap(), sel);
        }
        assert!(parse_topology("ring:1").is_err());
        assert!(parse_topology("forest:4").is_err());
        assert!(parse_topology("torus").is_err());
        let sub = Structure::ring(3)
            .unwrap()
            .substructure(&[Node::Proc(0)])
            .unwrap();
        assert_eq!(sub.selector(), None);
    }

    #[test]
    fn ring_orientation() {
        let r = Structure::ring(4).unwrap();
        assert_eq!(r.apply("l", &[Node::Proc(3)]).unwrap(), Node::Data(3));
        assert_eq!(r.apply("r", &[Node::Proc(3)]).unwrap(), Node::Data(0));
        assert_eq!(r.apply("r", &[Node::Data(2)]).unwrap(), Node::Data(2));
        assert!(r.holds("d", &[Node::Data(1)]).unwrap());
        assert!(!r.holds("p", &[Node::Data(1)]).unwrap());
    }

    #[test]
    fn forest_shape() {
        let f = Structure::forest(5, 2, 1).unwrap();
        assert_eq!(f.size(), Some(13));
        let c = Node::forest(0, &[1]);
        assert_eq!(f.apply("u", std::slice::from_ref(&c)).unwrap(), Node::forest(0, &[]));
        assert_eq!(f.apply("d", &[c]).unwrap(), Node::forest(0, &[1, 0]));
        let rect = Node::forest(0, &[1, 0]);
        assert_eq!(f.apply("d", std::slice::from_ref(&rect)).unwrap(), rect);
        assert!(f
            .holds("p0", &[Node::forest(0, &[]), Node::forest(0, &[1])])
            .unwrap());
        assert!(Structure::forest_limit(4).is_err());
    }

    #[test]
    fn forest_limit_membership() {
        let f = Structure::forest_limit(5).unwrap();
        assert!(f.contains(&Node::forest(7, &[9, 0, 4, 0])));
        assert!(!f.contains(&Node::forest(7, &[9, 1])));
        assert!(!f.contains(&Node::forest(0, &[0, 0, 0, 0, 0])));
        assert!(matches!(f.holds("p5", &[]), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn star_constant() {
        let s = Structure::star(2);
        assert_eq!(s.apply("g", &[]).unwrap(), Node::Center);
        assert!(matches!(
            s.apply("g", &[Node::Center]),
            Err(Error::Arity { .. })
        ));
        assert!(!s.contains(&Node::Thread(2)));
    }
}
