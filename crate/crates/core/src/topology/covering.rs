use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{local_iso, Node, Structure};
use crate::error::{Error, Result};
use crate::formula::{GroundAtom, Name};

/// All automorphisms of a finite structure, as node maps.
pub fn automorphisms(s: &Structure) -> Result<Vec<HashMap<Node, Node>>> {
    let nodes = s.finite_nodes()?.to_vec();
    let mut out = Vec::new();
    search_autos(s, &nodes, &mut Vec::new(), &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn search_autos(
    s: &Structure,
    nodes: &[Node],
    xs: &mut Vec<Node>,
    ys: &mut Vec<Node>,
    out: &mut Vec<HashMap<Node, Node>>,
) -> Result<()> {
    let map: HashMap<Node, Node> = local_iso(s, xs, s, ys)?
        .expect("prefix is a local isomorphism")
        .into_iter()
        .collect();
    let Some(x) = nodes.iter().find(|n| !map.contains_key(n)) else {
        out.push(map);
        return Ok(());
    };
    let image: HashSet<&Node> = map.values().collect();
    for y in nodes {
        if image.contains(y) {
            continue;
        }
        xs.push(x.clone());
        ys.push(y.clone());
        if local_iso(s, xs, s, ys)?.is_some() {
            search_autos(s, nodes, xs, ys, out)?;
        }
        xs.pop();
        ys.pop();
    }
    Ok(())
}

/// Decides `small ⪯ big`: some automorphism maps every atom of `small`
/// into `big`.
///
/// In a homogeneous structure an automorphism exists exactly when the
/// supports are related by a local isomorphism, so the search only matches
/// supports. For a finite structure the automorphism group is enumerated
/// once up front.
pub struct Covering {
    structure: Structure,
    autos: Option<Vec<HashMap<Node, Node>>>,
}

fn support(c: &BTreeSet<GroundAtom>) -> Vec<Node> {
    let set: BTreeSet<&Node> = c.iter().flat_map(|a| a.args.iter()).collect();
    set.into_iter().cloned().collect()
}

type Labels = BTreeSet<(Name, usize)>;

fn labels(c: &BTreeSet<GroundAtom>) -> HashMap<Node, Labels> {
    let mut out: HashMap<Node, Labels> = HashMap::new();
    for a in c {
        for (i, n) in a.args.iter().enumerate() {
            out.entry(n.clone())
                .or_default()
                .insert((a.symbol.clone(), i));
        }
    }
    out
}

fn counts(c: &BTreeSet<GroundAtom>) -> BTreeMap<&Name, usize> {
    let mut out = BTreeMap::new();
    for a in c {
        *out.entry(&a.symbol).or_insert(0) += 1;
    }
    out
}

fn maps_into(
    small: &BTreeSet<GroundAtom>,
    big: &BTreeSet<GroundAtom>,
    f: impl Fn(&Node) -> Node,
) -> bool {
    small.iter().all(|a| {
        big.contains(&GroundAtom {
            symbol: a.symbol.clone(),
            args: a.args.iter().map(&f).collect(),
        })
    })
}

impl Covering {
    pub fn new(s: &Structure) -> Result<Covering> {
        let autos = if s.is_homogeneous() {
            None
        } else if s.is_finite() {
            Some(automorphisms(s)?)
        } else {
            return Err(Error::NotHomogeneous);
        };
        Ok(Covering {
            structure: s.clone(),
            autos,
        })
    }

    pub fn covers(&self, small: &BTreeSet<GroundAtom>, big: &BTreeSet<GroundAtom>) -> Result<bool> {
        if small.len() > big.len() {
            return Ok(false);
        }
        let (cs, cb) = (counts(small), counts(big));
        if cs.iter().any(|(q, n)| cb.get(q).copied().unwrap_or(0) < *n) {
            return Ok(false);
        }
        if let Some(autos) = &self.autos {
            return Ok(autos.iter().any(|m| {
                maps_into(small, big, |n| {
                    m.get(n).cloned().unwrap_or_else(|| n.clone())
                })
            }));
        }
        let xs = support(small);
        let (ls, lb) = (labels(small), labels(big));
        let big_support = support(big);
        let mut options = Vec::with_capacity(xs.len());
        for x in &xs {
            let want = &ls[x];
            let opts: Vec<Node> = big_support
                .iter()
                .filter(|y| lb.get(*y).is_some_and(|have| want.is_subset(have)))
                .cloned()
                .collect();
            if opts.is_empty() {
                return Ok(false);
            }
            options.push(opts);
        }
        let mut ys = Vec::with_capacity(xs.len());
        self.assign(&xs, &options, &mut ys, small, big)
    }

    fn assign(
        &self,
        xs: &[Node],
        options: &[Vec<Node>],
        ys: &mut Vec<Node>,
        small: &BTreeSet<GroundAtom>,
        big: &BTreeSet<GroundAtom>,
    ) -> Result<bool> {
        let i = ys.len();
        if i == xs.len() {
            let m: HashMap<&Node, &Node> = xs.iter().zip(ys.iter()).collect();
            return Ok(maps_into(small, big, |n| m[n].clone()));
        }
        for y in &options[i] {
            if ys.contains(y) {
                continue;
            }
            ys.push(y.clone());
            let ok = local_iso(&self.structure, &xs[..=i], &self.structure, ys)?.is_some()
                && self.assign(xs, options, ys, small, big)?;
            ys.pop();
            if ok {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// One-shot form of [`Covering::covers`].
pub fn covers(
    s: &Structure,
    small: &BTreeSet<GroundAtom>,
    big: &BTreeSet<GroundAtom>,
) -> Result<bool> {
    Covering::new(s)?.covers(small, big)
}
