use std::collections::BTreeSet;

use super::{local_iso, neighbourhood, Node, Structure};
use crate::error::Result;

/// A minimal-ish generating tuple: each node not already in the
/// neighbourhood of the previous ones.
fn generators(s: &Structure) -> Result<Vec<Node>> {
    let mut gens = Vec::new();
    let mut covered: BTreeSet<Node> = neighbourhood(s, &[])?.into_iter().collect();
    for n in s.finite_nodes()? {
        if !covered.contains(n) {
            gens.push(n.clone());
            covered.extend(neighbourhood(s, &gens)?);
        }
    }
    Ok(gens)
}

/// Isomorphism of finite structures of one vocabulary.
pub fn isomorphic(a: &Structure, b: &Structure) -> Result<bool> {
    let (na, nb) = (a.finite_nodes()?, b.finite_nodes()?);
    if na.len() != nb.len() {
        return Ok(false);
    }
    let gens = generators(a)?;
    let mut ys = Vec::with_capacity(gens.len());
    search(a, &gens, b, nb, &mut ys)
}

fn search(
    a: &Structure,
    gens: &[Node],
    b: &Structure,
    nb: &[Node],
    ys: &mut Vec<Node>,
) -> Result<bool> {
    let i = ys.len();
    if i == gens.len() {
        return Ok(neighbourhood(b, ys)?.len() == nb.len());
    }
    for y in nb {
        ys.push(y.clone());
        let ok = local_iso(a, &gens[..=i], b, ys)?.is_some() && search(a, gens, b, nb, ys)?;
        ys.pop();
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn push_unique(found: &mut Vec<Structure>, cand: Structure) -> Result<()> {
    for f in found.iter() {
        if isomorphic(f, &cand)? {
            return Ok(());
        }
    }
    found.push(cand);
    Ok(())
}

/// Non-empty substructures of a finite structure generated by `k` nodes
/// (repetitions allowed), one per isomorphism type.
pub fn sub_k(s: &Structure, k: usize) -> Result<Vec<Structure>> {
    sub_k_family(std::slice::from_ref(s), k)
}

/// The `k`-generated downward closure of a family of finite structures,
/// one representative per isomorphism type.
pub fn sub_k_family(members: &[Structure], k: usize) -> Result<Vec<Structure>> {
    let mut found = Vec::new();
    for s in members {
        let nodes = s.finite_nodes()?;
        let mut carriers: BTreeSet<BTreeSet<Node>> = BTreeSet::new();
        for idx in multisets(nodes.len(), k) {
            let gens: Vec<Node> = idx.iter().map(|&i| nodes[i].clone()).collect();
            let sub = s.substructure(&gens)?;
            let carrier: BTreeSet<Node> = sub.finite_nodes()?.iter().cloned().collect();
            if !carrier.is_empty() && carriers.insert(carrier) {
                push_unique(&mut found, sub)?;
            }
        }
    }
    Ok(found)
}
