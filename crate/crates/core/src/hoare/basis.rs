use serde::{Deserialize, Serialize};

use super::HoareTriple;
use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula, Term};
use crate::program::{Letter, ProgramSpec};
use crate::topology::{eq_classes, Node, Structure};

pub const BASIS_SCHEMA: &str = "parasymm-basis/1";

fn data_conj(nodes: &[Node], values: &[u64]) -> Formula {
    let atoms: Vec<Formula> = nodes
        .iter()
        .zip(values)
        .map(|(n, &x)| Formula::data(Term::Node(n.clone()), x))
        .collect();
    match atoms.len() {
        0 => Formula::True,
        1 => atoms.into_iter().next().unwrap(),
        _ => Formula::And(atoms),
    }
}

/// The Boolean basis from which every provable single-command fact
/// follows, one triple family per class representative:
///
/// 1. `{rw = in} c@a {mu(rw_j) = out_j}` for every row of the update table;
/// 2. `{mu(b) = x} c@a {mu(b) = x}` for pairs `(a, b)` with `b` outside `rw(a)`;
/// 3. `{rw = in} c@a {false}` for every blocked input;
/// 4. `{false} c@a {false}`.
///
/// Only commands enabled at `a` contribute.
pub fn max_boolean_basis(spec: &ProgramSpec, s: &Structure) -> Result<Vec<HoareTriple>> {
    spec.validate_for(s)?;
    let bw = spec.bitwidth;
    let mut out: Vec<HoareTriple> = Vec::new();
    let push = |t: HoareTriple, out: &mut Vec<HoareTriple>| {
        if !out.contains(&t) {
            out.push(t);
        }
    };
    for class in eq_classes(s, 1)? {
        let a = &class.representative[0];
        for &c in spec.enabled(s, a)? {
            let Some(local) = spec.local(s, c, a)? else {
                continue;
            };
            let letter = vec![Letter {
                command: spec.commands[c].name.clone(),
                node: a.clone(),
            }];
            let m = local.rw.len();
            for (input, output) in local.table.rows(m, bw) {
                for (j, b) in local.rw.iter().enumerate() {
                    let post = Formula::data(Term::Node(b.clone()), output[j]);
                    push(
                        HoareTriple::new(data_conj(&local.rw, &input), letter.clone(), post),
                        &mut out,
                    );
                }
            }
            for input in local.table.blocked(m, bw) {
                push(
                    HoareTriple::new(data_conj(&local.rw, &input), letter.clone(), Formula::False),
                    &mut out,
                );
            }
            push(
                HoareTriple::new(Formula::False, letter, Formula::False),
                &mut out,
            );
        }
    }
    for class in eq_classes(s, 2)? {
        let (a, b) = (&class.representative[0], &class.representative[1]);
        for &c in spec.enabled(s, a)? {
            let Some(local) = spec.local(s, c, a)? else {
                continue;
            };
            if local.rw.contains(b) {
                continue;
            }
            let letter = vec![Letter {
                command: spec.commands[c].name.clone(),
                node: a.clone(),
            }];
            for x in 0..spec.domain_size() {
                let f = Formula::data(Term::Node(b.clone()), x);
                push(HoareTriple::new(f.clone(), letter.clone(), f), &mut out);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct RawCmd {
    name: String,
    node: String,
}

#[derive(Serialize, Deserialize)]
struct RawTriple {
    pre: String,
    cmd: Option<RawCmd>,
    post: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    extended: bool,
}

#[derive(Serialize, Deserialize)]
struct RawBasis {
    schema: String,
    triples: Vec<RawTriple>,
}

pub fn basis_to_json(triples: &[HoareTriple]) -> Result<String> {
    let raw = RawBasis {
        schema: BASIS_SCHEMA.into(),
        triples: triples
            .iter()
            .map(|t| {
                let cmd = match t.word.as_slice() {
                    [] => None,
                    [l] => Some(RawCmd {
                        name: l.command.to_string(),
                        node: l.node.to_string(),
                    }),
                    _ => {
                        return Err(Error::Schema(format!(
                            "basis triples have at most one command: {t}"
                        )))
                    }
                };
                Ok(RawTriple {
                    pre: t.pre.to_string(),
                    cmd,
                    post: t.post.to_string(),
                    extended: t.extended,
                })
            })
            .collect::<Result<_>>()?,
    };
    Ok(serde_json::to_string_pretty(&raw)?)
}

pub fn basis_from_json(text: &str) -> Result<Vec<HoareTriple>> {
    let raw: RawBasis = serde_json::from_str(text)?;
    if raw.schema != BASIS_SCHEMA {
        return Err(Error::Schema(format!(
            "expected schema `{BASIS_SCHEMA}`, got `{}`",
            raw.schema
        )));
    }
    raw.triples
        .into_iter()
        .map(|r| {
            let word = match r.cmd {
                None => Vec::new(),
                Some(c) => vec![Letter::new(&c.name, c.node.parse()?)],
            };
            Ok(HoareTriple {
                pre: parse_formula(&r.pre)?,
                word,
                post: parse_formula(&r.post)?,
                extended: r.extended,
            })
        })
        .collect()
}
