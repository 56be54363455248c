use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PredicateAutomaton;
use crate::error::{Error, Result};
use crate::formula::{name, parse_formula};
use crate::topology::parse_topology;

pub const PA_SCHEMA: &str = "parasymm-pa/1";

#[derive(Serialize, Deserialize)]
struct RawPa {
    schema: String,
    topology: String,
    alphabet: Vec<String>,
    predicates: BTreeMap<String, usize>,
    /// symbol -> command -> formula
    delta: BTreeMap<String, BTreeMap<String, String>>,
    start: String,
    accepting: Vec<String>,
}

impl PredicateAutomaton {
    pub fn to_json(&self) -> Result<String> {
        let topology = self.structure.selector().ok_or_else(|| {
            Error::Schema(format!(
                "{} has no topology selector",
                self.structure.label()
            ))
        })?;
        let mut delta: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for ((q, s), f) in &self.delta {
            delta
                .entry(q.to_string())
                .or_default()
                .insert(s.to_string(), f.to_string());
        }
        let raw = RawPa {
            schema: PA_SCHEMA.into(),
            topology,
            alphabet: self.alphabet.iter().map(|a| a.to_string()).collect(),
            predicates: self
                .predicates
                .iter()
                .map(|(q, &a)| (q.to_string(), a))
                .collect(),
            delta,
            start: self.start.to_string(),
            accepting: self.accepting.iter().map(|q| q.to_string()).collect(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn from_json(text: &str) -> Result<PredicateAutomaton> {
        let raw: RawPa = serde_json::from_str(text)?;
        if raw.schema != PA_SCHEMA {
            return Err(Error::Schema(format!(
                "expected schema `{PA_SCHEMA}`, got `{}`",
                raw.schema
            )));
        }
        let mut delta = BTreeMap::new();
        for (q, row) in raw.delta {
            for (s, f) in row {
                delta.insert((name(&q), name(&s)), parse_formula(&f)?);
            }
        }
        let pa = PredicateAutomaton {
            structure: parse_topology(&raw.topology)?,
            alphabet: raw.alphabet.iter().map(|a| name(a)).collect(),
            predicates: raw.predicates.iter().map(|(q, &a)| (name(q), a)).collect(),
            delta,
            start: parse_formula(&raw.start)?,
            accepting: raw.accepting.iter().map(|q| name(q)).collect(),
        };
        pa.validate()?;
        Ok(pa)
    }
}
