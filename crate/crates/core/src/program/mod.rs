//! Boolean programs over a topology.
//!
//! Every node runs a thread whose commands are chosen by the node's class.
//! A command moves the thread between control locations and updates the
//! data stored at the nodes it reads and writes (`rw`), given as terms in
//! the variable `v`. Updates are per-class tables from the packed input
//! bits to the packed output bits; a missing row blocks the command.

mod instance;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{eval_term, name, parse_term, Name, Term};
use crate::topology::{Node, Structure};

pub use instance::{instantiate, GlobalState, Instance, OracleResult};

pub const PROGRAM_SCHEMA: &str = "parasymm-prog/1";

/// An indexed command `σ:a`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub command: Name,
    pub node: Node,
}

impl Letter {
    pub fn new(command: &str, node: Node) -> Letter {
        Letter {
            command: name(command),
            node,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.command, self.node)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Letter> {
        let (c, n) = s
            .split_once('@')
            .ok_or_else(|| Error::parse(0, format!("expected `command@node`, got `{s}`")))?;
        Ok(Letter::new(c, n.parse()?))
    }
}

pub fn word_to_string(w: &[Letter]) -> String {
    w.iter()
        .map(Letter::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_word(s: &str) -> Result<Vec<Letter>> {
    s.split_whitespace().map(str::parse).collect()
}

/// Update table of one command on one node class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    rows: BTreeMap<u64, u64>,
}

impl Table {
    /// Build from a function on unpacked values; `None` blocks.
    pub fn from_fn(arity: usize, bitwidth: u32, f: impl Fn(&[u64]) -> Option<Vec<u64>>) -> Table {
        let mut rows = BTreeMap::new();
        for code in 0..(1u64 << (arity as u32 * bitwidth)) {
            let input = unpack(code, arity, bitwidth);
            if let Some(out) = f(&input) {
                rows.insert(code, pack(&out, bitwidth));
            }
        }
        Table { rows }
    }

    /// Output values for the given input values, `None` if blocked.
    pub fn apply(&self, input: &[u64], bitwidth: u32) -> Option<Vec<u64>> {
        self.rows
            .get(&pack(input, bitwidth))
            .map(|&o| unpack(o, input.len(), bitwidth))
    }

    /// `(input, output)` pairs, unpacked; blocked inputs are absent.
    pub fn rows(&self, arity: usize, bitwidth: u32) -> Vec<(Vec<u64>, Vec<u64>)> {
        self.rows
            .iter()
            .map(|(&i, &o)| (unpack(i, arity, bitwidth), unpack(o, arity, bitwidth)))
            .collect()
    }

    /// Inputs with no row.
    pub fn blocked(&self, arity: usize, bitwidth: u32) -> Vec<Vec<u64>> {
        (0..(1u64 << (arity as u32 * bitwidth)))
            .filter(|c| !self.rows.contains_key(c))
            .map(|c| unpack(c, arity, bitwidth))
            .collect()
    }
}

/// Packs values, first value most significant.
pub fn pack(values: &[u64], bitwidth: u32) -> u64 {
    values.iter().fold(0, |acc, &v| (acc << bitwidth) | v)
}

pub fn unpack(code: u64, arity: usize, bitwidth: u32) -> Vec<u64> {
    let mask = (1u64 << bitwidth) - 1;
    (0..arity)
        .rev()
        .map(|i| (code >> (i as u32 * bitwidth)) & mask)
        .collect()
}

fn bits_to_code(bits: &str, len: usize) -> Result<u64> {
    if bits.len() != len || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Schema(format!("expected {len} bits, got `{bits}`")));
    }
    Ok(if len == 0 {
        0
    } else {
        u64::from_str_radix(bits, 2).unwrap()
    })
}

fn code_to_bits(code: u64, len: usize) -> String {
    if len == 0 {
        String::new()
    } else {
        format!("{code:0len$b}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub name: Name,
    pub src: usize,
    pub tgt: usize,
    pub rw: Vec<Term>,
    pub updates: BTreeMap<String, Table>,
}

/// A parameterized Boolean program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramSpec {
    pub locations: Vec<Name>,
    pub init: usize,
    pub err: usize,
    pub bitwidth: u32,
    pub commands: Vec<Command>,
    /// Node class to enabled command indices.
    pub code: BTreeMap<String, Vec<usize>>,
}

/// Per-node view of a command: the nodes it reads and writes and its table.
#[derive(Clone, Debug)]
pub struct LocalCommand<'a> {
    pub rw: Vec<Node>,
    pub table: &'a Table,
}

#[derive(Serialize, Deserialize)]
struct RawCommand {
    name: String,
    src: String,
    tgt: String,
    rw: Vec<String>,
    updates: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Serialize, Deserialize)]
struct RawProgram {
    schema: String,
    locations: Vec<String>,
    init: String,
    err: String,
    bitwidth: u32,
    commands: Vec<RawCommand>,
    code: BTreeMap<String, Vec<String>>,
}

impl ProgramSpec {
    pub fn from_json(text: &str) -> Result<ProgramSpec> {
        let raw: RawProgram = serde_json::from_str(text)?;
        if raw.schema != PROGRAM_SCHEMA {
            return Err(Error::Schema(format!(
                "expected schema `{PROGRAM_SCHEMA}`, got `{}`",
                raw.schema
            )));
        }
        if raw.bitwidth == 0 || raw.bitwidth > 8 {
            return Err(Error::InvalidProgram(format!(
                "bitwidth {} outside 1..=8",
                raw.bitwidth
            )));
        }
        let loc_index = |l: &str| {
            raw.locations
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::InvalidProgram(format!("unknown location `{l}`")))
        };
        let mut commands = Vec::new();
        for c in &raw.commands {
            let rw =
                c.rw.iter()
                    .map(|t| parse_term(t))
                    .collect::<Result<Vec<_>>>()?;
            let width = rw.len() * raw.bitwidth as usize;
            let mut updates = BTreeMap::new();
            for (class, rows) in &c.updates {
                let mut table = BTreeMap::new();
                for (input, output) in rows {
                    let i = bits_to_code(input, width).map_err(|e| Error::InvalidUpdate {
                        command: c.name.clone(),
                        message: e.to_string(),
                    })?;
                    if output == "block" {
                        continue;
                    }
                    let o = bits_to_code(output, width).map_err(|e| Error::InvalidUpdate {
                        command: c.name.clone(),
                        message: e.to_string(),
                    })?;
                    table.insert(i, o);
                }
                updates.insert(class.clone(), Table { rows: table });
            }
            commands.push(Command {
                name: name(&c.name),
                src: loc_index(&c.src)?,
                tgt: loc_index(&c.tgt)?,
                rw,
                updates,
            });
        }
        let mut code = BTreeMap::new();
        for (class, names) in &raw.code {
            let idx = names
                .iter()
                .map(|n| {
                    commands
                        .iter()
                        .position(|c| &*c.name == n)
                        .ok_or_else(|| Error::InvalidProgram(format!("unknown command `{n}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            code.insert(class.clone(), idx);
        }
        let spec = ProgramSpec {
            locations: raw.locations.iter().map(|l| name(l)).collect(),
            init: loc_index(&raw.init)?,
            err: loc_index(&raw.err)?,
            bitwidth: raw.bitwidth,
            commands,
            code,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let width = |c: &Command| c.rw.len() * self.bitwidth as usize;
        let raw = RawProgram {
            schema: PROGRAM_SCHEMA.into(),
            locations: self.locations.iter().map(|l| l.to_string()).collect(),
            init: self.locations[self.init].to_string(),
            err: self.locations[self.err].to_string(),
            bitwidth: self.bitwidth,
            commands: self
                .commands
                .iter()
                .map(|c| RawCommand {
                    name: c.name.to_string(),
                    src: self.locations[c.src].to_string(),
                    tgt: self.locations[c.tgt].to_string(),
                    rw: c.rw.iter().map(Term::to_string).collect(),
                    updates: c
                        .updates
                        .iter()
                        .map(|(class, t)| {
                            let rows = (0..(1u64 << width(c)))
                                .map(|i| {
                                    let out = t.rows.get(&i).map_or("block".to_string(), |&o| {
                                        code_to_bits(o, width(c))
                                    });
                                    (code_to_bits(i, width(c)), out)
                                })
                                .collect();
                            (class.clone(), rows)
                        })
                        .collect(),
                })
                .collect(),
            code: self
                .code
                .iter()
                .map(|(k, v)| {
                    (
                        k.clone(),
                        v.iter()
                            .map(|&i| self.commands[i].name.to_string())
                            .collect(),
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    /// Structural checks independent of the topology.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProgram(m));
        let locs: BTreeSet<&Name> = self.locations.iter().collect();
        if locs.len() != self.locations.len() {
            return bad("duplicate location".into());
        }
        if self.init == self.err {
            return bad("initial and error location coincide".into());
        }
        let names: BTreeSet<&Name> = self.commands.iter().map(|c| &c.name).collect();
        if names.len() != self.commands.len() {
            return bad("duplicate command name".into());
        }
        for c in &self.commands {
            if c.src == self.err {
                return bad(format!("command `{}` leaves the error location", c.name));
            }
            if c.rw.len() as u32 * self.bitwidth > 60 {
                return bad(format!("command `{}` touches too many bits", c.name));
            }
            for t in &c.rw {
                let mut vars = BTreeSet::new();
                collect_vars(t, &mut vars);
                if vars.iter().any(|v| v != "v") {
                    return bad(format!(
                        "rw term `{t}` of `{}` uses a variable other than v",
                        c.name
                    ));
                }
            }
        }
        for (class, cmds) in &self.code {
            for &i in cmds {
                let c = &self.commands[i];
                if !c.updates.contains_key(class) {
                    return Err(Error::InvalidUpdate {
                        command: c.name.to_string(),
                        message: format!("enabled on class `{class}` without an update table"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks that every class key names a class of the topology family.
    pub fn validate_for(&self, s: &Structure) -> Result<()> {
        let known: BTreeSet<String> = s.class_names().into_iter().map(|(n, _)| n).collect();
        let keys = self
            .code
            .keys()
            .chain(self.commands.iter().flat_map(|c| c.updates.keys()));
        for k in keys {
            if !known.contains(k) {
                return Err(Error::UnknownClass(k.clone()));
            }
        }
        Ok(())
    }

    pub fn command_index(&self, command: &str) -> Option<usize> {
        self.commands.iter().position(|c| &*c.name == command)
    }

    pub fn location_index(&self, loc: &str) -> Option<usize> {
        self.locations.iter().position(|l| &**l == loc)
    }

    pub fn domain_size(&self) -> u64 {
        1 << self.bitwidth
    }

    pub fn alphabet(&self) -> Vec<Name> {
        self.commands.iter().map(|c| c.name.clone()).collect()
    }

    /// Commands enabled on `node`.
    pub fn enabled(&self, s: &Structure, node: &Node) -> Result<&[usize]> {
        let class = s.class_name(node)?;
        Ok(self.code.get(&class).map_or(&[], Vec::as_slice))
    }

    /// Nodes read and written by command `cmd` at `node`.
    pub fn rw_nodes(&self, s: &Structure, cmd: usize, node: &Node) -> Result<Vec<Node>> {
        let env = BTreeMap::from([(name("v"), node.clone())]);
        let rw = self.commands[cmd]
            .rw
            .iter()
            .map(|t| eval_term(s, t, &env))
            .collect::<Result<Vec<_>>>()?;
        let distinct: BTreeSet<&Node> = rw.iter().collect();
        if distinct.len() != rw.len() {
            return Err(Error::InvalidProgram(format!(
                "rw of `{}` at {node} names a node twice",
                self.commands[cmd].name
            )));
        }
        Ok(rw)
    }

    /// The semantics of `cmd` at `node`; `None` when the command has no
    /// table for the node's class.
    pub fn local(
        &self,
        s: &Structure,
        cmd: usize,
        node: &Node,
    ) -> Result<Option<LocalCommand<'_>>> {
        let class = s.class_name(node)?;
        match self.commands[cmd].updates.get(&class) {
            None => Ok(None),
            Some(table) => Ok(Some(LocalCommand {
                rw: self.rw_nodes(s, cmd, node)?,
                table,
            })),
        }
    }

    /// Local semantics of a letter, looked up by command name.
    pub fn local_letter(
        &self,
        s: &Structure,
        letter: &Letter,
    ) -> Result<Option<(usize, LocalCommand<'_>)>> {
        let cmd = self
            .command_index(&letter.command)
            .ok_or_else(|| Error::UnknownSymbol(letter.command.to_string()))?;
        Ok(self.local(s, cmd, &letter.node)?.map(|l| (cmd, l)))
    }
}

fn collect_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(v) => {
            out.insert(v.to_string());
        }
        Term::App(_, args) => args.iter().for_each(|a| collect_vars(a, out)),
        Term::Node(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TOKEN_RING: &str = include_str!("../../programs/token_ring.json");

    #[test]
    fn packing() {
        assert_eq!(pack(&[1, 0], 1), 0b10);
        assert_eq!(unpack(0b10, 2, 1), vec![1, 0]);
        assert_eq!(pack(&[2, 3], 2), 0b1011);
        assert_eq!(unpack(0b1011, 2, 2), vec![2, 3]);
    }

    #[test]
    fn json_round_trip() {
        let p = ProgramSpec::from_json(TOKEN_RING).unwrap();
        let again = ProgramSpec::from_json(&p.to_json()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn token_ring_command_at_v3() {
        let p = ProgramSpec::from_json(TOKEN_RING).unwrap();
        let r = Structure::ring(4).unwrap();
        let pass = p.command_index("pass").unwrap();
        let v3 = Node::Proc(3);
        assert!(p.enabled(&r, &v3).unwrap().contains(&pass));
        assert_eq!(
            p.rw_nodes(&r, pass, &v3).unwrap(),
            vec![Node::Data(3), Node::Data(0)]
        );
    }

    #[test]
    fn rejects_bad_programs() {
        let bad_schema = TOKEN_RING.replace("parasymm-prog/1", "other/2");
        assert!(matches!(
            ProgramSpec::from_json(&bad_schema),
            Err(Error::Schema(_))
        ));
        let bad_bits = TOKEN_RING.replacen("\"01\": \"10\"", "\"011\": \"10\"", 1);
        assert!(matches!(
            ProgramSpec::from_json(&bad_bits),
            Err(Error::InvalidUpdate { .. })
        ));
        let p = ProgramSpec::from_json(TOKEN_RING).unwrap();
        assert!(matches!(
            p.validate_for(&Structure::star_limit()),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn letters() {
        let l: Letter = "pass@P3".parse().unwrap();
        assert_eq!(l, Letter::new("pass", Node::Proc(3)));
        assert_eq!(word_to_string(&parse_word("a@T0 b@C").unwrap()), "a@T0 b@C");
        assert!("pass".parse::<Letter>().is_err());
    }
}
