use std::collections::{HashMap, VecDeque};

use super::{Letter, ProgramSpec, Table};
use crate::error::{Error, Result};
use crate::topology::{Node, Structure};

/// Location and data value of every node of a finite instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalState {
    pub loc: Vec<u16>,
    pub val: Vec<u64>,
}

struct Slot<'a> {
    rw: Vec<usize>,
    table: &'a Table,
}

/// A program instantiated on a finite structure.
pub struct Instance<'a> {
    pub spec: &'a ProgramSpec,
    pub structure: Structure,
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    enabled: Vec<Vec<usize>>,
    /// `slots[node][cmd]`: local semantics where a table exists.
    slots: Vec<Vec<Option<Slot<'a>>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleResult {
    Safe {
        states: usize,
    },
    /// A shortest error trace.
    Unsafe(Vec<Letter>),
    Unknown {
        states: usize,
    },
}

pub fn instantiate<'a>(spec: &'a ProgramSpec, s: &Structure) -> Result<Instance<'a>> {
    spec.validate_for(s)?;
    let nodes = s.finite_nodes()?.to_vec();
    let index = nodes
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect::<HashMap<_, _>>();
    let mut enabled = Vec::with_capacity(nodes.len());
    let mut slots = Vec::with_capacity(nodes.len());
    for n in &nodes {
        enabled.push(spec.enabled(s, n)?.to_vec());
        let mut row = Vec::with_capacity(spec.commands.len());
        for c in 0..spec.commands.len() {
            row.push(match spec.local(s, c, n)? {
                None => None,
                Some(l) => Some(Slot {
                    rw: l.rw.iter().map(|m| index[m]).collect(),
                    table: l.table,
                }),
            });
        }
        slots.push(row);
    }
    Ok(Instance {
        spec,
        structure: s.clone(),
        nodes,
        index,
        enabled,
        slots,
    })
}

impl<'a> Instance<'a> {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn index_of(&self, n: &Node) -> Result<usize> {
        self.index
            .get(n)
            .copied()
            .ok_or_else(|| Error::NotInStructure(n.to_string()))
    }

    /// All nodes at the initial location, every value zero.
    pub fn initial(&self) -> GlobalState {
        GlobalState {
            loc: vec![self.spec.init as u16; self.nodes.len()],
            val: vec![0; self.nodes.len()],
        }
    }

    fn letter(&self, l: &Letter) -> Result<(usize, usize)> {
        let c = self
            .spec
            .command_index(&l.command)
            .ok_or_else(|| Error::UnknownSymbol(l.command.to_string()))?;
        Ok((c, self.index_of(&l.node)?))
    }

    /// Data-only transition of `cmd` at node index `a`, ignoring locations.
    pub fn data_step(&self, val: &[u64], cmd: usize, a: usize) -> Option<Vec<u64>> {
        let slot = self.slots[a][cmd].as_ref()?;
        let input: Vec<u64> = slot.rw.iter().map(|&i| val[i]).collect();
        let output = slot.table.apply(&input, self.spec.bitwidth)?;
        let mut next = val.to_vec();
        for (&i, o) in slot.rw.iter().zip(output) {
            next[i] = o;
        }
        Some(next)
    }

    fn step_index(&self, st: &GlobalState, cmd: usize, a: usize) -> Option<GlobalState> {
        if !self.enabled[a].contains(&cmd) {
            return None;
        }
        let c = &self.spec.commands[cmd];
        if st.loc[a] as usize != c.src {
            return None;
        }
        let val = self.data_step(&st.val, cmd, a)?;
        let mut loc = st.loc.clone();
        loc[a] = c.tgt as u16;
        Some(GlobalState { loc, val })
    }

    /// Every enabled, unblocked transition: command index, node index and
    /// successor.
    pub fn successors(&self, st: &GlobalState) -> Vec<(usize, usize, GlobalState)> {
        let mut out = Vec::new();
        for a in 0..self.nodes.len() {
            for &c in &self.enabled[a] {
                if let Some(next) = self.step_index(st, c, a) {
                    out.push((c, a, next));
                }
            }
        }
        out
    }

    /// One transition, `None` if it is disabled or blocked.
    pub fn step(&self, st: &GlobalState, letter: &Letter) -> Result<Option<GlobalState>> {
        let (c, a) = self.letter(letter)?;
        Ok(self.step_index(st, c, a))
    }

    pub fn is_error(&self, st: &GlobalState) -> bool {
        st.loc.iter().any(|&l| l as usize == self.spec.err)
    }

    /// Breadth-first reachability from the initial state.
    pub fn oracle_check(&self, max_states: usize) -> OracleResult {
        let init = self.initial();
        if self.is_error(&init) {
            return OracleResult::Unsafe(Vec::new());
        }
        let mut parent: HashMap<GlobalState, Option<(GlobalState, usize, usize)>> = HashMap::new();
        parent.insert(init.clone(), None);
        let mut queue = VecDeque::from([init]);
        while let Some(st) = queue.pop_front() {
            for a in 0..self.nodes.len() {
                for &c in &self.enabled[a] {
                    let Some(next) = self.step_index(&st, c, a) else {
                        continue;
                    };
                    if parent.contains_key(&next) {
                        continue;
                    }
                    parent.insert(next.clone(), Some((st.clone(), c, a)));
                    if self.is_error(&next) {
                        return OracleResult::Unsafe(self.trace_to(&parent, next));
                    }
                    if parent.len() >= max_states {
                        return OracleResult::Unknown {
                            states: parent.len(),
                        };
                    }
                    queue.push_back(next);
                }
            }
        }
        OracleResult::Safe {
            states: parent.len(),
        }
    }

    fn trace_to(
        &self,
        parent: &HashMap<GlobalState, Option<(GlobalState, usize, usize)>>,
        mut st: GlobalState,
    ) -> Vec<Letter> {
        let mut out = Vec::new();
        while let Some(Some((prev, c, a))) = parent.get(&st) {
            out.push(Letter {
                command: self.spec.commands[*c].name.clone(),
                node: self.nodes[*a].clone(),
            });
            st = prev.clone();
        }
        out.reverse();
        out
    }

    /// True when the trace executes from the initial state.
    pub fn run_feasible(&self, trace: &[Letter]) -> Result<bool> {
        let mut st = self.initial();
        for l in trace {
            match self.step(&st, l)? {
                Some(next) => st = next,
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    /// True when the trace is a syntactic run (enabled commands, threaded
    /// locations) that ends with some node at the error location.
    pub fn is_error_run(&self, trace: &[Letter]) -> Result<bool> {
        let mut loc = vec![self.spec.init; self.nodes.len()];
        for l in trace {
            let (c, a) = self.letter(l)?;
            let cmd = &self.spec.commands[c];
            if !self.enabled[a].contains(&c) || loc[a] != cmd.src {
                return Ok(false);
            }
            loc[a] = cmd.tgt;
        }
        Ok(loc.contains(&self.spec.err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_word;

    fn spec(text: &str) -> ProgramSpec {
        ProgramSpec::from_json(text).unwrap()
    }

    #[test]
    fn token_ring_oracle() {
        let r = Structure::ring(3).unwrap();
        let safe = spec(include_str!("../../programs/token_ring.json"));
        assert!(matches!(
            instantiate(&safe, &r).unwrap().oracle_check(1 << 20),
            OracleResult::Safe { .. }
        ));
        let broken = spec(include_str!("../../programs/token_ring_broken.json"));
        let inst = instantiate(&broken, &r).unwrap();
        match inst.oracle_check(1 << 20) {
            OracleResult::Unsafe(w) => {
                assert!(inst.run_feasible(&w).unwrap());
                assert!(inst.is_error_run(&w).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntactic_versus_feasible() {
        let r = Structure::ring(3).unwrap();
        let p = spec(include_str!("../../programs/token_ring.json"));
        let inst = instantiate(&p, &r).unwrap();
        // Locations thread correctly but the guard of `check` fails.
        let w = parse_word("clear@P0 check@P0").unwrap();
        assert!(inst.is_error_run(&w).unwrap());
        assert!(!inst.run_feasible(&w).unwrap());
        assert!(!inst.is_error_run(&parse_word("check@P0").unwrap()).unwrap());
        assert!(inst.run_feasible(&[]).unwrap());
    }

    #[test]
    fn star_mutex_needs_two_threads() {
        let p = spec(include_str!("../../programs/star_mutex_broken.json"));
        let one = instantiate(&p, &Structure::star(1)).unwrap();
        assert!(matches!(
            one.oracle_check(1 << 16),
            OracleResult::Safe { .. }
        ));
        let two = instantiate(&p, &Structure::star(2)).unwrap();
        assert!(matches!(two.oracle_check(1 << 16), OracleResult::Unsafe(_)));
    }

    #[test]
    fn star_error_trace_is_minimal() {
        let p = spec(include_str!("../../programs/star_mutex_broken.json"));
        let inst = instantiate(&p, &Structure::star(2)).unwrap();
        let OracleResult::Unsafe(w) = inst.oracle_check(1 << 16) else {
            panic!()
        };
        // acquire, acquire, release, check
        assert_eq!(w.len(), 4);
    }
}
