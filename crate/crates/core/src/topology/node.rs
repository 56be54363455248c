use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Branch indices from a forest root down to a node.
pub type Path = SmallVec<[u32; 6]>;

/// A node of one of the supported topologies.
///
/// The text form is `C` and `T<i>` for stars, `P<i>` and `E<i>` for rings
/// and `F<tree>:<i.j...>` for forests (the root has an empty path, `F0:`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Center,
    Thread(u32),
    Proc(u32),
    Data(u32),
    Forest { tree: u32, path: Path },
}

impl Node {
    pub fn forest(tree: u32, path: &[u32]) -> Node {
        Node::Forest {
            tree,
            path: path.iter().copied().collect(),
        }
    }

    /// Depth of a forest node, `None` for other topologies.
    pub fn depth(&self) -> Option<usize> {
        match self {
            Node::Forest { path, .. } => Some(path.len()),
            _ => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Center => write!(f, "C"),
            Node::Thread(i) => write!(f, "T{i}"),
            Node::Proc(i) => write!(f, "P{i}"),
            Node::Data(i) => write!(f, "E{i}"),
            Node::Forest { tree, path } => {
                write!(f, "F{tree}:")?;
                for (k, p) in path.iter().enumerate() {
                    if k > 0 {
                        write!(f, ".")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn index(s: &str, whole: &str) -> Result<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(0, format!("malformed node `{whole}`")));
    }
    s.parse()
        .map_err(|_| Error::parse(0, format!("node index out of range in `{whole}`")))
}

impl FromStr for Node {
    type Err = Error;

    fn from_str(s: &str) -> Result<Node> {
        if s == "C" {
            return Ok(Node::Center);
        }
        let (head, rest) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        match head {
            "T" => Ok(Node::Thread(index(rest, s)?)),
            "P" => Ok(Node::Proc(index(rest, s)?)),
            "E" => Ok(Node::Data(index(rest, s)?)),
            "F" => {
                let (tree, path) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(0, format!("malformed node `{s}`")))?;
                let tree = index(tree, s)?;
                let path = if path.is_empty() {
                    Path::new()
                } else {
                    path.split('.')
                        .map(|p| index(p, s))
                        .collect::<Result<Path>>()?
                };
                Ok(Node::Forest { tree, path })
            }
            _ => Err(Error::parse(0, format!("malformed node `{s}`"))),
        }
    }
}
