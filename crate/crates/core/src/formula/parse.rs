use super::{name, Atom, Formula, Term};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected `{c}`")))
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let rest = self.rest();
        let len = rest.find(|c| !f(c)).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn ident(&mut self) -> Result<&'a str> {
        match self.peek() {
            Some(c) if is_ident_start(c) => Ok(self.take_while(is_ident)),
            _ => Err(Error::parse(self.pos, "expected identifier")),
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits
            .parse()
            .map_err(|_| Error::parse(start, "expected integer"))
    }

    fn term(&mut self) -> Result<Term> {
        if self.eat('#') {
            let start = self.pos;
            let text = self.take_while(|c| c.is_ascii_alphanumeric() || c == ':' || c == '.');
            let node = text
                .parse()
                .map_err(|_| Error::parse(start, format!("malformed node `{text}`")))?;
            return Ok(Term::Node(node));
        }
        let id = self.ident()?;
        if self.eat('(') {
            let args = self.list(Self::term)?;
            Ok(Term::App(name(id), args))
        } else {
            Ok(Term::Var(name(id)))
        }
    }

    /// Comma separated items up to and including the closing parenthesis.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let state = self.eat('$');
        let start = self.pos;
        let id = self.ident()?;
        if state {
            let args = if self.eat('(') {
                self.list(Self::term)?
            } else {
                Vec::new()
            };
            return Ok(Formula::Atom(Atom::State(name(id), args)));
        }
        match id {
            "true" => return Ok(Formula::True),
            "false" => return Ok(Formula::False),
            _ => {}
        }
        let open = self.eat('(');
        match (id, open) {
            ("not", true) => {
                let f = self.formula()?;
                self.expect(')')?;
                Ok(Formula::not(f))
            }
            ("and", true) => Ok(Formula::And(self.list(Self::formula)?)),
            ("or", true) => Ok(Formula::Or(self.list(Self::formula)?)),
            ("eq", true) => {
                let a = self.term()?;
                self.expect(',')?;
                let b = self.term()?;
                self.expect(')')?;
                Ok(Formula::eq(a, b))
            }
            ("mu", true) => {
                let t = self.term()?;
                self.expect(',')?;
                let x = self.integer()?;
                self.expect(')')?;
                Ok(Formula::Atom(Atom::Data(t, x)))
            }
            ("loc", true) => {
                let t = self.term()?;
                self.expect(',')?;
                let l = self.ident()?;
                self.expect(')')?;
                Ok(Formula::Atom(Atom::Loc(t, name(l))))
            }
            ("not" | "and" | "or" | "eq" | "mu" | "loc", false) => {
                Err(Error::parse(start, format!("`{id}` needs arguments")))
            }
            (_, true) => Ok(Formula::Atom(Atom::Pred(name(id), self.list(Self::term)?))),
            (_, false) => Ok(Formula::Atom(Atom::Pred(name(id), Vec::new()))),
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(Error::parse(self.pos, "trailing input"))
        }
    }
}

/// Parse the prefix text syntax produced by `Formula`'s `Display`.
///
/// ```
/// use parasymm::formula::parse_formula;
/// let f = parse_formula("and(d(u1), not(eq(l(u2), u1)), $q(u2))").unwrap();
/// assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
/// ```
pub fn parse_formula(src: &str) -> Result<Formula> {
    let mut p = Parser { src, pos: 0 };
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_term(src: &str) -> Result<Term> {
    let mut p = Parser { src, pos: 0 };
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}
