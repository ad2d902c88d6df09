//! Minimal s-expression reader with source locations, enough for PDDL.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sexpr {
    Atom(String, Loc),
    List(Vec<Sexpr>, Loc),
}

impl Sexpr {
    pub fn loc(&self) -> Loc {
        match self {
            Sexpr::Atom(_, l) | Sexpr::List(_, l) => *l,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(s, _) => Some(s),
            Sexpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            Sexpr::Atom(..) => None,
        }
    }

    /// Head keyword of a list, lowercased by the reader already.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(Sexpr::as_atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadError {
    pub loc: Loc,
    pub message: String,
}

/// Reads exactly one top-level expression. Comments start with `;`.
/// Symbols are case-insensitive and returned lowercased.
pub fn read(text: &str) -> Result<Sexpr, ReadError> {
    let mut reader = Reader {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        depth: 0,
    };
    reader.skip_ws();
    let expr = reader.expr()?;
    reader.skip_ws();
    if reader.pos < reader.chars.len() {
        return Err(ReadError {
            loc: reader.loc(),
            message: "trailing input after top-level expression".into(),
        });
    }
    Ok(expr)
}

const MAX_DEPTH: usize = 256;

struct Reader {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    depth: usize,
}

impl Reader {
    fn loc(&self) -> Loc {
        Loc {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.pos)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expr(&mut self) -> Result<Sexpr, ReadError> {
        let start = self.loc();
        match self.peek() {
            None => Err(ReadError {
                loc: start,
                message: "unexpected end of input".into(),
            }),
            Some('(') => {
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(ReadError {
                        loc: start,
                        message: "expression nested too deeply".into(),
                    });
                }
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        None => {
                            return Err(ReadError {
                                loc: start,
                                message: "unclosed parenthesis".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            self.depth -= 1;
                            return Ok(Sexpr::List(items, start));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(')') => Err(ReadError {
                loc: start,
                message: "unexpected ')'".into(),
            }),
            Some(_) => {
                let mut sym = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    sym.push(c);
                    self.bump();
                }
                Ok(Sexpr::Atom(sym.to_lowercase(), start))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_comments() {
        let e = read("; header\n(define (Domain d) ; tail\n  (:requirements :strips))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items[0].as_atom(), Some("define"));
        assert_eq!(items[1].head(), Some("domain"));
        assert_eq!(items[2].loc(), Loc { line: 3, col: 3 });
    }

    #[test]
    fn reports_unclosed_paren() {
        let err = read("(a (b c)").unwrap_err();
        assert_eq!(err.loc, Loc { line: 1, col: 1 });
    }

    #[test]
    fn rejects_trailing_input() {
        assert!(read("(a) (b)").is_err());
        assert!(read(")").is_err());
    }

    #[test]
    fn depth_is_bounded() {
        let deep = "(".repeat(1000) + &")".repeat(1000);
        assert!(read(&deep).is_err());
    }
}
