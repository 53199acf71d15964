//! Recursive-descent parser.
//!
//! ```text
//! formula := impl
//! impl    := disj ("->" impl)?
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "!" unary | quant | atom
//! quant   := ("forall" | "exists") ident+ "." formula
//! atom    := "T" | "F" | ident | "(" formula ")"
//! ```
//!
//! A quantifier body extends as far to the right as possible.

use super::{Formula, Quantifier, VarSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(bool),
    Quant(Quantifier),
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    Dot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Const(true) => "`T`".into(),
            Tok::Const(false) => "`F`".into(),
            Tok::Quant(q) => format!("`{}`", q.keyword()),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut line_start) = (1usize, 0usize);
    while let Some(&(i, c)) = chars.peek() {
        let pos = Pos {
            line,
            column: text[line_start..i].chars().count() + 1,
        };
        if c == '\n' {
            chars.next();
            line += 1;
            line_start = i + 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &text[i..end];
            let tok = match word {
                "T" => Tok::Const(true),
                "F" => Tok::Const(false),
                "forall" => Tok::Quant(Quantifier::Forall),
                "exists" => Tok::Quant(Quantifier::Exists),
                _ => Tok::Ident(word.to_string()),
            };
            out.push((tok, pos));
            continue;
        }
        chars.next();
        let tok = match c {
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '.' => Tok::Dot,
            '-' if matches!(chars.peek(), Some(&(_, '>'))) => {
                chars.next();
                Tok::Arrow
            }
            _ => {
                return Err(Error::Syntax {
                    line: pos.line,
                    column: pos.column,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, pos));
    }
    let column = text[line_start..].chars().count() + 1;
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: String) -> Error {
        let p = self.pos();
        Error::Syntax {
            line: p.line,
            column: p.column,
            message,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Quant(q) => {
                self.bump();
                let mut names = Vec::new();
                loop {
                    let pos = self.pos();
                    match self.peek().clone() {
                        Tok::Ident(name) => {
                            self.bump();
                            if names.contains(&name) {
                                return Err(Error::DuplicateVariable(name));
                            }
                            names.push(name);
                        }
                        Tok::Const(c) => {
                            return Err(Error::ReservedWord {
                                word: if c { "T" } else { "F" }.into(),
                                line: pos.line,
                                column: pos.column,
                            })
                        }
                        Tok::Quant(k) => {
                            return Err(Error::ReservedWord {
                                word: k.keyword().into(),
                                line: pos.line,
                                column: pos.column,
                            })
                        }
                        Tok::Dot if !names.is_empty() => break,
                        other => {
                            return Err(self.error(format!(
                                "expected a bound variable, found {}",
                                other.describe()
                            )))
                        }
                    }
                }
                self.expect(Tok::Dot)?;
                let body = self.implication()?;
                Ok(Formula::Quant(q, VarSet::new(names)?, Box::new(body)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.bump() {
            Tok::Const(c) => Ok(Formula::Const(c)),
            Tok::Ident(name) => Ok(Formula::Var(name)),
            Tok::LParen => {
                let f = self.implication()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            other => {
                self.at -= usize::from(other != Tok::Eof);
                Err(self.error(format!("expected a formula, found {}", other.describe())))
            }
        }
    }
}

/// Parses a formula from text.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.implication()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Formula {
        Formula::var(n)
    }

    #[test]
    fn parses_pollution_constraint() {
        assert_eq!(
            parse("!(va & vb)").unwrap(),
            Formula::not(Formula::and(v("va"), v("vb")))
        );
    }

    #[test]
    fn parses_constants() {
        assert_eq!(parse("T").unwrap(), Formula::TRUE);
        assert_eq!(parse(" F ").unwrap(), Formula::FALSE);
    }

    #[test]
    fn implication_is_right_associative() {
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(v("a"), Formula::implies(v("b"), v("c")))
        );
    }

    #[test]
    fn precedence() {
        // ! > & > | > ->
        assert_eq!(
            parse("!a & b | c -> d").unwrap(),
            Formula::implies(
                Formula::or(Formula::and(Formula::not(v("a")), v("b")), v("c")),
                v("d")
            )
        );
        assert_eq!(
            parse("a | b | c").unwrap(),
            Formula::or(Formula::or(v("a"), v("b")), v("c"))
        );
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse("forall p q . p & q -> r").unwrap();
        let Formula::Quant(Quantifier::Forall, vars, body) = f else {
            panic!("expected a quantifier")
        };
        assert_eq!(vars.as_slice(), ["p", "q"]);
        assert_eq!(*body, parse("p & q -> r").unwrap());
        assert_eq!(
            parse("a & (exists b . b)").unwrap(),
            Formula::and(
                v("a"),
                Formula::exists(VarSet::new(["b"]).unwrap(), v("b"))
            )
        );
    }

    #[test]
    fn reports_position() {
        match parse("a &\n  (b | )") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("{other:?}"),
        }
        match parse("a $ b") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("a b"), Err(Error::Syntax { .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(a"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("a -"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn reserved_word_as_binder() {
        assert_eq!(
            parse("forall T . T"),
            Err(Error::ReservedWord {
                word: "T".into(),
                line: 1,
                column: 8
            })
        );
        assert!(matches!(
            parse("exists p exists . p"),
            Err(Error::ReservedWord { .. })
        ));
        assert!(matches!(parse("forall . p"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse("forall p p . p"),
            Err(Error::DuplicateVariable(_))
        ));
    }
}
