//! Formula syntax: AST, parser and printer.
//!
//! ```text
//! imp    := or ( "->" imp )?
//! or     := and ( "|" and )*
//! and    := unary ( "&" unary )*
//! unary  := "box" unary | "dia" unary | "~" unary | atom
//! atom   := "true" | "false" | ident | "(" imp ")"
//! ```
//! `~p` is sugar for `p -> false`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Bottom,
    Top,
    Var(String),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Imp(Arc<Formula>, Arc<Formula>),
    Box(Arc<Formula>),
    DiaBlack(Arc<Formula>),
}

impl Formula {
    pub fn var(name: &str) -> Arc<Formula> {
        Arc::new(Formula::Var(name.to_string()))
    }

    pub fn and(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::And(a, b))
    }

    pub fn or(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Or(a, b))
    }

    pub fn imp(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Imp(a, b))
    }

    pub fn boxed(a: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Box(a))
    }

    pub fn dia(a: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::DiaBlack(a))
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Bottom | Formula::Top | Formula::Var(_) => 0,
            Formula::Box(a) | Formula::DiaBlack(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bottom | Formula::Top => {}
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Box(a) | Formula::DiaBlack(a) => a.collect_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// First variable, in left-to-right order, rejected by `known`.
    pub fn find_var(&self, known: &impl Fn(&str) -> bool) -> Option<&str> {
        match self {
            Formula::Bottom | Formula::Top => None,
            Formula::Var(v) => (!known(v)).then_some(v.as_str()),
            Formula::Box(a) | Formula::DiaBlack(a) => a.find_var(known),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.find_var(known).or_else(|| b.find_var(known))
            }
        }
    }

    pub fn is_modal(&self) -> bool {
        match self {
            Formula::Bottom | Formula::Top | Formula::Var(_) => false,
            Formula::Box(_) | Formula::DiaBlack(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.is_modal() || b.is_modal(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Imp(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Box(_) | Formula::DiaBlack(_) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::Bottom => f.write_str("false")?,
            Formula::Top => f.write_str("true")?,
            Formula::Var(v) => f.write_str(v)?,
            Formula::And(a, b) => {
                a.write_at(f, 3)?;
                f.write_str(" & ")?;
                b.write_at(f, 4)?;
            }
            Formula::Or(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" | ")?;
                b.write_at(f, 3)?;
            }
            Formula::Imp(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" -> ")?;
                b.write_at(f, 1)?;
            }
            Formula::Box(a) => {
                f.write_str("box ")?;
                a.write_at(f, 4)?;
            }
            Formula::DiaBlack(a) => {
                f.write_str("dia ")?;
                a.write_at(f, 4)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Box,
    Dia,
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'~' => Tok::Not,
            b'-' => {
                if bytes.get(self.pos + 1) == Some(&b'>') {
                    self.pos += 1;
                    Tok::Arrow
                } else {
                    return Err(Error::Parse {
                        pos: start,
                        msg: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_' || bytes[end] == b'\'') {
                    end += 1;
                }
                let word = &self.src[self.pos..end];
                self.pos = end;
                return Ok((
                    start,
                    match word {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "box" => Tok::Box,
                        "dia" => Tok::Dia,
                        _ => Tok::Ident(word.to_string()),
                    },
                ));
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        self.pos += 1;
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(usize, Tok)> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn imp(&mut self) -> Result<Arc<Formula>> {
        let lhs = self.or()?;
        if self.peeked.1 == Tok::Arrow {
            self.bump()?;
            let rhs = self.imp()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Arc<Formula>> {
        let mut lhs = self.and()?;
        while self.peeked.1 == Tok::Or {
            self.bump()?;
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Arc<Formula>> {
        let mut lhs = self.unary()?;
        while self.peeked.1 == Tok::And {
            self.bump()?;
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Arc<Formula>> {
        match self.peeked.1 {
            Tok::Box => {
                self.bump()?;
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::Dia => {
                self.bump()?;
                Ok(Formula::dia(self.unary()?))
            }
            Tok::Not => {
                self.bump()?;
                Ok(Formula::imp(self.unary()?, Arc::new(Formula::Bottom)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Arc<Formula>> {
        let (pos, tok) = self.bump()?;
        match tok {
            Tok::True => Ok(Arc::new(Formula::Top)),
            Tok::False => Ok(Arc::new(Formula::Bottom)),
            Tok::Ident(name) => Ok(Arc::new(Formula::Var(name))),
            Tok::LParen => {
                let inner = self.imp()?;
                let (pos, close) = self.bump()?;
                if close != Tok::RParen {
                    return Err(Error::Parse {
                        pos,
                        msg: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            Tok::End => Err(Error::Parse {
                pos,
                msg: "unexpected end of input".into(),
            }),
            other => Err(Error::Parse {
                pos,
                msg: format!("unexpected token {other:?}"),
            }),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Arc<Formula>> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let first = lexer.next()?;
    let mut p = Parser { lexer, peeked: first };
    let f = p.imp()?;
    if p.peeked.1 != Tok::End {
        return Err(Error::Parse {
            pos: p.peeked.0,
            msg: "trailing input".into(),
        });
    }
    Ok(f)
}

/// Every formula over `vars` of depth at most `depth`, without duplicates.
pub fn formulas_up_to_depth(vars: &[&str], depth: usize) -> Vec<Arc<Formula>> {
    let mut layers: Vec<Vec<Arc<Formula>>> = Vec::new();
    let mut base = vec![Arc::new(Formula::Bottom), Arc::new(Formula::Top)];
    base.extend(vars.iter().map(|v| Formula::var(v)));
    layers.push(base);
    for d in 1..=depth {
        let shallower: Vec<Arc<Formula>> = layers.iter().flatten().cloned().collect();
        let prev = &layers[d - 1];
        let mut next = Vec::new();
        for a in prev {
            next.push(Formula::boxed(a.clone()));
            next.push(Formula::dia(a.clone()));
        }
        // Binary nodes of depth exactly d: at least one child of depth d-1.
        let prev_len = prev.len();
        let older = shallower.len() - prev_len;
        for (i, a) in shallower.iter().enumerate() {
            for (j, b) in shallower.iter().enumerate() {
                if i < older && j < older {
                    continue;
                }
                next.push(Formula::and(a.clone(), b.clone()));
                next.push(Formula::or(a.clone(), b.clone()));
                next.push(Formula::imp(a.clone(), b.clone()));
            }
        }
        layers.push(next);
    }
    layers.into_iter().flatten().collect()
}

/// A random formula of depth at most `depth`.
pub fn random_formula<R: rand::Rng>(vars: &[&str], depth: usize, modal: bool, rng: &mut R) -> Arc<Formula> {
    if depth == 0 || rng.gen_bool(0.2) {
        let k = rng.gen_range(0..vars.len() + 2);
        return match k {
            0 => Arc::new(Formula::Bottom),
            1 => Arc::new(Formula::Top),
            _ => Formula::var(vars[k - 2]),
        };
    }
    let choices = if modal { 5 } else { 3 };
    match rng.gen_range(0..choices) {
        0 => Formula::and(random_formula(vars, depth - 1, modal, rng), random_formula(vars, depth - 1, modal, rng)),
        1 => Formula::or(random_formula(vars, depth - 1, modal, rng), random_formula(vars, depth - 1, modal, rng)),
        2 => Formula::imp(random_formula(vars, depth - 1, modal, rng), random_formula(vars, depth - 1, modal, rng)),
        3 => Formula::boxed(random_formula(vars, depth - 1, modal, rng)),
        _ => Formula::dia(random_formula(vars, depth - 1, modal, rng)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Arc<Formula> {
        Formula::var(s)
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(parse_formula("box(p -> q)").unwrap(), Formula::boxed(Formula::imp(v("p"), v("q"))));
        assert_eq!(parse_formula("dia p & q").unwrap(), Formula::and(Formula::dia(v("p")), v("q")));
        assert_eq!(
            parse_formula("p -> q -> r").unwrap(),
            Formula::imp(v("p"), Formula::imp(v("q"), v("r")))
        );
    }

    #[test]
    fn precedence_ladder() {
        let f = parse_formula("p | q & r -> s").unwrap();
        assert_eq!(
            f,
            Formula::imp(Formula::or(v("p"), Formula::and(v("q"), v("r"))), v("s"))
        );
    }

    #[test]
    fn negation_is_sugar() {
        assert_eq!(
            parse_formula("~p").unwrap(),
            Formula::imp(v("p"), Arc::new(Formula::Bottom))
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert!(matches!(parse_formula("p &"), Err(Error::Parse { pos: 3, .. })));
        assert!(matches!(parse_formula("(p"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_formula("p $ q"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_formula("p q"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_formula("p - q"), Err(Error::Parse { pos: 2, .. })));
    }

    #[test]
    fn printer_uses_minimal_parentheses() {
        for s in ["(p -> q) -> r", "p & (q | r)", "box (p -> q)", "dia box p", "p -> q -> r", "p & q & r"] {
            assert_eq!(parse_formula(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn corpus_sizes() {
        assert_eq!(formulas_up_to_depth(&["p", "q"], 0).len(), 4);
        // 4 atoms + 2 * 4 unary + 3 * 16 binary
        assert_eq!(formulas_up_to_depth(&["p", "q"], 1).len(), 60);
        let d2 = formulas_up_to_depth(&["p", "q"], 2);
        assert_eq!(d2.len(), 4 + 2 * 60 + 3 * 60 * 60);
        assert!(d2.iter().all(|f| f.depth() <= 2));
        let distinct: BTreeSet<_> = d2.iter().collect();
        assert_eq!(distinct.len(), d2.len());
    }
}
