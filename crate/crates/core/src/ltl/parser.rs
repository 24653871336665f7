//! Recursive-descent parser for the concrete LTL syntax.
//!
//! Tokens: `F`, `G`, `U`, `!`, `&`, `|`, parentheses; identifiers match
//! `[a-z][a-z0-9_]*`. Unary operators bind tightest, then `U`
//! (right-associative), then `&`, then `|`. Boolean constants and `R` are
//! internal node kinds and deliberately have no surface syntax.

use thiserror::Error;

use super::{LtlFormula, PropRegistry};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at column {col}: unexpected character `{ch}`")]
    BadChar { col: usize, ch: char },
    #[error("syntax error at column {col}: expected {expected}, found {found}")]
    Unexpected {
        col: usize,
        expected: &'static str,
        found: String,
    },
    #[error("syntax error at column {col}: unbalanced `)`")]
    UnbalancedParen { col: usize },
    #[error("unknown proposition `{name}` at column {col}")]
    UnknownProp { col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    FOp,
    GOp,
    UOp,
    Not,
    AndOp,
    OrOp,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::FOp => "`F`".into(),
            Tok::GOp => "`G`".into(),
            Tok::UOp => "`U`".into(),
            Tok::Not => "`!`".into(),
            Tok::AndOp => "`&`".into(),
            Tok::OrOp => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let col = i + 1;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                chars.next();
            }
            '(' => {
                chars.next();
                toks.push((col, Tok::LParen));
            }
            ')' => {
                chars.next();
                toks.push((col, Tok::RParen));
            }
            '!' => {
                chars.next();
                toks.push((col, Tok::Not));
            }
            '&' => {
                chars.next();
                toks.push((col, Tok::AndOp));
            }
            '|' => {
                chars.next();
                toks.push((col, Tok::OrOp));
            }
            'F' => {
                chars.next();
                toks.push((col, Tok::FOp));
            }
            'G' => {
                chars.next();
                toks.push((col, Tok::GOp));
            }
            'U' => {
                chars.next();
                toks.push((col, Tok::UOp));
            }
            'a'..='z' => {
                let mut name = String::new();
                while let Some(&(_, c2)) = chars.peek() {
                    if c2.is_ascii_lowercase() || c2.is_ascii_digit() || c2 == '_' {
                        name.push(c2);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((col, Tok::Ident(name)));
            }
            _ => return Err(ParseError::BadChar { col, ch: c }),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    reg: &'a PropRegistry,
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some((col, t)) => ParseError::Unexpected {
                col: *col,
                expected,
                found: t.describe(),
            },
            None => ParseError::Unexpected {
                col: self.end_col,
                expected,
                found: "end of input".into(),
            },
        }
    }

    // or := and ('|' and)*
    fn parse_or(&mut self) -> Result<LtlFormula, ParseError> {
        let first = self.parse_and()?;
        let mut xs = vec![first];
        while matches!(self.peek(), Some((_, Tok::OrOp))) {
            self.next();
            xs.push(self.parse_and()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { LtlFormula::Or(xs) })
    }

    // and := until ('&' until)*
    fn parse_and(&mut self) -> Result<LtlFormula, ParseError> {
        let first = self.parse_until()?;
        let mut xs = vec![first];
        while matches!(self.peek(), Some((_, Tok::AndOp))) {
            self.next();
            xs.push(self.parse_until()?);
        }
        Ok(if xs.len() == 1 { xs.pop().unwrap() } else { LtlFormula::And(xs) })
    }

    // until := unary ('U' until)?   (right-associative)
    fn parse_until(&mut self) -> Result<LtlFormula, ParseError> {
        let lhs = self.parse_unary()?;
        if matches!(self.peek(), Some((_, Tok::UOp))) {
            self.next();
            let rhs = self.parse_until()?;
            Ok(lhs.until(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_unary(&mut self) -> Result<LtlFormula, ParseError> {
        match self.peek() {
            Some((_, Tok::Not)) => {
                self.next();
                Ok(self.parse_unary()?.not())
            }
            Some((_, Tok::FOp)) => {
                self.next();
                Ok(self.parse_unary()?.finally())
            }
            Some((_, Tok::GOp)) => {
                self.next();
                Ok(self.parse_unary()?.globally())
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<LtlFormula, ParseError> {
        match self.peek().cloned() {
            Some((col, Tok::Ident(name))) => {
                self.next();
                match self.reg.lookup(&name) {
                    Some(id) => Ok(LtlFormula::Atom(id)),
                    None => Err(ParseError::UnknownProp { col, name }),
                }
            }
            Some((_, Tok::LParen)) => {
                self.next();
                let inner = self.parse_or()?;
                match self.next() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((col, t)) => Err(ParseError::Unexpected {
                        col,
                        expected: "`)`",
                        found: t.describe(),
                    }),
                    None => Err(ParseError::Unexpected {
                        col: self.end_col,
                        expected: "`)`",
                        found: "end of input".into(),
                    }),
                }
            }
            _ => Err(self.err_here("a proposition, `(`, `!`, `F`, or `G`")),
        }
    }
}

/// Parse a formula against a registry. Every atom must name a registered
/// proposition.
pub fn parse(text: &str, reg: &PropRegistry) -> Result<LtlFormula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        reg,
        end_col: text.chars().count() + 1,
    };
    let f = p.parse_or()?;
    match p.peek() {
        None => Ok(f),
        Some((col, Tok::RParen)) => Err(ParseError::UnbalancedParen { col: *col }),
        Some((col, t)) => Err(ParseError::Unexpected {
            col: *col,
            expected: "end of input",
            found: t.describe(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{PropId, PropRegistry};

    fn demo_registry() -> PropRegistry {
        let mut reg = PropRegistry::new();
        reg.register("landmark_1", 0).unwrap();
        reg.register("red_room", 1).unwrap();
        reg.register("blue_room", 1).unwrap();
        reg.register("floor_1", 2).unwrap();
        reg.register("floor_2", 2).unwrap();
        reg
    }

    fn atom(reg: &PropRegistry, name: &str) -> LtlFormula {
        LtlFormula::Atom(reg.lookup(name).unwrap())
    }

    #[test]
    fn parses_nested_visit_sequence() {
        let reg = demo_registry();
        let f = parse("F (landmark_1 & F (red_room & F blue_room))", &reg).unwrap();
        let expected = atom(&reg, "landmark_1")
            .and(atom(&reg, "red_room").and(atom(&reg, "blue_room").finally()).finally())
            .finally();
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_avoid_until() {
        let reg = demo_registry();
        let f = parse("! blue_room U landmark_1", &reg).unwrap();
        let expected = atom(&reg, "blue_room").not().until(atom(&reg, "landmark_1"));
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_disjunctive_goal() {
        let reg = demo_registry();
        let f = parse("F ((floor_2 | red_room) & F floor_1)", &reg).unwrap();
        let expected = atom(&reg, "floor_2")
            .or(atom(&reg, "red_room"))
            .and(atom(&reg, "floor_1").finally())
            .finally();
        assert_eq!(f, expected);
    }

    #[test]
    fn until_is_right_associative() {
        let reg = demo_registry();
        let f = parse("landmark_1 U red_room U blue_room", &reg).unwrap();
        let expected =
            atom(&reg, "landmark_1").until(atom(&reg, "red_room").until(atom(&reg, "blue_room")));
        assert_eq!(f, expected);
    }

    #[test]
    fn precedence_and_binds_tighter_than_or() {
        let reg = demo_registry();
        let f = parse("landmark_1 | red_room & blue_room", &reg).unwrap();
        let expected = atom(&reg, "landmark_1").or(atom(&reg, "red_room").and(atom(&reg, "blue_room")));
        assert_eq!(f, expected);
    }

    #[test]
    fn reports_syntax_error_position() {
        let reg = demo_registry();
        match parse("F (red_room &", &reg) {
            Err(ParseError::Unexpected { col, found, .. }) => {
                assert_eq!(col, 14);
                assert_eq!(found, "end of input");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_prop() {
        let reg = demo_registry();
        match parse("F green_room", &reg) {
            Err(ParseError::UnknownProp { name, col }) => {
                assert_eq!(name, "green_room");
                assert_eq!(col, 3);
            }
            other => panic!("expected unknown-prop error, got {other:?}"),
        }
    }

    #[test]
    fn constants_have_no_surface_syntax() {
        let reg = demo_registry();
        assert!(matches!(parse("true", &reg), Err(ParseError::UnknownProp { .. })));
    }

    #[test]
    fn roundtrip_examples() {
        let reg = demo_registry();
        for text in [
            "F (landmark_1 & F (red_room & F blue_room))",
            "! blue_room U landmark_1",
            "F ((floor_2 | red_room) & F floor_1)",
            "F landmark_1 & F red_room",
            "G ! blue_room",
            "landmark_1 U red_room U blue_room",
            "(landmark_1 U red_room) U blue_room",
        ] {
            let f = parse(text, &reg).unwrap();
            let printed = f.render(&reg);
            let reparsed = parse(&printed, &reg).unwrap();
            assert_eq!(f, reparsed, "roundtrip failed for `{text}` -> `{printed}`");
        }
    }

    // PropId ordering is what guard canonicalization sorts by.
    #[test]
    fn prop_ids_follow_registration_order() {
        let reg = demo_registry();
        assert_eq!(reg.lookup("landmark_1"), Some(PropId(0)));
        assert_eq!(reg.lookup("floor_2"), Some(PropId(4)));
    }
}
