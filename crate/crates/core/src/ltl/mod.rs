//! LTL formulas over a registry of leveled atomic propositions.
//!
//! Propositions carry an abstraction level (0 = landmark/cell, 1 = room,
//! 2 = floor). Formulas are ordinary ASTs; `Release` only ever appears as
//! an artifact of negation normal form and is not part of the user syntax.

mod parser;
pub mod semantics;

pub use parser::{parse, ParseError};

use std::collections::HashMap;

use thiserror::Error;

/// Index of a proposition in its [`PropRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropId(pub u32);

/// A named atomic proposition with its abstraction level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop {
    pub name: String,
    pub level: u8,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("duplicate proposition name `{0}`")]
    Duplicate(String),
    #[error("registry holds at most 64 propositions")]
    TooMany,
}

/// Ordered collection of propositions; levels partition the registry.
#[derive(Debug, Clone, Default)]
pub struct PropRegistry {
    props: Vec<Prop>,
    by_name: HashMap<String, PropId>,
}

impl PropRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, level: u8) -> Result<PropId, RegistryError> {
        if self.by_name.contains_key(name) {
            return Err(RegistryError::Duplicate(name.to_string()));
        }
        if self.props.len() >= 64 {
            return Err(RegistryError::TooMany);
        }
        let id = PropId(self.props.len() as u32);
        self.props.push(Prop { name: name.to_string(), level });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<PropId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: PropId) -> &str {
        &self.props[id.0 as usize].name
    }

    pub fn level(&self, id: PropId) -> u8 {
        self.props[id.0 as usize].level
    }

    pub fn len(&self) -> usize {
        self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }

    pub fn level_count(&self) -> u8 {
        self.props.iter().map(|p| p.level + 1).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PropId, &Prop)> {
        self.props.iter().enumerate().map(|(i, p)| (PropId(i as u32), p))
    }

    pub fn ids_at_level(&self, level: u8) -> Vec<PropId> {
        self.iter().filter(|(_, p)| p.level == level).map(|(id, _)| id).collect()
    }
}

/// A set of propositions, used both as trace letters and as state labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PropSet(pub u64);

impl PropSet {
    pub const EMPTY: PropSet = PropSet(0);

    pub fn singleton(id: PropId) -> Self {
        PropSet(1u64 << id.0)
    }

    pub fn insert(&mut self, id: PropId) {
        self.0 |= 1u64 << id.0;
    }

    pub fn contains(&self, id: PropId) -> bool {
        self.0 & (1u64 << id.0) != 0
    }

    pub fn union(&self, other: PropSet) -> PropSet {
        PropSet(self.0 | other.0)
    }

    pub fn is_subset_of(&self, other: PropSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = PropId> + '_ {
        (0..64).filter(|i| self.0 & (1u64 << i) != 0).map(PropId)
    }

    pub fn render(&self, reg: &PropRegistry) -> String {
        let names: Vec<&str> = self.iter().map(|id| reg.name(id)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

impl FromIterator<PropId> for PropSet {
    fn from_iter<I: IntoIterator<Item = PropId>>(iter: I) -> Self {
        let mut s = PropSet::EMPTY;
        for id in iter {
            s.insert(id);
        }
        s
    }
}

/// LTL abstract syntax tree. `And`/`Or` are n-ary (always two or more
/// children); `True`/`False` and `Release` are internal-only node kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlFormula {
    True,
    False,
    Atom(PropId),
    Not(Box<LtlFormula>),
    And(Vec<LtlFormula>),
    Or(Vec<LtlFormula>),
    Finally(Box<LtlFormula>),
    Globally(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Release(Box<LtlFormula>, Box<LtlFormula>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LevelError {
    #[error("formula contains no atomic propositions")]
    NoAtoms,
}

impl LtlFormula {
    pub fn atom(id: PropId) -> Self {
        LtlFormula::Atom(id)
    }

    pub fn not(self) -> Self {
        LtlFormula::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        LtlFormula::And(vec![self, other])
    }

    pub fn or(self, other: Self) -> Self {
        LtlFormula::Or(vec![self, other])
    }

    pub fn finally(self) -> Self {
        LtlFormula::Finally(Box::new(self))
    }

    pub fn globally(self) -> Self {
        LtlFormula::Globally(Box::new(self))
    }

    pub fn until(self, other: Self) -> Self {
        LtlFormula::Until(Box::new(self), Box::new(other))
    }

    pub fn release(self, other: Self) -> Self {
        LtlFormula::Release(Box::new(self), Box::new(other))
    }

    /// Negation normal form: negation pushed onto atoms via De Morgan and
    /// the temporal dualities (¬F φ ≡ G ¬φ, ¬G φ ≡ F ¬φ, ¬(φ U ψ) ≡ ¬φ R ¬ψ).
    pub fn to_nnf(&self) -> LtlFormula {
        match self {
            LtlFormula::True | LtlFormula::False | LtlFormula::Atom(_) => self.clone(),
            LtlFormula::Not(inner) => inner.negate_nnf(),
            LtlFormula::And(xs) => LtlFormula::And(xs.iter().map(|x| x.to_nnf()).collect()),
            LtlFormula::Or(xs) => LtlFormula::Or(xs.iter().map(|x| x.to_nnf()).collect()),
            LtlFormula::Finally(x) => x.to_nnf().finally(),
            LtlFormula::Globally(x) => x.to_nnf().globally(),
            LtlFormula::Until(a, b) => a.to_nnf().until(b.to_nnf()),
            LtlFormula::Release(a, b) => a.to_nnf().release(b.to_nnf()),
        }
    }

    fn negate_nnf(&self) -> LtlFormula {
        match self {
            LtlFormula::True => LtlFormula::False,
            LtlFormula::False => LtlFormula::True,
            LtlFormula::Atom(_) => self.clone().not(),
            LtlFormula::Not(inner) => inner.to_nnf(),
            LtlFormula::And(xs) => LtlFormula::Or(xs.iter().map(|x| x.negate_nnf()).collect()),
            LtlFormula::Or(xs) => LtlFormula::And(xs.iter().map(|x| x.negate_nnf()).collect()),
            LtlFormula::Finally(x) => x.negate_nnf().globally(),
            LtlFormula::Globally(x) => x.negate_nnf().finally(),
            LtlFormula::Until(a, b) => a.negate_nnf().release(b.negate_nnf()),
            LtlFormula::Release(a, b) => a.negate_nnf().until(b.negate_nnf()),
        }
    }

    pub fn collect_atoms(&self, out: &mut Vec<PropId>) {
        match self {
            LtlFormula::True | LtlFormula::False => {}
            LtlFormula::Atom(p) => out.push(*p),
            LtlFormula::Not(x) | LtlFormula::Finally(x) | LtlFormula::Globally(x) => {
                x.collect_atoms(out)
            }
            LtlFormula::And(xs) | LtlFormula::Or(xs) => {
                for x in xs {
                    x.collect_atoms(out);
                }
            }
            LtlFormula::Until(a, b) | LtlFormula::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Distinct propositions mentioned, sorted ascending.
    pub fn props(&self) -> Vec<PropId> {
        let mut v = Vec::new();
        self.collect_atoms(&mut v);
        v.sort();
        v.dedup();
        v
    }

    /// Minimum proposition level over all atoms.
    pub fn lowest_level(&self, reg: &PropRegistry) -> Result<u8, LevelError> {
        self.props()
            .iter()
            .map(|p| reg.level(*p))
            .min()
            .ok_or(LevelError::NoAtoms)
    }

    /// Render in the concrete syntax; parses back to the same AST.
    pub fn render(&self, reg: &PropRegistry) -> String {
        let mut s = String::new();
        self.render_prec(reg, 0, &mut s);
        s
    }

    // Precedence: | = 1, & = 2, U = 3, unary = 4, atoms = 5.
    fn prec(&self) -> u8 {
        match self {
            LtlFormula::Or(_) => 1,
            LtlFormula::And(_) => 2,
            LtlFormula::Until(_, _) | LtlFormula::Release(_, _) => 3,
            LtlFormula::Not(_) | LtlFormula::Finally(_) | LtlFormula::Globally(_) => 4,
            _ => 5,
        }
    }

    fn render_prec(&self, reg: &PropRegistry, min: u8, out: &mut String) {
        let p = self.prec();
        let parens = p < min;
        if parens {
            out.push('(');
        }
        match self {
            LtlFormula::True => out.push_str("true"),
            LtlFormula::False => out.push_str("false"),
            LtlFormula::Atom(id) => out.push_str(reg.name(*id)),
            LtlFormula::Not(x) => {
                out.push_str("! ");
                x.render_prec(reg, 4, out);
            }
            LtlFormula::Finally(x) => {
                out.push_str("F ");
                x.render_prec(reg, 4, out);
            }
            LtlFormula::Globally(x) => {
                out.push_str("G ");
                x.render_prec(reg, 4, out);
            }
            LtlFormula::Until(a, b) => {
                // Right-associative: the left operand needs parentheses
                // when it is itself a U/R node.
                a.render_prec(reg, 4, out);
                out.push_str(" U ");
                b.render_prec(reg, 3, out);
            }
            LtlFormula::Release(a, b) => {
                a.render_prec(reg, 4, out);
                out.push_str(" R ");
                b.render_prec(reg, 3, out);
            }
            LtlFormula::And(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" & ");
                    }
                    x.render_prec(reg, 3, out);
                }
            }
            LtlFormula::Or(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" | ");
                    }
                    x.render_prec(reg, 2, out);
                }
            }
        }
        if parens {
            out.push(')');
        }
    }
}
