//! Boolean edge guards over propositions, represented symbolically.
//!
//! A guard stands for a set of letters (subsets of the registry) without
//! enumerating the 2^|AP| alphabet. Guards built from minterm sets go
//! through a Quine-McCluskey pass so dumps stay readable and stable.

use std::collections::BTreeSet;

use crate::ltl::{PropId, PropRegistry, PropSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Guard {
    True,
    False,
    Atom(PropId),
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    pub fn eval(&self, labels: PropSet) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Atom(p) => labels.contains(*p),
            Guard::Not(g) => !g.eval(labels),
            Guard::And(gs) => gs.iter().all(|g| g.eval(labels)),
            Guard::Or(gs) => gs.iter().any(|g| g.eval(labels)),
        }
    }

    pub fn collect_props(&self, out: &mut Vec<PropId>) {
        match self {
            Guard::True | Guard::False => {}
            Guard::Atom(p) => out.push(*p),
            Guard::Not(g) => g.collect_props(out),
            Guard::And(gs) | Guard::Or(gs) => {
                for g in gs {
                    g.collect_props(out);
                }
            }
        }
    }

    /// Distinct propositions mentioned, sorted ascending.
    pub fn props(&self) -> Vec<PropId> {
        let mut v = Vec::new();
        self.collect_props(&mut v);
        v.sort();
        v.dedup();
        v
    }

    pub fn render(&self, reg: &PropRegistry) -> String {
        let mut s = String::new();
        self.render_prec(reg, 0, &mut s);
        s
    }

    // Precedence: | = 1, & = 2, ! and atoms = 3.
    fn prec(&self) -> u8 {
        match self {
            Guard::Or(_) => 1,
            Guard::And(_) => 2,
            _ => 3,
        }
    }

    fn render_prec(&self, reg: &PropRegistry, min: u8, out: &mut String) {
        let parens = self.prec() < min;
        if parens {
            out.push('(');
        }
        match self {
            Guard::True => out.push_str("true"),
            Guard::False => out.push_str("false"),
            Guard::Atom(p) => out.push_str(reg.name(*p)),
            Guard::Not(g) => {
                out.push('!');
                g.render_prec(reg, 3, out);
            }
            Guard::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" & ");
                    }
                    g.render_prec(reg, 3, out);
                }
            }
            Guard::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" | ");
                    }
                    g.render_prec(reg, 2, out);
                }
            }
        }
        if parens {
            out.push(')');
        }
    }
}

/// Iterate every truth assignment over `props` as a letter. Bit `i` of the
/// assignment index corresponds to `props[i]`.
pub fn assignments(props: &[PropId]) -> impl Iterator<Item = PropSet> + '_ {
    let n = props.len();
    (0u32..(1 << n)).map(move |m| minterm_letter(props, m))
}

pub fn minterm_letter(props: &[PropId], minterm: u32) -> PropSet {
    let mut letter = PropSet::EMPTY;
    for (i, p) in props.iter().enumerate() {
        if minterm & (1 << i) != 0 {
            letter.insert(*p);
        }
    }
    letter
}

/// An implicant: `bits` give literal polarities, `mask` marks dropped vars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Implicant {
    bits: u32,
    mask: u32,
}

impl Implicant {
    fn covers(&self, minterm: u32) -> bool {
        (minterm ^ self.bits) & !self.mask == 0
    }
}

/// Quine-McCluskey minimization: the result is true on every `onset`
/// minterm, false on every minterm outside `onset ∪ dont_care`, and
/// unconstrained on `dont_care`. Deterministic for fixed inputs.
pub fn minimize(props: &[PropId], onset: &BTreeSet<u32>, dont_care: &BTreeSet<u32>) -> Guard {
    assert!(props.len() <= 16, "guard minimization capped at 16 props");
    if onset.is_empty() {
        return Guard::False;
    }
    let full_mask: u32 = if props.is_empty() { 0 } else { (1u32 << props.len()) - 1 };

    // Grow prime implicants by repeated single-bit merging.
    let mut current: BTreeSet<Implicant> = onset
        .iter()
        .chain(dont_care.iter())
        .map(|&m| Implicant { bits: m, mask: 0 })
        .collect();
    let mut primes: BTreeSet<Implicant> = BTreeSet::new();
    while !current.is_empty() {
        let list: Vec<Implicant> = current.iter().copied().collect();
        let mut merged = vec![false; list.len()];
        let mut next: BTreeSet<Implicant> = BTreeSet::new();
        for i in 0..list.len() {
            for j in (i + 1)..list.len() {
                let (a, b) = (list[i], list[j]);
                if a.mask == b.mask {
                    let diff = a.bits ^ b.bits;
                    if diff.count_ones() == 1 {
                        next.insert(Implicant {
                            bits: a.bits & !diff,
                            mask: a.mask | diff,
                        });
                        merged[i] = true;
                        merged[j] = true;
                    }
                }
            }
        }
        for (i, imp) in list.iter().enumerate() {
            if !merged[i] {
                primes.insert(*imp);
            }
        }
        current = next;
    }

    // Cover the onset: essential primes first, then greedy by coverage.
    let prime_list: Vec<Implicant> = primes.iter().copied().collect();
    let mut uncovered: BTreeSet<u32> = onset.clone();
    let mut chosen: Vec<Implicant> = Vec::new();
    for &m in onset.iter() {
        let covering: Vec<usize> = prime_list
            .iter()
            .enumerate()
            .filter(|(_, p)| p.covers(m))
            .map(|(i, _)| i)
            .collect();
        if covering.len() == 1 {
            let p = prime_list[covering[0]];
            if !chosen.contains(&p) {
                chosen.push(p);
                uncovered.retain(|&x| !p.covers(x));
            }
        }
    }
    while !uncovered.is_empty() {
        let best = prime_list
            .iter()
            .filter(|p| !chosen.contains(*p))
            .max_by_key(|p| {
                let cover = uncovered.iter().filter(|&&m| p.covers(m)).count();
                // Prefer wider implicants, then a fixed structural order.
                (cover, p.mask.count_ones(), std::cmp::Reverse((p.bits, p.mask)))
            })
            .copied()
            .expect("onset minterms are always coverable by some prime");
        chosen.push(best);
        uncovered.retain(|&x| !best.covers(x));
    }
    chosen.sort();

    if chosen.iter().any(|p| p.mask == full_mask) {
        return Guard::True;
    }
    let mut terms: Vec<Guard> = Vec::new();
    for imp in chosen {
        let mut literals: Vec<Guard> = Vec::new();
        for (i, p) in props.iter().enumerate() {
            if imp.mask & (1 << i) == 0 {
                if imp.bits & (1 << i) != 0 {
                    literals.push(Guard::Atom(*p));
                } else {
                    literals.push(Guard::Not(Box::new(Guard::Atom(*p))));
                }
            }
        }
        terms.push(match literals.len() {
            0 => Guard::True,
            1 => literals.pop().unwrap(),
            _ => Guard::And(literals),
        });
    }
    match terms.len() {
        1 => terms.pop().unwrap(),
        _ => Guard::Or(terms),
    }
}
