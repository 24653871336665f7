//! Reference finite-trace semantics, by direct recursion over the formula.
//!
//! This evaluator is the independent oracle the automaton pipeline is
//! checked against; nothing in the translation or planning code calls it.
//! A trace is a finite sequence of letters (proposition sets). Position
//! `i >= trace.len()` means the empty remainder: atoms are false there,
//! `F`/`U` are false (no position exists), `G`/`R` hold vacuously.

use super::{LtlFormula, PropSet};

/// Does `trace` satisfy `f` at position `i`?
pub fn holds_at(f: &LtlFormula, trace: &[PropSet], i: usize) -> bool {
    match f {
        LtlFormula::True => true,
        LtlFormula::False => false,
        LtlFormula::Atom(p) => i < trace.len() && trace[i].contains(*p),
        LtlFormula::Not(x) => !holds_at(x, trace, i),
        LtlFormula::And(xs) => xs.iter().all(|x| holds_at(x, trace, i)),
        LtlFormula::Or(xs) => xs.iter().any(|x| holds_at(x, trace, i)),
        LtlFormula::Finally(x) => (i..trace.len()).any(|j| holds_at(x, trace, j)),
        LtlFormula::Globally(x) => (i..trace.len()).all(|j| holds_at(x, trace, j)),
        LtlFormula::Until(a, b) => (i..trace.len()).any(|j| {
            holds_at(b, trace, j) && (i..j).all(|k| holds_at(a, trace, k))
        }),
        // a R b: b holds up to and including the first position where a
        // holds; if a never holds, b holds for the whole remainder.
        LtlFormula::Release(a, b) => (i..trace.len()).all(|j| {
            holds_at(b, trace, j) || (i..j).any(|k| holds_at(a, trace, k))
        }),
    }
}

/// Does `trace` satisfy `f` (from its first position)?
pub fn holds(f: &LtlFormula, trace: &[PropSet]) -> bool {
    holds_at(f, trace, 0)
}
