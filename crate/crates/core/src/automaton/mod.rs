//! LTL to deterministic Büchi automaton, via formula progression.
//!
//! States are progressed residual formulas, deduplicated after a fixed
//! simplification pass (flatten, sort, constant absorption, implication
//! subsumption). The guard between two states is the Boolean condition on
//! the current letter under which one residual progresses to the other;
//! grouping letters by residual makes the automaton deterministic and
//! complete by construction. A state accepts when its residual is already
//! satisfied by the empty remainder, so a finite run satisfies the input
//! formula exactly when it ends in an accepting state.

mod guard;

pub use guard::{assignments, minimize, minterm_letter, Guard};

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::ltl::{LtlFormula, PropRegistry, PropSet};
use crate::world::MutexFacts;

/// Cap on distinct propositions mentioned by one residual; guards are
/// processed by truth-table enumeration over the mentioned props.
pub const MAX_STATE_PROPS: usize = 16;
/// Cap on tableau states.
pub const MAX_STATES: usize = 4096;

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("unsupported fragment: a residual mentions {count} propositions (limit {MAX_STATE_PROPS}): {state}")]
    TooManyProps { state: String, count: usize },
    #[error("unsupported fragment: automaton exceeds {MAX_STATES} states")]
    TooManyStates,
}

#[derive(Debug, Error)]
pub enum PruneError {
    #[error("formula is unsatisfiable in this world: initial state has no feasible outgoing edge")]
    InitialStateEliminated,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub guard: Guard,
    pub target: usize,
}

/// Deterministic Büchi automaton with symbolic edge guards. State 0 is
/// initial. Over world-consistent letters exactly one guard per state
/// matches.
#[derive(Debug, Clone)]
pub struct Dba {
    state_formulas: Vec<LtlFormula>,
    accepting: Vec<bool>,
    edges: Vec<Vec<Edge>>,
}

impl Dba {
    pub fn n_states(&self) -> usize {
        self.state_formulas.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting_states(&self) -> Vec<usize> {
        (0..self.n_states()).filter(|&q| self.accepting[q]).collect()
    }

    pub fn state_formula(&self, q: usize) -> &LtlFormula {
        &self.state_formulas[q]
    }

    pub fn edges(&self, q: usize) -> &[Edge] {
        &self.edges[q]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(|e| e.len()).sum()
    }

    pub fn self_loop_guard(&self, q: usize) -> Option<&Guard> {
        self.edges[q].iter().find(|e| e.target == q).map(|e| &e.guard)
    }

    pub fn edge_guard(&self, from: usize, to: usize) -> Option<&Guard> {
        self.edges[from].iter().find(|e| e.target == to).map(|e| &e.guard)
    }

    /// Successor under a letter. `None` only on letters that match no
    /// guard, which cannot happen for world-consistent letters.
    pub fn step(&self, q: usize, letter: PropSet) -> Option<usize> {
        self.edges[q].iter().find(|e| e.guard.eval(letter)).map(|e| e.target)
    }

    /// States from which no accepting state is reachable.
    pub fn dead_states(&self) -> Vec<bool> {
        let n = self.n_states();
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (q, es) in self.edges.iter().enumerate() {
            for e in es {
                reverse[e.target].push(q);
            }
        }
        let mut alive = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| self.accepting[q]).collect();
        for &q in &queue {
            alive[q] = true;
        }
        while let Some(q) = queue.pop_front() {
            for &p in &reverse[q] {
                if !alive[p] {
                    alive[p] = true;
                    queue.push_back(p);
                }
            }
        }
        alive.iter().map(|a| !a).collect()
    }

    /// Run over a finite trace; returns the visited state sequence
    /// (length `trace.len() + 1`, starting at the initial state). A letter
    /// matching no guard drops into an implicit dead end, reported as
    /// `stuck_at`.
    pub fn run(&self, trace: &[PropSet]) -> Run {
        let mut states = vec![self.initial()];
        let mut q = self.initial();
        for (i, &letter) in trace.iter().enumerate() {
            match self.step(q, letter) {
                Some(next) => {
                    q = next;
                    states.push(q);
                }
                None => {
                    return Run { states, stuck_at: Some(i) };
                }
            }
        }
        Run { states, stuck_at: None }
    }

    /// Finite-run acceptance: the state reached after consuming the whole
    /// trace is accepting.
    pub fn accepts_trace(&self, trace: &[PropSet]) -> bool {
        let run = self.run(trace);
        run.stuck_at.is_none() && self.accepting[*run.states.last().unwrap()]
    }

    /// Determinism and completeness by truth-table enumeration per state.
    /// With `facts`, only world-consistent assignments are required to
    /// match exactly one guard; without, all assignments are.
    pub fn check_wellformed(&self, facts: Option<&MutexFacts>) -> Result<(), String> {
        for q in 0..self.n_states() {
            let mut props = Vec::new();
            for e in &self.edges[q] {
                props.extend(e.guard.props());
            }
            props.sort();
            props.dedup();
            if props.len() > MAX_STATE_PROPS {
                return Err(format!("state {q}: too many props to enumerate"));
            }
            for m in 0u32..(1 << props.len()) {
                if let Some(facts) = facts {
                    if !facts.consistent_assignment(&props, m) {
                        continue;
                    }
                }
                let letter = minterm_letter(&props, m);
                let hits = self.edges[q].iter().filter(|e| e.guard.eval(letter)).count();
                if hits != 1 {
                    return Err(format!(
                        "state {q}: {hits} guards match assignment {m:#b} over {props:?}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Minimal textual dump: states, initial, accepting, edges.
    pub fn to_text(&self, reg: &PropRegistry) -> String {
        let mut out = String::new();
        out.push_str(&format!("states {}\n", self.n_states()));
        out.push_str("initial 0\n");
        let acc: Vec<String> = self.accepting_states().iter().map(|q| q.to_string()).collect();
        out.push_str(&format!("accepting {}\n", acc.join(" ")));
        for q in 0..self.n_states() {
            for e in &self.edges[q] {
                out.push_str(&format!("edge {} {} {}\n", q, e.target, e.guard.render(reg)));
            }
        }
        out
    }

    pub fn to_dot(&self, reg: &PropRegistry) -> String {
        let mut out = String::new();
        out.push_str("digraph dba {\n  rankdir=LR;\n  init [shape=point];\n");
        for q in 0..self.n_states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            out.push_str(&format!("  q{q} [shape={shape},label=\"q{q}\"];\n"));
        }
        out.push_str("  init -> q0;\n");
        for q in 0..self.n_states() {
            for e in &self.edges[q] {
                out.push_str(&format!(
                    "  q{} -> q{} [label=\"{}\"];\n",
                    q,
                    e.target,
                    e.guard.render(reg)
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone)]
pub struct Run {
    pub states: Vec<usize>,
    pub stuck_at: Option<usize>,
}

/// One hop of an initial-to-accepting path: the guard that fires the
/// transition, and the self-loop guard that must hold until it fires.
#[derive(Debug, Clone)]
pub struct Hop {
    pub goal: Guard,
    pub stay: Guard,
}

/// A simple path from the initial state to an accepting state.
#[derive(Debug, Clone)]
pub struct AutomatonPath {
    pub states: Vec<usize>,
    pub hops: Vec<Hop>,
}

impl AutomatonPath {
    pub fn render(&self) -> String {
        self.states
            .iter()
            .map(|q| format!("q{q}"))
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

/// Satisfied by the empty remainder? This marks accepting states: a run
/// may stop exactly when nothing further is owed.
fn empty_sat(f: &LtlFormula) -> bool {
    match f {
        LtlFormula::True => true,
        LtlFormula::False => false,
        LtlFormula::Atom(_) => false,
        LtlFormula::Not(x) => !empty_sat(x),
        LtlFormula::And(xs) => xs.iter().all(empty_sat),
        LtlFormula::Or(xs) => xs.iter().any(empty_sat),
        LtlFormula::Finally(_) | LtlFormula::Until(_, _) => false,
        LtlFormula::Globally(_) | LtlFormula::Release(_, _) => true,
    }
}

/// Conservative syntactic implication over finite traces (including the
/// empty remainder). Used to drop subsumed operands of `And`/`Or` so that
/// progression residuals stay in a small canonical set.
fn implies(f: &LtlFormula, g: &LtlFormula) -> bool {
    use LtlFormula::*;
    if f == g || *f == False || *g == True {
        return true;
    }
    if let Or(xs) = f {
        return xs.iter().all(|x| implies(x, g));
    }
    if let And(ys) = g {
        return ys.iter().all(|y| implies(f, y));
    }
    if let And(xs) = f {
        if xs.iter().any(|x| implies(x, g)) {
            return true;
        }
    }
    if let Or(ys) = g {
        if ys.iter().any(|y| implies(f, y)) {
            return true;
        }
    }
    match (f, g) {
        (Finally(a), Finally(b)) => implies(a, b) || implies(a, g),
        (Globally(a), Globally(b)) => implies(a, b),
        (Until(a1, b1), Until(a2, b2)) => implies(a1, a2) && implies(b1, b2),
        (Until(_, b), Finally(c)) => implies(b, c) || implies(b, g),
        // f => F b when f forces b now and f cannot hold on the empty
        // remainder (F b never does).
        (_, Finally(b)) => !empty_sat(f) && implies(f, b),
        _ => false,
    }
}

/// The fixed simplification pass used to canonicalize residuals: flatten
/// nested And/Or, absorb constants, sort and deduplicate operands, and
/// drop operands subsumed under [`implies`]. Every rewrite preserves
/// finite-trace satisfaction, including on the empty remainder.
pub fn simplify(f: &LtlFormula) -> LtlFormula {
    use LtlFormula::*;
    match f {
        True | False | Atom(_) => f.clone(),
        Not(x) => {
            let sx = simplify(x);
            match sx {
                True => False,
                False => True,
                Not(inner) => *inner,
                other => Not(Box::new(other)),
            }
        }
        Finally(x) => {
            let sx = simplify(x);
            match sx {
                False => False,
                Finally(_) => sx,
                other => Finally(Box::new(other)),
            }
        }
        Globally(x) => {
            let sx = simplify(x);
            match sx {
                True => True,
                Globally(_) => sx,
                other => Globally(Box::new(other)),
            }
        }
        Until(a, b) => {
            let sa = simplify(a);
            let sb = simplify(b);
            if sb == False {
                False
            } else {
                Until(Box::new(sa), Box::new(sb))
            }
        }
        Release(a, b) => {
            let sa = simplify(a);
            let sb = simplify(b);
            if sb == True {
                True
            } else if sa == False || sb == False {
                // false R b == G b; a R false == G false
                Globally(Box::new(sb))
            } else {
                Release(Box::new(sa), Box::new(sb))
            }
        }
        And(xs) => {
            let mut flat = Vec::new();
            for x in xs {
                match simplify(x) {
                    True => {}
                    False => return False,
                    And(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            flat.sort();
            flat.dedup();
            let kept = drop_subsumed(flat, |weak, strong| implies(strong, weak));
            match kept.len() {
                0 => True,
                1 => kept.into_iter().next().unwrap(),
                _ => And(kept),
            }
        }
        Or(xs) => {
            let mut flat = Vec::new();
            for x in xs {
                match simplify(x) {
                    False => {}
                    True => return True,
                    Or(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            flat.sort();
            flat.dedup();
            let kept = drop_subsumed(flat, |weak, strong| implies(weak, strong));
            match kept.len() {
                0 => False,
                1 => kept.into_iter().next().unwrap(),
                _ => Or(kept),
            }
        }
    }
}

/// Remove element i when `redundant(x_i, x_j)` holds against a surviving
/// j. On mutual subsumption the first (smallest in sort order) survives.
fn drop_subsumed<F>(items: Vec<LtlFormula>, redundant: F) -> Vec<LtlFormula>
where
    F: Fn(&LtlFormula, &LtlFormula) -> bool,
{
    let n = items.len();
    let mut removed = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || removed[j] || removed[i] {
                continue;
            }
            if redundant(&items[i], &items[j]) && !(redundant(&items[j], &items[i]) && j > i) {
                removed[i] = true;
            }
        }
    }
    items
        .into_iter()
        .zip(removed)
        .filter(|(_, r)| !*r)
        .map(|(x, _)| x)
        .collect()
}

/// One-step progression: the obligation left after reading `letter`.
fn progress(f: &LtlFormula, letter: PropSet) -> LtlFormula {
    use LtlFormula::*;
    match f {
        True => True,
        False => False,
        Atom(p) => {
            if letter.contains(*p) {
                True
            } else {
                False
            }
        }
        Not(x) => match progress(x, letter) {
            True => False,
            False => True,
            other => Not(Box::new(other)),
        },
        And(xs) => And(xs.iter().map(|x| progress(x, letter)).collect()),
        Or(xs) => Or(xs.iter().map(|x| progress(x, letter)).collect()),
        Finally(x) => Or(vec![progress(x, letter), f.clone()]),
        Globally(x) => And(vec![progress(x, letter), f.clone()]),
        Until(a, b) => Or(vec![
            progress(b, letter),
            And(vec![progress(a, letter), f.clone()]),
        ]),
        Release(a, b) => And(vec![
            progress(b, letter),
            Or(vec![progress(a, letter), f.clone()]),
        ]),
    }
}

/// Compile a formula to a DBA. The input is normalized (NNF plus the
/// fixed simplification) first; the registry is only used for error
/// rendering.
pub fn translate(f: &LtlFormula, reg: &PropRegistry) -> Result<Dba, TranslateError> {
    let start = simplify(&f.to_nnf());
    let mut formulas = vec![start.clone()];
    let mut index: HashMap<LtlFormula, usize> = HashMap::new();
    index.insert(start, 0);
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);

    while let Some(q) = queue.pop_front() {
        let formula = formulas[q].clone();
        if formula == LtlFormula::True || formula == LtlFormula::False {
            edges[q] = vec![Edge { guard: Guard::True, target: q }];
            continue;
        }
        let props = formula.props();
        if props.len() > MAX_STATE_PROPS {
            return Err(TranslateError::TooManyProps {
                state: formula.render(reg),
                count: props.len(),
            });
        }
        // Group letters by the residual they progress to; discovery order
        // of residuals fixes state numbering.
        let mut groups: Vec<(LtlFormula, BTreeSet<u32>)> = Vec::new();
        for m in 0u32..(1 << props.len()) {
            let letter = minterm_letter(&props, m);
            let residual = simplify(&progress(&formula, letter));
            match groups.iter_mut().find(|(r, _)| *r == residual) {
                Some((_, set)) => {
                    set.insert(m);
                }
                None => {
                    groups.push((residual, [m].into_iter().collect()));
                }
            }
        }
        for (residual, minterms) in groups {
            let target = match index.get(&residual) {
                Some(&t) => t,
                None => {
                    let t = formulas.len();
                    if t >= MAX_STATES {
                        return Err(TranslateError::TooManyStates);
                    }
                    formulas.push(residual.clone());
                    index.insert(residual, t);
                    edges.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            let guard = minimize(&props, &minterms, &BTreeSet::new());
            edges[q].push(Edge { guard, target });
        }
        edges[q].sort_by_key(|e| e.target);
    }

    let accepting = formulas.iter().map(empty_sat).collect();
    let dba = Dba { state_formulas: formulas, accepting, edges };
    debug_assert!(dba.check_wellformed(None).is_ok());
    Ok(dba)
}

/// Conjoin every guard with the world facts by truth-table enumeration:
/// assignments inconsistent with the facts become don't-cares, guards
/// with no consistent satisfying assignment are dropped, and states left
/// unreachable from the initial state are removed.
pub fn remove_contradictions(dba: &Dba, facts: &MutexFacts) -> Result<Dba, PruneError> {
    let n = dba.n_states();
    let mut new_edges: Vec<Vec<Edge>> = vec![Vec::new(); n];
    for q in 0..n {
        for e in dba.edges(q) {
            let props = e.guard.props();
            let mut onset = BTreeSet::new();
            let mut dc = BTreeSet::new();
            for m in 0u32..(1 << props.len()) {
                if !facts.consistent_assignment(&props, m) {
                    dc.insert(m);
                } else if e.guard.eval(minterm_letter(&props, m)) {
                    onset.insert(m);
                }
            }
            if onset.is_empty() {
                continue;
            }
            new_edges[q].push(Edge {
                guard: minimize(&props, &onset, &dc),
                target: e.target,
            });
        }
    }
    if new_edges[0].is_empty() {
        return Err(PruneError::InitialStateEliminated);
    }

    // Drop states no longer reachable from the initial state.
    let mut reachable = vec![false; n];
    reachable[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        for e in &new_edges[q] {
            if !reachable[e.target] {
                reachable[e.target] = true;
                queue.push_back(e.target);
            }
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut formulas = Vec::new();
    let mut accepting = Vec::new();
    for q in 0..n {
        if reachable[q] {
            remap[q] = formulas.len();
            formulas.push(dba.state_formulas[q].clone());
            accepting.push(dba.accepting[q]);
        }
    }
    let mut edges = vec![Vec::new(); formulas.len()];
    for q in 0..n {
        if !reachable[q] {
            continue;
        }
        for e in &new_edges[q] {
            edges[remap[q]].push(Edge { guard: e.guard.clone(), target: remap[e.target] });
        }
        edges[remap[q]].sort_by_key(|e| e.target);
    }
    let pruned = Dba { state_formulas: formulas, accepting, edges };
    debug_assert!(pruned.check_wellformed(Some(facts)).is_ok());
    Ok(pruned)
}

/// All simple paths from the initial state to an accepting state, with
/// per-hop goal and stay guards. Paths do not continue past an accepting
/// state. Output is ordered shortest-first, then lexicographically on
/// state indices, so enumeration order is stable across runs.
pub fn find_paths(dba: &Dba) -> Vec<AutomatonPath> {
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![dba.initial()];
    let mut on_path = vec![false; dba.n_states()];
    on_path[dba.initial()] = true;
    dfs_paths(dba, &mut current, &mut on_path, &mut paths);
    paths.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    paths
        .into_iter()
        .map(|states| {
            let hops = states
                .windows(2)
                .map(|w| Hop {
                    goal: dba.edge_guard(w[0], w[1]).expect("path follows edges").clone(),
                    stay: dba.self_loop_guard(w[0]).cloned().unwrap_or(Guard::False),
                })
                .collect();
            AutomatonPath { states, hops }
        })
        .collect()
}

fn dfs_paths(
    dba: &Dba,
    current: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    let q = *current.last().unwrap();
    if dba.is_accepting(q) {
        out.push(current.clone());
        return;
    }
    for e in dba.edges(q) {
        if on_path[e.target] {
            continue;
        }
        current.push(e.target);
        on_path[e.target] = true;
        dfs_paths(dba, current, on_path, out);
        on_path[e.target] = false;
        current.pop();
    }
}
