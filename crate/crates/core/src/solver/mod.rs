//! Value iteration over one labeled MDP: an abstract subproblem with goal
//! and stay guards, or the flat product of the cell-level world with a
//! DBA.
//!
//! Rewards follow the goal/stay scheme: entering a goal-satisfying state
//! pays `gamma_goal`, entering a state that violates the stay guard
//! without satisfying the goal pays `gamma_stay`, every other transition
//! pays `gamma_step`. Goal and stay are evaluated on the labels of the
//! state being entered. Both kinds of terminal state are absorbing.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automaton::{Dba, Guard};
use crate::ltl::PropSet;
use crate::world::{AbstractAction, AbstractState, Cell, WorldModel};

#[derive(Debug, Clone, Copy)]
pub struct RewardParams {
    pub gamma_goal: f64,
    pub gamma_stay: f64,
    pub gamma_step: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            gamma_goal: 100.0,
            gamma_stay: -100.0,
            gamma_step: -1.0,
            discount: 0.95,
            epsilon: 1e-4,
            max_iters: 10_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("rewards must satisfy gamma_goal > 0 > gamma_step > gamma_stay")]
    BadRewards,
    #[error("discount must lie strictly between 0 and 1")]
    BadDiscount,
    #[error("epsilon must be positive")]
    BadEpsilon,
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.gamma_goal > 0.0 && 0.0 > self.gamma_step && self.gamma_step > self.gamma_stay) {
            return Err(ParamError::BadRewards);
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(ParamError::BadDiscount);
        }
        if !(self.epsilon > 0.0) {
            return Err(ParamError::BadEpsilon);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateClass {
    Normal,
    Goal,
    StayViolation,
}

/// A flat deterministic MDP with classified (absorbing) states.
#[derive(Debug, Clone)]
pub struct FlatMdp {
    pub states: Vec<AbstractState>,
    pub transitions: Vec<Vec<(AbstractAction, usize)>>,
    pub class: Vec<StateClass>,
    pub initial: usize,
}

impl FlatMdp {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }
}

/// Seal dead ends: a non-terminal state from which no goal state is
/// reachable becomes an absorbing failure state. With a positive goal
/// reward every goal route strictly beats wandering, so an optimal policy
/// never enters such states and sealing them leaves optimal values and
/// policies on the relevant region unchanged; it lets value iteration
/// converge in diameter-many sweeps instead of chasing the discount
/// geometric tail.
pub fn seal_dead_ends(mdp: &mut FlatMdp) {
    let n = mdp.n_states();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        if mdp.class[s] != StateClass::Normal {
            continue;
        }
        for &(_, t) in &mdp.transitions[s] {
            reverse[t].push(s);
        }
    }
    let mut reaches = vec![false; n];
    let mut queue: std::collections::VecDeque<usize> = (0..n)
        .filter(|&s| mdp.class[s] == StateClass::Goal)
        .collect();
    while let Some(t) = queue.pop_front() {
        for &s in &reverse[t] {
            if !reaches[s] {
                reaches[s] = true;
                queue.push_back(s);
            }
        }
    }
    for s in 0..n {
        if mdp.class[s] == StateClass::Normal && !reaches[s] {
            mdp.class[s] = StateClass::StayViolation;
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub values: Vec<f64>,
    /// Chosen transition slot per state; `None` for terminal states.
    pub policy: Vec<Option<usize>>,
    pub backups: u64,
    pub iterations: usize,
    pub converged: bool,
    pub solve_time: Duration,
}

/// Jacobi-style value iteration. Every state is visited once per sweep
/// and each visit counts as one backup; the sweep loop stops when the
/// sup-norm residual drops below epsilon. Argmax ties keep the first
/// transition in the fixed action order.
pub fn value_iteration(mdp: &FlatMdp, params: &RewardParams) -> SolveResult {
    let start = Instant::now();
    let n = mdp.n_states();
    let mut values = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    let mut backups: u64 = 0;
    let mut converged = false;
    let mut iterations = 0;

    let reward = |class: StateClass| -> f64 {
        match class {
            StateClass::Goal => params.gamma_goal,
            StateClass::StayViolation => params.gamma_stay,
            StateClass::Normal => params.gamma_step,
        }
    };

    while iterations < params.max_iters {
        iterations += 1;
        let mut residual = 0.0f64;
        for s in 0..n {
            backups += 1;
            if mdp.class[s] != StateClass::Normal {
                next[s] = 0.0;
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for &(_, t) in &mdp.transitions[s] {
                let cont = if mdp.class[t] == StateClass::Normal { values[t] } else { 0.0 };
                let v = reward(mdp.class[t]) + params.discount * cont;
                if v > best {
                    best = v;
                }
            }
            if best == f64::NEG_INFINITY {
                best = 0.0; // no available action
            }
            next[s] = best;
            let d = (next[s] - values[s]).abs();
            if d > residual {
                residual = d;
            }
        }
        std::mem::swap(&mut values, &mut next);
        if residual < params.epsilon {
            converged = true;
            break;
        }
    }

    let mut policy = vec![None; n];
    for s in 0..n {
        if mdp.class[s] != StateClass::Normal {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_slot = None;
        for (slot, &(_, t)) in mdp.transitions[s].iter().enumerate() {
            let cont = if mdp.class[t] == StateClass::Normal { values[t] } else { 0.0 };
            let v = reward(mdp.class[t]) + params.discount * cont;
            if v > best {
                best = v;
                best_slot = Some(slot);
            }
        }
        policy[s] = best_slot;
    }

    SolveResult {
        values,
        policy,
        backups,
        iterations,
        converged,
        solve_time: start.elapsed(),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("no plan from the start state: it violates the stay condition or cannot reach the goal")]
    StartViolatesStay,
    #[error("no plan: the policy does not reach a goal state")]
    NoPlan,
    #[error("plan diverged: the policy cycles without reaching the goal")]
    PlanDiverged,
}

/// Roll the greedy policy forward from the initial state to a terminal.
pub fn extract_plan(
    mdp: &FlatMdp,
    result: &SolveResult,
) -> Result<(Vec<AbstractState>, Vec<AbstractAction>), ExtractError> {
    let mut s = mdp.initial;
    match mdp.class[s] {
        StateClass::Goal => return Ok((vec![mdp.states[s]], Vec::new())),
        StateClass::StayViolation => return Err(ExtractError::StartViolatesStay),
        StateClass::Normal => {}
    }
    let mut states = vec![mdp.states[s]];
    let mut actions = Vec::new();
    let mut visited = vec![false; mdp.n_states()];
    visited[s] = true;
    loop {
        let slot = result.policy[s].ok_or(ExtractError::NoPlan)?;
        let (action, t) = mdp.transitions[s][slot];
        states.push(mdp.states[t]);
        actions.push(action);
        match mdp.class[t] {
            StateClass::Goal => return Ok((states, actions)),
            StateClass::StayViolation => return Err(ExtractError::NoPlan),
            StateClass::Normal => {
                if visited[t] {
                    return Err(ExtractError::PlanDiverged);
                }
                visited[t] = true;
                s = t;
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum SubproblemError {
    #[error("guard mentions `{prop}` below the solve level {level}")]
    GuardBelowLevel { prop: String, level: u8 },
    #[error("no goal-satisfying state exists at level {level}")]
    InfeasibleSubproblem { level: u8 },
}

/// Evaluate a guard against a state's labels at a given level. Absence of
/// a proposition means falsity; the precondition is that every mentioned
/// proposition is at or above the evaluation level, which the subproblem
/// construction checks once per guard.
pub fn eval_guard(
    guard: &Guard,
    labels: PropSet,
    level: u8,
    world: &WorldModel,
) -> Result<bool, SubproblemError> {
    check_guard_level(guard, level, world)?;
    Ok(guard.eval(labels))
}

fn check_guard_level(guard: &Guard, level: u8, world: &WorldModel) -> Result<(), SubproblemError> {
    for p in guard.props() {
        if world.registry().level(p) < level {
            return Err(SubproblemError::GuardBelowLevel {
                prop: world.registry().name(p).to_string(),
                level,
            });
        }
    }
    Ok(())
}

/// Build one hop's abstract labeled MDP. `consume_initial` marks the one
/// hop whose initial letter has not yet been read by the automaton (the
/// first hop of a task): only then do goal and stay apply to the initial
/// state itself.
pub fn build_subproblem(
    world: &WorldModel,
    level: u8,
    goal: &Guard,
    stay: &Guard,
    start: Cell,
    consume_initial: bool,
) -> Result<FlatMdp, SubproblemError> {
    check_guard_level(goal, level, world)?;
    check_guard_level(stay, level, world)?;

    let states = world.states_at_level(level);
    let index: HashMap<AbstractState, usize> =
        states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut class = Vec::with_capacity(states.len());
    for s in &states {
        let labels = world.label(*s);
        let c = if goal.eval(labels) {
            StateClass::Goal
        } else if !stay.eval(labels) {
            StateClass::StayViolation
        } else {
            StateClass::Normal
        };
        class.push(c);
    }
    if !class.contains(&StateClass::Goal) {
        return Err(SubproblemError::InfeasibleSubproblem { level });
    }
    let initial = index[&world.project(start, level)];
    if !consume_initial {
        class[initial] = StateClass::Normal;
    }
    let transitions = states
        .iter()
        .map(|s| {
            world
                .neighbors(*s)
                .into_iter()
                .map(|(a, t)| (a, index[&t]))
                .collect()
        })
        .collect();
    let mut mdp = FlatMdp { states, transitions, class, initial };
    seal_dead_ends(&mut mdp);
    Ok(mdp)
}

/// The flat baseline: synchronous product of the cell-level world with a
/// pruned DBA. Product state (s, q) steps to (s', delta(q, L(s'))); the
/// initial automaton state already accounts for the start cell's label.
/// Entering an accepting automaton state pays `gamma_goal`; entering a
/// state from which no accepting state is reachable pays `gamma_stay`.
#[derive(Debug)]
pub struct ProductMdp {
    pub mdp: FlatMdp,
    pub automaton_state: Vec<usize>,
    n_auto: usize,
}

impl ProductMdp {
    pub fn build(world: &WorldModel, dba: &Dba, start: Cell) -> ProductMdp {
        let n_cells = world.n_cells();
        let n_auto = dba.n_states();
        let dead = dba.dead_states();

        // Transition table of the automaton per (cell, q): delta(q, L(cell)).
        let mut delta = vec![usize::MAX; n_cells * n_auto];
        for ci in 0..n_cells {
            let labels = world.label(AbstractState::Cell(world.cell_from_index(ci)));
            for q in 0..n_auto {
                if let Some(t) = dba.step(q, labels) {
                    delta[ci * n_auto + q] = t;
                }
            }
        }

        let mut states = Vec::with_capacity(n_cells * n_auto);
        let mut automaton_state = Vec::with_capacity(n_cells * n_auto);
        let mut class = Vec::with_capacity(n_cells * n_auto);
        for ci in 0..n_cells {
            let cell = world.cell_from_index(ci);
            for q in 0..n_auto {
                states.push(AbstractState::Cell(cell));
                automaton_state.push(q);
                class.push(if dba.is_accepting(q) {
                    StateClass::Goal
                } else if dead[q] {
                    StateClass::StayViolation
                } else {
                    StateClass::Normal
                });
            }
        }

        let mut transitions: Vec<Vec<(AbstractAction, usize)>> =
            vec![Vec::new(); n_cells * n_auto];
        for ci in 0..n_cells {
            let cell = world.cell_from_index(ci);
            let moves = world.neighbors(AbstractState::Cell(cell));
            for q in 0..n_auto {
                let idx = ci * n_auto + q;
                if class[idx] != StateClass::Normal {
                    continue;
                }
                for &(a, t) in &moves {
                    let tc = match t {
                        AbstractState::Cell(c) => world.cell_index(c),
                        _ => unreachable!(),
                    };
                    let q2 = delta[tc * n_auto + q];
                    if q2 == usize::MAX {
                        continue;
                    }
                    transitions[idx].push((a, tc * n_auto + q2));
                }
            }
        }

        let start_ci = world.cell_index(start);
        let q0 = delta[start_ci * n_auto + dba.initial()];
        let initial = start_ci * n_auto + if q0 == usize::MAX { dba.initial() } else { q0 };

        let mut mdp = FlatMdp { states, transitions, class, initial };
        seal_dead_ends(&mut mdp);
        ProductMdp { mdp, automaton_state, n_auto }
    }

    pub fn n_auto(&self) -> usize {
        self.n_auto
    }
}
