//! End-to-end planners and the plan verifier.
//!
//! `solve_apmdp` runs the hierarchical method: translate the formula,
//! prune contradictions, enumerate initial-to-accepting automaton paths,
//! solve every hop of every path as an abstract subproblem at the lowest
//! level its guards mention, ground abstract segments to primitive moves,
//! and keep the candidate with the fewest primitive actions. `solve_pmdp`
//! is the flat baseline over the full product MDP. `check_plan` replays a
//! plan's label trace through the pruned automaton.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automaton::{self, AutomatonPath, Dba, Hop, PruneError, TranslateError};
use crate::ltl::LtlFormula;
use crate::solver::{
    build_subproblem, extract_plan, value_iteration, ExtractError, FlatMdp, ProductMdp,
    RewardParams, StateClass, SubproblemError,
};
use crate::world::{
    AbstractAction, AbstractState, Cell, Move, WorldModel, LEVEL_CELL, LEVEL_FLOOR, LEVEL_ROOM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ApMdp,
    PMdp,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "apmdp" => Some(Method::ApMdp),
            "pmdp" => Some(Method::PMdp),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::ApMdp => write!(f, "apmdp"),
            Method::PMdp => write!(f, "pmdp"),
        }
    }
}

/// One hop's contribution to a plan: the level it was solved at and how
/// many primitive actions its grounded segment added.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopSummary {
    pub level: u8,
    pub actions: usize,
}

/// A grounded plan: primitive actions with the full concrete state
/// sequence, the automaton path it follows, and work accounting.
#[derive(Debug, Clone)]
pub struct Plan {
    pub world_name: String,
    pub formula_text: String,
    pub method: Method,
    pub start: Cell,
    pub path_states: Vec<usize>,
    pub hops: Vec<HopSummary>,
    pub actions: Vec<Move>,
    pub states: Vec<Cell>,
    pub backups: u64,
    pub translate_time: Duration,
    pub plan_time: Duration,
}

impl Plan {
    pub fn total_time(&self) -> Duration {
        self.translate_time + self.plan_time
    }

    /// Consecutive states must differ by exactly one legal move and begin
    /// at the plan's start cell.
    pub fn validate(&self, world: &WorldModel) -> Result<(), String> {
        if self.states.len() != self.actions.len() + 1 {
            return Err("state sequence length must be actions + 1".into());
        }
        if self.states[0] != self.start {
            return Err("state sequence must begin at the start cell".into());
        }
        for (i, (pair, action)) in self.states.windows(2).zip(&self.actions).enumerate() {
            match world.apply_move(pair[0], *action) {
                Some(next) if next == pair[1] => {}
                _ => {
                    return Err(format!(
                        "step {i}: move {action} from {} does not reach {}",
                        pair[0], pair[1]
                    ))
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Satisfied,
    Violated { step: usize },
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("task infeasible: {}", reports.join("; "))]
    Infeasible { reports: Vec<String> },
    #[error("invalid reward parameters: {0}")]
    Params(#[from] crate::solver::ParamError),
    #[error("internal error: {0}")]
    Internal(String),
}

fn prune_for(world: &WorldModel, f: &LtlFormula) -> Result<Dba, PlanError> {
    let dba = automaton::translate(f, world.registry())?;
    match automaton::remove_contradictions(&dba, world.facts()) {
        Ok(p) => Ok(p),
        Err(PruneError::InitialStateEliminated) => Err(PlanError::Infeasible {
            reports: vec!["formula unsatisfiable in this world".into()],
        }),
    }
}

fn run_check(dba: &Dba, world: &WorldModel, states: &[Cell]) -> CheckResult {
    let dead = dba.dead_states();
    let letters: Vec<_> = states
        .iter()
        .map(|c| world.label(AbstractState::Cell(*c)))
        .collect();
    let run = dba.run(&letters);
    if let Some(step) = run.stuck_at {
        return CheckResult::Violated { step };
    }
    for (i, q) in run.states.iter().enumerate().skip(1) {
        if dead[*q] {
            return CheckResult::Violated { step: i - 1 };
        }
    }
    if dba.is_accepting(*run.states.last().unwrap()) {
        CheckResult::Satisfied
    } else {
        CheckResult::Violated { step: states.len() - 1 }
    }
}

/// Replay the plan's level-0 label trace through the pruned automaton.
/// Satisfied when the run ends in an accepting state without falling into
/// a dead state on the way; otherwise reports the first offending step.
pub fn check_plan(
    world: &WorldModel,
    f: &LtlFormula,
    plan: &Plan,
) -> Result<CheckResult, PlanError> {
    let dba = prune_for(world, f)?;
    Ok(run_check(&dba, world, &plan.states))
}

#[derive(Debug)]
enum HopError {
    Subproblem(SubproblemError),
    Extract(ExtractError),
    Grounding(String),
    GuardViolatedDuringGrounding,
}

impl fmt::Display for HopError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HopError::Subproblem(e) => write!(f, "{e}"),
            HopError::Extract(e) => write!(f, "{e}"),
            HopError::Grounding(m) => write!(f, "grounding failed: {m}"),
            HopError::GuardViolatedDuringGrounding => {
                write!(f, "grounded trace violated a guard")
            }
        }
    }
}

fn hop_level(world: &WorldModel, hop: &Hop) -> u8 {
    let mut props = hop.goal.props();
    props.extend(hop.stay.props());
    props
        .iter()
        .map(|p| world.registry().level(*p))
        .min()
        .unwrap_or(LEVEL_FLOOR)
}

/// Reach-subgoal MDP over a restricted state set: any state satisfying
/// `is_goal` is absorbing, everything else is transit.
fn build_restricted(
    states: Vec<AbstractState>,
    world: &WorldModel,
    is_goal: impl Fn(AbstractState) -> bool,
    start: AbstractState,
) -> Result<FlatMdp, String> {
    let index: std::collections::HashMap<AbstractState, usize> =
        states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let initial = *index
        .get(&start)
        .ok_or_else(|| format!("start {start:?} outside the restricted region"))?;
    let class: Vec<StateClass> = states
        .iter()
        .map(|s| if is_goal(*s) { StateClass::Goal } else { StateClass::Normal })
        .collect();
    let transitions = states
        .iter()
        .map(|s| {
            world
                .neighbors(*s)
                .into_iter()
                .filter_map(|(a, t)| index.get(&t).map(|&ti| (a, ti)))
                .collect()
        })
        .collect();
    let mut mdp = FlatMdp { states, transitions, class, initial };
    crate::solver::seal_dead_ends(&mut mdp);
    Ok(mdp)
}

/// Ground an abstract plan at `level` down to primitive moves. Each
/// abstract transition a -> b becomes a reach-subgoal problem at the
/// level below, restricted to the states of a and b.
fn ground_segment(
    world: &WorldModel,
    level: u8,
    abstract_states: &[AbstractState],
    start: Cell,
    params: &RewardParams,
    backups: &mut u64,
) -> Result<(Vec<Cell>, Vec<Move>), HopError> {
    let mut cells = vec![start];
    let mut moves: Vec<Move> = Vec::new();
    let mut cur = start;
    for w in abstract_states.windows(2) {
        let (from, to) = (w[0], w[1]);
        match level {
            LEVEL_ROOM => {
                let (seg_cells, seg_moves) =
                    ground_room_hop(world, from, to, cur, params, backups)?;
                cells.extend(seg_cells.into_iter().skip(1));
                moves.extend(seg_moves);
                cur = *cells.last().unwrap();
            }
            LEVEL_FLOOR => {
                let (AbstractState::Floor(fa), AbstractState::Floor(fb)) = (from, to) else {
                    return Err(HopError::Grounding(
                        "floor segment over non-floor states".into(),
                    ));
                };
                let rooms: Vec<AbstractState> = world
                    .rooms()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.floor == fa || r.floor == fb)
                    .map(|(i, _)| AbstractState::Room(i))
                    .collect();
                let mdp = build_restricted(
                    rooms,
                    world,
                    |s| matches!(s, AbstractState::Room(r) if world.rooms()[r].floor == fb),
                    world.project(cur, LEVEL_ROOM),
                )
                .map_err(HopError::Grounding)?;
                let res = value_iteration(&mdp, params);
                *backups += res.backups;
                let (room_path, _) = extract_plan(&mdp, &res)
                    .map_err(|e| HopError::Grounding(format!("floor {fa}->{fb}: {e}")))?;
                let (seg_cells, seg_moves) =
                    ground_segment(world, LEVEL_ROOM, &room_path, cur, params, backups)?;
                cells.extend(seg_cells.into_iter().skip(1));
                moves.extend(seg_moves);
                cur = *cells.last().unwrap();
            }
            _ => return Err(HopError::Grounding("grounding below cell level".into())),
        }
    }
    Ok((cells, moves))
}

fn ground_room_hop(
    world: &WorldModel,
    from: AbstractState,
    to: AbstractState,
    cur: Cell,
    params: &RewardParams,
    backups: &mut u64,
) -> Result<(Vec<Cell>, Vec<Move>), HopError> {
    let (AbstractState::Room(ra), AbstractState::Room(rb)) = (from, to) else {
        return Err(HopError::Grounding("room segment over non-room states".into()));
    };
    let region: Vec<AbstractState> = (0..world.n_cells())
        .map(|i| world.cell_from_index(i))
        .filter(|c| world.room_of(*c) == ra || world.room_of(*c) == rb)
        .map(AbstractState::Cell)
        .collect();
    let mdp = build_restricted(
        region,
        world,
        |s| matches!(s, AbstractState::Cell(c) if world.room_of(c) == rb),
        AbstractState::Cell(cur),
    )
    .map_err(HopError::Grounding)?;
    let res = value_iteration(&mdp, params);
    *backups += res.backups;
    let (cell_states, actions) = extract_plan(&mdp, &res)
        .map_err(|e| HopError::Grounding(format!("room {ra}->{rb}: {e}")))?;
    let cells: Vec<Cell> = cell_states
        .into_iter()
        .map(|s| match s {
            AbstractState::Cell(c) => c,
            _ => unreachable!(),
        })
        .collect();
    let moves: Vec<Move> = actions
        .into_iter()
        .map(|a| match a {
            AbstractAction::Move(m) => m,
            _ => unreachable!(),
        })
        .collect();
    Ok((cells, moves))
}

/// Solve one hop from `start`, grounding to primitive moves, at the
/// lowest level the guards mention; re-solve one level lower if the
/// grounded trace violates a guard (a defensive fallback).
fn solve_hop(
    world: &WorldModel,
    hop: &Hop,
    hop_idx: usize,
    start: Cell,
    params: &RewardParams,
    backups: &mut u64,
) -> Result<(Vec<Cell>, Vec<Move>, u8), HopError> {
    let mut level = hop_level(world, hop);
    loop {
        match try_hop_at(world, hop, hop_idx, start, level, params, backups) {
            Ok((cells, moves)) => return Ok((cells, moves, level)),
            Err(HopError::GuardViolatedDuringGrounding) if level > LEVEL_CELL => {
                level -= 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn try_hop_at(
    world: &WorldModel,
    hop: &Hop,
    hop_idx: usize,
    start: Cell,
    level: u8,
    params: &RewardParams,
    backups: &mut u64,
) -> Result<(Vec<Cell>, Vec<Move>), HopError> {
    let consume_initial = hop_idx == 0;
    let mdp = build_subproblem(world, level, &hop.goal, &hop.stay, start, consume_initial)
        .map_err(HopError::Subproblem)?;
    let res = value_iteration(&mdp, params);
    *backups += res.backups;
    let (abstract_states, abstract_actions) =
        extract_plan(&mdp, &res).map_err(HopError::Extract)?;

    let (cells, moves) = if level == LEVEL_CELL {
        let cells = abstract_states
            .iter()
            .map(|s| match s {
                AbstractState::Cell(c) => *c,
                _ => unreachable!(),
            })
            .collect();
        let moves = abstract_actions
            .iter()
            .map(|a| match a {
                AbstractAction::Move(m) => *m,
                _ => unreachable!(),
            })
            .collect();
        (cells, moves)
    } else {
        ground_segment(world, level, &abstract_states, start, params, backups)?
    };

    // Re-check the grounded trace at level 0: intermediates satisfy the
    // stay guard, the final state fires the goal. The initial state's
    // letter belongs to the previous hop except on the first hop.
    let last = cells.len() - 1;
    for (i, c) in cells.iter().enumerate() {
        let labels = world.label(AbstractState::Cell(*c));
        let ok = if i == last {
            hop.goal.eval(labels)
        } else if i == 0 {
            !consume_initial || hop.stay.eval(labels)
        } else {
            hop.stay.eval(labels)
        };
        if !ok {
            return Err(HopError::GuardViolatedDuringGrounding);
        }
    }
    Ok((cells, moves))
}

struct PathAttempt {
    path_index: usize,
    cells: Vec<Cell>,
    moves: Vec<Move>,
    hops: Vec<HopSummary>,
}

fn attempt_path(
    world: &WorldModel,
    path: &AutomatonPath,
    path_index: usize,
    start: Cell,
    params: &RewardParams,
    backups: &mut u64,
) -> Result<PathAttempt, (usize, HopError)> {
    let mut cells = vec![start];
    let mut moves = Vec::new();
    let mut hops = Vec::new();
    let mut cur = start;
    for (j, hop) in path.hops.iter().enumerate() {
        let (seg_cells, seg_moves, level) =
            solve_hop(world, hop, j, cur, params, backups).map_err(|e| (j, e))?;
        hops.push(HopSummary { level, actions: seg_moves.len() });
        cells.extend(seg_cells.into_iter().skip(1));
        moves.extend(seg_moves);
        cur = *cells.last().unwrap();
    }
    Ok(PathAttempt { path_index, cells, moves, hops })
}

/// Outcome of running one method on one task. `plan` is `None` when the
/// task is infeasible for the method; `backups` always reflects the work
/// performed, including failed path attempts.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub plan: Option<Plan>,
    pub reports: Vec<String>,
    pub backups: u64,
    pub translate_time: Duration,
    pub plan_time: Duration,
}

/// Run either method; infeasibility is an `Ok` outcome with no plan.
pub fn run_method(
    world: &WorldModel,
    f: &LtlFormula,
    start: Cell,
    params: &RewardParams,
    method: Method,
) -> Result<MethodRun, PlanError> {
    match method {
        Method::ApMdp => run_apmdp(world, f, start, params),
        Method::PMdp => run_pmdp(world, f, start, params),
    }
}

/// The hierarchical method. Returns the shortest grounded plan across all
/// automaton paths.
pub fn solve_apmdp(
    world: &WorldModel,
    f: &LtlFormula,
    start: Cell,
    params: &RewardParams,
) -> Result<Plan, PlanError> {
    solve_apmdp_with_reports(world, f, start, params).map(|(plan, _)| plan)
}

/// Like [`solve_apmdp`], also returning one outcome line per automaton
/// path (used by the CLI to explain which paths failed and why).
pub fn solve_apmdp_with_reports(
    world: &WorldModel,
    f: &LtlFormula,
    start: Cell,
    params: &RewardParams,
) -> Result<(Plan, Vec<String>), PlanError> {
    let run = run_apmdp(world, f, start, params)?;
    match run.plan {
        Some(plan) => Ok((plan, run.reports)),
        None => Err(PlanError::Infeasible { reports: run.reports }),
    }
}

fn run_apmdp(
    world: &WorldModel,
    f: &LtlFormula,
    start: Cell,
    params: &RewardParams,
) -> Result<MethodRun, PlanError> {
    params.validate()?;
    let t0 = Instant::now();
    let pruned = match prune_for(world, f) {
        Ok(d) => d,
        Err(PlanError::Infeasible { reports }) => {
            return Ok(MethodRun {
                method: Method::ApMdp,
                plan: None,
                reports,
                backups: 0,
                translate_time: t0.elapsed(),
                plan_time: Duration::ZERO,
            })
        }
        Err(e) => return Err(e),
    };
    let paths = automaton::find_paths(&pruned);
    let translate_time = t0.elapsed();

    let t1 = Instant::now();
    if paths.is_empty() {
        return Ok(MethodRun {
            method: Method::ApMdp,
            plan: None,
            reports: vec!["no accepting state reachable after contradiction pruning".into()],
            backups: 0,
            translate_time,
            plan_time: t1.elapsed(),
        });
    }
    let mut backups: u64 = 0;
    let mut best: Option<PathAttempt> = None;
    let mut reports = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        match attempt_path(world, path, i, start, params, &mut backups) {
            Ok(attempt) => {
                reports.push(format!(
                    "path {}: plan with {} actions",
                    path.render(),
                    attempt.moves.len()
                ));
                let better = match &best {
                    None => true,
                    Some(b) => attempt.moves.len() < b.moves.len(),
                };
                if better {
                    best = Some(attempt);
                }
            }
            Err((hop, e)) => {
                reports.push(format!("path {}: hop {hop} failed: {e}", path.render()));
            }
        }
    }
    let plan_time = t1.elapsed();
    let Some(chosen) = best else {
        return Ok(MethodRun {
            method: Method::ApMdp,
            plan: None,
            reports,
            backups,
            translate_time,
            plan_time,
        });
    };

    let plan = Plan {
        world_name: world.name.clone(),
        formula_text: f.render(world.registry()),
        method: Method::ApMdp,
        start,
        path_states: paths[chosen.path_index].states.clone(),
        hops: chosen.hops,
        actions: chosen.moves,
        states: chosen.cells,
        backups,
        translate_time,
        plan_time,
    };
    match run_check(&pruned, world, &plan.states) {
        CheckResult::Satisfied => Ok(MethodRun {
            method: Method::ApMdp,
            plan: Some(plan),
            reports,
            backups,
            translate_time,
            plan_time,
        }),
        CheckResult::Violated { step } => Err(PlanError::Internal(format!(
            "plan fails its own specification at step {step}"
        ))),
    }
}

/// The flat baseline: value-iterate the full product MDP at cell level.
pub fn solve_pmdp(
    world: &WorldModel,
    f: &LtlFormula,
    start: Cell,
    params: &RewardParams,
) -> Result<Plan, PlanError> {
    let run = run_pmdp(world, f, start, params)?;
    run.plan.ok_or(PlanError::Infeasible { reports: run.reports })
}

fn run_pmdp(
    world: &WorldModel,
    f: &LtlFormula,
    start: Cell,
    params: &RewardParams,
) -> Result<MethodRun, PlanError> {
    params.validate()?;
    let t0 = Instant::now();
    let pruned = match prune_for(world, f) {
        Ok(d) => d,
        Err(PlanError::Infeasible { reports }) => {
            return Ok(MethodRun {
                method: Method::PMdp,
                plan: None,
                reports,
                backups: 0,
                translate_time: t0.elapsed(),
                plan_time: Duration::ZERO,
            })
        }
        Err(e) => return Err(e),
    };
    let translate_time = t0.elapsed();

    let t1 = Instant::now();
    let product = ProductMdp::build(world, &pruned, start);
    let res = value_iteration(&product.mdp, params);
    let backups = res.backups;
    let extracted = extract_plan(&product.mdp, &res);
    let plan_time = t1.elapsed();
    let (prod_states, actions) = match extracted {
        Ok(x) => x,
        Err(e) => {
            return Ok(MethodRun {
                method: Method::PMdp,
                plan: None,
                reports: vec![format!("product MDP: {e}")],
                backups,
                translate_time,
                plan_time,
            })
        }
    };
    let cells: Vec<Cell> = prod_states
        .iter()
        .map(|s| match s {
            AbstractState::Cell(c) => *c,
            _ => unreachable!(),
        })
        .collect();
    let moves: Vec<Move> = actions
        .iter()
        .map(|a| match a {
            AbstractAction::Move(m) => *m,
            _ => unreachable!(),
        })
        .collect();

    // Automaton path actually taken, for reporting.
    let letters: Vec<_> = cells
        .iter()
        .map(|c| world.label(AbstractState::Cell(*c)))
        .collect();
    let run = pruned.run(&letters);
    let mut path_states = Vec::new();
    for q in run.states {
        if path_states.last() != Some(&q) {
            path_states.push(q);
        }
    }

    let n_actions = moves.len();
    let plan = Plan {
        world_name: world.name.clone(),
        formula_text: f.render(world.registry()),
        method: Method::PMdp,
        start,
        path_states,
        hops: vec![HopSummary { level: LEVEL_CELL, actions: n_actions }],
        actions: moves,
        states: cells,
        backups,
        translate_time,
        plan_time,
    };
    match run_check(&pruned, world, &plan.states) {
        CheckResult::Satisfied => Ok(MethodRun {
            method: Method::PMdp,
            plan: Some(plan),
            reports: Vec::new(),
            backups,
            translate_time,
            plan_time,
        }),
        CheckResult::Violated { step } => Err(PlanError::Internal(format!(
            "baseline plan fails its own specification at step {step}"
        ))),
    }
}

/// Automaton state sequence a plan's trace takes through the pruned
/// automaton, collapsed to distinct consecutive states.
pub fn trace_automaton_path(
    world: &WorldModel,
    f: &LtlFormula,
    plan: &Plan,
) -> Result<Vec<usize>, PlanError> {
    let dba = prune_for(world, f)?;
    let letters: Vec<_> = plan
        .states
        .iter()
        .map(|c| world.label(AbstractState::Cell(*c)))
        .collect();
    let run = dba.run(&letters);
    let mut out = Vec::new();
    for q in run.states {
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum PlanFileError {
    #[error("plan file line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("plan file missing `{0}` field")]
    Missing(&'static str),
}

/// Serialize a plan in the line-oriented plan file format.
pub fn write_plan(plan: &Plan) -> String {
    let mut out = String::new();
    out.push_str(&format!("world {}\n", plan.world_name));
    out.push_str(&format!("method {}\n", plan.method));
    out.push_str(&format!("formula {}\n", plan.formula_text));
    out.push_str(&format!("start {} {} {}\n", plan.start.x, plan.start.y, plan.start.z));
    let path: Vec<String> = plan.path_states.iter().map(|q| q.to_string()).collect();
    out.push_str(&format!("path {}\n", path.join(" ")));
    for (i, h) in plan.hops.iter().enumerate() {
        out.push_str(&format!("hop {} level {} actions {}\n", i, h.level, h.actions));
    }
    let actions: Vec<String> = plan.actions.iter().map(|a| a.to_string()).collect();
    out.push_str(&format!("actions {}\n", actions.join(" ")));
    let states: Vec<String> = plan.states.iter().map(|c| c.to_string()).collect();
    out.push_str(&format!("states {}\n", states.join(" ")));
    out.push_str(&format!("backups {}\n", plan.backups));
    out.push_str(&format!("translate_us {}\n", plan.translate_time.as_micros()));
    out.push_str(&format!("plan_us {}\n", plan.plan_time.as_micros()));
    out
}

/// Parse a plan file written by [`write_plan`].
pub fn parse_plan(text: &str) -> Result<Plan, PlanFileError> {
    let mut world_name = None;
    let mut method = None;
    let mut formula = None;
    let mut start = None;
    let mut path_states = Vec::new();
    let mut hops = Vec::new();
    let mut actions: Option<Vec<Move>> = None;
    let mut states: Option<Vec<Cell>> = None;
    let mut backups = 0u64;
    let mut translate_us = 0u64;
    let mut plan_us = 0u64;

    let bad = |line: usize, msg: &str| PlanFileError::Malformed { line, msg: msg.into() };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content.split_once(' ').unwrap_or((content, ""));
        let rest = rest.trim();
        match key {
            "world" => world_name = Some(rest.to_string()),
            "method" => {
                method = Some(Method::parse(rest).ok_or_else(|| bad(line, "unknown method"))?)
            }
            "formula" => formula = Some(rest.to_string()),
            "start" => {
                let nums: Vec<usize> = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| bad(line, "bad start coordinate")))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 3 {
                    return Err(bad(line, "start takes X Y Z"));
                }
                start = Some(Cell { x: nums[0], y: nums[1], z: nums[2] });
            }
            "path" => {
                path_states = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| bad(line, "bad path state")))
                    .collect::<Result<_, _>>()?;
            }
            "hop" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 5 || toks[1] != "level" || toks[3] != "actions" {
                    return Err(bad(line, "hop takes I level L actions N"));
                }
                hops.push(HopSummary {
                    level: toks[2].parse().map_err(|_| bad(line, "bad hop level"))?,
                    actions: toks[4].parse().map_err(|_| bad(line, "bad hop actions"))?,
                });
            }
            "actions" => {
                actions = Some(
                    rest.split_whitespace()
                        .map(|t| Move::parse(t).ok_or_else(|| bad(line, "unknown action")))
                        .collect::<Result<_, _>>()?,
                );
            }
            "states" => {
                states = Some(
                    rest.split_whitespace()
                        .map(|t| {
                            let nums: Vec<usize> = t
                                .split(',')
                                .map(|n| n.parse().map_err(|_| bad(line, "bad state cell")))
                                .collect::<Result<_, _>>()?;
                            if nums.len() != 3 {
                                return Err(bad(line, "state cells are X,Y,Z"));
                            }
                            Ok(Cell { x: nums[0], y: nums[1], z: nums[2] })
                        })
                        .collect::<Result<_, _>>()?,
                );
            }
            "backups" => backups = rest.parse().map_err(|_| bad(line, "bad backups"))?,
            "translate_us" => {
                translate_us = rest.parse().map_err(|_| bad(line, "bad translate_us"))?
            }
            "plan_us" => plan_us = rest.parse().map_err(|_| bad(line, "bad plan_us"))?,
            _ => return Err(bad(line, "unknown plan field")),
        }
    }

    Ok(Plan {
        world_name: world_name.ok_or(PlanFileError::Missing("world"))?,
        formula_text: formula.ok_or(PlanFileError::Missing("formula"))?,
        method: method.ok_or(PlanFileError::Missing("method"))?,
        start: start.ok_or(PlanFileError::Missing("start"))?,
        path_states,
        hops,
        actions: actions.ok_or(PlanFileError::Missing("actions"))?,
        states: states.ok_or(PlanFileError::Missing("states"))?,
        backups,
        translate_time: Duration::from_micros(translate_us),
        plan_time: Duration::from_micros(plan_us),
    })
}
