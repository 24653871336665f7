//! Cross-module planner properties on random task batches: soundness of
//! returned plans, agreement of the baseline with a breadth-first-search
//! oracle, desk-scale completeness of the hierarchical method, hop
//! consumption along the chosen automaton path, and the plan verifier
//! against the reference trace semantics.

mod support;

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use apmdp::bench::sample_tasks;
use apmdp::ltl::semantics;
use apmdp::planner::{
    check_plan, run_method, solve_apmdp, solve_pmdp, trace_automaton_path, CheckResult, Method,
    Plan, PlanError,
};
use apmdp::solver::RewardParams;
use apmdp::world::{AbstractAction, AbstractState, Cell, Move, WorldModel};

use support::{load_world, product_bfs, tiny_world};

fn start_of(w: &WorldModel) -> Cell {
    w.default_start.unwrap()
}

#[test]
fn baseline_length_matches_bfs_oracle_on_tiny_world() {
    let w = tiny_world();
    let tasks = sample_tasks(&w, 50, 41, None);
    let params = RewardParams::default();
    for f in &tasks {
        let dba = apmdp::automaton::translate(f, w.registry()).unwrap();
        let pruned = apmdp::automaton::remove_contradictions(&dba, w.facts()).unwrap();
        let oracle = product_bfs(&w, &pruned, start_of(&w));
        match solve_pmdp(&w, f, start_of(&w), &params) {
            Ok(plan) => {
                assert_eq!(
                    Some(plan.actions.len()),
                    oracle,
                    "length mismatch for {}",
                    f.render(w.registry())
                );
            }
            Err(PlanError::Infeasible { .. }) => {
                assert_eq!(oracle, None, "verdict mismatch for {}", f.render(w.registry()));
            }
            Err(e) => panic!("unexpected error: {e}"),
        }
    }
}

#[test]
fn apmdp_complete_at_desk_scale() {
    let w = tiny_world();
    let tasks = sample_tasks(&w, 50, 43, None);
    let params = RewardParams::default();
    for f in &tasks {
        let dba = apmdp::automaton::translate(f, w.registry()).unwrap();
        let pruned = apmdp::automaton::remove_contradictions(&dba, w.facts()).unwrap();
        if product_bfs(&w, &pruned, start_of(&w)).is_some() {
            let plan = solve_apmdp(&w, f, start_of(&w), &params)
                .unwrap_or_else(|e| panic!("{} should be solvable: {e}", f.render(w.registry())));
            assert_eq!(check_plan(&w, f, &plan).unwrap(), CheckResult::Satisfied);
        }
    }
}

#[test]
fn plans_are_sound_and_hierarchy_never_beats_baseline_length() {
    let w = load_world("e1");
    let tasks = sample_tasks(&w, 100, 17, None);
    let params = RewardParams::default();
    for f in &tasks {
        let ap = run_method(&w, f, start_of(&w), &params, Method::ApMdp).unwrap();
        let p = run_method(&w, f, start_of(&w), &params, Method::PMdp).unwrap();
        for plan in [&ap.plan, &p.plan].into_iter().flatten() {
            plan.validate(&w).unwrap();
            assert_eq!(
                check_plan(&w, f, plan).unwrap(),
                CheckResult::Satisfied,
                "unsound plan for {}",
                f.render(w.registry())
            );
        }
        if let (Some(ap_plan), Some(p_plan)) = (&ap.plan, &p.plan) {
            assert!(
                ap_plan.actions.len() >= p_plan.actions.len(),
                "abstraction found a shorter plan than the optimal baseline for {}",
                f.render(w.registry())
            );
        }
    }
}

#[test]
fn hop_goals_fire_along_the_chosen_path() {
    let w = load_world("e1");
    let tasks = sample_tasks(&w, 50, 23, None);
    let params = RewardParams::default();
    for f in &tasks {
        if let Ok(plan) = solve_apmdp(&w, f, start_of(&w), &params) {
            let trace_path = trace_automaton_path(&w, f, &plan).unwrap();
            assert_eq!(
                trace_path,
                plan.path_states,
                "trace deviates from the chosen path for {}",
                f.render(w.registry())
            );
        }
    }
}

#[test]
fn verifier_agrees_with_reference_semantics_on_random_walks() {
    let w = load_world("e1");
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let formulas = sample_tasks(&w, 20, 29, None);
    let mut checked = 0;
    for f in &formulas {
        for _ in 0..10 {
            // Random legal walk from the start cell.
            let mut states = vec![start_of(&w)];
            let mut actions = Vec::new();
            let steps = rng.gen_range(0..12);
            for _ in 0..steps {
                let cur = *states.last().unwrap();
                let options = w.neighbors(AbstractState::Cell(cur));
                let (a, next) = options[rng.gen_range(0..options.len())];
                let AbstractAction::Move(m) = a else { unreachable!() };
                let AbstractState::Cell(nc) = next else { unreachable!() };
                actions.push(m);
                states.push(nc);
            }
            let plan = Plan {
                world_name: w.name.clone(),
                formula_text: f.render(w.registry()),
                method: Method::ApMdp,
                start: states[0],
                path_states: vec![],
                hops: vec![],
                actions: actions.clone(),
                states: states.clone(),
                backups: 0,
                translate_time: Duration::ZERO,
                plan_time: Duration::ZERO,
            };
            let labels: Vec<_> = states
                .iter()
                .map(|c| w.label(AbstractState::Cell(*c)))
                .collect();
            let expected = semantics::holds(f, &labels);
            let got = matches!(check_plan(&w, f, &plan).unwrap(), CheckResult::Satisfied);
            assert_eq!(
                got,
                expected,
                "verifier disagrees with semantics for {} on walk {:?}",
                f.render(w.registry()),
                actions.iter().map(Move::to_string).collect::<Vec<_>>()
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 200);
}

#[test]
fn room_to_adjacent_room_grounds_within_three_moves() {
    let w = load_world("e1");
    // Any lateral room hop in a 2x2-room world takes at most 3 moves from
    // any interior cell, staying inside the two rooms.
    let f = apmdp::ltl::parse("F red_room", w.registry()).unwrap();
    for start in [
        Cell { x: 2, y: 2, z: 0 },
        Cell { x: 3, y: 3, z: 0 },
        Cell { x: 2, y: 3, z: 0 },
    ] {
        let plan = solve_apmdp(&w, &f, start, &RewardParams::default()).unwrap();
        assert!(plan.actions.len() <= 3, "from {start}: {:?}", plan.actions);
        for c in &plan.states {
            let r = w.room_of(*c);
            assert!(r == 4 || r == 1, "grounding left the two-room region");
        }
    }
}
