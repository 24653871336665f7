//! Shared helpers for integration tests: world loading, the 4x4x2 test
//! world, and an independent breadth-first-search oracle over the product
//! graph (used to check the value-iteration baseline).

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use apmdp::automaton::Dba;
use apmdp::world::{AbstractAction, AbstractState, Cell, WorldModel};

pub const TINY_WORLD: &str = "
# 4x4x2 test world
dims 4 4 2
floors 2
shaft 0 1 0 1
start 2 2 0
room r0 floor 1 box 0 1 0 1 color yellow
room r1 floor 1 box 2 3 0 1 color red
room r2 floor 1 box 0 1 2 3 color blue
room r3 floor 1 box 2 3 2 3
room r4 floor 2 box 0 1 0 1
room r5 floor 2 box 2 3 0 1
room r6 floor 2 box 0 1 2 3
room r7 floor 2 box 2 3 2 3 color green
landmark landmark_1 3 0 0
landmark landmark_2 1 3 1
";

pub fn tiny_world() -> WorldModel {
    WorldModel::parse(TINY_WORLD, "tiny", "tiny.world").unwrap()
}

pub fn load_world(name: &str) -> WorldModel {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../worlds/{name}.world"));
    WorldModel::load(&path).unwrap()
}

/// Shortest accepting path length (in moves) through the product of the
/// world and a pruned automaton, by plain breadth-first search. `None`
/// when no accepting product state is reachable.
pub fn product_bfs(world: &WorldModel, dba: &Dba, start: Cell) -> Option<usize> {
    let label = |c: Cell| world.label(AbstractState::Cell(c));
    let dead = dba.dead_states();
    let q0 = dba.step(dba.initial(), label(start))?;
    if dba.is_accepting(q0) {
        return Some(0);
    }
    if dead[q0] {
        return None;
    }
    let mut seen: HashMap<(Cell, usize), usize> = HashMap::new();
    seen.insert((start, q0), 0);
    let mut queue = VecDeque::from([(start, q0)]);
    while let Some((cell, q)) = queue.pop_front() {
        let dist = seen[&(cell, q)];
        for (action, next) in world.neighbors(AbstractState::Cell(cell)) {
            let AbstractAction::Move(_) = action else { continue };
            let AbstractState::Cell(nc) = next else { continue };
            let Some(nq) = dba.step(q, label(nc)) else { continue };
            if dba.is_accepting(nq) {
                return Some(dist + 1);
            }
            if dead[nq] {
                continue;
            }
            if !seen.contains_key(&(nc, nq)) {
                seen.insert((nc, nq), dist + 1);
                queue.push_back((nc, nq));
            }
        }
    }
    None
}
