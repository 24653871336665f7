//! Checks against the two shipped world configs: partitions, labels,
//! movement rules, and the fact tables used for contradiction pruning.

mod support;

use apmdp::ltl::PropSet;
use apmdp::world::{AbstractAction, AbstractState, Cell, Move, LEVEL_CELL, LEVEL_FLOOR, LEVEL_ROOM};

use support::load_world;

#[test]
fn shipped_worlds_partition_cleanly() {
    for (name, cells_per_floor, floors, rooms) in [("e1", 24, 3, 18), ("e2", 600, 6, 36)] {
        let w = load_world(name);
        assert_eq!(w.nz, floors);
        assert_eq!(w.rooms().len(), rooms);
        assert_eq!(w.n_cells(), cells_per_floor * floors);
        let mut per_room = vec![0usize; rooms];
        for i in 0..w.n_cells() {
            per_room[w.room_of(w.cell_from_index(i))] += 1;
        }
        assert_eq!(per_room.iter().sum::<usize>(), w.n_cells());
        for (r, count) in per_room.iter().enumerate() {
            assert_eq!(*count, w.rooms()[r].cell_count(), "{name} room {r}");
        }
    }
}

#[test]
fn landmark_in_red_room_carries_all_three_levels() {
    let w = load_world("e1");
    let reg = w.registry();
    let l = w.label(AbstractState::Cell(Cell { x: 3, y: 0, z: 0 }));
    for name in ["landmark_1", "red_room", "floor_1"] {
        assert!(l.contains(reg.lookup(name).unwrap()), "missing {name}");
    }
    // A plain cell in an uncolored room carries only its floor.
    let l2 = w.label(AbstractState::Cell(Cell { x: 2, y: 2, z: 0 }));
    assert_eq!(l2, PropSet::singleton(reg.lookup("floor_1").unwrap()));
    // The top level is just the floor proposition.
    assert_eq!(
        w.label(AbstractState::Floor(1)),
        PropSet::singleton(reg.lookup("floor_2").unwrap())
    );
}

#[test]
fn e1_corner_cell_has_three_moves() {
    let w = load_world("e1");
    let moves: Vec<AbstractAction> = w
        .neighbors(AbstractState::Cell(Cell { x: 0, y: 0, z: 0 }))
        .into_iter()
        .map(|(a, _)| a)
        .collect();
    assert_eq!(
        moves,
        vec![
            AbstractAction::Move(Move::South),
            AbstractAction::Move(Move::East),
            AbstractAction::Move(Move::Up),
        ]
    );
}

#[test]
fn e1_bottom_floor_has_single_vertical_neighbor() {
    let w = load_world("e1");
    let n = w.neighbors(AbstractState::Floor(0));
    assert_eq!(n, vec![(AbstractAction::GotoFloor(1), AbstractState::Floor(1))]);
}

#[test]
fn e1_middle_room_has_lateral_neighbors_and_shaft_room_vertical() {
    let w = load_world("e1");
    // room_4 sits mid-floor: three lateral neighbors, no vertical access.
    let n4: Vec<usize> = w
        .neighbors(AbstractState::Room(4))
        .into_iter()
        .map(|(_, s)| match s {
            AbstractState::Room(r) => r,
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(n4, vec![1, 3, 5]);
    // The stairwell room connects to the room above as well.
    let n0: Vec<usize> = w
        .neighbors(AbstractState::Room(0))
        .into_iter()
        .map(|(_, s)| match s {
            AbstractState::Room(r) => r,
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(n0, vec![1, 3, 6]);
    // The green room (room_10) has no vertical neighbor: it can only be
    // entered from its own floor.
    let n10: Vec<usize> = w
        .neighbors(AbstractState::Room(10))
        .into_iter()
        .map(|(_, s)| match s {
            AbstractState::Room(r) => r,
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(n10, vec![7, 9, 11]);
}

#[test]
fn projection_examples_hold_on_both_worlds() {
    for name in ["e1", "e2"] {
        let w = load_world(name);
        let origin = Cell { x: 0, y: 0, z: 0 };
        assert_eq!(w.project(origin, LEVEL_FLOOR), AbstractState::Floor(0));
        assert_eq!(w.project(origin, LEVEL_CELL), AbstractState::Cell(origin));
        for i in 0..w.n_cells() {
            let c = w.cell_from_index(i);
            match w.project(c, LEVEL_ROOM) {
                AbstractState::Room(r) => {
                    assert!(w.rooms()[r].contains_xy(c.x, c.y));
                    assert_eq!(w.rooms()[r].floor, c.z);
                }
                _ => unreachable!(),
            }
        }
    }
}

#[test]
fn facts_capture_room_and_floor_structure() {
    let w = load_world("e1");
    let reg = w.registry();
    let facts = w.facts();
    let lm1 = reg.lookup("landmark_1").unwrap();
    let red = reg.lookup("red_room").unwrap();
    let green = reg.lookup("green_room").unwrap();
    let f1 = reg.lookup("floor_1").unwrap();
    let f2 = reg.lookup("floor_2").unwrap();
    // Floors are pairwise exclusive, rooms are pairwise exclusive.
    assert!(!facts.consistent_assignment(&[f1, f2], 0b11));
    assert!(!facts.consistent_assignment(&[red, green], 0b11));
    // Containment: green_room is on floor 2, landmark_1 is in the red
    // room on floor 1 (so landmark_1 with floor_2 is contradictory).
    assert!(!facts.consistent_assignment(&[green, f2], 0b01));
    assert!(!facts.consistent_assignment(&[lm1, red], 0b01));
    assert!(!facts.consistent_assignment(&[lm1, f2], 0b11));
    assert!(facts.consistent_assignment(&[lm1, red, f1], 0b111));
    // Every cell's actual label is consistent with the facts.
    let props: Vec<_> = reg.iter().map(|(id, _)| id).collect();
    for i in 0..w.n_cells() {
        let label = w.label(AbstractState::Cell(w.cell_from_index(i)));
        assert!(facts.consistent_letter(&props, label));
    }
}
