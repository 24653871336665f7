//! Hierarchical planning for linear-temporal-logic tasks on 3D gridworlds.
//!
//! The pipeline: an LTL task specification is compiled to a deterministic
//! Büchi automaton with symbolic edge guards, pruned against world facts,
//! and decomposed along initial-to-accepting automaton paths into abstract
//! labeled MDP subproblems, each solved by value iteration at the lowest
//! abstraction level its guards mention (cells, rooms, or floors). A flat
//! product-MDP baseline solves the same tasks at cell level for comparison.

pub mod automaton;
pub mod bench;
pub mod ltl;
pub mod planner;
pub mod solver;
pub mod world;

pub use automaton::{find_paths, remove_contradictions, translate, AutomatonPath, Dba, Guard};
pub use ltl::{parse, LtlFormula, Prop, PropId, PropRegistry, PropSet};
pub use planner::{
    check_plan, solve_apmdp, solve_pmdp, CheckResult, Method, Plan, PlanError,
};
pub use solver::RewardParams;
pub use world::{AbstractAction, AbstractState, Cell, Move, MutexFacts, WorldModel};
