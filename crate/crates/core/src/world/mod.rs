//! 3D gridworld with a three-level abstraction hierarchy.
//!
//! Cells partition into rooms, rooms into floors (one floor per z layer).
//! Landmarks name single cells. Vertical movement is only possible inside
//! declared shaft columns (stairwells); rooms are adjacent laterally when
//! they share a face on the same floor, and vertically when a shaft cell
//! lies in both footprints. Labels expose landmark, room-color, and floor
//! propositions; a level-l state never determines a level-<l proposition.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::ltl::{PropId, PropRegistry, PropSet};

pub const LEVEL_CELL: u8 = 0;
pub const LEVEL_ROOM: u8 = 1;
pub const LEVEL_FLOOR: u8 = 2;

/// Primitive moves in the fixed tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    North,
    South,
    East,
    West,
    Up,
    Down,
}

pub const MOVES: [Move; 6] = [Move::North, Move::South, Move::East, Move::West, Move::Up, Move::Down];

impl Move {
    /// Axis convention: east +x, west -x, south +y, north -y, up +z.
    pub fn delta(self) -> (i64, i64, i64) {
        match self {
            Move::North => (0, -1, 0),
            Move::South => (0, 1, 0),
            Move::East => (1, 0, 0),
            Move::West => (-1, 0, 0),
            Move::Up => (0, 0, 1),
            Move::Down => (0, 0, -1),
        }
    }

    pub fn parse(s: &str) -> Option<Move> {
        Some(match s {
            "north" => Move::North,
            "south" => Move::South,
            "east" => Move::East,
            "west" => Move::West,
            "up" => Move::Up,
            "down" => Move::Down,
            _ => return None,
        })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Move::North => "north",
            Move::South => "south",
            Move::East => "east",
            Move::West => "west",
            Move::Up => "up",
            Move::Down => "down",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.x, self.y, self.z)
    }
}

/// A state at some abstraction level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractState {
    Cell(Cell),
    Room(usize),
    Floor(usize),
}

impl AbstractState {
    pub fn level(&self) -> u8 {
        match self {
            AbstractState::Cell(_) => LEVEL_CELL,
            AbstractState::Room(_) => LEVEL_ROOM,
            AbstractState::Floor(_) => LEVEL_FLOOR,
        }
    }
}

/// An action at some abstraction level: a primitive move, or a subgoal
/// targeting an adjacent room or floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractAction {
    Move(Move),
    GotoRoom(usize),
    GotoFloor(usize),
}

impl fmt::Display for AbstractAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractAction::Move(m) => write!(f, "{m}"),
            AbstractAction::GotoRoom(r) => write!(f, "goto-room-{r}"),
            AbstractAction::GotoFloor(fl) => write!(f, "goto-floor-{}", fl + 1),
        }
    }
}

/// Mutual-exclusion groups and containment implications over the
/// proposition registry, used for contradiction pruning and consistency
/// checks. Implications are closed transitively.
#[derive(Debug, Clone)]
pub struct MutexFacts {
    closure: Vec<PropSet>,
    exclusive: Vec<PropSet>,
    n_props: usize,
}

impl MutexFacts {
    pub fn new(groups: Vec<Vec<PropId>>, implications: Vec<(PropId, PropId)>) -> Self {
        let n = groups
            .iter()
            .flatten()
            .chain(implications.iter().flat_map(|(a, b)| [a, b]))
            .map(|p| p.0 as usize + 1)
            .max()
            .unwrap_or(0)
            .max(64);
        let mut direct: Vec<PropSet> = vec![PropSet::EMPTY; n];
        for (from, to) in &implications {
            direct[from.0 as usize].insert(*to);
        }
        // Transitive closure, including the prop itself.
        let mut closure = vec![PropSet::EMPTY; n];
        for p in 0..n {
            let mut set = PropSet::singleton(PropId(p as u32));
            loop {
                let mut grown = set;
                for q in set.iter() {
                    grown = grown.union(direct[q.0 as usize]);
                }
                if grown == set {
                    break;
                }
                set = grown;
            }
            closure[p] = set;
        }
        let mut exclusive = vec![PropSet::EMPTY; n];
        for group in &groups {
            for &p in group {
                for &q in group {
                    if p != q {
                        exclusive[p.0 as usize].insert(q);
                    }
                }
            }
        }
        MutexFacts { closure, exclusive, n_props: n }
    }

    /// Can the assignment (over `props`, bit `i` of `minterm` giving the
    /// truth of `props[i]`) be extended to a world-consistent valuation?
    /// True props are closed under implications; the closure must not
    /// force a prop assigned false, nor contain an exclusive pair.
    pub fn consistent_assignment(&self, props: &[PropId], minterm: u32) -> bool {
        let mut closed = PropSet::EMPTY;
        for (i, p) in props.iter().enumerate() {
            if minterm & (1 << i) != 0 {
                closed = closed.union(self.closure[p.0 as usize]);
            }
        }
        for (i, p) in props.iter().enumerate() {
            if minterm & (1 << i) == 0 && closed.contains(*p) {
                return false;
            }
        }
        for p in closed.iter() {
            if p.0 as usize >= self.n_props {
                continue;
            }
            if self.exclusive[p.0 as usize].0 & closed.0 != 0 {
                return false;
            }
        }
        true
    }

    /// A full letter (proposition set) is consistent when read as the
    /// assignment that is true exactly on its members.
    pub fn consistent_letter(&self, props: &[PropId], letter: PropSet) -> bool {
        let mut m: u32 = 0;
        for (i, p) in props.iter().enumerate() {
            if letter.contains(*p) {
                m |= 1 << i;
            }
        }
        self.consistent_assignment(props, m)
    }
}

#[derive(Debug, Clone)]
pub struct Room {
    pub name: String,
    pub floor: usize,
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
    pub color: Option<PropId>,
    line: usize,
}

impl Room {
    pub fn contains_xy(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn cell_count(&self) -> usize {
        (self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)
    }
}

#[derive(Debug, Clone, Copy)]
struct ShaftBox {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("{path}:{line}: {msg}")]
    Invalid { path: String, line: usize, msg: String },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The gridworld: dimensions, rooms, landmarks, shafts, derived labeling
/// and adjacency structure, and the proposition registry it defines.
#[derive(Debug, Clone)]
pub struct WorldModel {
    pub name: String,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    rooms: Vec<Room>,
    room_of_cell: Vec<usize>,
    landmark_at: HashMap<Cell, PropId>,
    shafts: Vec<ShaftBox>,
    floor_props: Vec<PropId>,
    registry: PropRegistry,
    room_neighbors: Vec<Vec<usize>>,
    facts: MutexFacts,
    pub default_start: Option<Cell>,
}

impl WorldModel {
    pub fn load(path: &Path) -> Result<WorldModel, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "world".to_string());
        WorldModel::parse(&text, &name, &path.display().to_string())
    }

    /// Parse the world config format: one directive per line, `#` starts
    /// a comment. Directives: `dims NX NY NZ`, `floors N`,
    /// `room NAME floor F box X0 X1 Y0 Y1 [color C]`,
    /// `landmark NAME X Y Z`, `shaft X0 X1 Y0 Y1`, `start X Y Z`.
    pub fn parse(text: &str, name: &str, path: &str) -> Result<WorldModel, WorldError> {
        let perr = |line: usize, msg: String| WorldError::Parse {
            path: path.to_string(),
            line,
            msg,
        };
        let mut dims: Option<(usize, usize, usize)> = None;
        let mut floors_decl: Option<usize> = None;
        let mut rooms_raw: Vec<(String, usize, usize, usize, usize, usize, Option<String>, usize)> =
            Vec::new();
        let mut landmarks_raw: Vec<(String, usize, usize, usize, usize)> = Vec::new();
        let mut shafts = Vec::new();
        let mut start = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or(raw).trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let num = |s: &str| -> Result<usize, WorldError> {
                s.parse::<usize>()
                    .map_err(|_| perr(line, format!("expected a number, found `{s}`")))
            };
            match toks[0] {
                "dims" => {
                    if toks.len() != 4 {
                        return Err(perr(line, "dims takes NX NY NZ".into()));
                    }
                    dims = Some((num(toks[1])?, num(toks[2])?, num(toks[3])?));
                }
                "floors" => {
                    if toks.len() != 2 {
                        return Err(perr(line, "floors takes a count".into()));
                    }
                    floors_decl = Some(num(toks[1])?);
                }
                "room" => {
                    // room NAME floor F box X0 X1 Y0 Y1 [color C]
                    if toks.len() < 9 || toks[2] != "floor" || toks[4] != "box" {
                        return Err(perr(
                            line,
                            "room takes NAME floor F box X0 X1 Y0 Y1 [color C]".into(),
                        ));
                    }
                    let floor = num(toks[3])?;
                    if floor == 0 {
                        return Err(perr(line, "floors are numbered from 1".into()));
                    }
                    let color = if toks.len() == 11 && toks[9] == "color" {
                        Some(toks[10].to_string())
                    } else if toks.len() == 9 {
                        None
                    } else {
                        return Err(perr(line, "trailing tokens after room box".into()));
                    };
                    rooms_raw.push((
                        toks[1].to_string(),
                        floor - 1,
                        num(toks[5])?,
                        num(toks[6])?,
                        num(toks[7])?,
                        num(toks[8])?,
                        color,
                        line,
                    ));
                }
                "landmark" => {
                    if toks.len() != 5 {
                        return Err(perr(line, "landmark takes NAME X Y Z".into()));
                    }
                    landmarks_raw.push((
                        toks[1].to_string(),
                        num(toks[2])?,
                        num(toks[3])?,
                        num(toks[4])?,
                        line,
                    ));
                }
                "shaft" => {
                    if toks.len() != 5 {
                        return Err(perr(line, "shaft takes X0 X1 Y0 Y1".into()));
                    }
                    shafts.push((
                        ShaftBox {
                            x0: num(toks[1])?,
                            x1: num(toks[2])?,
                            y0: num(toks[3])?,
                            y1: num(toks[4])?,
                        },
                        line,
                    ));
                }
                "start" => {
                    if toks.len() != 4 {
                        return Err(perr(line, "start takes X Y Z".into()));
                    }
                    start = Some((Cell { x: num(toks[1])?, y: num(toks[2])?, z: num(toks[3])? }, line));
                }
                other => return Err(perr(line, format!("unknown directive `{other}`"))),
            }
        }

        let ierr = |line: usize, msg: String| WorldError::Invalid {
            path: path.to_string(),
            line,
            msg,
        };
        let (nx, ny, nz) = dims.ok_or_else(|| ierr(1, "missing dims".into()))?;
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(ierr(1, "dims must be positive".into()));
        }
        if let Some(fl) = floors_decl {
            if fl != nz {
                return Err(ierr(1, format!("floors {fl} does not match nz {nz} (one floor per z layer)")));
            }
        }

        // Registry order: floors, then room colors, then landmarks.
        let mut registry = PropRegistry::new();
        let mut floor_props = Vec::new();
        for f in 0..nz {
            let id = registry
                .register(&format!("floor_{}", f + 1), LEVEL_FLOOR)
                .map_err(|e| ierr(1, e.to_string()))?;
            floor_props.push(id);
        }
        let mut rooms = Vec::new();
        for (rname, floor, x0, x1, y0, y1, color, line) in rooms_raw {
            if floor >= nz {
                return Err(ierr(line, format!("room `{rname}` floor out of range")));
            }
            if x1 >= nx || y1 >= ny || x0 > x1 || y0 > y1 {
                return Err(ierr(line, format!("room `{rname}` box out of bounds")));
            }
            if rooms.iter().any(|r: &Room| r.name == rname) {
                return Err(ierr(line, format!("duplicate room name `{rname}`")));
            }
            let color_prop = match color {
                Some(c) => Some(
                    registry
                        .register(&format!("{c}_room"), LEVEL_ROOM)
                        .map_err(|_| ierr(line, format!("room color `{c}` already used")))?,
                ),
                None => None,
            };
            rooms.push(Room { name: rname, floor, x0, x1, y0, y1, color: color_prop, line });
        }

        // Partition: every cell of every floor in exactly one room.
        let mut room_of_cell = vec![usize::MAX; nx * ny * nz];
        for (ri, room) in rooms.iter().enumerate() {
            let z = room.floor;
            for y in room.y0..=room.y1 {
                for x in room.x0..=room.x1 {
                    let idx = (z * ny + y) * nx + x;
                    if room_of_cell[idx] != usize::MAX {
                        return Err(ierr(
                            room.line,
                            format!(
                                "cell {x},{y},{z} covered by both `{}` and `{}`",
                                rooms[room_of_cell[idx]].name, room.name
                            ),
                        ));
                    }
                    room_of_cell[idx] = ri;
                }
            }
        }
        if let Some(idx) = room_of_cell.iter().position(|&r| r == usize::MAX) {
            let z = idx / (nx * ny);
            let y = (idx / nx) % ny;
            let x = idx % nx;
            return Err(ierr(1, format!("cell {x},{y},{z} belongs to no room")));
        }

        let mut landmark_at = HashMap::new();
        for (lname, x, y, z, line) in landmarks_raw {
            if x >= nx || y >= ny || z >= nz {
                return Err(ierr(line, format!("landmark `{lname}` outside dims")));
            }
            let cell = Cell { x, y, z };
            if landmark_at.contains_key(&cell) {
                return Err(ierr(line, format!("two landmarks on cell {cell}")));
            }
            let id = registry
                .register(&lname, LEVEL_CELL)
                .map_err(|e| ierr(line, e.to_string()))?;
            landmark_at.insert(cell, id);
        }

        for (s, line) in &shafts {
            if s.x1 >= nx || s.y1 >= ny || s.x0 > s.x1 || s.y0 > s.y1 {
                return Err(ierr(*line, "shaft box out of bounds".into()));
            }
        }
        if nz > 1 && shafts.is_empty() {
            return Err(ierr(1, "a multi-floor world needs at least one shaft".into()));
        }
        let shafts: Vec<ShaftBox> = shafts.into_iter().map(|(s, _)| s).collect();

        let default_start = match start {
            Some((c, line)) => {
                if c.x >= nx || c.y >= ny || c.z >= nz {
                    return Err(ierr(line, "start cell outside dims".into()));
                }
                Some(c)
            }
            None => None,
        };

        // Room adjacency: shared lateral face on the same floor, or a
        // shaft cell shared by the stacked footprints of consecutive
        // floors.
        let mut room_neighbors: Vec<Vec<usize>> = vec![Vec::new(); rooms.len()];
        for i in 0..rooms.len() {
            for j in 0..rooms.len() {
                if i == j {
                    continue;
                }
                let (a, b) = (&rooms[i], &rooms[j]);
                let adjacent = if a.floor == b.floor {
                    let x_touch = (a.x1 + 1 == b.x0 || b.x1 + 1 == a.x0)
                        && a.y0 <= b.y1
                        && b.y0 <= a.y1;
                    let y_touch = (a.y1 + 1 == b.y0 || b.y1 + 1 == a.y0)
                        && a.x0 <= b.x1
                        && b.x0 <= a.x1;
                    x_touch || y_touch
                } else if a.floor.abs_diff(b.floor) == 1 {
                    shafts.iter().any(|s| {
                        (s.x0.max(a.x0.max(b.x0))..=s.x1.min(a.x1.min(b.x1))).any(|x| {
                            (s.y0.max(a.y0.max(b.y0))..=s.y1.min(a.y1.min(b.y1)))
                                .any(|y| a.contains_xy(x, y) && b.contains_xy(x, y))
                        })
                    })
                } else {
                    false
                };
                if adjacent {
                    room_neighbors[i].push(j);
                }
            }
            room_neighbors[i].sort_unstable();
        }

        // Exclusion groups and containment implications.
        let colors: Vec<PropId> = rooms.iter().filter_map(|r| r.color).collect();
        let lms: Vec<PropId> = {
            let mut v: Vec<PropId> = landmark_at.values().copied().collect();
            v.sort();
            v
        };
        let mut implications = Vec::new();
        for room in &rooms {
            if let Some(c) = room.color {
                implications.push((c, floor_props[room.floor]));
            }
        }
        for (cell, lm) in &landmark_at {
            let room = &rooms[room_of_cell[(cell.z * ny + cell.y) * nx + cell.x]];
            if let Some(c) = room.color {
                implications.push((*lm, c));
            }
            implications.push((*lm, floor_props[room.floor]));
        }
        let facts = MutexFacts::new(
            vec![floor_props.clone(), colors, lms],
            implications,
        );

        Ok(WorldModel {
            name: name.to_string(),
            nx,
            ny,
            nz,
            rooms,
            room_of_cell,
            landmark_at,
            shafts,
            floor_props,
            registry,
            room_neighbors,
            facts,
            default_start,
        })
    }

    pub fn registry(&self) -> &PropRegistry {
        &self.registry
    }

    pub fn facts(&self) -> &MutexFacts {
        &self.facts
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn cell_index(&self, c: Cell) -> usize {
        (c.z * self.ny + c.y) * self.nx + c.x
    }

    pub fn cell_from_index(&self, idx: usize) -> Cell {
        Cell {
            x: idx % self.nx,
            y: (idx / self.nx) % self.ny,
            z: idx / (self.nx * self.ny),
        }
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.nx && c.y < self.ny && c.z < self.nz
    }

    pub fn room_of(&self, c: Cell) -> usize {
        self.room_of_cell[self.cell_index(c)]
    }

    pub fn floor_prop(&self, floor: usize) -> PropId {
        self.floor_props[floor]
    }

    pub fn in_shaft(&self, x: usize, y: usize) -> bool {
        self.shafts
            .iter()
            .any(|s| x >= s.x0 && x <= s.x1 && y >= s.y0 && y <= s.y1)
    }

    /// Propositions true of an abstract state. A state never determines
    /// propositions below its own level, so those are simply absent.
    pub fn label(&self, s: AbstractState) -> PropSet {
        let mut set = PropSet::EMPTY;
        match s {
            AbstractState::Cell(c) => {
                if let Some(lm) = self.landmark_at.get(&c) {
                    set.insert(*lm);
                }
                let room = &self.rooms[self.room_of(c)];
                if let Some(color) = room.color {
                    set.insert(color);
                }
                set.insert(self.floor_props[room.floor]);
            }
            AbstractState::Room(r) => {
                let room = &self.rooms[r];
                if let Some(color) = room.color {
                    set.insert(color);
                }
                set.insert(self.floor_props[room.floor]);
            }
            AbstractState::Floor(f) => {
                set.insert(self.floor_props[f]);
            }
        }
        set
    }

    /// Project a concrete cell to the given abstraction level.
    pub fn project(&self, c: Cell, level: u8) -> AbstractState {
        match level {
            LEVEL_CELL => AbstractState::Cell(c),
            LEVEL_ROOM => AbstractState::Room(self.room_of(c)),
            LEVEL_FLOOR => AbstractState::Floor(c.z),
            _ => panic!("level {level} out of range"),
        }
    }

    /// All states of one abstraction level, in a fixed order.
    pub fn states_at_level(&self, level: u8) -> Vec<AbstractState> {
        match level {
            LEVEL_CELL => (0..self.n_cells())
                .map(|i| AbstractState::Cell(self.cell_from_index(i)))
                .collect(),
            LEVEL_ROOM => (0..self.rooms.len()).map(AbstractState::Room).collect(),
            LEVEL_FLOOR => (0..self.nz).map(AbstractState::Floor).collect(),
            _ => panic!("level {level} out of range"),
        }
    }

    /// Moves available from a state, in the fixed tie-break order
    /// (primitive move order, then ascending room id, then ascending
    /// floor). Off-grid and through-ceiling moves are omitted.
    pub fn neighbors(&self, s: AbstractState) -> Vec<(AbstractAction, AbstractState)> {
        match s {
            AbstractState::Cell(c) => {
                let mut out = Vec::with_capacity(6);
                for m in MOVES {
                    let (dx, dy, dz) = m.delta();
                    let nxy = (c.x as i64 + dx, c.y as i64 + dy, c.z as i64 + dz);
                    if nxy.0 < 0
                        || nxy.1 < 0
                        || nxy.2 < 0
                        || nxy.0 >= self.nx as i64
                        || nxy.1 >= self.ny as i64
                        || nxy.2 >= self.nz as i64
                    {
                        continue;
                    }
                    if dz != 0 && !self.in_shaft(c.x, c.y) {
                        continue;
                    }
                    let n = Cell { x: nxy.0 as usize, y: nxy.1 as usize, z: nxy.2 as usize };
                    out.push((AbstractAction::Move(m), AbstractState::Cell(n)));
                }
                out
            }
            AbstractState::Room(r) => self.room_neighbors[r]
                .iter()
                .map(|&n| (AbstractAction::GotoRoom(n), AbstractState::Room(n)))
                .collect(),
            AbstractState::Floor(f) => {
                let mut out = Vec::new();
                if f + 1 < self.nz {
                    out.push((AbstractAction::GotoFloor(f + 1), AbstractState::Floor(f + 1)));
                }
                if f > 0 {
                    out.push((AbstractAction::GotoFloor(f - 1), AbstractState::Floor(f - 1)));
                }
                out.sort_by_key(|(_, s)| *s);
                out
            }
        }
    }

    /// Apply a primitive move; `None` when it would leave the grid or
    /// pass through a ceiling outside a shaft.
    pub fn apply_move(&self, c: Cell, m: Move) -> Option<Cell> {
        self.neighbors(AbstractState::Cell(c))
            .into_iter()
            .find(|(a, _)| *a == AbstractAction::Move(m))
            .map(|(_, s)| match s {
                AbstractState::Cell(n) => n,
                _ => unreachable!(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "
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

    fn tiny() -> WorldModel {
        WorldModel::parse(TINY, "tiny", "tiny.world").unwrap()
    }

    #[test]
    fn cells_partition_into_rooms() {
        let w = tiny();
        let mut per_room = vec![0usize; w.rooms().len()];
        for i in 0..w.n_cells() {
            per_room[w.room_of(w.cell_from_index(i))] += 1;
        }
        assert_eq!(per_room.iter().sum::<usize>(), w.n_cells());
        for (r, count) in per_room.iter().enumerate() {
            assert_eq!(*count, w.rooms()[r].cell_count());
        }
    }

    #[test]
    fn labels_by_level() {
        let w = tiny();
        let reg = w.registry();
        let lm = reg.lookup("landmark_1").unwrap();
        let red = reg.lookup("red_room").unwrap();
        let f1 = reg.lookup("floor_1").unwrap();
        // Landmark cell carries landmark, room color, floor.
        let l = w.label(AbstractState::Cell(Cell { x: 3, y: 0, z: 0 }));
        assert!(l.contains(lm) && l.contains(red) && l.contains(f1));
        // A cell without landmark in an uncolored room: floor only.
        let l2 = w.label(AbstractState::Cell(Cell { x: 2, y: 2, z: 0 }));
        assert_eq!(l2, PropSet::singleton(f1));
        // Floor state: floor prop only.
        assert_eq!(w.label(AbstractState::Floor(0)), PropSet::singleton(f1));
        // Room state: color + floor, never a landmark.
        let l3 = w.label(AbstractState::Room(1));
        assert!(l3.contains(red) && l3.contains(f1) && !l3.contains(lm));
    }

    #[test]
    fn projection_examples() {
        let w = tiny();
        let c = Cell { x: 3, y: 2, z: 1 };
        assert_eq!(w.project(c, LEVEL_CELL), AbstractState::Cell(c));
        assert_eq!(w.project(c, LEVEL_ROOM), AbstractState::Room(7));
        assert_eq!(w.project(c, LEVEL_FLOOR), AbstractState::Floor(1));
        // Every cell of a room projects to that room.
        for i in 0..w.n_cells() {
            let cell = w.cell_from_index(i);
            match w.project(cell, LEVEL_ROOM) {
                AbstractState::Room(r) => assert_eq!(r, w.room_of(cell)),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn projection_coherence() {
        let w = tiny();
        for i in 0..w.n_cells() {
            let cell = w.cell_from_index(i);
            let base = w.label(AbstractState::Cell(cell));
            for level in [LEVEL_ROOM, LEVEL_FLOOR] {
                let up = w.label(w.project(cell, level));
                assert!(up.is_subset_of(base), "label coherence at {cell} level {level}");
            }
        }
    }

    #[test]
    fn corner_cell_moves() {
        let w = tiny();
        // Corner in the shaft: east, south, up.
        let n = w.neighbors(AbstractState::Cell(Cell { x: 0, y: 0, z: 0 }));
        let actions: Vec<AbstractAction> = n.iter().map(|(a, _)| *a).collect();
        assert_eq!(
            actions,
            vec![
                AbstractAction::Move(Move::South),
                AbstractAction::Move(Move::East),
                AbstractAction::Move(Move::Up)
            ]
        );
        // Corner outside the shaft: no vertical move.
        let n2 = w.neighbors(AbstractState::Cell(Cell { x: 3, y: 3, z: 0 }));
        assert!(n2.iter().all(|(a, _)| !matches!(a, AbstractAction::Move(Move::Up | Move::Down))));
    }

    #[test]
    fn room_adjacency_includes_shaft_vertical() {
        let w = tiny();
        // r0 (shaft column) is adjacent to r4 above; r1 is not adjacent to r5.
        let n0: Vec<usize> = w
            .neighbors(AbstractState::Room(0))
            .iter()
            .map(|(_, s)| match s {
                AbstractState::Room(r) => *r,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(n0, vec![1, 2, 4]);
        let n1: Vec<usize> = w
            .neighbors(AbstractState::Room(1))
            .iter()
            .map(|(_, s)| match s {
                AbstractState::Room(r) => *r,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(n1, vec![0, 3]);
    }

    #[test]
    fn floor_neighbors_are_adjacent_floors() {
        let w = tiny();
        let n = w.neighbors(AbstractState::Floor(0));
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].1, AbstractState::Floor(1));
    }

    #[test]
    fn adjacency_is_symmetric_at_every_level() {
        let w = tiny();
        for level in [LEVEL_CELL, LEVEL_ROOM, LEVEL_FLOOR] {
            for s in w.states_at_level(level) {
                for (_, t) in w.neighbors(s) {
                    let back = w.neighbors(t);
                    assert!(
                        back.iter().any(|(_, u)| *u == s),
                        "asymmetric edge {s:?} -> {t:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn facts_catch_contradictions() {
        let w = tiny();
        let reg = w.registry();
        let facts = w.facts();
        let f1 = reg.lookup("floor_1").unwrap();
        let f2 = reg.lookup("floor_2").unwrap();
        let green = reg.lookup("green_room").unwrap();
        let lm1 = reg.lookup("landmark_1").unwrap();
        let red = reg.lookup("red_room").unwrap();
        // Two floors at once: inconsistent.
        assert!(!facts.consistent_assignment(&[f1, f2], 0b11));
        assert!(facts.consistent_assignment(&[f1, f2], 0b01));
        // green_room implies floor_2.
        assert!(!facts.consistent_assignment(&[green, f2], 0b01));
        assert!(facts.consistent_assignment(&[green, f2], 0b11));
        // landmark_1 implies red_room implies floor_1; transitively
        // landmark_1 and floor_2 clash.
        assert!(!facts.consistent_assignment(&[lm1, f2], 0b11));
        assert!(!facts.consistent_assignment(&[lm1, red], 0b01));
        assert!(facts.consistent_assignment(&[lm1, red], 0b11));
    }

    #[test]
    fn loader_reports_partition_violation() {
        let broken = "
dims 2 2 1
room a floor 1 box 0 0 0 1
room b floor 1 box 0 1 0 1
";
        match WorldModel::parse(broken, "x", "x.world") {
            Err(WorldError::Invalid { line, msg, .. }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("covered by both"));
            }
            other => panic!("expected overlap error, got {other:?}"),
        }
    }

    #[test]
    fn loader_reports_missing_coverage() {
        let broken = "
dims 2 2 1
room a floor 1 box 0 0 0 1
";
        match WorldModel::parse(broken, "x", "x.world") {
            Err(WorldError::Invalid { msg, .. }) => assert!(msg.contains("belongs to no room")),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn loader_reports_bad_landmark() {
        let broken = "
dims 2 2 1
room a floor 1 box 0 1 0 1
landmark lm 5 0 0
";
        match WorldModel::parse(broken, "x", "x.world") {
            Err(WorldError::Invalid { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected landmark error, got {other:?}"),
        }
    }
}
