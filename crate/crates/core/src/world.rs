//! Grid world the robot moves in: walls, free cells, one labeled region and
//! one anchor cell per physical room.
//!
//! Text format: header lines `room <char> <id>` and `anchor <char> <x> <y>`
//! (`#` comments allowed), a blank line, then the grid with `#` for walls,
//! `.` for free cells, `@` for the robot start and room label characters.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::name::EntityName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    fn is_adjacent(self, other: Cell) -> bool {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y) == 1
    }
}

/// Unit moves, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Move {
    Up,
    Down,
    Left,
    Right,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Up, Move::Down, Move::Left, Move::Right];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("line {line}: {reason}")]
    SyntaxError { line: usize, reason: String },
    #[error("unknown room label `{0}`")]
    UnknownRoomLabel(String),
    #[error("anchor of {0} is not reachable from the robot")]
    UnreachableAnchor(EntityName),
    #[error("the grid has no robot start `@`")]
    MissingRobotStart,
    #[error("anchor of {room} at ({}, {}) lies outside its region", cell.x, cell.y)]
    AnchorOutsideRegion { room: EntityName, cell: Cell },
    #[error("room {0} has no cells in the grid")]
    NoAnchor(EntityName),
    #[error("no path to {0}")]
    NoPath(EntityName),
    #[error("trajectory does not start at the robot or is not a chain of free adjacent cells")]
    InvalidTrajectory,
}

impl WorldError {
    pub fn kind(&self) -> &'static str {
        match self {
            WorldError::SyntaxError { .. } => "SyntaxError",
            WorldError::UnknownRoomLabel(_) => "UnknownRoomLabel",
            WorldError::UnreachableAnchor(_) => "UnreachableAnchor",
            WorldError::MissingRobotStart => "MissingRobotStart",
            WorldError::AnchorOutsideRegion { .. } => "AnchorOutsideRegion",
            WorldError::NoAnchor(_) => "NoAnchor",
            WorldError::NoPath(_) => "NoPath",
            WorldError::InvalidTrajectory => "InvalidTrajectory",
        }
    }
}

/// Cells from start to goal, both included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Trajectory(Vec<Cell>);

impl Trajectory {
    pub fn cells(&self) -> &[Cell] {
        &self.0
    }

    /// Number of cells, start and goal included.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn start(&self) -> Cell {
        self.0[0]
    }

    pub fn goal(&self) -> Cell {
        self.0[self.0.len() - 1]
    }

    pub fn moves(&self) -> Vec<Move> {
        self.0
            .windows(2)
            .map(|w| {
                match (
                    w[1].x as isize - w[0].x as isize,
                    w[1].y as isize - w[0].y as isize,
                ) {
                    (0, -1) => Move::Up,
                    (0, 1) => Move::Down,
                    (-1, 0) => Move::Left,
                    _ => Move::Right,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridWorld {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    labels: BTreeMap<char, EntityName>,
    regions: BTreeMap<EntityName, BTreeSet<Cell>>,
    anchors: BTreeMap<EntityName, Cell>,
    robot: Cell,
}

/// Serializable view of a world for rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorldState {
    pub width: usize,
    pub height: usize,
    /// One string per row: `#` wall, `.` free, room label characters.
    pub grid: Vec<String>,
    pub labels: BTreeMap<String, EntityName>,
    pub regions: BTreeMap<EntityName, Vec<Cell>>,
    pub anchors: BTreeMap<EntityName, Cell>,
    pub robot: Cell,
}

fn syntax(line: usize, reason: impl Into<String>) -> WorldError {
    WorldError::SyntaxError {
        line,
        reason: reason.into(),
    }
}

/// Parses and validates a world against the physical rooms of `kb`.
pub fn load_world(text: &str, kb: &KnowledgeBase) -> Result<GridWorld, WorldError> {
    let lines: Vec<&str> = text.lines().collect();
    let split = lines
        .iter()
        .position(|l| l.trim().is_empty())
        .ok_or_else(|| syntax(lines.len(), "missing blank line between header and grid"))?;

    let mut labels: BTreeMap<char, EntityName> = BTreeMap::new();
    let mut anchor_lines: Vec<(usize, char, Cell)> = Vec::new();
    for (i, raw) in lines[..split].iter().enumerate() {
        let line = i + 1;
        let content = raw.split_once('#').map_or(*raw, |(before, _)| before).trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let label = |s: &str| -> Result<char, WorldError> {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if !matches!(c, '#' | '.' | '@') && !c.is_whitespace() => Ok(c),
                _ => Err(syntax(line, format!("bad label `{s}`"))),
            }
        };
        match fields.as_slice() {
            ["room", l, id] => {
                let c = label(l)?;
                let name = EntityName::new(id).map_err(|e| syntax(line, e.to_string()))?;
                if kb.physical_room(name.canonical()).is_none() {
                    return Err(WorldError::UnknownRoomLabel(name.canonical().to_string()));
                }
                if labels.insert(c, name).is_some() {
                    return Err(syntax(line, format!("label `{c}` declared twice")));
                }
            }
            ["anchor", l, x, y] => {
                let c = label(l)?;
                let coord = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| syntax(line, format!("bad coordinate `{s}`")))
                };
                anchor_lines.push((line, c, Cell::new(coord(x)?, coord(y)?)));
            }
            _ => return Err(syntax(line, format!("unrecognized header `{content}`"))),
        }
    }

    let grid: Vec<(usize, &str)> = lines[split + 1..]
        .iter()
        .enumerate()
        .map(|(i, l)| (split + 2 + i, l.trim_end()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(first_line, first)) = grid.first() else {
        return Err(syntax(lines.len(), "empty grid"));
    };
    let width = first.chars().count();
    let height = grid.len();
    let mut walls = vec![false; width * height];
    let mut regions: BTreeMap<EntityName, BTreeSet<Cell>> =
        labels.values().map(|n| (n.clone(), BTreeSet::new())).collect();
    let mut robot = None;
    for (y, &(line, row)) in grid.iter().enumerate() {
        if row.chars().count() != width {
            return Err(syntax(
                line,
                format!(
                    "row has {} cells, expected {width} (from line {first_line})",
                    row.chars().count()
                ),
            ));
        }
        for (x, c) in row.chars().enumerate() {
            let cell = Cell::new(x, y);
            match c {
                '#' => walls[y * width + x] = true,
                '.' => {}
                '@' => {
                    if robot.replace(cell).is_some() {
                        return Err(syntax(line, "more than one robot start"));
                    }
                }
                other => {
                    let room = labels
                        .get(&other)
                        .ok_or_else(|| WorldError::UnknownRoomLabel(other.to_string()))?;
                    regions.get_mut(room).expect("region per label").insert(cell);
                }
            }
        }
    }
    let robot = robot.ok_or(WorldError::MissingRobotStart)?;

    let mut anchors = BTreeMap::new();
    for (line, c, cell) in anchor_lines {
        let room = labels
            .get(&c)
            .ok_or_else(|| WorldError::UnknownRoomLabel(c.to_string()))?;
        if anchors.insert(room.clone(), cell).is_some() {
            return Err(syntax(line, format!("second anchor for `{c}`")));
        }
    }
    for (room, cells) in &regions {
        if !anchors.contains_key(room) {
            // Row-major first cell; BTreeSet<Cell> orders by x first.
            let first = cells
                .iter()
                .min_by_key(|c| (c.y, c.x))
                .ok_or_else(|| WorldError::NoAnchor(room.clone()))?;
            anchors.insert(room.clone(), *first);
        }
    }

    let world = GridWorld {
        width,
        height,
        walls,
        labels,
        regions,
        anchors,
        robot,
    };
    for (room, cell) in &world.anchors {
        if !world.regions[room].contains(cell) {
            return Err(WorldError::AnchorOutsideRegion {
                room: room.clone(),
                cell: *cell,
            });
        }
    }
    let reach = world.distances_from(robot);
    for (room, cell) in &world.anchors {
        if reach[world.index(*cell)].is_none() {
            return Err(WorldError::UnreachableAnchor(room.clone()));
        }
    }
    Ok(world)
}

impl GridWorld {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn robot(&self) -> Cell {
        self.robot
    }

    pub fn anchor(&self, room: &str) -> Option<Cell> {
        self.anchors.get(room).copied()
    }

    pub fn rooms(&self) -> impl Iterator<Item = &EntityName> {
        self.regions.keys()
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height && !self.walls[self.index(cell)]
    }

    pub fn region_of(&self, cell: Cell) -> Option<&EntityName> {
        self.regions
            .iter()
            .find(|(_, cells)| cells.contains(&cell))
            .map(|(room, _)| room)
    }

    fn index(&self, cell: Cell) -> usize {
        cell.y * self.width + cell.x
    }

    fn step(&self, cell: Cell, m: Move) -> Option<Cell> {
        let next = match m {
            Move::Up => Cell::new(cell.x, cell.y.checked_sub(1)?),
            Move::Down => Cell::new(cell.x, cell.y + 1),
            Move::Left => Cell::new(cell.x.checked_sub(1)?, cell.y),
            Move::Right => Cell::new(cell.x + 1, cell.y),
        };
        self.is_free(next).then_some(next)
    }

    /// Breadth-first distances from `origin` over free cells.
    fn distances_from(&self, origin: Cell) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.width * self.height];
        if !self.is_free(origin) {
            return dist;
        }
        dist[self.index(origin)] = Some(0);
        let mut queue = VecDeque::from([origin]);
        while let Some(cell) = queue.pop_front() {
            let d = dist[self.index(cell)].expect("visited");
            for m in Move::ALL {
                if let Some(next) = self.step(cell, m) {
                    let slot = &mut dist[self.index(next)];
                    if slot.is_none() {
                        *slot = Some(d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        dist
    }

    /// Shortest 4-connected path; among those, the one whose move sequence
    /// is least under Up < Down < Left < Right.
    pub fn shortest_path(&self, from: Cell, to: Cell) -> Option<Trajectory> {
        let dist = self.distances_from(to);
        let mut remaining = dist.get(self.index(from)).copied().flatten()?;
        let mut cells = vec![from];
        let mut cell = from;
        while remaining > 0 {
            cell = Move::ALL
                .into_iter()
                .filter_map(|m| self.step(cell, m))
                .find(|next| dist[self.index(*next)] == Some(remaining - 1))
                .expect("a neighbor one step closer exists");
            cells.push(cell);
            remaining -= 1;
        }
        Some(Trajectory(cells))
    }

    pub fn plan_path(&self, room: &EntityName) -> Result<Trajectory, WorldError> {
        let anchor = self
            .anchors
            .get(room)
            .ok_or_else(|| WorldError::NoAnchor(room.clone()))?;
        self.shortest_path(self.robot, *anchor)
            .ok_or_else(|| WorldError::NoPath(room.clone()))
    }

    /// Moves the robot along `trajectory`, returning the visited cells.
    pub fn execute(&mut self, trajectory: &Trajectory) -> Result<Vec<Cell>, WorldError> {
        let cells = trajectory.cells();
        let valid = cells.first() == Some(&self.robot)
            && cells.iter().all(|c| self.is_free(*c))
            && cells.windows(2).all(|w| w[0].is_adjacent(w[1]));
        if !valid {
            return Err(WorldError::InvalidTrajectory);
        }
        self.robot = trajectory.goal();
        Ok(cells.to_vec())
    }

    pub fn state(&self) -> WorldState {
        let grid = (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| {
                        let cell = Cell::new(x, y);
                        if !self.is_free(cell) {
                            return '#';
                        }
                        self.labels
                            .iter()
                            .find(|(_, room)| self.regions[*room].contains(&cell))
                            .map_or('.', |(c, _)| *c)
                    })
                    .collect()
            })
            .collect();
        WorldState {
            width: self.width,
            height: self.height,
            grid,
            labels: self
                .labels
                .iter()
                .map(|(c, r)| (c.to_string(), r.clone()))
                .collect(),
            regions: self
                .regions
                .iter()
                .map(|(r, cells)| (r.clone(), cells.iter().copied().collect()))
                .collect(),
            anchors: self.anchors.clone(),
            robot: self.robot,
        }
    }
}
