//! Seeded random knowledge bases and brute-force answers computed straight
//! from the knowledge-base relations, for cross-checking the backends.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kb::{build_kb, ConceptualDocument, Kind, KnowledgeBase, PhysicalDocument, RelationKind};
use crate::name::EntityName;
use crate::reasoner::{ErrorKind, InputShape, Method, ReasonerResult};
use crate::world::{Cell, GridWorld};

/// Expected `(answer, chain)` pairs in the order a reasoner must return them.
pub type Expected = Vec<(String, Vec<String>)>;

fn name(s: &str) -> EntityName {
    EntityName::new(s).expect("generated names are canonical")
}

/// Names like `ob`, `oa`, `od` in shuffled order, so declaration order and
/// name order disagree.
fn names(rng: &mut ChaCha8Rng, prefix: &str, count: RangeInclusive<usize>) -> Vec<EntityName> {
    let count = rng.gen_range(count);
    let mut letters: Vec<char> = ('a'..='z').collect();
    letters.shuffle(rng);
    letters[..count]
        .iter()
        .map(|c| name(&format!("{prefix}{c}")))
        .collect()
}

/// A valid knowledge base with at most 20 entities, an acyclic containment
/// relation and a handful of physical instances.
pub fn random_kb(seed: u64) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rooms = names(&mut rng, "r", 1..=3);
    let objects = names(&mut rng, "o", 2..=7);
    let utilities = names(&mut rng, "u", 0..=3);
    let meanings = names(&mut rng, "m", 0..=2);
    let characteristics = names(&mut rng, "c", 0..=2);

    let mut doc = ConceptualDocument::new();
    for (kind, list) in [
        (Kind::RoomClass, &rooms),
        (Kind::ObjectClass, &objects),
        (Kind::Utility, &utilities),
        (Kind::Meaning, &meanings),
        (Kind::Characteristic, &characteristics),
    ] {
        for n in list {
            doc.declare(kind, n.clone());
        }
    }

    let relate = |doc: &mut ConceptualDocument,
                  rel: RelationKind,
                  a: &EntityName,
                  b: &EntityName,
                  p: f64,
                  rng: &mut ChaCha8Rng| {
        if rng.gen_bool(p) {
            doc.relate(rel, a.clone(), b.clone());
        }
    };
    for r in &rooms {
        for o in &objects {
            relate(&mut doc, RelationKind::RoomContains, r, o, 0.35, &mut rng);
        }
    }
    // Containment only points forward in declaration order: acyclic.
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            relate(&mut doc, RelationKind::ObjectContains, a, b, 0.3, &mut rng);
        }
    }
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            relate(&mut doc, RelationKind::UsedWith, a, b, 0.15, &mut rng);
        }
    }
    for o in &objects {
        for u in &utilities {
            relate(&mut doc, RelationKind::HasUtility, o, u, 0.35, &mut rng);
        }
        for c in &characteristics {
            relate(&mut doc, RelationKind::HasCharacteristic, o, c, 0.25, &mut rng);
        }
    }
    for u in &utilities {
        for m in &meanings {
            relate(&mut doc, RelationKind::UtilityMeans, u, m, 0.4, &mut rng);
        }
    }

    let mut physical = PhysicalDocument::new();
    let physical_rooms = names(&mut rng, "pr", 0..=2);
    for id in &physical_rooms {
        physical.room(id.clone(), rooms.choose(&mut rng).expect("room").clone());
    }
    if !physical_rooms.is_empty() {
        for id in names(&mut rng, "po", 0..=3) {
            let class = objects.choose(&mut rng).expect("object").clone();
            let room = physical_rooms.choose(&mut rng).expect("room").clone();
            physical.object(id, class, room);
        }
    }
    build_kb(&doc, &physical).expect("generated knowledge base is valid")
}

/// Every method applied to every entity of its input kind, plus a few
/// random object sets for room labeling and some invalid calls.
pub fn all_cases(kb: &KnowledgeBase, seed: u64) -> Vec<(Method, Vec<EntityName>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for method in Method::ALL {
        match method.input() {
            InputShape::None => cases.push((method, Vec::new())),
            InputShape::One(kind) => {
                for n in kb.entities(kind) {
                    cases.push((method, vec![n.clone()]));
                }
            }
            InputShape::Set(kind) => {
                let pool: Vec<EntityName> = kb.entities(kind).cloned().collect();
                for _ in 0..4 {
                    let k = rng.gen_range(1..=pool.len().clamp(1, 3));
                    let picked: Vec<EntityName> = pool.choose_multiple(&mut rng, k).cloned().collect();
                    if !picked.is_empty() {
                        cases.push((method, picked));
                    }
                }
                cases.push((method, Vec::new()));
            }
        }
    }
    cases.push((Method::ProbableLocations, vec![name("no_such_thing")]));
    if let Some(room) = kb.room_classes().next() {
        cases.push((Method::RelatedObjects, vec![room.clone()]));
    }
    cases
}

/// Flattens a reasoner result into the oracle's shape.
pub fn flatten(result: &ReasonerResult) -> Expected {
    result
        .iter()
        .map(|(a, c)| {
            (
                a.canonical().to_string(),
                c.iter().map(|n| n.canonical().to_string()).collect(),
            )
        })
        .collect()
}

fn pairs(kb: &KnowledgeBase, relation: RelationKind) -> Vec<(&str, &str)> {
    kb.relations()
        .get(relation)
        .iter()
        .map(|(a, b)| (a.canonical(), b.canonical()))
        .collect()
}

/// Every upward containment path from `object`: `[c1, c2, ...]` where `c1`
/// contains `object` and each next element contains the previous one.
fn container_paths<'k>(kb: &'k KnowledgeBase, object: &str) -> Vec<Vec<&'k str>> {
    let contains = pairs(kb, RelationKind::ObjectContains);
    let mut out = vec![Vec::new()];
    let mut stack: Vec<Vec<&str>> = vec![Vec::new()];
    while let Some(path) = stack.pop() {
        let last = path.last().copied().unwrap_or(object);
        for &(container, containee) in &contains {
            if containee == last && !path.contains(&container) {
                let mut next = path.clone();
                next.push(container);
                out.push(next.clone());
                stack.push(next);
            }
        }
    }
    out
}

/// Per target, the `(hops, path)`-least path reaching it through `reach`.
fn best_paths<'k>(
    kb: &'k KnowledgeBase,
    object: &str,
    reach: impl Fn(&str) -> Vec<&'k str>,
) -> BTreeMap<&'k str, Vec<&'k str>> {
    let mut best: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for path in container_paths(kb, object) {
        let holder = path.last().copied().unwrap_or(object);
        for target in reach(holder) {
            best.entry(target)
                .and_modify(|cur| {
                    if (path.len(), &path) < (cur.len(), &*cur) {
                        *cur = path.clone();
                    }
                })
                .or_insert_with(|| path.clone());
        }
    }
    best
}

fn plain<'a>(answers: impl IntoIterator<Item = &'a str>) -> Expected {
    let set: BTreeSet<&str> = answers.into_iter().collect();
    set.into_iter().map(|a| (a.to_string(), Vec::new())).collect()
}

fn owned(path: &[&str]) -> Vec<String> {
    path.iter().map(|s| s.to_string()).collect()
}

/// Brute-force answer for `method` on `inputs`.
pub fn oracle(kb: &KnowledgeBase, method: Method, inputs: &[EntityName]) -> Result<Expected, ErrorKind> {
    let required = match method.input() {
        InputShape::None if !inputs.is_empty() => return Err(ErrorKind::WrongArity),
        InputShape::None => None,
        InputShape::One(_) if inputs.len() > 1 => return Err(ErrorKind::WrongArity),
        InputShape::One(kind) | InputShape::Set(kind) => Some(kind),
    };
    if let Some(kind) = required {
        if inputs.is_empty() {
            return Err(ErrorKind::EmptyInput);
        }
        for input in inputs {
            let kinds = kb.kinds_of(input.canonical());
            if kinds.is_empty() {
                return Err(ErrorKind::UnknownEntity);
            }
            if !kinds.contains(&kind) {
                return Err(ErrorKind::WrongKind);
            }
        }
    }
    let x = inputs.first().map(EntityName::canonical).unwrap_or("");
    let room_contains = pairs(kb, RelationKind::RoomContains);
    let object_contains = pairs(kb, RelationKind::ObjectContains);

    Ok(match method {
        Method::LabelRoomsByObjects => {
            let wanted: BTreeSet<&str> = inputs.iter().map(EntityName::canonical).collect();
            let mut scored: Vec<(&str, Vec<&str>)> = kb
                .room_classes()
                .map(|r| {
                    let matched: Vec<&str> = wanted
                        .iter()
                        .copied()
                        .filter(|o| room_contains.contains(&(r.canonical(), o)))
                        .collect();
                    (r.canonical(), matched)
                })
                .collect();
            if scored.iter().any(|(_, m)| m.len() == wanted.len()) {
                scored.retain(|(_, m)| m.len() == wanted.len());
            } else {
                scored.retain(|(_, m)| !m.is_empty());
            }
            scored.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
            scored
                .into_iter()
                .map(|(r, m)| (r.to_string(), owned(&m)))
                .collect()
        }
        Method::RoomClassOf => plain(kb.physical_room(x).map(|r| r.class_of.canonical())),
        Method::RoomClassesContaining => plain(room_contains.iter().filter(|p| p.1 == x).map(|p| p.0)),
        Method::RelatedObjects => {
            let mut tags: BTreeMap<&str, &str> = BTreeMap::new();
            for &(a, b) in &object_contains {
                if a == x {
                    tags.insert(b, "containee");
                }
                if b == x {
                    tags.insert(a, "container");
                }
            }
            for (a, b) in pairs(kb, RelationKind::UsedWith) {
                if a == x {
                    tags.insert(b, "used_with");
                }
                if b == x {
                    tags.insert(a, "used_with");
                }
            }
            tags.into_iter()
                .map(|(o, t)| (o.to_string(), vec![t.to_string()]))
                .collect()
        }
        Method::ObjectsWithUtility => plain(
            pairs(kb, RelationKind::HasUtility)
                .into_iter()
                .filter(|p| p.1 == x)
                .map(|p| p.0),
        ),
        Method::ObjectsWithMeaning => {
            let means = pairs(kb, RelationKind::UtilityMeans);
            let mut best: BTreeMap<&str, &str> = BTreeMap::new();
            for (o, u) in pairs(kb, RelationKind::HasUtility) {
                if means.contains(&(u, x)) {
                    best.entry(o).and_modify(|cur| *cur = (*cur).min(u)).or_insert(u);
                }
            }
            best.into_iter()
                .map(|(o, u)| (o.to_string(), vec![u.to_string()]))
                .collect()
        }
        Method::ProbableLocations => {
            let best = best_paths(kb, x, |holder| {
                room_contains
                    .iter()
                    .filter(|p| p.1 == holder)
                    .map(|p| p.0)
                    .collect()
            });
            let mut ranked: Vec<(&str, Vec<&str>)> = best.into_iter().collect();
            ranked.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then(a.0.cmp(b.0)));
            ranked
                .into_iter()
                .map(|(r, p)| (r.to_string(), owned(&p)))
                .collect()
        }
        Method::CharacteristicsOf => {
            let has = pairs(kb, RelationKind::HasCharacteristic);
            best_paths(kb, x, |holder| {
                has.iter().filter(|p| p.0 == holder).map(|p| p.1).collect()
            })
            .into_iter()
            .map(|(c, p)| (c.to_string(), owned(&p)))
            .collect()
        }
        Method::PhysicalRoomsOfClass => plain(
            kb.physical_rooms()
                .filter(|r| r.class_of.canonical() == x)
                .map(|r| r.id.canonical()),
        ),
        Method::ObjectClassesInPhysicalRoom => plain(
            kb.physical_objects()
                .filter(|o| o.located_in.canonical() == x)
                .map(|o| o.class_of.canonical()),
        ),
        Method::PhysicalObjectsOfClass => plain(
            kb.physical_objects()
                .filter(|o| o.class_of.canonical() == x)
                .map(|o| o.id.canonical()),
        ),
        Method::ClassOfPhysicalObject => plain(kb.physical_object(x).map(|o| o.class_of.canonical())),
        Method::AllObjectClasses => plain(kb.object_classes().map(EntityName::canonical)),
        Method::AllUtilities => plain(kb.utilities().map(EntityName::canonical)),
    })
}

/// Physical room id of the goal region in [`random_grid`] worlds.
pub const GRID_GOAL: &str = "goal";

/// A random solvable world: walls scattered over a small grid, the robot on
/// a free cell and a one-cell goal room reachable from it. Returns the world
/// text and a knowledge base declaring the goal room.
pub fn random_grid(seed: u64) -> (String, KnowledgeBase) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let width = rng.gen_range(3..=12);
        let height = rng.gen_range(3..=10);
        let density = rng.gen_range(0.0..0.4);
        let mut grid: Vec<Vec<char>> = (0..height)
            .map(|_| {
                (0..width)
                    .map(|_| if rng.gen_bool(density) { '#' } else { '.' })
                    .collect()
            })
            .collect();
        let free: Vec<(usize, usize)> = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .filter(|&(x, y)| grid[y][x] == '.')
            .collect();
        let Some(&start) = free.choose(&mut rng) else {
            continue;
        };
        let reachable: Vec<(usize, usize)> = free
            .iter()
            .copied()
            .filter(|&c| c != start && grid_bfs(&grid, start, c).is_some())
            .collect();
        let Some(&goal) = reachable.choose(&mut rng) else {
            continue;
        };
        grid[start.1][start.0] = '@';
        grid[goal.1][goal.0] = 'G';

        let mut text = format!("room G {GRID_GOAL}\n\n");
        for row in &grid {
            text.extend(row.iter());
            text.push('\n');
        }
        let conceptual =
            crate::kb::parse_conceptual_document("room_class target_room\n").expect("fixed document");
        let physical =
            crate::kb::parse_physical_document(&format!("physical_room {GRID_GOAL} target_room\n"))
                .expect("fixed document");
        return (
            text,
            build_kb(&conceptual, &physical).expect("fixed knowledge base"),
        );
    }
}

/// Forward breadth-first search expanding neighbors Up, Down, Left, Right
/// and keeping each cell's first discovery. Returns the path as cells.
fn grid_bfs(grid: &[Vec<char>], from: (usize, usize), to: (usize, usize)) -> Option<Vec<(usize, usize)>> {
    let (h, w) = (grid.len() as isize, grid[0].len() as isize);
    let mut parent: BTreeMap<(usize, usize), Option<(usize, usize)>> = BTreeMap::from([(from, None)]);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(cell) = queue.pop_front() {
        if cell == to {
            let mut path = vec![cell];
            let mut cur = cell;
            while let Some(Some(p)) = parent.get(&cur) {
                path.push(*p);
                cur = *p;
            }
            path.reverse();
            return Some(path);
        }
        for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            let (nx, ny) = (cell.0 as isize + dx, cell.1 as isize + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let next = (nx as usize, ny as usize);
            if grid[next.1][next.0] != '#' && !parent.contains_key(&next) {
                parent.insert(next, Some(cell));
                queue.push_back(next);
            }
        }
    }
    None
}

fn world_grid(world: &GridWorld) -> Vec<Vec<char>> {
    (0..world.height())
        .map(|y| {
            (0..world.width())
                .map(|x| if world.is_free(Cell::new(x, y)) { '.' } else { '#' })
                .collect()
        })
        .collect()
}

/// Independent shortest path: forward search, first discovery wins. With
/// neighbors expanded in move order this is also the least move sequence.
pub fn bfs_path(world: &GridWorld, from: Cell, to: Cell) -> Option<Vec<Cell>> {
    grid_bfs(&world_grid(world), (from.x, from.y), (to.x, to.y))
        .map(|p| p.into_iter().map(|(x, y)| Cell::new(x, y)).collect())
}

pub fn bfs_distance(world: &GridWorld, from: Cell, to: Cell) -> Option<usize> {
    bfs_path(world, from, to).map(|p| p.len() - 1)
}
