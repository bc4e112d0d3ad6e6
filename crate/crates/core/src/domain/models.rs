use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{assemble_graph, DomainSpec, Edge, JointAction, JointState, StateGraph, StateId, Variable};
use crate::error::{Error, Result};

const RING_LABELS: [&str; 3] = ["stay", "move-cw", "move-ccw"];

const STAY: u16 = 0;
const CROSS: u16 = 1;
const PICKUP: u16 = 2;
const DROP: u16 = 3;
const GRAB_DOOR: u16 = 4;
const RELEASE_DOOR: u16 = 5;

const TAO_LABELS: [&str; 6] = [
    "stay",
    "cross(d1)",
    "pickup",
    "drop",
    "grab-door(d1)",
    "release-door(d1)",
];

// Turn-and-Open variable layout.
const ROOM: usize = 0; // ROOM + agent
const DOOR: usize = 2; // DOOR + agent
const BALL: usize = 4; // BALL + agent
const LOOSE: usize = 6; // LOOSE + room

/// The dynamics behind a [`DomainSpec`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Ring { n: usize },
    GridLoop { w: usize, h: usize },
    TurnAndOpen { rooms: usize, balls: usize },
    Explicit(ExplicitGraph),
}

/// A hand-written labelled state graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGraph {
    pub states: Vec<String>,
    pub actions: Vec<ExplicitAction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitAction {
    pub a: String,
    pub b: String,
    pub from: u32,
    pub to: u32,
}

impl ExplicitAction {
    pub fn new(a: &str, b: &str, from: u32, to: u32) -> Self {
        ExplicitAction {
            a: a.to_string(),
            b: b.to_string(),
            from,
            to,
        }
    }
}

impl Model {
    pub(crate) fn is_state(&self, x: &[u16]) -> bool {
        match self {
            Model::Ring { .. } | Model::GridLoop { .. } => x[0] != x[1],
            Model::TurnAndOpen { balls, .. } => {
                let total: usize = [x[BALL], x[BALL + 1], x[LOOSE], x[LOOSE + 1]]
                    .iter()
                    .map(|&v| v as usize)
                    .sum();
                total == *balls
            }
            Model::Explicit(g) => (x[0] as usize) < g.states.len(),
        }
    }

    pub(crate) fn apply(&self, x: &[u16], action: JointAction) -> Option<Vec<u16>> {
        match self {
            Model::Ring { n } => ring_step(*n, x, action),
            Model::GridLoop { w, h } => ring_step(2 * (w + h) - 4, x, action),
            Model::TurnAndOpen { .. } => tao_step(x, action),
            Model::Explicit(_) => None,
        }
    }

    pub(crate) fn describe(&self, x: &[u16]) -> String {
        match self {
            Model::Ring { .. } | Model::GridLoop { .. } => format!("({},{})", x[0] + 1, x[1] + 1),
            Model::TurnAndOpen { .. } => {
                format!(
                    "A:r{}{}{} B:r{}{}{} loose:[{},{}]",
                    x[ROOM] + 1,
                    if x[DOOR] == 1 { " door" } else { "" },
                    if x[BALL] == 1 { " ball" } else { "" },
                    x[ROOM + 1] + 1,
                    if x[DOOR + 1] == 1 { " door" } else { "" },
                    if x[BALL + 1] == 1 { " ball" } else { "" },
                    x[LOOSE],
                    x[LOOSE + 1],
                )
            }
            Model::Explicit(g) => g.states[x[0] as usize].clone(),
        }
    }
}

fn ring_step(n: usize, x: &[u16], action: JointAction) -> Option<Vec<u16>> {
    let moved = |p: u16, label: u16| -> u16 {
        let p = p as usize;
        (match label {
            0 => p,
            1 => (p + 1) % n,
            _ => (p + n - 1) % n,
        }) as u16
    };
    let (a, b) = (x[0], x[1]);
    let (na, nb) = (moved(a, action.a), moved(b, action.b));
    // No shared cell, no head-on swap.
    if na == nb || (na == b && nb == a) {
        return None;
    }
    Some(vec![na, nb])
}

fn tao_step(x: &[u16], action: JointAction) -> Option<Vec<u16>> {
    let labels = [action.a, action.b];
    let mut next = x.to_vec();
    let mut loose = [i32::from(x[LOOSE]), i32::from(x[LOOSE + 1])];
    for agent in 0..2 {
        let partner = 1 - agent;
        let holds_door = x[DOOR + agent] == 1;
        let holds_ball = x[BALL + agent] == 1;
        let room = x[ROOM + agent] as usize;
        match labels[agent] {
            STAY => {}
            CROSS => {
                let partner_holds = x[DOOR + partner] == 1 && labels[partner] != RELEASE_DOOR;
                if !(holds_door || (holds_ball && partner_holds)) {
                    return None;
                }
                next[ROOM + agent] = 1 - x[ROOM + agent];
            }
            PICKUP => {
                if holds_ball || holds_door || x[DOOR + partner] == 1 {
                    return None;
                }
                // Checked after both agents have moved, so a ball dropped in
                // the same step can be picked up.
                loose[room] -= 1;
                next[BALL + agent] = 1;
            }
            DROP => {
                if !holds_ball {
                    return None;
                }
                loose[room] += 1;
                next[BALL + agent] = 0;
            }
            GRAB_DOOR => {
                if holds_ball || holds_door {
                    return None;
                }
                next[DOOR + agent] = 1;
            }
            RELEASE_DOOR => {
                if !holds_door {
                    return None;
                }
                next[DOOR + agent] = 0;
            }
            _ => return None,
        }
    }
    for (room, &count) in loose.iter().enumerate() {
        next[LOOSE + room] = u16::try_from(count).ok()?;
    }
    Some(next)
}

pub(super) fn ring(n: usize) -> Result<DomainSpec> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("ring needs n >= 3, got {n}")));
    }
    let static_facts = (0..n)
        .map(|r| format!("adjacent(r{},r{})", r + 1, (r + 1) % n + 1))
        .collect();
    Ok(DomainSpec {
        name: format!("ring-{n}"),
        static_facts,
        variables: vec![Variable::new("pos-a", n), Variable::new("pos-b", n)],
        catalogs: ring_catalogs(),
        model: Model::Ring { n },
    })
}

fn ring_catalogs() -> [Vec<String>; 2] {
    let labels: Vec<String> = RING_LABELS.iter().map(|s| s.to_string()).collect();
    [labels.clone(), labels]
}

/// Perimeter cells of a `w` x `h` grid, clockwise from the top-left corner.
pub fn perimeter_cells(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::with_capacity(2 * (w + h) - 4);
    cells.extend((0..w).map(|x| (x, 0)));
    cells.extend((1..h).map(|y| (w - 1, y)));
    cells.extend((0..w - 1).rev().map(|x| (x, h - 1)));
    cells.extend((1..h - 1).rev().map(|y| (0, y)));
    cells
}

pub(super) fn grid_loop(w: usize, h: usize) -> Result<DomainSpec> {
    if w < 2 || h < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid loop needs w >= 2 and h >= 2, got {w}x{h}"
        )));
    }
    let cells = perimeter_cells(w, h);
    let p = cells.len();
    let mut static_facts: Vec<String> = cells
        .iter()
        .enumerate()
        .map(|(i, (x, y))| format!("cell({})=({x},{y})", i + 1))
        .collect();
    static_facts.extend((0..p).map(|i| format!("adjacent({},{})", i + 1, (i + 1) % p + 1)));
    Ok(DomainSpec {
        name: format!("grid-loop-{w}x{h}"),
        static_facts,
        variables: vec![Variable::new("cell-a", p), Variable::new("cell-b", p)],
        catalogs: ring_catalogs(),
        model: Model::GridLoop { w, h },
    })
}

pub(super) fn turn_and_open(rooms: usize, balls: usize) -> Result<DomainSpec> {
    if rooms != 2 {
        return Err(Error::UnsupportedParameter(format!(
            "turn-and-open supports exactly 2 rooms, got {rooms}"
        )));
    }
    let labels: Vec<String> = TAO_LABELS.iter().map(|s| s.to_string()).collect();
    Ok(DomainSpec {
        name: format!("turn-and-open-{rooms}r-{balls}b"),
        static_facts: vec![
            "room(r1)".into(),
            "room(r2)".into(),
            "door(d1,r1,r2)".into(),
            format!("balls({balls})"),
        ],
        variables: vec![
            Variable::new("room-a", 2),
            Variable::new("room-b", 2),
            Variable::new("holds-door-a", 2),
            Variable::new("holds-door-b", 2),
            Variable::new("holds-ball-a", 2),
            Variable::new("holds-ball-b", 2),
            Variable::new("loose-r1", balls + 1),
            Variable::new("loose-r2", balls + 1),
        ],
        catalogs: [labels.clone(), labels],
        model: Model::TurnAndOpen { rooms, balls },
    })
}

pub(super) fn explicit(graph: ExplicitGraph) -> Result<DomainSpec> {
    let n = graph.states.len();
    if n == 0 {
        return Err(Error::InvalidParameter("explicit graph has no states".into()));
    }
    let mut catalogs: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for act in &graph.actions {
        if act.from as usize >= n || act.to as usize >= n {
            return Err(Error::InvalidParameter(format!(
                "action ({}, {}) references state outside 0..{n}",
                act.a, act.b
            )));
        }
        for (catalog, label) in catalogs.iter_mut().zip([&act.a, &act.b]) {
            if !catalog.contains(label) {
                catalog.push(label.clone());
            }
        }
    }
    Ok(DomainSpec {
        name: "explicit".into(),
        static_facts: Vec::new(),
        variables: vec![Variable::new("node", n)],
        catalogs,
        model: Model::Explicit(graph),
    })
}

pub(super) fn explicit_state_graph(spec: &DomainSpec, graph: &ExplicitGraph) -> Result<StateGraph> {
    let n = graph.states.len();
    let states: Vec<JointState> = (0..n)
        .map(|i| JointState {
            id: StateId::from_index(i),
            assignment: vec![i as u16],
        })
        .collect();
    let label_of = |catalog: &[String], l: &str| catalog.iter().position(|c| c == l).unwrap() as u16;

    let mut by_source: HashMap<(u32, JointAction), u32> = HashMap::new();
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new(); n];
    for act in &graph.actions {
        let action = JointAction::new(label_of(&spec.catalogs[0], &act.a), label_of(&spec.catalogs[1], &act.b));
        match by_source.get(&(act.from, action)) {
            Some(&to) if to == act.to => continue,
            Some(_) => {
                return Err(Error::Nondeterministic {
                    state: StateId(act.from),
                    a: act.a.clone(),
                    b: act.b.clone(),
                })
            }
            None => {}
        }
        let out = &mut edges[act.from as usize];
        if let Some(clash) = out.iter().find(|e| e.to == StateId(act.to)) {
            return Err(Error::AmbiguousActions {
                state: StateId(act.from),
                a1: spec.catalogs[0][clash.action.a as usize].clone(),
                b1: spec.catalogs[1][clash.action.b as usize].clone(),
                a2: act.a.clone(),
                b2: act.b.clone(),
                successor: StateId(act.to),
            });
        }
        by_source.insert((act.from, action), act.to);
        out.push(Edge {
            action,
            to: StateId(act.to),
        });
    }
    for out in &mut edges {
        out.sort_by_key(|e| e.action);
    }
    Ok(assemble_graph(spec, states, edges))
}
