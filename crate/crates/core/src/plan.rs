//! Optimal costs, the optimal-plan DAG of an instance, and plan enumeration.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;

use crate::domain::{Edge, Instance, JointAction, StateGraph, StateId};
use crate::error::{Error, Result};

/// Default bound on explicit plan enumeration.
pub const DEFAULT_PLAN_CAP: usize = 10_000;

const UNREACHABLE: u32 = u32::MAX;

/// Optimal joint-plan cost between every ordered pair of states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceTable {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Optimal cost from `s` to `t`, `None` when `t` is unreachable.
    pub fn get(&self, s: StateId, t: StateId) -> Option<u32> {
        match self.dist[s.index() * self.n + t.index()] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn reachable(&self, s: StateId, t: StateId) -> bool {
        self.get(s, t).is_some()
    }

    /// Largest finite distance in the table.
    pub fn diameter(&self) -> u32 {
        self.dist
            .iter()
            .copied()
            .filter(|&d| d != UNREACHABLE)
            .max()
            .unwrap_or(0)
    }
}

/// Breadth-first search from every source, one source per rayon task.
pub fn all_pairs_distances(graph: &StateGraph) -> DistanceTable {
    let n = graph.len();
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut row = vec![UNREACHABLE; n];
            let mut queue = VecDeque::new();
            row[s] = 0;
            queue.push_back(StateId::from_index(s));
            while let Some(u) = queue.pop_front() {
                let next = row[u.index()] + 1;
                for e in graph.successors(u) {
                    if row[e.to.index()] == UNREACHABLE {
                        row[e.to.index()] = next;
                        queue.push_back(e.to);
                    }
                }
            }
            row
        })
        .collect();
    DistanceTable { n, dist: rows.concat() }
}

/// An optimal plan as a state sequence plus the joint actions between states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plan {
    pub states: Vec<StateId>,
    pub actions: Vec<JointAction>,
}

impl Plan {
    pub fn instance(&self) -> Instance {
        Instance::new(self.states[0], *self.states.last().unwrap())
    }

    /// Number of joint actions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// States strictly between the initial and goal state.
    pub fn intermediates(&self) -> &[StateId] {
        if self.states.len() <= 2 {
            &[]
        } else {
            &self.states[1..self.states.len() - 1]
        }
    }

    pub fn a_labels(&self) -> impl Iterator<Item = u16> + '_ {
        self.actions.iter().map(|a| a.a)
    }

    pub fn b_labels(&self) -> impl Iterator<Item = u16> + '_ {
        self.actions.iter().map(|a| a.b)
    }

    /// Rebuild a plan from its state sequence.
    pub fn from_states(graph: &StateGraph, states: Vec<StateId>) -> Option<Plan> {
        let actions = states
            .windows(2)
            .map(|w| graph.action_between(w[0], w[1]))
            .collect::<Option<Vec<_>>>()?;
        Some(Plan { states, actions })
    }
}

/// Every optimal plan of one instance, in layered form.
///
/// Node `u` sits in layer `dist(s_I, u)`; an edge `u -> v` is kept when it
/// advances one layer and brings the goal one step closer.
#[derive(Clone, Debug)]
pub struct PlanDag {
    pub instance: Instance,
    pub length: u32,
    layers: Vec<Vec<StateId>>,
    succ: HashMap<StateId, Vec<Edge>>,
}

impl PlanDag {
    pub fn layers(&self) -> &[Vec<StateId>] {
        &self.layers
    }

    pub fn nodes(&self) -> impl Iterator<Item = StateId> + '_ {
        self.layers.iter().flatten().copied()
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.succ.contains_key(&s)
    }

    /// DAG successors of `u`, ordered by target id.
    pub fn successors(&self, u: StateId) -> &[Edge] {
        self.succ.get(&u).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn edge_count(&self) -> usize {
        self.succ.values().map(Vec::len).sum()
    }

    /// Number of optimal plans, saturating.
    pub fn count_plans(&self) -> u128 {
        let mut paths: HashMap<StateId, u128> = HashMap::new();
        for layer in self.layers.iter().rev() {
            for &u in layer {
                let c = if u == self.instance.goal {
                    1
                } else {
                    self.successors(u)
                        .iter()
                        .fold(0u128, |acc, e| acc.saturating_add(paths[&e.to]))
                };
                paths.insert(u, c);
            }
        }
        paths[&self.instance.initial]
    }
}

pub fn plan_dag(graph: &StateGraph, dist: &DistanceTable, inst: Instance) -> Result<PlanDag> {
    let Instance { initial, goal } = inst;
    let length = dist.get(initial, goal).ok_or(Error::NoPlan {
        from: initial,
        to: goal,
    })?;

    let mut layers: Vec<Vec<StateId>> = vec![vec![initial]];
    let mut succ: HashMap<StateId, Vec<Edge>> = HashMap::new();
    succ.insert(initial, Vec::new());
    for depth in 0..length {
        let mut next_layer = Vec::new();
        for &u in &layers[depth as usize] {
            let mut out: Vec<Edge> = graph
                .successors(u)
                .iter()
                .filter(|e| {
                    dist.get(initial, e.to) == Some(depth + 1) && dist.get(e.to, goal) == Some(length - depth - 1)
                })
                .copied()
                .collect();
            out.sort_by_key(|e| e.to);
            for e in &out {
                if let std::collections::hash_map::Entry::Vacant(slot) = succ.entry(e.to) {
                    slot.insert(Vec::new());
                    next_layer.push(e.to);
                }
            }
            succ.insert(u, out);
        }
        next_layer.sort();
        layers.push(next_layer);
    }

    Ok(PlanDag {
        instance: inst,
        length,
        layers,
        succ,
    })
}

/// All optimal plans, lexicographic by state-id sequence.
pub fn enumerate_optimal_plans(dag: &PlanDag, cap: usize) -> Result<Vec<Plan>> {
    let count = dag.count_plans();
    if count > cap as u128 {
        return Err(Error::PlanSetTooLarge {
            cap,
            from: dag.instance.initial,
            to: dag.instance.goal,
        });
    }
    let mut plans = Vec::with_capacity(count as usize);
    let mut states = vec![dag.instance.initial];
    let mut actions = Vec::new();
    walk(dag, &mut states, &mut actions, &mut plans);
    Ok(plans)
}

fn walk(dag: &PlanDag, states: &mut Vec<StateId>, actions: &mut Vec<JointAction>, out: &mut Vec<Plan>) {
    let u = *states.last().unwrap();
    if actions.len() == dag.length as usize {
        out.push(Plan {
            states: states.clone(),
            actions: actions.clone(),
        });
        return;
    }
    for e in dag.successors(u) {
        states.push(e.to);
        actions.push(e.action);
        walk(dag, states, actions, out);
        states.pop();
        actions.pop();
    }
}

/// Convenience: DAG plus enumeration.
pub fn optimal_plans(graph: &StateGraph, dist: &DistanceTable, inst: Instance, cap: usize) -> Result<Vec<Plan>> {
    enumerate_optimal_plans(&plan_dag(graph, dist, inst)?, cap)
}

/// Whether `seq` is a prefix of some optimal plan of `inst`, decided from
/// distances alone.
pub fn is_optimal_prefix(dist: &DistanceTable, inst: Instance, seq: &[StateId]) -> bool {
    let Some(length) = dist.get(inst.initial, inst.goal) else {
        return false;
    };
    if seq.first() != Some(&inst.initial) || seq.len() > length as usize + 1 {
        return false;
    }
    let layered = seq.iter().enumerate().all(|(i, &q)| {
        dist.get(inst.initial, q) == Some(i as u32) && dist.get(q, inst.goal) == Some(length - i as u32)
    });
    // Consecutive states are distinct by layering, so distance 1 means a single joint action.
    layered && seq.windows(2).all(|w| dist.get(w[0], w[1]) == Some(1))
}
