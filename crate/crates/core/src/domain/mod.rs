//! Two-agent domain models and their explicit joint state graphs.
//!
//! A [`DomainSpec`] describes the dynamic variables, the per-agent action
//! catalogs and the joint-validity rule of a domain. [`build_state_graph`]
//! enumerates every full state in canonical (lexicographic) order and
//! materializes every valid joint action as an edge.

mod file;
mod models;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{load_domain, parse_domain, render_domain, save_domain, DomainFile};
pub use models::{perimeter_cells, ExplicitAction, ExplicitGraph, Model};

/// Dense index of a joint state inside a [`StateGraph`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Self {
        StateId(index as u32)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The two agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Agent {
    A,
    B,
}

impl Agent {
    pub fn index(self) -> usize {
        match self {
            Agent::A => 0,
            Agent::B => 1,
        }
    }
}

/// Index of an action label inside one agent's catalog.
pub type LabelId = u16;

/// A pair of per-agent action labels executed in the same step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointAction {
    pub a: LabelId,
    pub b: LabelId,
}

impl JointAction {
    pub fn new(a: LabelId, b: LabelId) -> Self {
        JointAction { a, b }
    }

    pub fn label(self, agent: Agent) -> LabelId {
        match agent {
            Agent::A => self.a,
            Agent::B => self.b,
        }
    }
}

/// A dynamic state variable ranging over `0..size`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub size: u16,
}

impl Variable {
    pub(crate) fn new(name: impl Into<String>, size: usize) -> Self {
        Variable {
            name: name.into(),
            size: size as u16,
        }
    }
}

/// Factored description of a two-agent domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    pub name: String,
    /// Static facts, fixed for every state of the domain.
    pub static_facts: Vec<String>,
    /// Dynamic variables; a full state assigns every one of them.
    pub variables: Vec<Variable>,
    /// Action labels of agent A and agent B.
    pub catalogs: [Vec<String>; 2],
    pub model: Model,
}

impl DomainSpec {
    /// Ring of `n` rooms; agents stay or move to a neighbouring room and may
    /// neither share a room nor swap rooms in one step.
    pub fn ring(n: usize) -> Result<Self> {
        models::ring(n)
    }

    /// Grid of `w` x `h` cells whose interior is blocked, leaving a loop of
    /// `2(w + h) - 4` perimeter cells.
    pub fn grid_loop(w: usize, h: usize) -> Result<Self> {
        models::grid_loop(w, h)
    }

    /// Turn-and-Open with two rooms joined by one door and `balls`
    /// indistinguishable balls.
    pub fn turn_and_open(rooms: usize, balls: usize) -> Result<Self> {
        models::turn_and_open(rooms, balls)
    }

    /// Domain given directly as a labelled graph.
    pub fn explicit(graph: ExplicitGraph) -> Result<Self> {
        models::explicit(graph)
    }

    pub fn catalog(&self, agent: Agent) -> &[String] {
        &self.catalogs[agent.index()]
    }

    /// Whether a full assignment is a state of the domain.
    pub fn is_state(&self, assignment: &[u16]) -> bool {
        self.model.is_state(assignment)
    }

    /// Successor of `state` under the joint action, or `None` when the
    /// joint-validity rule forbids it.
    pub fn apply(&self, state: &[u16], action: JointAction) -> Option<Vec<u16>> {
        self.model.apply(state, action)
    }
}

/// A full state with its dense id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointState {
    pub id: StateId,
    pub assignment: Vec<u16>,
}

/// An outgoing edge of the state graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub action: JointAction,
    pub to: StateId,
}

/// A planning task on the state graph: reach `goal` from `initial`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub initial: StateId,
    pub goal: StateId,
}

impl Instance {
    pub fn new(initial: StateId, goal: StateId) -> Self {
        Instance { initial, goal }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} -> {})", self.initial, self.goal)
    }
}

/// Explicit joint state graph of a domain. Immutable once built.
#[derive(Clone, Debug)]
pub struct StateGraph {
    spec: DomainSpec,
    states: Vec<JointState>,
    edges: Vec<Vec<Edge>>,
    index: HashMap<Vec<u16>, StateId>,
}

impl StateGraph {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[JointState] {
        &self.states
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).map(StateId::from_index)
    }

    pub fn state(&self, id: StateId) -> &JointState {
        &self.states[id.index()]
    }

    /// Outgoing edges of `id`, sorted by joint action.
    pub fn successors(&self, id: StateId) -> &[Edge] {
        &self.edges[id.index()]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Successor reached from `from` by `action`, if that joint action is valid there.
    pub fn step(&self, from: StateId, action: JointAction) -> Option<StateId> {
        self.successors(from).iter().find(|e| e.action == action).map(|e| e.to)
    }

    /// The joint action leading from `from` to `to`, if the two are adjacent.
    pub fn action_between(&self, from: StateId, to: StateId) -> Option<JointAction> {
        self.successors(from).iter().find(|e| e.to == to).map(|e| e.action)
    }

    pub fn find(&self, assignment: &[u16]) -> Option<StateId> {
        self.index.get(assignment).copied()
    }

    pub fn label(&self, agent: Agent, label: LabelId) -> &str {
        &self.spec.catalogs[agent.index()][label as usize]
    }

    pub fn label_id(&self, agent: Agent, name: &str) -> Option<LabelId> {
        self.spec.catalogs[agent.index()]
            .iter()
            .position(|l| l == name)
            .map(|i| i as LabelId)
    }

    /// Human-readable rendering of a state's assignment.
    pub fn describe(&self, id: StateId) -> String {
        self.spec.model.describe(&self.state(id).assignment)
    }

    /// All ordered pairs `(s, t)` with `s != t`, in id order.
    pub fn ordered_pairs(&self) -> impl Iterator<Item = Instance> + '_ {
        let n = self.len();
        (0..n).flat_map(move |s| {
            (0..n)
                .filter(move |&t| t != s)
                .map(move |t| Instance::new(StateId::from_index(s), StateId::from_index(t)))
        })
    }
}

/// Enumerate all full states of `spec` and materialize every valid joint action.
pub fn build_state_graph(spec: &DomainSpec) -> Result<StateGraph> {
    if let Model::Explicit(graph) = &spec.model {
        return models::explicit_state_graph(spec, graph);
    }

    let sizes: Vec<u16> = spec.variables.iter().map(|v| v.size).collect();
    let mut states = Vec::new();
    let mut index = HashMap::new();
    let mut current = vec![0u16; sizes.len()];
    loop {
        if spec.is_state(&current) {
            let id = StateId::from_index(states.len());
            index.insert(current.clone(), id);
            states.push(JointState {
                id,
                assignment: current.clone(),
            });
        }
        if !advance(&mut current, &sizes) {
            break;
        }
    }

    let n_a = spec.catalogs[0].len() as LabelId;
    let n_b = spec.catalogs[1].len() as LabelId;
    let mut edges = Vec::with_capacity(states.len());
    for state in &states {
        let mut out: Vec<Edge> = Vec::new();
        for a in 0..n_a {
            for b in 0..n_b {
                let action = JointAction::new(a, b);
                let Some(next) = spec.apply(&state.assignment, action) else {
                    continue;
                };
                let to = *index.get(&next).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "action ({}, {}) at state {} leaves the state space",
                        spec.catalogs[0][a as usize], spec.catalogs[1][b as usize], state.id
                    ))
                })?;
                if let Some(clash) = out.iter().find(|e| e.to == to) {
                    return Err(Error::AmbiguousActions {
                        state: state.id,
                        a1: spec.catalogs[0][clash.action.a as usize].clone(),
                        b1: spec.catalogs[1][clash.action.b as usize].clone(),
                        a2: spec.catalogs[0][a as usize].clone(),
                        b2: spec.catalogs[1][b as usize].clone(),
                        successor: to,
                    });
                }
                out.push(Edge { action, to });
            }
        }
        edges.push(out);
    }

    Ok(StateGraph {
        spec: spec.clone(),
        states,
        edges,
        index,
    })
}

// Odometer increment, last variable fastest; false once every combination was visited.
fn advance(current: &mut [u16], sizes: &[u16]) -> bool {
    for i in (0..current.len()).rev() {
        current[i] += 1;
        if current[i] < sizes[i] {
            return true;
        }
        current[i] = 0;
    }
    false
}

pub(crate) fn assemble_graph(spec: &DomainSpec, states: Vec<JointState>, edges: Vec<Vec<Edge>>) -> StateGraph {
    let index = states.iter().map(|s| (s.assignment.clone(), s.id)).collect();
    StateGraph {
        spec: spec.clone(),
        states,
        edges,
        index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(g: &StateGraph, a: u16, b: u16) -> StateId {
        g.find(&[a - 1, b - 1]).unwrap()
    }

    #[test]
    fn ring3_has_six_states() {
        let g = build_state_graph(&DomainSpec::ring(3).unwrap()).unwrap();
        assert_eq!(g.len(), 6);
        assert!(g.find(&[0, 0]).is_none());
    }

    #[test]
    fn ring3_successor_count_matches_brute_force() {
        let spec = DomainSpec::ring(3).unwrap();
        let g = build_state_graph(&spec).unwrap();
        // Brute force: every label pair, moved positions must differ and must not swap.
        let moves = |p: i32, l: usize| -> i32 {
            match l {
                0 => p,
                1 => (p + 1).rem_euclid(3),
                _ => (p - 1).rem_euclid(3),
            }
        };
        for s in g.states() {
            let (pa, pb) = (s.assignment[0] as i32, s.assignment[1] as i32);
            let mut count = 0;
            for la in 0..3 {
                for lb in 0..3 {
                    let (na, nb) = (moves(pa, la), moves(pb, lb));
                    if na != nb && !(na == pb && nb == pa) {
                        count += 1;
                    }
                }
            }
            assert_eq!(g.successors(s.id).len(), count);
            assert_eq!(count, 5);
        }
        assert_eq!(g.successors(room(&g, 1, 2)).len(), 5);
    }

    #[test]
    fn stay_stay_is_always_a_self_loop() {
        for spec in [
            DomainSpec::ring(5).unwrap(),
            DomainSpec::grid_loop(3, 4).unwrap(),
            DomainSpec::turn_and_open(2, 2).unwrap(),
        ] {
            let g = build_state_graph(&spec).unwrap();
            for s in g.state_ids() {
                assert_eq!(g.step(s, JointAction::new(0, 0)), Some(s));
            }
        }
    }

    #[test]
    fn table1_state_counts() {
        let tao = [16, 64, 128, 192, 256];
        for (balls, expected) in tao.iter().enumerate() {
            let g = build_state_graph(&DomainSpec::turn_and_open(2, balls).unwrap()).unwrap();
            assert_eq!(g.len(), *expected, "T&O balls={balls}");
        }
        for ((w, h), expected) in [((2, 2), 12), ((3, 3), 56), ((3, 4), 90), ((4, 4), 132), ((4, 5), 182)] {
            let g = build_state_graph(&DomainSpec::grid_loop(w, h).unwrap()).unwrap();
            assert_eq!(g.len(), expected, "GW {w}x{h}");
        }
    }

    #[test]
    fn turn_and_open_closed_form_count() {
        for balls in 0..=6usize {
            let mut multiset = 0;
            for a in 0..=1usize {
                for b in 0..=1usize {
                    if a + b <= balls {
                        multiset += balls - a - b + 1;
                    }
                }
            }
            let g = build_state_graph(&DomainSpec::turn_and_open(2, balls).unwrap()).unwrap();
            assert_eq!(g.len(), 16 * multiset);
        }
    }

    #[test]
    fn canonical_enumeration_is_stable() {
        let spec = DomainSpec::turn_and_open(2, 2).unwrap();
        let g1 = build_state_graph(&spec).unwrap();
        let g2 = build_state_graph(&spec).unwrap();
        assert_eq!(g1.states(), g2.states());
        for w in g1.states().windows(2) {
            assert!(w[0].assignment < w[1].assignment);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(DomainSpec::ring(2), Err(Error::InvalidParameter(_))));
        assert!(matches!(DomainSpec::grid_loop(1, 4), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            DomainSpec::turn_and_open(3, 1),
            Err(Error::UnsupportedParameter(_))
        ));
    }

    #[test]
    fn grid_perimeter_length() {
        assert_eq!(perimeter_cells(3, 4).len(), 10);
        assert_eq!(perimeter_cells(2, 2).len(), 4);
        let spec = DomainSpec::grid_loop(3, 4).unwrap();
        assert_eq!(spec.variables[0].size, 10);
    }

    #[test]
    fn ambiguous_explicit_actions_are_rejected() {
        let graph = ExplicitGraph {
            states: vec!["x".into(), "y".into()],
            actions: vec![
                ExplicitAction::new("go", "stay", 0, 1),
                ExplicitAction::new("stay", "go", 0, 1),
            ],
        };
        let spec = DomainSpec::explicit(graph).unwrap();
        let err = build_state_graph(&spec).unwrap_err();
        assert!(
            matches!(err, Error::AmbiguousActions { state: StateId(0), .. }),
            "{err}"
        );
    }
}
