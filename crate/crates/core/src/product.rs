//! Plan-set questions answered on products of the plan DAG.
//!
//! An optimal plan is fixed by its pair of label streams, and A's stream
//! from one plan mixes with B's stream from another exactly when that pair
//! is again an optimal plan. So each question here is a search over a few
//! copies of the DAG run in lockstep, and the plans are never listed.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::domain::{Agent, Instance, JointAction, LabelId, StateId};
use crate::plan::{Plan, PlanDag};

type Node = u32;

const DEAD: Node = Node::MAX;

/// A plan DAG with dense node ids, read as a deterministic automaton over
/// joint actions. Node 0 is the initial state.
#[derive(Clone, Debug)]
pub struct PlanAutomaton {
    instance: Instance,
    length: usize,
    states: Vec<StateId>,
    layers: Vec<Vec<Node>>,
    out: Vec<Vec<(JointAction, Node)>>,
}

impl PlanAutomaton {
    pub fn new(dag: &PlanDag) -> Self {
        let mut id: HashMap<StateId, Node> = HashMap::new();
        let mut states = Vec::new();
        let mut layers = Vec::new();
        for layer in dag.layers() {
            let mut ids = Vec::with_capacity(layer.len());
            for &s in layer {
                id.insert(s, states.len() as Node);
                ids.push(states.len() as Node);
                states.push(s);
            }
            layers.push(ids);
        }
        let out = states
            .iter()
            .map(|&s| dag.successors(s).iter().map(|e| (e.action, id[&e.to])).collect())
            .collect();
        PlanAutomaton {
            instance: dag.instance,
            length: dag.length as usize,
            states,
            layers,
            out,
        }
    }

    pub fn instance(&self) -> Instance {
        self.instance
    }

    pub fn length(&self) -> usize {
        self.length
    }

    fn step(&self, u: Node, a: LabelId, b: LabelId) -> Node {
        if u == DEAD {
            return DEAD;
        }
        self.out[u as usize]
            .iter()
            .find(|(act, _)| act.a == a && act.b == b)
            .map_or(DEAD, |&(_, v)| v)
    }

    /// Whether the optimal plans need coordination: no plan exists whose A
    /// stream mixes with every B stream and whose B stream mixes with every
    /// A stream.
    pub fn has_rc(&self) -> bool {
        !(self.has_universal_stream(Agent::A) && self.has_universal_stream(Agent::B))
    }

    /// Whether some stream of `agent` forms an optimal plan with every
    /// stream of the partner.
    pub fn has_universal_stream(&self, agent: Agent) -> bool {
        let mut search = StreamSearch {
            auto: self,
            agent,
            subsets: HashMap::new(),
            members: Vec::new(),
            moves: HashMap::new(),
            seen: HashSet::new(),
        };
        let start = search.subset(vec![0]);
        search.run(0, vec![(0, start)])
    }

    /// Pairs `(x, y)` of distinct nodes at equal depth such that no plan
    /// through `x` and plan through `y` can be mixed both ways.
    pub fn via_conflicts(&self) -> BTreeSet<(StateId, StateId)> {
        let compatible = self.compatible_pairs();
        let mut out = BTreeSet::new();
        for depth in 1..self.length {
            let layer = &self.layers[depth];
            for (i, &x) in layer.iter().enumerate() {
                for &y in &layer[i + 1..] {
                    if !compatible.contains(&(x, y)) {
                        let (m, n) = (self.states[x as usize], self.states[y as usize]);
                        out.insert(if m < n { (m, n) } else { (n, m) });
                    }
                }
            }
        }
        out
    }

    // Node pairs (x, y) visited by plans p, q with (p_A, q_B) and (q_A, p_B)
    // both optimal plans: forward over 4-tuples, then keep tuples that reach
    // the goal.
    fn compatible_pairs(&self) -> HashSet<(Node, Node)> {
        type Tuple = [Node; 4];
        let mut layers: Vec<Vec<Tuple>> = vec![vec![[0; 4]]];
        let mut succ: Vec<Vec<Vec<u32>>> = Vec::new();
        for depth in 0..self.length {
            let mut index: HashMap<Tuple, u32> = HashMap::new();
            let mut next: Vec<Tuple> = Vec::new();
            let mut edges = Vec::with_capacity(layers[depth].len());
            for &[u1, u2, u3, u4] in &layers[depth] {
                let mut targets = Vec::new();
                for &(e1, v1) in &self.out[u1 as usize] {
                    for &(e2, v2) in &self.out[u2 as usize] {
                        let v3 = self.step(u3, e1.a, e2.b);
                        let v4 = self.step(u4, e2.a, e1.b);
                        if v3 == DEAD || v4 == DEAD {
                            continue;
                        }
                        let t = [v1, v2, v3, v4];
                        let k = *index.entry(t).or_insert_with(|| {
                            next.push(t);
                            next.len() as u32 - 1
                        });
                        targets.push(k);
                    }
                }
                edges.push(targets);
            }
            succ.push(edges);
            layers.push(next);
        }

        let mut pairs = HashSet::new();
        // Every tuple in the last layer is the goal four times over.
        let mut alive = vec![true; layers[self.length].len()];
        for depth in (0..self.length).rev() {
            let here: Vec<bool> = succ[depth]
                .iter()
                .map(|targets| targets.iter().any(|&k| alive[k as usize]))
                .collect();
            for (t, &ok) in layers[depth].iter().zip(&here) {
                if ok {
                    pairs.insert((t[0], t[1]));
                    pairs.insert((t[1], t[0]));
                }
            }
            alive = here;
        }
        pairs
    }

    /// Two optimal plans with the same run-length block path, at least one
    /// of whose mixes fails. `block_of` is indexed by state id.
    pub fn find_violation(&self, block_of: &[u32]) -> Option<(Plan, Plan)> {
        let mut search = ViolationSearch {
            auto: self,
            block_of,
            seen: HashSet::new(),
            path: Vec::new(),
        };
        let start = PairState {
            u1: 0,
            u2: 0,
            mix: Some((0, 0)),
            sync: Sync::default(),
        };
        if !search.run(0, start) {
            return None;
        }
        let plan = |first: bool| {
            let mut u: Node = 0;
            let mut states = vec![self.states[0]];
            let mut actions = Vec::new();
            for &(i, j) in &search.path {
                let (action, v) = self.out[u as usize][if first { i } else { j }];
                states.push(self.states[v as usize]);
                actions.push(action);
                u = v;
            }
            Plan { states, actions }
        };
        Some((plan(true), plan(false)))
    }
}

struct StreamSearch<'a> {
    auto: &'a PlanAutomaton,
    agent: Agent,
    subsets: HashMap<Vec<Node>, u32>,
    members: Vec<Vec<Node>>,
    // Partner moves out of a subset: (partner label, successor subset).
    moves: HashMap<u32, Vec<(LabelId, u32)>>,
    seen: HashSet<Vec<(Node, u32)>>,
}

impl StreamSearch<'_> {
    fn subset(&mut self, mut nodes: Vec<Node>) -> u32 {
        nodes.sort_unstable();
        nodes.dedup();
        if let Some(&id) = self.subsets.get(&nodes) {
            return id;
        }
        let id = self.members.len() as u32;
        self.subsets.insert(nodes.clone(), id);
        self.members.push(nodes);
        id
    }

    fn partner_moves(&mut self, s: u32) -> Vec<(LabelId, u32)> {
        if let Some(m) = self.moves.get(&s) {
            return m.clone();
        }
        let partner = match self.agent {
            Agent::A => Agent::B,
            Agent::B => Agent::A,
        };
        let mut by_label: std::collections::BTreeMap<LabelId, Vec<Node>> = Default::default();
        for &u in &self.members[s as usize] {
            for &(act, v) in &self.auto.out[u as usize] {
                by_label.entry(act.label(partner)).or_default().push(v);
            }
        }
        let moves: Vec<(LabelId, u32)> = by_label.into_iter().map(|(l, nodes)| (l, self.subset(nodes))).collect();
        self.moves.insert(s, moves.clone());
        moves
    }

    // `conf` pairs the node reached by (own prefix, partner prefix) with the
    // set of nodes the partner prefix alone can reach, over every partner
    // prefix of some optimal plan.
    fn run(&mut self, depth: usize, conf: Vec<(Node, u32)>) -> bool {
        if depth == self.auto.length {
            return true;
        }
        let own: BTreeSet<LabelId> = self.auto.out[conf[0].0 as usize]
            .iter()
            .map(|(act, _)| act.label(self.agent))
            .collect();
        for label in own {
            let mut next = Vec::new();
            let mut ok = true;
            'outer: for &(x, s) in &conf {
                for (partner_label, s2) in self.partner_moves(s) {
                    let (a, b) = match self.agent {
                        Agent::A => (label, partner_label),
                        Agent::B => (partner_label, label),
                    };
                    let x2 = self.auto.step(x, a, b);
                    if x2 == DEAD {
                        ok = false;
                        break 'outer;
                    }
                    next.push((x2, s2));
                }
            }
            if !ok {
                continue;
            }
            next.sort_unstable();
            next.dedup();
            if self.seen.insert(next.clone()) && self.run(depth + 1, next) {
                return true;
            }
        }
        false
    }
}

/// Agreement of two run-length block paths read in lockstep: blocks one
/// side has emitted that the other has not matched yet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
struct Sync {
    /// 0 when level, otherwise the side (1 or 2) that is ahead.
    ahead: u8,
    /// Last block of the side that is behind, or of both when level.
    last: Option<u32>,
    pending: Vec<u32>,
}

impl Sync {
    fn push(&mut self, side: u8, block: u32) -> bool {
        let last_of_side = if self.ahead == side {
            self.pending.last().copied()
        } else {
            self.last
        };
        if last_of_side == Some(block) {
            return true;
        }
        if self.ahead == 0 || self.ahead == side {
            self.ahead = side;
            self.pending.push(block);
            return true;
        }
        if self.pending[0] != block {
            return false;
        }
        self.pending.remove(0);
        self.last = Some(block);
        if self.pending.is_empty() {
            self.ahead = 0;
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct PairState {
    u1: Node,
    u2: Node,
    /// Nodes reached by the two mixes; `None` once either has failed.
    mix: Option<(Node, Node)>,
    sync: Sync,
}

struct ViolationSearch<'a> {
    auto: &'a PlanAutomaton,
    block_of: &'a [u32],
    seen: HashSet<(usize, PairState)>,
    /// Edge indices taken by the two plans.
    path: Vec<(usize, usize)>,
}

impl ViolationSearch<'_> {
    fn run(&mut self, depth: usize, st: PairState) -> bool {
        let length = self.auto.length;
        if depth == length {
            return st.mix.is_none() && st.sync.pending.is_empty();
        }
        if !self.seen.insert((depth, st.clone())) {
            return false;
        }
        let auto = self.auto;
        for (i, &(e1, v1)) in auto.out[st.u1 as usize].iter().enumerate() {
            for (j, &(e2, v2)) in auto.out[st.u2 as usize].iter().enumerate() {
                // Swapping the two plans gives the same answer, so the first
                // step where they part takes the lower edge for the first plan.
                if st.u1 == st.u2 && i > j {
                    continue;
                }
                let mut sync = st.sync.clone();
                if depth + 1 < length {
                    let b1 = self.block_of[auto.states[v1 as usize].index()];
                    let b2 = self.block_of[auto.states[v2 as usize].index()];
                    if !sync.push(1, b1) || !sync.push(2, b2) {
                        continue;
                    }
                }
                let mix = st.mix.and_then(|(u3, u4)| {
                    let v3 = auto.step(u3, e1.a, e2.b);
                    let v4 = auto.step(u4, e2.a, e1.b);
                    (v3 != DEAD && v4 != DEAD).then_some((v3, v4))
                });
                self.path.push((i, j));
                if self.run(
                    depth + 1,
                    PairState {
                        u1: v1,
                        u2: v2,
                        mix,
                        sync,
                    },
                ) {
                    return true;
                }
                self.path.pop();
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sync_matches_equal_run_length_paths() {
        // [0, 0, 1] and [0, 1, 1] both read as [0, 1].
        let mut s = Sync::default();
        for (b1, b2) in [(0, 0), (0, 1), (1, 1)] {
            assert!(s.push(1, b1) && s.push(2, b2));
        }
        assert!(s.pending.is_empty());

        // [0, 1] against [0, 2] diverges.
        let mut s = Sync::default();
        assert!(s.push(1, 0) && s.push(2, 0));
        assert!(s.push(1, 1));
        assert!(!s.push(2, 2));

        // [0, 1, 0] against [0, 0, 0]: second side never catches up.
        let mut s = Sync::default();
        for (b1, b2) in [(0, 0), (1, 0), (0, 0)] {
            assert!(s.push(1, b1) && s.push(2, b2));
        }
        assert!(!s.pending.is_empty());
    }
}
