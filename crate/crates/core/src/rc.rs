//! Required coordination.
//!
//! Two optimal plans *introduce* required coordination when agent A
//! following one of them while agent B follows the other (or the reverse)
//! leaves the prefix set of the optimal plans. An instance has required
//! coordination when every optimal plan is broken by some other one.
//!
//! [`build_rc_graph`] classifies every reachable ordered state pair, level by
//! level in optimal cost, into connected pairs and conflict entries.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::domain::{Instance, StateGraph, StateId};
use crate::error::{Error, Result};
use crate::plan::{enumerate_optimal_plans, plan_dag, DistanceTable, Plan, DEFAULT_PLAN_CAP};
use crate::product::PlanAutomaton;

/// Why a mixed execution left the optimal prefixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailureKind {
    /// The two labels do not form a valid joint action at the current state.
    InvalidJointAction,
    /// The step is valid but the realized sequence is no longer an optimal prefix.
    OffOptimalPrefix,
}

/// Result of A following one plan while B follows another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedOutcome {
    /// States actually realized, starting with the initial state.
    pub states: Vec<StateId>,
    /// 1-based step of the first violation.
    pub failure: Option<(usize, FailureKind)>,
}

impl MixedOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Execute A's labels from `a_plan` against B's labels from `b_plan`.
pub fn mix(graph: &StateGraph, dist: &DistanceTable, a_plan: &Plan, b_plan: &Plan) -> MixedOutcome {
    let inst = a_plan.instance();
    let length = a_plan.len() as u32;
    let mut current = inst.initial;
    let mut states = vec![current];
    for (t, (pa, pb)) in a_plan.actions.iter().zip(&b_plan.actions).enumerate() {
        let step = t + 1;
        let action = crate::domain::JointAction::new(pa.a, pb.b);
        let Some(next) = graph.step(current, action) else {
            return MixedOutcome {
                states,
                failure: Some((step, FailureKind::InvalidJointAction)),
            };
        };
        states.push(next);
        let layered = dist.get(inst.initial, next) == Some(step as u32)
            && dist.get(next, inst.goal) == Some(length - step as u32);
        if !layered {
            return MixedOutcome {
                states,
                failure: Some((step, FailureKind::OffOptimalPrefix)),
            };
        }
        current = next;
    }
    MixedOutcome { states, failure: None }
}

/// Both orientations of the mix are checked.
pub fn pair_introduces_rc(graph: &StateGraph, dist: &DistanceTable, p1: &Plan, p2: &Plan) -> bool {
    !mix(graph, dist, p1, p2).succeeded() || !mix(graph, dist, p2, p1).succeeded()
}

/// Plans that survive mixing with every other plan, by direct pairwise mixing.
pub fn safe_plans(graph: &StateGraph, dist: &DistanceTable, plans: &[Plan]) -> Vec<Plan> {
    plans
        .iter()
        .enumerate()
        .filter(|(i, p1)| {
            plans
                .iter()
                .enumerate()
                .all(|(j, p2)| *i == j || !pair_introduces_rc(graph, dist, p1, p2))
        })
        .map(|(_, p)| p.clone())
        .collect()
}

/// The optimal plans of one instance with interned per-agent label streams.
///
/// A mixed execution of A's stream from one plan and B's stream from another
/// succeeds exactly when that pair of streams is itself an optimal plan, so
/// every mixing question reduces to a set lookup.
#[derive(Clone, Debug)]
pub struct PlanSet {
    plans: Vec<Plan>,
    a_stream: Vec<u32>,
    b_stream: Vec<u32>,
    a_streams: usize,
    b_streams: usize,
    members: HashSet<(u32, u32)>,
}

impl PlanSet {
    pub fn new(plans: Vec<Plan>) -> Self {
        fn intern(ids: &mut HashMap<Vec<u16>, u32>, stream: Vec<u16>) -> u32 {
            let next = ids.len() as u32;
            *ids.entry(stream).or_insert(next)
        }
        let mut a_ids = HashMap::new();
        let mut b_ids = HashMap::new();
        let mut a_stream = Vec::with_capacity(plans.len());
        let mut b_stream = Vec::with_capacity(plans.len());
        for p in &plans {
            a_stream.push(intern(&mut a_ids, p.a_labels().collect()));
            b_stream.push(intern(&mut b_ids, p.b_labels().collect()));
        }
        let members = a_stream.iter().copied().zip(b_stream.iter().copied()).collect();
        PlanSet {
            plans,
            a_stream,
            b_stream,
            a_streams: a_ids.len(),
            b_streams: b_ids.len(),
            members,
        }
    }

    pub fn plans(&self) -> &[Plan] {
        &self.plans
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    /// Whether A following plan `a` and B following plan `b` succeeds.
    pub fn mixes(&self, a: usize, b: usize) -> bool {
        self.members.contains(&(self.a_stream[a], self.b_stream[b]))
    }

    pub fn introduces_rc(&self, i: usize, j: usize) -> bool {
        !self.mixes(i, j) || !self.mixes(j, i)
    }

    /// Indices of plans that survive mixing with every plan of the set.
    pub fn safe(&self) -> Vec<usize> {
        let mut good_a = vec![true; self.a_streams];
        let mut good_b = vec![true; self.b_streams];
        let a_rep = first_of(&self.a_stream, self.a_streams);
        let b_rep = first_of(&self.b_stream, self.b_streams);
        for (alpha, &i) in a_rep.iter().enumerate() {
            good_a[alpha] = b_rep.iter().all(|&j| self.mixes(i, j));
        }
        for (beta, &j) in b_rep.iter().enumerate() {
            good_b[beta] = a_rep.iter().all(|&i| self.mixes(i, j));
        }
        (0..self.plans.len())
            .filter(|&i| good_a[self.a_stream[i] as usize] && good_b[self.b_stream[i] as usize])
            .collect()
    }

    /// Required coordination: at least two plans and none of them safe.
    pub fn has_rc(&self) -> bool {
        self.plans.len() > 1 && self.safe().is_empty()
    }

    /// Whether no two plans among `subset` introduce required coordination.
    pub fn pairwise_free(&self, subset: &[usize]) -> bool {
        self.rc_witness(subset).is_none()
    }

    /// Some pair of `subset` that introduces required coordination.
    pub fn rc_witness(&self, subset: &[usize]) -> Option<(usize, usize)> {
        let mut alphas: Vec<usize> = Vec::new();
        let mut betas: Vec<usize> = Vec::new();
        let mut seen_a = HashSet::new();
        let mut seen_b = HashSet::new();
        for &i in subset {
            if seen_a.insert(self.a_stream[i]) {
                alphas.push(i);
            }
            if seen_b.insert(self.b_stream[i]) {
                betas.push(i);
            }
        }
        for &i in &alphas {
            for &j in &betas {
                if !self.mixes(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

fn first_of(stream: &[u32], count: usize) -> Vec<usize> {
    let mut rep = vec![usize::MAX; count];
    for (i, &s) in stream.iter().enumerate() {
        if rep[s as usize] == usize::MAX {
            rep[s as usize] = i;
        }
    }
    rep
}

/// Whether `inst` has required coordination. Unsolvable and single-plan
/// instances never do.
pub fn rc_present(graph: &StateGraph, dist: &DistanceTable, inst: Instance) -> bool {
    match plan_dag(graph, dist, inst) {
        Ok(dag) => PlanAutomaton::new(&dag).has_rc(),
        Err(_) => false,
    }
}

/// How conflict pairs are read off a coordination-requiring instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ConflictRule {
    /// `(x, y)` at equal depth is recorded when every optimal plan through
    /// `x` introduces required coordination with every optimal plan through `y`.
    #[default]
    ViaSets,
    /// For every coordination-introducing plan pair, record the two states
    /// at the first index where the plans differ.
    FirstDivergence,
}

impl std::str::FromStr for ConflictRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "via-sets" => Ok(ConflictRule::ViaSets),
            "first-divergence" => Ok(ConflictRule::FirstDivergence),
            other => Err(format!("unknown conflict rule `{other}`")),
        }
    }
}

impl ConflictRule {
    pub fn name(self) -> &'static str {
        match self {
            ConflictRule::ViaSets => "via-sets",
            ConflictRule::FirstDivergence => "first-divergence",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RcOptions {
    /// Refuse instances with more optimal plans than this. The default rule
    /// never lists plans and needs no cap; first-divergence falls back to
    /// [`DEFAULT_PLAN_CAP`].
    pub cap: Option<usize>,
    pub rule: ConflictRule,
}

/// A state pair with required coordination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaEntry {
    pub cost: u32,
    /// Unordered pairs `(m, n)`, `m < n`, that must be told apart.
    pub conflicts: BTreeSet<(StateId, StateId)>,
}

/// Connected pairs and conflict entries over all reachable ordered pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcGraph {
    pub state_count: usize,
    pub edges: BTreeMap<(StateId, StateId), u32>,
    pub theta: BTreeMap<(StateId, StateId), ThetaEntry>,
}

impl RcGraph {
    pub fn connected(&self, s: StateId, t: StateId) -> bool {
        self.edges.contains_key(&(s, t))
    }

    pub fn theta_entry(&self, s: StateId, t: StateId) -> Option<&ThetaEntry> {
        self.theta.get(&(s, t))
    }

    /// Union of every entry's conflict pairs.
    pub fn conflict_pairs(&self) -> BTreeSet<(StateId, StateId)> {
        self.theta.values().flat_map(|e| e.conflicts.iter().copied()).collect()
    }
}

enum Placement {
    Connected,
    Theta(BTreeSet<(StateId, StateId)>),
}

pub fn build_rc_graph(graph: &StateGraph, dist: &DistanceTable, opts: RcOptions) -> Result<RcGraph> {
    let mut by_level: BTreeMap<u32, Vec<Instance>> = BTreeMap::new();
    for inst in graph.ordered_pairs() {
        if let Some(d) = dist.get(inst.initial, inst.goal) {
            by_level.entry(d).or_default().push(inst);
        }
    }

    let mut edges = BTreeMap::new();
    let mut theta = BTreeMap::new();
    for (level, pairs) in by_level {
        if level == 1 {
            edges.extend(pairs.iter().map(|i| ((i.initial, i.goal), 1)));
            continue;
        }
        let placed: Vec<(Instance, Placement)> = pairs
            .par_iter()
            .map(|&inst| classify(graph, dist, inst, opts).map(|p| (inst, p)))
            .collect::<Result<_>>()?;
        for (inst, placement) in placed {
            let key = (inst.initial, inst.goal);
            match placement {
                Placement::Connected => {
                    edges.insert(key, level);
                }
                Placement::Theta(conflicts) => {
                    theta.insert(key, ThetaEntry { cost: level, conflicts });
                }
            }
        }
    }

    Ok(RcGraph {
        state_count: graph.len(),
        edges,
        theta,
    })
}

fn classify(graph: &StateGraph, dist: &DistanceTable, inst: Instance, opts: RcOptions) -> Result<Placement> {
    let dag = plan_dag(graph, dist, inst)?;
    if let Some(cap) = opts.cap {
        if dag.count_plans() > cap as u128 {
            return Err(Error::PlanSetTooLarge {
                cap,
                from: inst.initial,
                to: inst.goal,
            });
        }
    }
    let auto = PlanAutomaton::new(&dag);
    if !auto.has_rc() {
        return Ok(Placement::Connected);
    }
    Ok(Placement::Theta(match opts.rule {
        ConflictRule::ViaSets => auto.via_conflicts(),
        ConflictRule::FirstDivergence => {
            let cap = opts.cap.unwrap_or(DEFAULT_PLAN_CAP);
            first_divergence_conflicts(&PlanSet::new(enumerate_optimal_plans(&dag, cap)?))
        }
    }))
}

fn ordered(m: StateId, n: StateId) -> (StateId, StateId) {
    if m < n {
        (m, n)
    } else {
        (n, m)
    }
}

pub(crate) fn first_divergence_conflicts(set: &PlanSet) -> BTreeSet<(StateId, StateId)> {
    let plans = set.plans();
    let mut out = BTreeSet::new();
    for i in 0..plans.len() {
        for j in i + 1..plans.len() {
            if !set.introduces_rc(i, j) {
                continue;
            }
            let (s1, s2) = (&plans[i].states, &plans[j].states);
            if let Some(k) = (0..s1.len()).find(|&k| s1[k] != s2[k]) {
                out.insert(ordered(s1[k], s2[k]));
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) fn via_set_conflicts(set: &PlanSet) -> BTreeSet<(StateId, StateId)> {
    let plans = set.plans();
    let mut out = BTreeSet::new();
    let Some(length) = plans.first().map(Plan::len) else {
        return out;
    };
    for depth in 1..length {
        let mut via: BTreeMap<StateId, Vec<usize>> = BTreeMap::new();
        for (i, p) in plans.iter().enumerate() {
            via.entry(p.states[depth]).or_default().push(i);
        }
        let groups: Vec<(StateId, Vec<usize>)> = via.into_iter().collect();
        for (x, (sx, px)) in groups.iter().enumerate() {
            for (sy, py) in &groups[x + 1..] {
                let all_conflict = px.iter().all(|&i| py.iter().all(|&j| set.introduces_rc(i, j)));
                if all_conflict {
                    out.insert((*sx, *sy));
                }
            }
        }
    }
    out
}
