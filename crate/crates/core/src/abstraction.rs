//! Abstractions built from the conflict pairs of an RC graph.
//!
//! Conflict pairs must land in different abstract states. Colouring the
//! conflict graph greedily gives the partition; [`verify_perfect`] then
//! checks exhaustively (or on a seeded sample) that every block path groups
//! only plans that can be mixed freely.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{Instance, StateGraph, StateId};
use crate::error::{Error, Result};
use crate::plan::{plan_dag, DistanceTable, Plan};
use crate::product::PlanAutomaton;
use crate::rc::RcGraph;

/// Index of an abstract state (a block of the partition).
pub type BlockId = u32;

/// Undirected graph over all states whose edges are the conflict pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    edges: BTreeSet<(StateId, StateId)>,
    adjacency: Vec<Vec<StateId>>,
}

impl ConflictGraph {
    pub fn new(state_count: usize, pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        let mut edges = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); state_count];
        for (m, n) in pairs {
            if m == n {
                continue;
            }
            let key = if m < n { (m, n) } else { (n, m) };
            if edges.insert(key) {
                adjacency[m.index()].push(n);
                adjacency[n.index()].push(m);
            }
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        ConflictGraph { edges, adjacency }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.edges
    }

    pub fn neighbors(&self, v: StateId) -> &[StateId] {
        &self.adjacency[v.index()]
    }

    pub fn degree(&self, v: StateId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn adjacent(&self, m: StateId, n: StateId) -> bool {
        self.adjacency[m.index()].binary_search(&n).is_ok()
    }

    /// Size of a clique found greedily from every vertex; a lower bound on
    /// the chromatic number.
    pub fn greedy_clique_bound(&self) -> usize {
        let n = self.vertex_count();
        if n == 0 {
            return 0;
        }
        (0..n)
            .map(|v| {
                let v = StateId::from_index(v);
                let mut candidates = self.neighbors(v).to_vec();
                candidates.sort_by_key(|&u| (std::cmp::Reverse(self.degree(u)), u));
                let mut clique = vec![v];
                for u in candidates {
                    if clique.iter().all(|&w| self.adjacent(u, w)) {
                        clique.push(u);
                    }
                }
                clique.len()
            })
            .max()
            .unwrap_or(1)
    }
}

pub fn conflict_graph(rc: &RcGraph) -> ConflictGraph {
    ConflictGraph::new(rc.state_count, rc.conflict_pairs())
}

/// Vertex order for greedy colouring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ColorOrder {
    /// DSATUR: most distinct neighbour colours first, then highest degree.
    #[default]
    Saturation,
    /// Highest degree first.
    Degree,
    /// Ascending state id.
    Index,
}

impl std::str::FromStr for ColorOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "saturation" => Ok(ColorOrder::Saturation),
            "degree" => Ok(ColorOrder::Degree),
            "index" => Ok(ColorOrder::Index),
            other => Err(format!("unknown colour order `{other}`")),
        }
    }
}

impl ColorOrder {
    pub fn name(self) -> &'static str {
        match self {
            ColorOrder::Saturation => "saturation",
            ColorOrder::Degree => "degree",
            ColorOrder::Index => "index",
        }
    }
}

/// A colour per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring(pub Vec<BlockId>);

impl Coloring {
    pub fn color(&self, v: StateId) -> BlockId {
        self.0[v.index()]
    }

    pub fn count(&self) -> usize {
        self.0.iter().copied().collect::<HashSet<_>>().len()
    }

    pub fn is_proper(&self, cg: &ConflictGraph) -> bool {
        self.first_clash(cg).is_none()
    }

    fn first_clash(&self, cg: &ConflictGraph) -> Option<(StateId, StateId)> {
        cg.edges()
            .iter()
            .copied()
            .find(|&(m, n)| self.color(m) == self.color(n))
    }
}

fn smallest_free(used: &BTreeSet<BlockId>) -> BlockId {
    (0..).find(|c| !used.contains(c)).unwrap()
}

/// Greedy proper colouring. Ties are broken by the smallest state id.
pub fn greedy_color(cg: &ConflictGraph, order: ColorOrder) -> Coloring {
    let n = cg.vertex_count();
    let mut colors: Vec<Option<BlockId>> = vec![None; n];
    let neighbor_colors = |colors: &[Option<BlockId>], v: usize| -> BTreeSet<BlockId> {
        cg.adjacency[v].iter().filter_map(|u| colors[u.index()]).collect()
    };

    match order {
        ColorOrder::Saturation => {
            for _ in 0..n {
                let v = (0..n)
                    .filter(|&v| colors[v].is_none())
                    .max_by_key(|&v| {
                        let sat = neighbor_colors(&colors, v).len();
                        (sat, cg.adjacency[v].len(), std::cmp::Reverse(v))
                    })
                    .unwrap();
                colors[v] = Some(smallest_free(&neighbor_colors(&colors, v)));
            }
        }
        ColorOrder::Degree | ColorOrder::Index => {
            let mut sequence: Vec<usize> = (0..n).collect();
            if order == ColorOrder::Degree {
                sequence.sort_by_key(|&v| (std::cmp::Reverse(cg.adjacency[v].len()), v));
            }
            for v in sequence {
                colors[v] = Some(smallest_free(&neighbor_colors(&colors, v)));
            }
        }
    }
    Coloring(colors.into_iter().map(Option::unwrap).collect())
}

/// Partition of the states into abstract states with their local and
/// crossing edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abstraction {
    blocks: Vec<Vec<StateId>>,
    block_of: Vec<BlockId>,
    local_edges: Vec<Vec<(StateId, StateId)>>,
    abstract_edges: BTreeSet<(BlockId, BlockId)>,
}

impl Abstraction {
    /// Assemble from a block assignment. Block ids are renumbered densely in
    /// order of first appearance along the state ids.
    pub fn from_assignment(graph: &StateGraph, assignment: &[BlockId]) -> Self {
        let mut renumber: BTreeMap<BlockId, BlockId> = BTreeMap::new();
        let mut block_of = Vec::with_capacity(assignment.len());
        for &b in assignment {
            let next = renumber.len() as BlockId;
            block_of.push(*renumber.entry(b).or_insert(next));
        }
        let mut blocks = vec![Vec::new(); renumber.len()];
        for (s, &b) in block_of.iter().enumerate() {
            blocks[b as usize].push(StateId::from_index(s));
        }
        let mut local_edges = vec![Vec::new(); blocks.len()];
        let mut abstract_edges = BTreeSet::new();
        for s in graph.state_ids() {
            let bs = block_of[s.index()];
            for e in graph.successors(s) {
                let bt = block_of[e.to.index()];
                if bs != bt {
                    abstract_edges.insert((bs, bt));
                } else if s != e.to {
                    local_edges[bs as usize].push((s, e.to));
                }
            }
        }
        Abstraction {
            blocks,
            block_of,
            local_edges,
            abstract_edges,
        }
    }

    /// Every state is its own abstract state.
    pub fn singletons(graph: &StateGraph) -> Self {
        let ids: Vec<BlockId> = (0..graph.len() as BlockId).collect();
        Self::from_assignment(graph, &ids)
    }

    /// One abstract state holding everything.
    pub fn single_block(graph: &StateGraph) -> Self {
        Self::from_assignment(graph, &vec![0; graph.len()])
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, s: StateId) -> BlockId {
        self.block_of[s.index()]
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.block_of
    }

    pub fn local_edges(&self, b: BlockId) -> &[(StateId, StateId)] {
        &self.local_edges[b as usize]
    }

    pub fn abstract_edges(&self) -> &BTreeSet<(BlockId, BlockId)> {
        &self.abstract_edges
    }

    /// Whether every conflict pair is split across blocks.
    pub fn separates(&self, cg: &ConflictGraph) -> bool {
        cg.edges().iter().all(|&(m, n)| self.block_of(m) != self.block_of(n))
    }

    /// Run-length block encoding of a plan's intermediate states.
    pub fn block_path(&self, plan: &Plan) -> Vec<BlockId> {
        let mut path: Vec<BlockId> = Vec::new();
        for &s in plan.intermediates() {
            let b = self.block_of(s);
            if path.last() != Some(&b) {
                path.push(b);
            }
        }
        path
    }
}

/// Blocks are the colour classes; fails if a conflict pair shares a colour.
pub fn build_abstraction(graph: &StateGraph, cg: &ConflictGraph, coloring: &Coloring) -> Result<Abstraction> {
    if let Some((m, n)) = coloring.first_clash(cg) {
        return Err(Error::SeparationViolation(m, n));
    }
    Ok(Abstraction::from_assignment(graph, &coloring.0))
}

/// Which instances a sweep visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Exhaustive,
    Sample { k: usize, seed: u64 },
}

impl Scope {
    /// Solvable ordered pairs `(s, t)`, `s != t`, in id order; a sample is
    /// drawn without replacement and returned sorted.
    pub fn instances(&self, graph: &StateGraph, dist: &DistanceTable) -> Vec<Instance> {
        let all: Vec<Instance> = graph
            .ordered_pairs()
            .filter(|i| dist.reachable(i.initial, i.goal))
            .collect();
        match *self {
            Scope::Exhaustive => all,
            Scope::Sample { k, seed } => {
                if k >= all.len() {
                    return all;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut picked = sample(&mut rng, all.len(), k).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(|i| all[i]).collect()
            }
        }
    }
}

/// A block path whose expressed plans include a pair that introduces
/// required coordination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub instance: Instance,
    pub path: Vec<BlockId>,
    pub plans: (Plan, Plan),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PerfectionReport {
    pub instances: usize,
    pub violations: Vec<Violation>,
}

impl PerfectionReport {
    pub fn is_perfect(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that every block path groups only plans free of pairwise required
/// coordination. At most one violation is reported per instance.
pub fn verify_perfect(
    abs: &Abstraction,
    graph: &StateGraph,
    dist: &DistanceTable,
    scope: Scope,
) -> Result<PerfectionReport> {
    let instances = scope.instances(graph, dist);
    let found: Vec<Option<Violation>> = instances
        .par_iter()
        .map(|&inst| verify_instance(abs, graph, dist, inst))
        .collect::<Result<_>>()?;
    Ok(PerfectionReport {
        instances: instances.len(),
        violations: found.into_iter().flatten().collect(),
    })
}

fn verify_instance(
    abs: &Abstraction,
    graph: &StateGraph,
    dist: &DistanceTable,
    inst: Instance,
) -> Result<Option<Violation>> {
    let dag = plan_dag(graph, dist, inst)?;
    Ok(PlanAutomaton::new(&dag)
        .find_violation(abs.assignment())
        .map(|(p, q)| Violation {
            instance: inst,
            path: abs.block_path(&p),
            plans: (p, q),
        }))
}

/// State pair whose separation splits the shared block path of a violating
/// plan pair: the first position where the plans sit in distinct states of
/// one block, or failing that, two consecutive states sharing a block on
/// either plan.
pub fn splitting_pair(abs: &Abstraction, violation: &Violation) -> Option<(StateId, StateId)> {
    let (p, q) = (&violation.plans.0, &violation.plans.1);
    let (xs, ys) = (p.intermediates(), q.intermediates());
    let same = |m: StateId, n: StateId| m != n && abs.block_of(m) == abs.block_of(n);
    xs.iter()
        .zip(ys)
        .find(|&(&m, &n)| same(m, n))
        .map(|(&m, &n)| (m, n))
        .or_else(|| {
            [xs, ys]
                .into_iter()
                .flat_map(|run| run.windows(2))
                .find(|w| same(w[0], w[1]))
                .map(|w| (w[0], w[1]))
        })
}

/// Outcome of [`refine_until_perfect`].
#[derive(Clone, Debug)]
pub struct Refinement {
    pub abstraction: Abstraction,
    pub coloring: Coloring,
    /// Conflict graph including the pairs added while refining.
    pub conflicts: ConflictGraph,
    pub added: usize,
    pub rounds: usize,
}

/// Colour the conflict graph, then repeatedly verify the abstraction over
/// `scope` and separate a splitting pair for every violation until none is
/// left. Each round adds at least one pair, so this terminates; the
/// all-singleton partition is reached at worst.
pub fn refine_until_perfect(
    graph: &StateGraph,
    dist: &DistanceTable,
    cg: &ConflictGraph,
    order: ColorOrder,
    scope: Scope,
) -> Result<Refinement> {
    let mut conflicts = cg.clone();
    let mut added = 0;
    let mut rounds = 0;
    loop {
        let coloring = greedy_color(&conflicts, order);
        let abstraction = build_abstraction(graph, &conflicts, &coloring)?;
        let report = verify_perfect(&abstraction, graph, dist, scope)?;
        if report.is_perfect() {
            return Ok(Refinement {
                abstraction,
                coloring,
                conflicts,
                added,
                rounds,
            });
        }
        rounds += 1;
        let extra: Vec<_> = report
            .violations
            .iter()
            .filter_map(|v| splitting_pair(&abstraction, v))
            .collect();
        let before = conflicts.edges().len();
        conflicts = ConflictGraph::new(graph.len(), conflicts.edges().iter().copied().chain(extra));
        let grown = conflicts.edges().len() - before;
        assert!(grown > 0, "refinement made no progress");
        added += grown;
    }
}

/// Upper bound on the number of states a plan can spend inside one block:
/// the largest block size.
pub fn epsilon(abs: &Abstraction) -> usize {
    abs.blocks().iter().map(Vec::len).max().unwrap_or(0)
}

/// Quantities behind the block-path length bound of one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    /// Fewest blocks on any path expressing some plan, optimal or not.
    pub shortest: usize,
    pub epsilon: usize,
    /// Fewest blocks on any path expressing an optimal plan.
    pub optimal: usize,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.optimal <= self.shortest * self.epsilon
    }
}

/// Checks that some block path no longer than `|shortest| * epsilon`
/// expresses an optimal plan.
pub fn theorem6_check(abs: &Abstraction, graph: &StateGraph, dist: &DistanceTable, inst: Instance) -> bool {
    bound_check(abs, graph, dist, inst).is_some_and(|b| b.holds())
}

/// `None` when the instance is unsolvable.
pub fn bound_check(abs: &Abstraction, graph: &StateGraph, dist: &DistanceTable, inst: Instance) -> Option<BoundCheck> {
    let shortest = shortest_block_path(abs, graph, inst)?;
    let optimal = shortest_optimal_block_path(abs, graph, dist, inst)?;
    Some(BoundCheck {
        shortest,
        epsilon: epsilon(abs),
        optimal,
    })
}

// 0-1 BFS over states visited as intermediates; entering a new block costs one.
fn shortest_block_path(abs: &Abstraction, graph: &StateGraph, inst: Instance) -> Option<usize> {
    if inst.initial == inst.goal {
        return Some(0);
    }
    let mut best = vec![usize::MAX; graph.len()];
    let mut answer = usize::MAX;
    let mut deque = VecDeque::new();
    for e in graph.successors(inst.initial) {
        if e.to == inst.goal {
            return Some(0);
        }
        if best[e.to.index()] > 1 {
            best[e.to.index()] = 1;
            deque.push_back((e.to, 1));
        }
    }
    while let Some((u, cost)) = deque.pop_front() {
        if cost > best[u.index()] || cost >= answer {
            continue;
        }
        for e in graph.successors(u) {
            if e.to == inst.goal {
                answer = answer.min(cost);
                continue;
            }
            let step = usize::from(abs.block_of(e.to) != abs.block_of(u));
            let next = cost + step;
            if next < best[e.to.index()] {
                best[e.to.index()] = next;
                if step == 0 {
                    deque.push_front((e.to, next));
                } else {
                    deque.push_back((e.to, next));
                }
            }
        }
    }
    (answer != usize::MAX).then_some(answer)
}

fn shortest_optimal_block_path(
    abs: &Abstraction,
    graph: &StateGraph,
    dist: &DistanceTable,
    inst: Instance,
) -> Option<usize> {
    let dag = plan_dag(graph, dist, inst).ok()?;
    if dag.length <= 1 {
        return Some(0);
    }
    // Layer by layer: fewest runs over prefixes ending at each intermediate.
    let mut runs: BTreeMap<StateId, usize> = dag.successors(inst.initial).iter().map(|e| (e.to, 1)).collect();
    for layer in &dag.layers()[1..dag.length as usize - 1] {
        let mut next: BTreeMap<StateId, usize> = BTreeMap::new();
        for &u in layer {
            let Some(&c) = runs.get(&u) else { continue };
            for e in dag.successors(u) {
                let cost = c + usize::from(abs.block_of(e.to) != abs.block_of(u));
                let slot = next.entry(e.to).or_insert(usize::MAX);
                *slot = (*slot).min(cost);
            }
        }
        runs = next;
    }
    runs.values().copied().min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_state_graph, DomainSpec};
    use crate::plan::{all_pairs_distances, optimal_plans, DEFAULT_PLAN_CAP};
    use crate::rc::PlanSet;
    use crate::rc::{build_rc_graph, RcOptions};

    fn setup(spec: DomainSpec) -> (StateGraph, DistanceTable, RcGraph) {
        let g = build_state_graph(&spec).unwrap();
        let d = all_pairs_distances(&g);
        let rc = build_rc_graph(&g, &d, RcOptions::default()).unwrap();
        (g, d, rc)
    }

    #[test]
    fn edgeless_graph_takes_one_colour() {
        let cg = ConflictGraph::new(5, []);
        for order in [ColorOrder::Saturation, ColorOrder::Degree, ColorOrder::Index] {
            assert_eq!(greedy_color(&cg, order).count(), 1);
        }
    }

    #[test]
    fn odd_cycle_needs_three_colours() {
        let pairs = (0..5).map(|i| (StateId(i), StateId((i + 1) % 5)));
        let cg = ConflictGraph::new(5, pairs);
        let c = greedy_color(&cg, ColorOrder::Saturation);
        assert!(c.is_proper(&cg));
        assert_eq!(c.count(), 3);
        assert_eq!(cg.greedy_clique_bound(), 2);
    }

    #[test]
    fn improper_colouring_is_rejected() {
        let (g, _, rc) = setup(DomainSpec::ring(3).unwrap());
        let cg = conflict_graph(&rc);
        let err = build_abstraction(&g, &cg, &Coloring(vec![0; g.len()])).unwrap_err();
        assert!(matches!(err, Error::SeparationViolation(..)));
    }

    #[test]
    fn ring3_abstraction_tracks_one_agent() {
        let (g, d, rc) = setup(DomainSpec::ring(3).unwrap());
        let cg = conflict_graph(&rc);
        let coloring = greedy_color(&cg, ColorOrder::Saturation);
        assert_eq!(coloring.count(), 3);
        let abs = build_abstraction(&g, &cg, &coloring).unwrap();
        assert_eq!(abs.block_count(), 3);
        assert!(abs.blocks().iter().all(|b| b.len() == 2));
        // Each block fixes the room of one agent.
        let fixes = |agent: usize| {
            abs.blocks().iter().all(|b| {
                let rooms: HashSet<u16> = b.iter().map(|&s| g.state(s).assignment[agent]).collect();
                rooms.len() == 1
            })
        };
        assert!(fixes(0) || fixes(1));
        assert_eq!(epsilon(&abs), 2);
        let report = verify_perfect(&abs, &g, &d, Scope::Exhaustive).unwrap();
        assert_eq!(report.instances, 30);
        assert!(report.is_perfect());
    }

    #[test]
    fn singleton_abstraction_is_perfect() {
        let (g, d, _) = setup(DomainSpec::ring(3).unwrap());
        let abs = Abstraction::singletons(&g);
        assert_eq!(epsilon(&abs), 1);
        assert!(verify_perfect(&abs, &g, &d, Scope::Exhaustive).unwrap().is_perfect());
    }

    #[test]
    fn one_block_ring3_is_not_perfect() {
        let (g, d, _) = setup(DomainSpec::ring(3).unwrap());
        let abs = Abstraction::single_block(&g);
        let report = verify_perfect(&abs, &g, &d, Scope::Exhaustive).unwrap();
        let swap = Instance::new(g.find(&[0, 1]).unwrap(), g.find(&[1, 0]).unwrap());
        assert!(report.violations.iter().any(|v| v.instance == swap));
    }

    #[test]
    fn abstract_edges_follow_crossing_edges() {
        let (g, _, rc) = setup(DomainSpec::ring(3).unwrap());
        let cg = conflict_graph(&rc);
        let abs = build_abstraction(&g, &cg, &greedy_color(&cg, ColorOrder::Saturation)).unwrap();
        let mut expected = BTreeSet::new();
        for s in g.state_ids() {
            for e in g.successors(s) {
                if abs.block_of(s) != abs.block_of(e.to) {
                    expected.insert((abs.block_of(s), abs.block_of(e.to)));
                }
            }
        }
        assert_eq!(abs.abstract_edges(), &expected);
        for b in 0..abs.block_count() as BlockId {
            assert!(abs
                .local_edges(b)
                .iter()
                .all(|&(u, v)| abs.block_of(u) == b && abs.block_of(v) == b && u != v));
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let (g, d, _) = setup(DomainSpec::grid_loop(3, 3).unwrap());
        let a = Scope::Sample { k: 100, seed: 7 }.instances(&g, &d);
        let b = Scope::Sample { k: 100, seed: 7 }.instances(&g, &d);
        let c = Scope::Sample { k: 100, seed: 8 }.instances(&g, &d);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 100);
    }

    #[test]
    fn singleton_bound_holds_with_unit_epsilon() {
        let (g, d, _) = setup(DomainSpec::ring(4).unwrap());
        let abs = Abstraction::singletons(&g);
        for inst in g.ordered_pairs() {
            let b = bound_check(&abs, &g, &d, inst).unwrap();
            assert_eq!(b.epsilon, 1);
            assert_eq!(b.shortest, b.optimal);
            assert!(b.holds());
        }
    }

    // Oracle: list the plans, group them by block path, mix every pair.
    fn enumerated_violation(abs: &Abstraction, g: &StateGraph, d: &DistanceTable, inst: Instance) -> bool {
        let set = PlanSet::new(optimal_plans(g, d, inst, DEFAULT_PLAN_CAP).unwrap());
        let mut groups: BTreeMap<Vec<BlockId>, Vec<usize>> = BTreeMap::new();
        for (i, p) in set.plans().iter().enumerate() {
            groups.entry(abs.block_path(p)).or_default().push(i);
        }
        groups.values().any(|members| !set.pairwise_free(members))
    }

    fn check_verification(abs: &Abstraction, g: &StateGraph, d: &DistanceTable) {
        let report = verify_perfect(abs, g, d, Scope::Exhaustive).unwrap();
        let flagged: HashSet<Instance> = report.violations.iter().map(|v| v.instance).collect();
        for inst in Scope::Exhaustive.instances(g, d) {
            assert_eq!(flagged.contains(&inst), enumerated_violation(abs, g, d, inst), "{inst}");
        }
        for v in &report.violations {
            let (p, q) = &v.plans;
            assert_eq!(abs.block_path(p), abs.block_path(q));
            assert!(crate::rc::pair_introduces_rc(g, d, p, q));
        }
    }

    #[test]
    fn product_verification_matches_enumeration() {
        for spec in [
            DomainSpec::ring(3).unwrap(),
            DomainSpec::grid_loop(2, 2).unwrap(),
            DomainSpec::turn_and_open(2, 1).unwrap(),
        ] {
            let (g, d, rc) = setup(spec);
            let cg = conflict_graph(&rc);
            let colored = build_abstraction(&g, &cg, &greedy_color(&cg, ColorOrder::Saturation)).unwrap();
            check_verification(&colored, &g, &d);
            check_verification(&Abstraction::single_block(&g), &g, &d);
            // Blocks by A's component only.
            let by_a: Vec<BlockId> = g.states().iter().map(|s| s.assignment[0] as BlockId).collect();
            check_verification(&Abstraction::from_assignment(&g, &by_a), &g, &d);
        }
    }

    #[test]
    fn refinement_reaches_a_perfect_abstraction() {
        let (g, d, rc) = setup(DomainSpec::turn_and_open(2, 1).unwrap());
        let cg = conflict_graph(&rc);
        let r = refine_until_perfect(&g, &d, &cg, ColorOrder::Saturation, Scope::Exhaustive).unwrap();
        assert!(r.coloring.is_proper(&cg));
        assert!(verify_perfect(&r.abstraction, &g, &d, Scope::Exhaustive)
            .unwrap()
            .is_perfect());
    }
}
