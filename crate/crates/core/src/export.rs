//! File formats for RC graphs and abstractions, plus Graphviz output.
//!
//! Both JSON files embed the domain stanza so that a later command can
//! rebuild the state graph without a separate domain file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abstraction::{Abstraction, BlockId};
use crate::domain::{build_state_graph, DomainFile, DomainSpec, StateGraph, StateId};
use crate::error::{Error, Result};
use crate::language::language_from_abstraction;
use crate::rc::{RcGraph, ThetaEntry};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcGraphFile {
    pub domain: DomainFile,
    pub rule: String,
    /// `[from, to, cost]`
    pub edges: Vec<[u32; 3]>,
    pub theta: Vec<ThetaRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaRecord {
    pub from: StateId,
    pub to: StateId,
    pub cost: u32,
    pub conflicts: Vec<[StateId; 2]>,
}

impl RcGraphFile {
    pub fn new(spec: &DomainSpec, rule: &str, rc: &RcGraph) -> Self {
        RcGraphFile {
            domain: DomainFile::from_spec(spec),
            rule: rule.to_string(),
            edges: rc.edges.iter().map(|(&(s, t), &c)| [s.0, t.0, c]).collect(),
            theta: rc
                .theta
                .iter()
                .map(|(&(s, t), e)| ThetaRecord {
                    from: s,
                    to: t,
                    cost: e.cost,
                    conflicts: e.conflicts.iter().map(|&(m, n)| [m, n]).collect(),
                })
                .collect(),
        }
    }

    /// Rebuild the state graph and the RC graph.
    pub fn restore(self) -> Result<(StateGraph, RcGraph)> {
        let graph = build_state_graph(&self.domain.into_spec()?)?;
        let n = graph.len() as u32;
        let check = |s: u32| {
            if s < n {
                Ok(StateId(s))
            } else {
                Err(Error::parse("rc graph", format!("state id {s} out of range (0..{n})")))
            }
        };
        let mut edges = BTreeMap::new();
        for [s, t, c] in self.edges {
            edges.insert((check(s)?, check(t)?), c);
        }
        let mut theta = BTreeMap::new();
        for r in self.theta {
            let mut conflicts = BTreeSet::new();
            for [m, n] in r.conflicts {
                conflicts.insert((check(m.0)?, check(n.0)?));
            }
            theta.insert(
                (check(r.from.0)?, check(r.to.0)?),
                ThetaEntry {
                    cost: r.cost,
                    conflicts,
                },
            );
        }
        let rc = RcGraph {
            state_count: graph.len(),
            edges,
            theta,
        };
        Ok((graph, rc))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractionFile {
    pub domain: DomainFile,
    pub blocks: Vec<Vec<StateId>>,
    pub abstract_edges: Vec<[BlockId; 2]>,
    pub words: Vec<WordRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordRecord {
    pub id: BlockId,
    pub members: Vec<StateId>,
}

impl AbstractionFile {
    pub fn new(spec: &DomainSpec, abs: &Abstraction) -> Self {
        let lang = language_from_abstraction(abs);
        AbstractionFile {
            domain: DomainFile::from_spec(spec),
            blocks: abs.blocks().to_vec(),
            abstract_edges: abs.abstract_edges().iter().map(|&(a, b)| [a, b]).collect(),
            words: lang
                .words()
                .iter()
                .map(|w| WordRecord {
                    id: w.id,
                    members: w.members.clone(),
                })
                .collect(),
        }
    }

    /// Rebuild the state graph and the abstraction; blocks must partition
    /// the states.
    pub fn restore(self) -> Result<(StateGraph, Abstraction)> {
        let graph = build_state_graph(&self.domain.into_spec()?)?;
        let mut assignment: Vec<Option<BlockId>> = vec![None; graph.len()];
        for (b, members) in self.blocks.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::parse("abstraction", format!("block {b} is empty")));
            }
            for s in members {
                let slot = assignment
                    .get_mut(s.index())
                    .ok_or_else(|| Error::parse("abstraction", format!("state id {s} out of range")))?;
                if slot.replace(b as BlockId).is_some() {
                    return Err(Error::parse("abstraction", format!("state {s} is in two blocks")));
                }
            }
        }
        let assignment = assignment
            .into_iter()
            .enumerate()
            .map(|(s, b)| b.ok_or_else(|| Error::parse("abstraction", format!("state {s} is in no block"))))
            .collect::<Result<Vec<_>>>()?;
        let abs = Abstraction::from_assignment(&graph, &assignment);
        Ok((graph, abs))
    }
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering of the RC graph: cost-1 edges, a table of Θ
/// entries, and one cluster per block when an abstraction is given.
pub fn rc_graph_dot(graph: &StateGraph, rc: &RcGraph, abs: Option<&Abstraction>) -> String {
    let mut out = String::from("digraph rc {\n  node [shape=box, fontsize=10];\n");
    let node = |s: StateId| {
        format!(
            "    s{} [label={}];\n",
            s,
            quote(&format!("{}: {}", s, graph.describe(s)))
        )
    };
    match abs {
        Some(abs) => {
            for (b, members) in abs.blocks().iter().enumerate() {
                let _ = writeln!(out, "  subgraph cluster_b{b} {{\n    label=\"b{b}\";");
                for &s in members {
                    out.push_str(&node(s));
                }
                out.push_str("  }\n");
            }
        }
        None => {
            for s in graph.state_ids() {
                out.push_str(&node(s)[2..]);
            }
        }
    }
    for (&(s, t), &c) in &rc.edges {
        if c == 1 {
            let _ = writeln!(out, "  s{s} -> s{t};");
        }
    }
    let mut table = String::from("Θ (cost: conflicting pairs)\\l");
    for (&(s, t), e) in &rc.theta {
        let pairs: Vec<String> = e.conflicts.iter().map(|(m, n)| format!("({m},{n})")).collect();
        let _ = write!(table, "({s},{t}) {}: {}\\l", e.cost, pairs.join(" "));
    }
    let _ = writeln!(out, "  theta [shape=note, label=\"{table}\"];");
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{build_abstraction, conflict_graph, greedy_color, ColorOrder};
    use crate::plan::all_pairs_distances;
    use crate::rc::{build_rc_graph, RcOptions};

    fn ring3() -> (StateGraph, RcGraph, Abstraction) {
        let spec = DomainSpec::ring(3).unwrap();
        let g = build_state_graph(&spec).unwrap();
        let d = all_pairs_distances(&g);
        let rc = build_rc_graph(&g, &d, RcOptions::default()).unwrap();
        let cg = conflict_graph(&rc);
        let abs = build_abstraction(&g, &cg, &greedy_color(&cg, ColorOrder::Saturation)).unwrap();
        (g, rc, abs)
    }

    #[test]
    fn rc_graph_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rc.json");
        let (g, rc, _) = ring3();
        write_json(&RcGraphFile::new(g.spec(), "via-sets", &rc), &path).unwrap();
        let (g2, rc2) = read_json::<RcGraphFile>(&path).unwrap().restore().unwrap();
        assert_eq!(g2.len(), g.len());
        assert_eq!(rc2, rc);
    }

    #[test]
    fn abstraction_file_round_trips() {
        let (g, _, abs) = ring3();
        let file = AbstractionFile::new(g.spec(), &abs);
        assert_eq!(file.words.len(), 3);
        let text = serde_json::to_string(&file).unwrap();
        let (_, abs2) = serde_json::from_str::<AbstractionFile>(&text)
            .unwrap()
            .restore()
            .unwrap();
        assert_eq!(abs2, abs);
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        let (g, _, abs) = ring3();
        let mut file = AbstractionFile::new(g.spec(), &abs);
        let first = file.blocks[0][0];
        file.blocks[1].push(first);
        assert!(file.restore().unwrap_err().to_string().contains("two blocks"));
    }

    #[test]
    fn dot_lists_theta_with_costs_and_clusters() {
        let (g, rc, abs) = ring3();
        let dot = rc_graph_dot(&g, &rc, Some(&abs));
        assert_eq!(dot.matches("subgraph cluster_").count(), 3);
        for (&(s, t), e) in &rc.theta {
            assert!(dot.contains(&format!("({s},{t}) {}:", e.cost)));
        }
        let plain = rc_graph_dot(&g, &rc, None);
        assert!(!plain.contains("cluster"));
        assert!(plain.contains("s0 [label="));
    }
}
