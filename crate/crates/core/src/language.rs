//! Words, sentences and what they say about plans.
//!
//! Each abstract state is a word. A sentence is a run-length encoded word
//! sequence spoken for one instance; the plans it admits are the optimal
//! plans whose intermediate states split into consecutive runs, one per
//! word, in order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::abstraction::{Abstraction, BlockId};
use crate::domain::{Instance, StateGraph, StateId};
use crate::error::{Error, Result};
use crate::plan::{plan_dag, DistanceTable, Plan, PlanDag};

pub type WordId = BlockId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub id: WordId,
    pub members: Vec<StateId>,
}

/// One word per abstract state; concatenation is the only operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    words: Vec<Word>,
    word_of: Vec<WordId>,
}

impl Language {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word_of(&self, s: StateId) -> WordId {
        self.word_of[s.index()]
    }

    pub fn contains(&self, w: WordId, s: StateId) -> bool {
        self.word_of.get(s.index()) == Some(&w)
    }
}

pub fn language_from_abstraction(abs: &Abstraction) -> Language {
    let words = abs
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, members)| Word {
            id: i as WordId,
            members: members.clone(),
        })
        .collect();
    Language {
        words,
        word_of: abs.assignment().to_vec(),
    }
}

/// Word sequence spoken for one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SentenceFile", into = "SentenceFile")]
pub struct Sentence {
    pub instance: Instance,
    pub words: Vec<WordId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceFile {
    instance: [StateId; 2],
    sentence: Vec<WordId>,
}

impl From<Sentence> for SentenceFile {
    fn from(s: Sentence) -> Self {
        SentenceFile {
            instance: [s.instance.initial, s.instance.goal],
            sentence: s.words,
        }
    }
}

impl TryFrom<SentenceFile> for Sentence {
    type Error = String;

    fn try_from(f: SentenceFile) -> std::result::Result<Self, Self::Error> {
        if f.sentence.windows(2).any(|w| w[0] == w[1]) {
            return Err("adjacent words of a sentence must differ".into());
        }
        Ok(Sentence {
            instance: Instance::new(f.instance[0], f.instance[1]),
            words: f.sentence,
        })
    }
}

/// Whether each word can be matched, in order, to a later state of
/// `states` that it contains.
pub fn compatible(lang: &Language, words: &[WordId], states: &[StateId]) -> bool {
    let mut next = 0;
    for &s in states {
        if next < words.len() && lang.contains(words[next], s) {
            next += 1;
        }
    }
    next == words.len()
}

/// Whether the intermediate states of `plan` split into consecutive
/// nonempty runs lying in `path[0]`, `path[1]`, ... in order.
pub fn expresses(abs: &Abstraction, inst: Instance, path: &[BlockId], plan: &Plan) -> bool {
    if plan.instance() != inst {
        return false;
    }
    let blocks: Vec<BlockId> = plan.intermediates().iter().map(|&s| abs.block_of(s)).collect();
    segments_into(&blocks, path)
}

fn segments_into(blocks: &[BlockId], path: &[BlockId]) -> bool {
    if blocks.is_empty() || path.is_empty() {
        return blocks.is_empty() && path.is_empty();
    }
    // reach[j]: the prefix read so far ends inside segment j.
    let mut reach = vec![false; path.len()];
    reach[0] = blocks[0] == path[0];
    for &b in &blocks[1..] {
        let mut next = vec![false; path.len()];
        for j in 0..path.len() {
            let from = reach[j] || (j > 0 && reach[j - 1]);
            next[j] = from && path[j] == b;
        }
        reach = next;
    }
    reach[path.len() - 1]
}

/// Sentence for the canonical (lexicographically first) optimal plan.
pub fn speak(abs: &Abstraction, graph: &StateGraph, dist: &DistanceTable, inst: Instance) -> Result<Sentence> {
    let dag = plan_dag(graph, dist, inst)?;
    let plan = canonical_plan(&dag);
    Ok(Sentence {
        instance: inst,
        words: abs.block_path(&plan),
    })
}

/// First optimal plan in state-id order.
pub fn canonical_plan(dag: &PlanDag) -> Plan {
    let mut states = vec![dag.instance.initial];
    let mut actions = Vec::new();
    while states.len() <= dag.length as usize {
        let e = dag.successors(*states.last().unwrap())[0];
        states.push(e.to);
        actions.push(e.action);
    }
    Plan { states, actions }
}

/// Every optimal plan of `inst` expressed by `path`, in state-id order.
/// Adjacent entries of `path` must differ.
pub fn expressed_plans(
    abs: &Abstraction,
    graph: &StateGraph,
    dist: &DistanceTable,
    inst: Instance,
    path: &[BlockId],
    cap: usize,
) -> Result<Vec<Plan>> {
    if path.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter(format!(
            "block path {path:?} repeats a block in adjacent positions"
        )));
    }
    let dag = plan_dag(graph, dist, inst)?;
    let mut walker = Expressed {
        abs,
        dag: &dag,
        path,
        counts: HashMap::new(),
    };
    let count = walker.count(inst.initial, 0, 0);
    if count > cap as u128 {
        return Err(Error::PlanSetTooLarge {
            cap,
            from: inst.initial,
            to: inst.goal,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut plan = Plan {
        states: vec![inst.initial],
        actions: Vec::new(),
    };
    walker.collect(0, 0, &mut plan, &mut out);
    Ok(out)
}

// Walk over (DAG node, depth, number of path entries opened so far).
struct Expressed<'a> {
    abs: &'a Abstraction,
    dag: &'a PlanDag,
    path: &'a [BlockId],
    counts: HashMap<(StateId, usize), u128>,
}

impl Expressed<'_> {
    // Path entries opened after stepping into `v` at `depth + 1`, if allowed.
    fn advance(&self, v: StateId, depth: usize, opened: usize) -> Option<usize> {
        let length = self.dag.length as usize;
        if depth + 1 == length {
            return (opened == self.path.len()).then_some(opened);
        }
        let b = self.abs.block_of(v);
        if opened > 0 && self.path[opened - 1] == b {
            Some(opened)
        } else if opened < self.path.len() && self.path[opened] == b {
            Some(opened + 1)
        } else {
            None
        }
    }

    fn count(&mut self, u: StateId, depth: usize, opened: usize) -> u128 {
        if depth == self.dag.length as usize {
            return u128::from(opened == self.path.len());
        }
        if let Some(&c) = self.counts.get(&(u, opened)) {
            return c;
        }
        let mut total: u128 = 0;
        for e in self.dag.successors(u) {
            if let Some(next) = self.advance(e.to, depth, opened) {
                total = total.saturating_add(self.count(e.to, depth + 1, next));
            }
        }
        self.counts.insert((u, opened), total);
        total
    }

    fn collect(&mut self, depth: usize, opened: usize, plan: &mut Plan, out: &mut Vec<Plan>) {
        if depth == self.dag.length as usize {
            if opened == self.path.len() {
                out.push(plan.clone());
            }
            return;
        }
        let u = *plan.states.last().unwrap();
        for e in self.dag.successors(u) {
            let Some(next) = self.advance(e.to, depth, opened) else {
                continue;
            };
            if self.count(e.to, depth + 1, next) == 0 {
                continue;
            }
            plan.states.push(e.to);
            plan.actions.push(e.action);
            self.collect(depth + 1, next, plan, out);
            plan.states.pop();
            plan.actions.pop();
        }
    }
}
