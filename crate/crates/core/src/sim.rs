//! Step-synchronized execution of independently chosen plans.
//!
//! This is the ground truth the analysis is checked against: it runs the
//! two agents' label streams through the state graph one joint step at a
//! time and judges the realized sequence on its own.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::abstraction::{Abstraction, Scope};
use crate::domain::{Instance, JointAction, StateGraph, StateId};
use crate::error::{Error, Result};
use crate::language::{expressed_plans, speak};
use crate::plan::{is_optimal_prefix, optimal_plans, DistanceTable, Plan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Success,
    /// The agents' labels at step `t` (1-based) form no valid joint action:
    /// a collision or swap in the grid domains.
    CollisionAt(usize),
    /// The state after step `t` is no longer on an optimal plan.
    OffOptimalAt(usize),
    WrongFinalState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionReport {
    pub instance: Instance,
    pub plans: (Plan, Plan),
    pub realized: Vec<StateId>,
    pub outcome: Outcome,
}

/// A follows `p1`, B follows `p2`.
pub fn execute_pair(graph: &StateGraph, dist: &DistanceTable, inst: Instance, p1: &Plan, p2: &Plan) -> ExecutionReport {
    let report = |realized: Vec<StateId>, outcome| ExecutionReport {
        instance: inst,
        plans: (p1.clone(), p2.clone()),
        realized,
        outcome,
    };
    let mut realized = vec![inst.initial];
    for (t, (x, y)) in p1.actions.iter().zip(&p2.actions).enumerate() {
        let here = *realized.last().unwrap();
        let joint = JointAction::new(x.a, y.b);
        let Some(edge) = graph.successors(here).iter().find(|e| e.action == joint) else {
            return report(realized, Outcome::CollisionAt(t + 1));
        };
        realized.push(edge.to);
        if !is_optimal_prefix(dist, inst, &realized) {
            return report(realized, Outcome::OffOptimalAt(t + 1));
        }
    }
    if realized.last() != Some(&inst.goal) {
        return report(realized, Outcome::WrongFinalState);
    }
    report(realized, Outcome::Success)
}

/// Ordered-pair tallies for one instance.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InstanceRow {
    pub from: StateId,
    pub to: StateId,
    pub pairs: u64,
    pub failures: u64,
    pub collisions: u64,
    pub off_optimal: u64,
    pub wrong_final_state: u64,
    /// The candidate set exceeded the cap and nothing was executed.
    pub skipped: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub rows: Vec<InstanceRow>,
}

impl SweepSummary {
    pub fn instances(&self) -> usize {
        self.rows.len()
    }

    pub fn pairs(&self) -> u64 {
        self.rows.iter().map(|r| r.pairs).sum()
    }

    pub fn failures(&self) -> u64 {
        self.rows.iter().map(|r| r.failures).sum()
    }

    pub fn failing_instances(&self) -> Vec<Instance> {
        self.rows
            .iter()
            .filter(|r| r.failures > 0)
            .map(|r| Instance::new(r.from, r.to))
            .collect()
    }

    pub fn skipped(&self) -> Vec<Instance> {
        self.rows
            .iter()
            .filter(|r| r.skipped)
            .map(|r| Instance::new(r.from, r.to))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("csv output", e))
    }
}

fn run_pairs(graph: &StateGraph, dist: &DistanceTable, inst: Instance, plans: &[Plan]) -> InstanceRow {
    let mut row = InstanceRow {
        from: inst.initial,
        to: inst.goal,
        ..InstanceRow::default()
    };
    for p1 in plans {
        for p2 in plans {
            row.pairs += 1;
            match execute_pair(graph, dist, inst, p1, p2).outcome {
                Outcome::Success => continue,
                Outcome::CollisionAt(_) => row.collisions += 1,
                Outcome::OffOptimalAt(_) => row.off_optimal += 1,
                Outcome::WrongFinalState => row.wrong_final_state += 1,
            }
            row.failures += 1;
        }
    }
    row
}

fn sweep<F>(graph: &StateGraph, dist: &DistanceTable, scope: Scope, candidates: F) -> Result<SweepSummary>
where
    F: Fn(Instance) -> Result<Vec<Plan>> + Sync,
{
    let rows = scope
        .instances(graph, dist)
        .into_par_iter()
        .map(|inst| match candidates(inst) {
            Ok(plans) => Ok(run_pairs(graph, dist, inst, &plans)),
            Err(Error::PlanSetTooLarge { .. }) => Ok(InstanceRow {
                from: inst.initial,
                to: inst.goal,
                skipped: true,
                ..InstanceRow::default()
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(SweepSummary { rows })
}

/// Speak a sentence for every instance in scope and run every ordered pair
/// of the plans it expresses.
pub fn exhaustive_check(
    abs: &Abstraction,
    graph: &StateGraph,
    dist: &DistanceTable,
    scope: Scope,
    cap: usize,
) -> Result<SweepSummary> {
    sweep(graph, dist, scope, |inst| {
        let sentence = speak(abs, graph, dist, inst)?;
        expressed_plans(abs, graph, dist, inst, &sentence.words, cap)
    })
}

/// The same sweep with no sentence: every ordered pair of optimal plans.
pub fn baseline_failures(graph: &StateGraph, dist: &DistanceTable, scope: Scope, cap: usize) -> Result<SweepSummary> {
    sweep(graph, dist, scope, |inst| optimal_plans(graph, dist, inst, cap))
}
