//! The end-to-end run: state graph, RC graph, colouring, refinement and
//! verification, plus the ten reference problems used for benchmarking.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::abstraction::{
    build_abstraction, conflict_graph, greedy_color, refine_until_perfect, verify_perfect, Abstraction, ColorOrder,
    Coloring, ConflictGraph, PerfectionReport, Scope,
};
use crate::domain::{build_state_graph, DomainSpec, StateGraph};
use crate::error::Result;
use crate::plan::{all_pairs_distances, DistanceTable};
use crate::rc::{build_rc_graph, RcGraph, RcOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    pub rc: RcOptions,
    pub order: ColorOrder,
    /// Split blocks until an exhaustive check finds no violation.
    pub refine: bool,
    /// Scope of the final verification.
    pub verify: Scope,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            rc: RcOptions::default(),
            order: ColorOrder::default(),
            refine: true,
            verify: Scope::Exhaustive,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub graph: StateGraph,
    pub dist: DistanceTable,
    pub rc: RcGraph,
    /// Conflict pairs from the RC graph alone.
    pub conflicts: ConflictGraph,
    /// Colours needed before refinement.
    pub initial_colors: usize,
    pub coloring: Coloring,
    pub abstraction: Abstraction,
    pub refinement_pairs: usize,
    pub report: PerfectionReport,
    pub elapsed: Duration,
}

pub fn run_pipeline(spec: &DomainSpec, opts: PipelineOptions) -> Result<PipelineRun> {
    let start = Instant::now();
    let graph = build_state_graph(spec)?;
    let dist = all_pairs_distances(&graph);
    let rc = build_rc_graph(&graph, &dist, opts.rc)?;
    let conflicts = conflict_graph(&rc);
    let first = greedy_color(&conflicts, opts.order);
    let initial_colors = first.count();
    let (coloring, abstraction, refinement_pairs) = if opts.refine {
        let r = refine_until_perfect(&graph, &dist, &conflicts, opts.order, Scope::Exhaustive)?;
        (r.coloring, r.abstraction, r.added)
    } else {
        let abs = build_abstraction(&graph, &conflicts, &first)?;
        (first, abs, 0)
    };
    let report = verify_perfect(&abstraction, &graph, &dist, opts.verify)?;
    Ok(PipelineRun {
        graph,
        dist,
        rc,
        conflicts,
        initial_colors,
        coloring,
        abstraction,
        refinement_pairs,
        report,
        elapsed: start.elapsed(),
    })
}

/// A named benchmark configuration with its published abstract-state count.
#[derive(Clone, Debug)]
pub struct Problem {
    pub label: String,
    pub spec: DomainSpec,
    pub reference_blocks: usize,
}

/// The five Turn-and-Open and five grid-loop problems.
pub fn reference_problems() -> Vec<Problem> {
    let tao = [(0, 1), (1, 16), (2, 27), (3, 43), (4, 66)];
    let grids = [(2, 2, 4), (3, 3, 8), (4, 3, 10), (4, 4, 12), (4, 5, 14)];
    let mut out = Vec::new();
    for (i, (balls, blocks)) in tao.into_iter().enumerate() {
        out.push(Problem {
            label: format!("T&O #{}", i + 1),
            spec: DomainSpec::turn_and_open(2, balls).expect("valid parameters"),
            reference_blocks: blocks,
        });
    }
    for (i, (w, h, blocks)) in grids.into_iter().enumerate() {
        out.push(Problem {
            label: format!("GW #{}", i + 1),
            spec: DomainSpec::grid_loop(w, h).expect("valid parameters"),
            reference_blocks: blocks,
        });
    }
    out
}

/// Ordered pairs up to which benchmark verification is exhaustive.
pub const EXHAUSTIVE_LIMIT: usize = 20_000;

/// Sample drawn above [`EXHAUSTIVE_LIMIT`].
pub const BENCH_SAMPLE: Scope = Scope::Sample { k: 1000, seed: 0 };

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub pairs: usize,
    pub states: usize,
    pub abs_states: usize,
    pub time_s: f64,
}

/// Run one problem with verification scaled to its size.
pub fn bench_problem(problem: &Problem) -> Result<(BenchRow, PipelineRun)> {
    let n = build_state_graph(&problem.spec)?.len();
    let pairs = n * n.saturating_sub(1);
    let verify = if pairs <= EXHAUSTIVE_LIMIT {
        Scope::Exhaustive
    } else {
        BENCH_SAMPLE
    };
    let run = run_pipeline(
        &problem.spec,
        PipelineOptions {
            verify,
            ..PipelineOptions::default()
        },
    )?;
    let row = BenchRow {
        problem: problem.label.clone(),
        pairs,
        states: n,
        abs_states: run.abstraction.block_count(),
        time_s: run.elapsed.as_secs_f64(),
    };
    Ok((row, run))
}

pub fn write_bench_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| crate::error::Error::io("csv output", e))
}
