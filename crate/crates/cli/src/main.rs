use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use coordlang::abstraction::{build_abstraction, conflict_graph, greedy_color, refine_until_perfect, verify_perfect};
use coordlang::domain::{build_state_graph, load_domain, save_domain};
use coordlang::export::{rc_graph_dot, read_json, write_json, AbstractionFile, RcGraphFile};
use coordlang::language::speak;
use coordlang::pipeline::{bench_problem, reference_problems, write_bench_csv};
use coordlang::plan::{all_pairs_distances, DEFAULT_PLAN_CAP};
use coordlang::rc::build_rc_graph;
use coordlang::sim::{baseline_failures, exhaustive_check};
use coordlang::{ColorOrder, ConflictRule, DomainSpec, Error, Instance, RcOptions, Scope, StateId};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "coordlang",
    version,
    about = "Required-coordination analysis and emergent languages for two-agent domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a domain file and report its joint state count.
    Gen(GenArgs),
    /// Build the RC graph of a domain.
    Rcgraph(RcgraphArgs),
    /// Colour the conflict graph and write the abstraction and its language.
    Abstract(AbstractArgs),
    /// Print the sentence for one instance.
    Speak(SpeakArgs),
    /// Check that an abstraction is perfect; exits 1 on any violation.
    Verify(VerifyArgs),
    /// Execute every pair of sentence-constrained plans; exits 1 on any failure.
    Simulate(SimulateArgs),
    /// Run the reference benchmark suite.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Ring,
    #[value(name = "grid_loop")]
    GridLoop,
    #[value(name = "turn_and_open")]
    TurnAndOpen,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    domain: Generator,
    /// Ring size.
    #[arg(long)]
    n: Option<usize>,
    /// Grid width.
    #[arg(long)]
    w: Option<usize>,
    /// Grid height.
    #[arg(long)]
    h: Option<usize>,
    #[arg(long, default_value_t = 2)]
    rooms: usize,
    #[arg(long)]
    balls: Option<usize>,
    /// Domain file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RcgraphArgs {
    domain: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Refuse instances with more optimal plans than this.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, default_value = "via-sets")]
    rule: ConflictRule,
}

#[derive(Args)]
struct AbstractArgs {
    rc: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "saturation")]
    order: ColorOrder,
    /// Keep the plain colouring even if it is not perfect.
    #[arg(long)]
    no_refine: bool,
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct SpeakArgs {
    abstraction: PathBuf,
    #[arg(long)]
    from: u32,
    #[arg(long)]
    to: u32,
}

#[derive(Args)]
struct ScopeArgs {
    #[arg(long, conflicts_with = "sample")]
    exhaustive: bool,
    /// Number of instances to draw.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0, requires = "sample")]
    seed: u64,
}

impl ScopeArgs {
    fn scope(&self) -> Scope {
        match self.sample {
            Some(k) => Scope::Sample { k, seed: self.seed },
            None => Scope::Exhaustive,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    abstraction: PathBuf,
    #[command(flatten)]
    scope: ScopeArgs,
}

#[derive(Args)]
struct SimulateArgs {
    abstraction: PathBuf,
    #[command(flatten)]
    scope: ScopeArgs,
    /// Skip instances with more expressed plans than this.
    #[arg(long, default_value_t = DEFAULT_PLAN_CAP)]
    cap: usize,
    /// Per-instance tallies as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    #[value(name = "paper-table1")]
    PaperTable1,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long)]
    out: PathBuf,
    /// Run only problems whose label contains this text, e.g. "GW".
    #[arg(long)]
    only: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let cap = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::PlanSetTooLarge { .. })));
            ExitCode::from(if cap { EXIT_CAP } else { EXIT_INPUT })
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Rcgraph(a) => rcgraph(a),
        Command::Abstract(a) => abstract_cmd(a),
        Command::Speak(a) => speak_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
    }
}

fn need(value: Option<usize>, flag: &str, domain: &str) -> Result<usize> {
    value.with_context(|| format!("--{flag} is required for {domain}"))
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let spec = match a.domain {
        Generator::Ring => DomainSpec::ring(need(a.n, "n", "ring")?)?,
        Generator::GridLoop => DomainSpec::grid_loop(need(a.w, "w", "grid_loop")?, need(a.h, "h", "grid_loop")?)?,
        Generator::TurnAndOpen => DomainSpec::turn_and_open(a.rooms, need(a.balls, "balls", "turn_and_open")?)?,
    };
    let graph = build_state_graph(&spec)?;
    if let Some(out) = &a.out {
        save_domain(&spec, out)?;
    }
    println!("{} states", graph.len());
    Ok(ExitCode::SUCCESS)
}

fn rcgraph(a: RcgraphArgs) -> Result<ExitCode> {
    let spec = load_domain(&a.domain)?;
    let graph = build_state_graph(&spec)?;
    let dist = all_pairs_distances(&graph);
    let rc = build_rc_graph(
        &graph,
        &dist,
        RcOptions {
            cap: a.cap,
            rule: a.rule,
        },
    )?;
    write_json(&RcGraphFile::new(&spec, a.rule.name(), &rc), &a.out)?;
    if let Some(dot) = &a.dot {
        std::fs::write(dot, rc_graph_dot(&graph, &rc, None)).with_context(|| format!("writing {}", dot.display()))?;
    }
    println!("{} states", graph.len());
    println!("edges: {}", rc.edges.len());
    println!("theta entries: {}", rc.theta.len());
    println!("conflict pairs: {}", rc.conflict_pairs().len());
    Ok(ExitCode::SUCCESS)
}

fn abstract_cmd(a: AbstractArgs) -> Result<ExitCode> {
    let file: RcGraphFile = read_json(&a.rc)?;
    let spec = file.domain.clone().into_spec()?;
    let (graph, rc) = file.restore()?;
    let cg = conflict_graph(&rc);
    let first = greedy_color(&cg, a.order);
    println!("order: {}", a.order.name());
    println!(
        "colours: {} (clique bound {}, max degree {})",
        first.count(),
        cg.greedy_clique_bound(),
        cg.max_degree()
    );
    let abs = if a.no_refine {
        build_abstraction(&graph, &cg, &first)?
    } else {
        let dist = all_pairs_distances(&graph);
        let r = refine_until_perfect(&graph, &dist, &cg, a.order, Scope::Exhaustive)?;
        println!("refinement pairs: {} in {} rounds", r.added, r.rounds);
        r.abstraction
    };
    write_json(&AbstractionFile::new(&spec, &abs), &a.out)?;
    if let Some(dot) = &a.dot {
        std::fs::write(dot, rc_graph_dot(&graph, &rc, Some(&abs)))
            .with_context(|| format!("writing {}", dot.display()))?;
    }
    println!("{} blocks", abs.block_count());
    Ok(ExitCode::SUCCESS)
}

fn state_arg(n: usize, id: u32, flag: &str) -> Result<StateId> {
    if (id as usize) < n {
        Ok(StateId(id))
    } else {
        bail!("--{flag} {id} is out of range (0..{n})")
    }
}

fn speak_cmd(a: SpeakArgs) -> Result<ExitCode> {
    let (graph, abs) = read_json::<AbstractionFile>(&a.abstraction)?.restore()?;
    let inst = Instance::new(
        state_arg(graph.len(), a.from, "from")?,
        state_arg(graph.len(), a.to, "to")?,
    );
    let dist = all_pairs_distances(&graph);
    let sentence = speak(&abs, &graph, &dist, inst)?;
    println!("{}", serde_json::to_string(&sentence)?);
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let (graph, abs) = read_json::<AbstractionFile>(&a.abstraction)?.restore()?;
    let dist = all_pairs_distances(&graph);
    let report = verify_perfect(&abs, &graph, &dist, a.scope.scope())?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for v in &report.violations {
        let (p, q) = &v.plans;
        writeln!(
            out,
            "violation {}: path {:?} plans {:?} / {:?}",
            v.instance,
            v.path,
            p.states.iter().map(|s| s.0).collect::<Vec<_>>(),
            q.states.iter().map(|s| s.0).collect::<Vec<_>>()
        )?;
    }
    writeln!(
        out,
        "{} instances, {} violations",
        report.instances,
        report.violations.len()
    )?;
    Ok(if report.is_perfect() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let (graph, abs) = read_json::<AbstractionFile>(&a.abstraction)?.restore()?;
    let dist = all_pairs_distances(&graph);
    let scope = a.scope.scope();
    let base = baseline_failures(&graph, &dist, scope, a.cap)?;
    let checked = exhaustive_check(&abs, &graph, &dist, scope, a.cap)?;
    if let Some(path) = &a.csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        checked.write_csv(BufWriter::new(f))?;
    }
    println!(
        "baseline: {} pairs, {} failures, {} skipped",
        base.pairs(),
        base.failures(),
        base.skipped().len()
    );
    println!(
        "with sentences: {} instances, {} pairs, {} failures, {} skipped",
        checked.instances(),
        checked.pairs(),
        checked.failures(),
        checked.skipped().len()
    );
    for inst in checked.failing_instances() {
        println!("failing instance {inst}");
    }
    Ok(if checked.failures() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    })
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let Suite::PaperTable1 = a.suite;
    let problems: Vec<_> = reference_problems()
        .into_iter()
        .filter(|p| a.only.as_deref().is_none_or(|o| p.label.contains(o)))
        .collect();
    if problems.is_empty() {
        bail!("no problem matches --only");
    }
    println!(
        "{:<8} {:>7} {:>7} {:>11} {:>10} {:>9}",
        "problem", "pairs", "states", "abs_states", "reference", "time_s"
    );
    let mut rows = Vec::new();
    let mut imperfect = Vec::new();
    for p in &problems {
        let (row, run) = bench_problem(p)?;
        println!(
            "{:<8} {:>7} {:>7} {:>11} {:>10} {:>9.2}",
            row.problem, row.pairs, row.states, row.abs_states, p.reference_blocks, row.time_s
        );
        if !run.report.is_perfect() {
            imperfect.push(p.label.clone());
        }
        rows.push(row);
    }
    let f = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_bench_csv(&rows, BufWriter::new(f))?;
    if !imperfect.is_empty() {
        eprintln!("verification found violations in: {}", imperfect.join(", "));
        return Ok(ExitCode::from(EXIT_VERIFY));
    }
    Ok(ExitCode::SUCCESS)
}
