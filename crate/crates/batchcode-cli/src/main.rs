//! Command-line surface for the batch-code toolkit. Files are the only
//! inter-command medium: construct a graph, verify it, compile it to a code,
//! then schedule, store, serve, compose or simulate against it.
//!
//! Exit codes: 0 on success, 1 on domain errors (failed verification,
//! infeasible schedule, unrecoverable erasures), 2 on usage errors.

use anyhow::{anyhow, bail, Context, Result};
use batchcode::bigraph::BiGraph;
use batchcode::code::SystematicCode;
use batchcode::constructions::{
    gq_incidence, lazebnik, replication, split_left, zigzag, GqFamily, GqParams, LazebnikParams,
    SplitParams, ZigZagParams,
};
use batchcode::fault::{
    compose, generator_of_code, min_distance, rs_systematic, verify_erasure_tolerance,
    ComposedCode, GeneratorMatrix,
};
use batchcode::gf::{self, Field};
use batchcode::scheduler::{schedule, RequestPattern};
use batchcode::sim::{
    simulate, simulate_replication, table_to_csv, table_to_text, tradeoff_table, Distribution,
    Workload,
};
use batchcode::storage::{store, BucketStore};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "batchcode",
    about = "Multiset batch codes from girth-8 bipartite graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph family (or the replication baseline descriptor).
    Construct(ConstructArgs),
    /// Check girth, short cycles and degrees of a graph file.
    Verify(VerifyArgs),
    /// Compile a graph into a systematic code over GF(p).
    Code(CodeArgs),
    /// Assign a request pattern to disjoint bucket sets.
    Schedule(ScheduleArgs),
    /// Lay a length g*n message out into m = N buckets.
    Store(StoreArgs),
    /// Serve a batch of flat message indices from a store.
    Serve(ServeArgs),
    /// Append systematic MDS parities to a batch code.
    Compose(ComposeArgs),
    /// Exact minimum distance or the composition lower bound.
    CheckDistance(CheckDistanceArgs),
    /// Run a deterministic workload against a store, with a replication
    /// baseline for comparison.
    Simulate(SimulateArgs),
    /// Desk-scale parameter table across all families.
    Table(TableArgs),
}

#[derive(ValueEnum, Clone, Copy)]
enum FamilyArg {
    Zigzag,
    Lazebnik,
    GqW,
    GqQ5,
    Split,
    Replication,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// zigzag: prime alphabet / left degree; replication: copies.
    #[arg(long)]
    k: Option<u64>,
    /// zigzag: vector length / right degree.
    #[arg(long)]
    r: Option<u32>,
    /// lazebnik, gq-w, gq-q5: the prime q.
    #[arg(long)]
    q: Option<u64>,
    /// lazebnik: left-degree exponent (q^s neighbors per left node).
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// lazebnik: size exponent of the l1 subset.
    #[arg(long, default_value_t = 1)]
    t: u32,
    /// split: number of left copies.
    #[arg(long)]
    b: Option<usize>,
    /// split: base graph JSON file; replication: message count.
    #[arg(long)]
    input: Option<PathBuf>,
    /// replication: number of symbols.
    #[arg(long)]
    n: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Prime field modulus for the code symbols.
    #[arg(long, default_value_t = 2)]
    field_p: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    code: PathBuf,
    /// Pattern as "index:count,index:count,...".
    #[arg(long)]
    requests: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StoreArgs {
    #[arg(long)]
    code: PathBuf,
    /// Stacking factor: how many codewords share each bucket.
    #[arg(long, default_value_t = 1)]
    g: usize,
    /// Comma-separated message symbols, length g*n.
    #[arg(long)]
    message: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    store: PathBuf,
    /// Comma-separated flat indices in [0, g*n); repeats allowed.
    #[arg(long)]
    requests: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    /// Batch code JSON file.
    #[arg(long)]
    batch: PathBuf,
    /// Number of MDS parities p.
    #[arg(long)]
    mds_parities: usize,
    /// Prime field for the composed code; default: smallest prime > n + p.
    #[arg(long)]
    field_p: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckDistanceArgs {
    #[arg(long, conflicts_with = "composed")]
    code: Option<PathBuf>,
    #[arg(long)]
    composed: Option<PathBuf>,
    /// Force the exact search regardless of code length.
    #[arg(long)]
    exhaustive: bool,
    /// Cap on rank checks during the exact search.
    #[arg(long, default_value_t = 20_000_000)]
    budget: u64,
}

#[derive(ValueEnum, Clone, Copy)]
enum WorkloadArg {
    Uniform,
    Zipf,
    SingleHot,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, value_enum, default_value_t = WorkloadArg::Uniform)]
    workload: WorkloadArg,
    /// Zipf exponent.
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Requests per tick.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    ticks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the replication comparison rows.
    #[arg(long)]
    no_baseline: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct TableArgs {
    /// Family filter; only "all" is defined at desk scale.
    #[arg(long, default_value = "all")]
    family: String,
    #[arg(long, default_value_t = 3)]
    max_q: u64,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    format: TableFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Bad flag combinations detected after clap parsing; exits 2 like clap's
/// own usage errors.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Construct(args) => construct(args),
        Command::Verify(args) => verify(args),
        Command::Code(args) => code(args),
        Command::Schedule(args) => schedule_cmd(args),
        Command::Store(args) => store_cmd(args),
        Command::Serve(args) => serve_cmd(args),
        Command::Compose(args) => compose_cmd(args),
        Command::CheckDistance(args) => check_distance(args),
        Command::Simulate(args) => simulate_cmd(args),
        Command::Table(args) => table_cmd(args),
    }
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn read_file(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn require<T>(value: Option<T>, flag: &str, family: &str) -> Result<T> {
    value.ok_or_else(|| {
        anyhow::Error::new(UsageError(format!(
            "--{flag} is required for family {family}"
        )))
    })
}

fn construct(args: ConstructArgs) -> Result<()> {
    let text = match args.family {
        FamilyArg::Zigzag => {
            let k = require(args.k, "k", "zigzag")?;
            let r = require(args.r, "r", "zigzag")?;
            zigzag(&ZigZagParams { k, r })?.to_json()
        }
        FamilyArg::Lazebnik => {
            let q = require(args.q, "q", "lazebnik")?;
            lazebnik(&LazebnikParams {
                q,
                s: args.s,
                t: args.t,
            })?
            .to_json()
        }
        FamilyArg::GqW => {
            let q = require(args.q, "q", "gq-w")?;
            gq_incidence(&GqParams {
                family: GqFamily::SymplecticW,
                q,
            })?
            .to_json()
        }
        FamilyArg::GqQ5 => {
            let q = require(args.q, "q", "gq-q5")?;
            gq_incidence(&GqParams {
                family: GqFamily::EllipticQ5,
                q,
            })?
            .to_json()
        }
        FamilyArg::Split => {
            let b = require(args.b, "b", "split")?;
            let input = require(args.input, "input", "split")?;
            let base = BiGraph::from_json(&read_file(&input)?)?;
            split_left(&base, &SplitParams { b })?.to_json()
        }
        FamilyArg::Replication => {
            let n = require(args.n, "n", "replication")?;
            let k = require(args.k, "k", "replication")? as usize;
            if n == 0 || k == 0 {
                bail!("replication needs n, k >= 1");
            }
            let layout = replication(n, k);
            format!(
                r#"{{"n":{},"k":{},"m":{},"rate":"1/{}"}}"#,
                layout.n,
                layout.k,
                layout.buckets(),
                layout.k
            )
        }
    };
    emit(args.output.as_ref(), &format!("{text}\n"))
}

fn verify(args: VerifyArgs) -> Result<()> {
    let g = BiGraph::from_json(&read_file(&args.graph)?)?;
    let profile = g.degree_profile();
    println!("n1: {}", g.n1());
    println!("n2: {}", g.n2());
    println!("edges: {}", g.edge_count());
    println!("left_degree: [{}, {}]", profile.left_min, profile.left_max);
    println!(
        "right_degree: [{}, {}]",
        profile.right_min, profile.right_max
    );
    let four = g.has_four_cycle();
    let six = g.has_six_cycle();
    match g.girth() {
        Some(girth) => println!("girth: {girth}"),
        None => println!("girth: acyclic"),
    }
    let ok = four.is_none() && six.is_none();
    println!("girth>=8: {ok}");
    println!("min_left_degree: {}", profile.left_min);
    if let Some(w) = four {
        println!("4-cycle witness: {w}");
    }
    if let Some(w) = six {
        println!("6-cycle witness: {w}");
    }
    if !ok {
        bail!("graph has girth < 8; it does not support disjoint repair groups");
    }
    Ok(())
}

fn code(args: CodeArgs) -> Result<()> {
    let g = BiGraph::from_json(&read_file(&args.graph)?)?;
    let field = Field::new(args.field_p, false)?;
    let code = SystematicCode::from_graph(g, field);
    emit(args.output.as_ref(), &format!("{}\n", code.to_json()?))
}

fn schedule_cmd(args: ScheduleArgs) -> Result<()> {
    let code = SystematicCode::from_json(&read_file(&args.code)?)?;
    let req: RequestPattern = args.requests.parse().map_err(|e| anyhow!("{e}"))?;
    let assignment = schedule(&code, &req)?;
    emit(args.output.as_ref(), &format!("{}\n", assignment.to_json()))
}

fn parse_symbols(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| anyhow!("cannot parse symbol {s:?}"))
        })
        .collect()
}

fn store_cmd(args: StoreArgs) -> Result<()> {
    let code = SystematicCode::from_json(&read_file(&args.code)?)?;
    let field = code.field();
    let message: Vec<_> = parse_symbols(&args.message)?
        .into_iter()
        .map(|v| field.elem(v))
        .collect();
    let st = store(code, args.g, &message)?;
    emit(args.output.as_ref(), &format!("{}\n", st.to_json()?))
}

fn serve_cmd(args: ServeArgs) -> Result<()> {
    let st = BucketStore::from_json(&read_file(&args.store)?)?;
    let requests: Vec<usize> = parse_symbols(&args.requests)?
        .into_iter()
        .map(|v| v as usize)
        .collect();
    let outcome = st.serve(&requests)?;
    let values: Vec<String> = outcome
        .values
        .iter()
        .map(|v| v.base_coord().to_string())
        .collect();
    let reads: Vec<String> = outcome
        .reads
        .iter()
        .map(|r| format!(r#"{{"bucket":{},"row":{}}}"#, r.bucket, r.row))
        .collect();
    let text = format!(
        r#"{{"values":[{}],"reads":[{}],"max_reads_per_bucket":{}}}"#,
        values.join(","),
        reads.join(","),
        outcome.max_reads_per_bucket()
    );
    emit(args.output.as_ref(), &format!("{text}\n"))
}

fn smallest_prime_above(n: u64) -> u64 {
    (n + 1..)
        .find(|&v| gf::is_prime(v))
        .expect("primes are infinite")
}

fn compose_cmd(args: ComposeArgs) -> Result<()> {
    let batch = SystematicCode::from_json(&read_file(&args.batch)?)?;
    let n = batch.message_len();
    let p = args.mds_parities;
    let field_p = args
        .field_p
        .unwrap_or_else(|| smallest_prime_above((n + p) as u64));
    let mds = rs_systematic(n, p, field_p)?;
    let cc = compose(&batch, &mds)?;
    emit(args.output.as_ref(), &format!("{}\n", cc.to_json()?))
}

fn check_distance(args: CheckDistanceArgs) -> Result<()> {
    let (gen, bound): (GeneratorMatrix, Option<usize>) = if let Some(path) = &args.code {
        let code = SystematicCode::from_json(&read_file(path)?)?;
        (generator_of_code(&code), None)
    } else if let Some(path) = &args.composed {
        let cc = ComposedCode::from_json(&read_file(path)?)?;
        (cc.generator(), Some(cc.distance_lower_bound()))
    } else {
        return Err(anyhow::Error::new(UsageError(
            "pass --code or --composed".to_string(),
        )));
    };
    println!("n: {}", gen.rows());
    println!("N: {}", gen.cols());
    if args.exhaustive || gen.cols() <= 24 {
        let d = min_distance(&gen, args.budget)?;
        println!("distance: {d}");
        if let Some(b) = bound {
            println!("composition_bound: {b}");
            if d < b {
                bail!("measured distance {d} fell below the composition bound {b}");
            }
        }
        return Ok(());
    }
    // Long composed codes: certify the composition bound instead of the
    // exact search.
    let Some(b) = bound else {
        bail!(
            "code length {} > 24; rerun with --exhaustive to force the exact search",
            gen.cols()
        );
    };
    match verify_erasure_tolerance(&gen, b - 1) {
        Ok(()) => {
            println!("distance: >={b}");
            println!("certificate: all {}-erasure patterns recoverable", b - 1);
            Ok(())
        }
        Err(pattern) => {
            bail!("erasure pattern {pattern:?} unrecoverable; composition bound violated")
        }
    }
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let st = BucketStore::from_json(&read_file(&args.store)?)?;
    let wl = Workload {
        distribution: match args.workload {
            WorkloadArg::Uniform => Distribution::Uniform,
            WorkloadArg::Zipf => Distribution::Zipf { theta: args.theta },
            WorkloadArg::SingleHot => Distribution::SingleHot,
        },
        k: args.k,
        ticks: args.ticks,
        seed: args.seed,
    };
    let mut report = simulate(&st, &wl)?;
    if !args.no_baseline {
        let layout = replication(st.message_len(), wl.k);
        report.rows.extend(simulate_replication(&layout, &wl)?.rows);
    }
    emit(args.output.as_ref(), &report.to_csv())?;
    if report.total_failures() > 0 {
        bail!(
            "{} serve failure(s); the store's code does not support this workload",
            report.total_failures()
        );
    }
    Ok(())
}

fn table_cmd(args: TableArgs) -> Result<()> {
    if args.family != "all" {
        return Err(anyhow::Error::new(UsageError(
            "only --family all is defined; individual rows come from `construct`".to_string(),
        )));
    }
    let rows = tradeoff_table(args.max_q)?;
    let text = match args.format {
        TableFormat::Text => table_to_text(&rows),
        TableFormat::Csv => table_to_csv(&rows),
    };
    emit(args.output.as_ref(), &text)
}
