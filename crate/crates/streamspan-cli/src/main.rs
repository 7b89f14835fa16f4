mod instance;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use streamspan::graph::io::{format_graph, parse_graph};
use streamspan::instances::to_stream;
use streamspan::multipass::{baswana_sen, kapralov_woodruff, recursive_spanner, Scheme};
use streamspan::report::{RunParams, RunReport};
use streamspan::simcomm::{filtering_spanner, low_degree_peeling, scm_tradeoff, FilterParams, Regime};
use streamspan::spanner::{sparse_tradeoff_spanner, sparsifier_spanner, tradeoff_spanner};
use streamspan::sparsify::SparsifierParams;
use streamspan::stream::StreamSource;
use streamspan::{Error, Result, UnweightedGraph};

#[derive(Parser)]
#[command(name = "streamspan", version, about = "Spanners from graph sketches: generate, run, verify, bench")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dynamic stream for a generated graph to stdout or a file.
    Gen {
        /// Generator spec, e.g. `gnp:200:0.1`.
        spec: String,
        /// Fraction of decoy insert/delete pairs relative to the edge count.
        #[arg(long, default_value_t = 0.0)]
        deletion_ratio: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm and print its report as JSON.
    Run(RunArgs),
    /// Recompute the stretch of a saved spanner against a stream or graph.
    Verify {
        #[command(flatten)]
        input: Input,
        /// Spanner in graph format.
        #[arg(long)]
        spanner: PathBuf,
        /// Saved report whose declared bound and stretch are rechecked.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Declared bound when no report is given.
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Sweep algorithms, parameters and seeds; print CSV.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct Input {
    /// Stream file (`n N` header, then `+ u v` / `- u v` lines).
    #[arg(long, conflicts_with_all = ["graph", "gen"])]
    stream: Option<PathBuf>,
    /// Graph file (`n N` header, then `u v` lines).
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generator spec used instead of a file.
    #[arg(long)]
    gen: Option<String>,
    /// Seed for randomized generators.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
}

impl Input {
    fn load(&self) -> Result<StreamSource> {
        if let Some(p) = &self.stream {
            return StreamSource::parse(&fs::read_to_string(p)?);
        }
        if let Some(p) = &self.graph {
            return Ok(StreamSource::from_graph(&parse_graph(&fs::read_to_string(p)?)?));
        }
        if let Some(spec) = &self.gen {
            return Ok(StreamSource::from_graph(&instance::generate(spec, self.instance_seed)?));
        }
        Err(Error::Parameter("one of --stream, --graph or --gen is required".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algo {
    Sparsifier,
    Tradeoff,
    SparseTradeoff,
    Bs,
    Kw,
    RecursiveKw,
    RecursiveBs,
    Filtering,
    Peeling,
    Scm,
}

#[derive(Args, Clone)]
struct AlgoParams {
    #[arg(long)]
    k: Option<f64>,
    /// Iterations of the recursion, or rounds of communication.
    #[arg(long)]
    g: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Filtering distance threshold; overrides --regime.
    #[arg(long)]
    t: Option<f64>,
    /// Peeling degree threshold.
    #[arg(long)]
    s: Option<u64>,
    #[arg(long, value_parser = ["resistance", "ldd"])]
    regime: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum)]
    algo: Algo,
    #[command(flatten)]
    params: AlgoParams,
    /// Write the spanner (or the recovered edges for peeling) here.
    #[arg(long)]
    spanner_out: Option<PathBuf>,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated algorithms.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    algo: Vec<Algo>,
    /// Generator specs; repeat the flag for several families.
    #[arg(long = "gen", required = true)]
    gens: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    g: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    s: Vec<u64>,
    #[arg(long)]
    regime: Option<String>,
    /// Seeds `0..seeds` offset by the base seed.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long)]
    seed: Option<u64>,
}

/// Explicit flag, then `STREAMSPAN_SEED`, then zero.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("STREAMSPAN_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Parameter(format!("STREAMSPAN_SEED={v:?} is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, algo: Algo) -> Result<T> {
    v.ok_or_else(|| Error::Parameter(format!("--{flag} is required for {algo:?}")))
}

fn integral_k(k: f64, algo: Algo) -> Result<u32> {
    if k.fract() != 0.0 || k < 1.0 || k > u32::MAX as f64 {
        return Err(Error::Parameter(format!("{algo:?} needs a positive integer --k, got {k}")));
    }
    Ok(k as u32)
}

/// Report plus the edge set to save with `--spanner-out`.
fn execute(src: &StreamSource, algo: Algo, p: &AlgoParams, seed: u64) -> Result<(RunReport, UnweightedGraph)> {
    let sp = SparsifierParams::with_seed(seed);
    let out = match algo {
        Algo::Sparsifier => sparsifier_spanner(src, &sp)?,
        Algo::Tradeoff => tradeoff_spanner(src, need(p.alpha, "alpha", algo)?, &sp)?,
        Algo::SparseTradeoff => sparse_tradeoff_spanner(src, need(p.alpha, "alpha", algo)?, &sp)?,
        Algo::Bs => baswana_sen(src, integral_k(need(p.k, "k", algo)?, algo)?, seed)?,
        Algo::Kw => kapralov_woodruff(src, integral_k(need(p.k, "k", algo)?, algo)?, seed)?,
        Algo::RecursiveKw | Algo::RecursiveBs => {
            let scheme = if algo == Algo::RecursiveKw { Scheme::Kw } else { Scheme::Bs };
            recursive_spanner(src, need(p.k, "k", algo)?, need(p.g, "g", algo)?, scheme, seed)?
        }
        Algo::Filtering => {
            let g = src.materialize();
            let rounds = p.g.unwrap_or(1);
            let params = match p.t {
                Some(t) => FilterParams::new(t, rounds, seed)?,
                None => {
                    let regime = Regime::parse(p.regime.as_deref().unwrap_or("resistance"))?;
                    FilterParams::for_regime(g.n(), rounds, regime, seed)?
                }
            };
            let out = filtering_spanner(&g, &params)?;
            return Ok((out.report, out.spanner));
        }
        Algo::Peeling => {
            let g = src.materialize();
            let s = need(p.s, "s", algo)?;
            let out = low_degree_peeling(&g, s, seed)?;
            let recovered = UnweightedGraph::from_edges(g.n(), out.result.recovered.iter().copied())?;
            return Ok((out.report, recovered));
        }
        Algo::Scm => {
            let g = src.materialize();
            let out = scm_tradeoff(&g, need(p.alpha, "alpha", algo)?, p.g.unwrap_or(1), seed)?;
            return Ok((out.report, out.spanner));
        }
    };
    Ok((out.report, out.spanner))
}

fn run(args: RunArgs) -> Result<()> {
    let seed = resolve_seed(args.params.seed)?;
    let src = args.input.load()?;
    let (report, spanner) = execute(&src, args.algo, &args.params, seed)?;
    if let Some(p) = &args.spanner_out {
        fs::write(p, format_graph(&spanner))?;
    }
    let json = report.to_json();
    if let Some(p) = &args.report_out {
        fs::write(p, format!("{json}\n"))?;
    }
    println!("{json}");
    Ok(())
}

fn verify(input: Input, spanner: PathBuf, report: Option<PathBuf>, bound: Option<f64>) -> Result<bool> {
    let g = input.load()?.materialize();
    let h = parse_graph(&fs::read_to_string(&spanner)?)?;
    if h.n() != g.n() {
        return Err(Error::SizeMismatch(g.n(), h.n()));
    }
    h.check_subgraph_of(&g)?;
    let saved = report.map(|p| fs::read_to_string(p).map_err(Error::from).and_then(|t| RunReport::from_json(&t))).transpose()?;
    let mut fresh = saved.clone().unwrap_or_else(|| RunReport::new("verify", RunParams::default(), &g));
    fresh.certify(&g, &h, bound.or(fresh.declared_bound))?;
    println!("{}", fresh.to_json());
    Ok(match saved {
        Some(s) => s.n == fresh.n && s.m == fresh.m && s.spanner_edges == fresh.spanner_edges && s.max_stretch == fresh.max_stretch,
        None => fresh.verified,
    })
}

const CSV_HEADER: &str = "algo,instance,n,m,k,g,alpha,t,s,seed,passes,rounds,spanner_edges,max_stretch,declared_bound,peak_words,max_bits_per_player_per_round,attempts,verified,wall_ms,error";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_row(algo: Algo, inst: &str, p: &AlgoParams, seed: u64, out: &Result<(RunReport, UnweightedGraph)>) -> String {
    let name = algo.to_possible_value().expect("named variant").get_name().to_string();
    let lead = format!("{name},{inst}");
    match out {
        Ok((r, _)) => format!(
            "{lead},{},{},{},{},{},{},{},{seed},{},{},{},{},{},{},{},{},{},{},",
            r.n,
            r.m,
            opt(r.params.k),
            opt(r.params.g),
            opt(r.params.alpha),
            opt(r.params.t),
            opt(r.params.s),
            r.passes,
            r.rounds,
            r.spanner_edges,
            opt(r.max_stretch),
            opt(r.declared_bound),
            r.peak_words,
            r.max_bits_per_player_per_round,
            r.attempts,
            r.verified,
            r.wall_ms
        ),
        Err(e) => format!(
            "{lead},,,{},{},{},{},{},{seed},,,,,,,,,false,,\"{}\"",
            opt(p.k),
            opt(p.g),
            opt(p.alpha),
            opt(p.t),
            opt(p.s),
            e.to_string().replace('"', "'")
        ),
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let base = resolve_seed(args.seed)?;
    let list = |v: &[f64]| if v.is_empty() { vec![None] } else { v.iter().copied().map(Some).collect() };
    let ks = list(&args.k);
    let alphas = list(&args.alpha);
    let gs: Vec<Option<u32>> = if args.g.is_empty() { vec![None] } else { args.g.iter().copied().map(Some).collect() };
    let ss: Vec<Option<u64>> = if args.s.is_empty() { vec![None] } else { args.s.iter().copied().map(Some).collect() };
    let mut cells = Vec::new();
    for inst in &args.gens {
        for &algo in &args.algo {
            for &k in &ks {
                for &g in &gs {
                    for &alpha in &alphas {
                        for &s in &ss {
                            for i in 0..args.seeds {
                                let params = AlgoParams { k, g, alpha, t: None, s, regime: args.regime.clone(), seed: None };
                                cells.push((inst.clone(), algo, params, base + i));
                            }
                        }
                    }
                }
            }
        }
    }
    let rows: Vec<String> = cells
        .par_iter()
        .map(|(inst, algo, params, seed)| {
            let out = instance::generate(inst, *seed)
                .map(|g| StreamSource::from_graph(&g))
                .and_then(|src| execute(&src, *algo, params, *seed));
            csv_row(*algo, inst, params, *seed, &out)
        })
        .collect();
    println!("{CSV_HEADER}");
    for r in rows {
        println!("{r}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Command::Gen { spec, deletion_ratio, seed, out } => (|| {
            let seed = resolve_seed(seed)?;
            let g = instance::generate(&spec, seed)?;
            let text = to_stream(&g, deletion_ratio, seed)?.format();
            match out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(true)
        })(),
        Command::Run(args) => run(args).map(|_| true),
        Command::Verify { input, spanner, report, bound } => verify(input, spanner, report, bound),
        Command::Bench(args) => bench(args).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("streamspan: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("streamspan: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
