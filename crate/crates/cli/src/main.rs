//! `forbdist` command-line interface.
//!
//! Every subcommand except `gen` writes one JSON report:
//! `{"command", "inputs": [{"path", "sha256"}], "config", "result", "wall_time_ms"}`.
//! Reports are byte-identical across runs with the same arguments and
//! inputs, apart from `wall_time_ms`.
//!
//! Exit codes: 0 success, 1 unknown subcommand, 2 invalid input or
//! precondition, 3 work cap exceeded, 4 a verification suite failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use forbdist::checks;
use forbdist::estimator::{
    attest_constants, build_codebook, codebook_estimate, removal_probe_with, sample_estimate, AttestationCodebook,
    CodebookConfig,
};
use forbdist::hom::{
    hom_density_graph_exact, hom_density_graph_with, hom_density_rational, hom_density_weighted_with, DensityOptions,
    MonteCarlo, RationalWeightedGraph, DEFAULT_WORK_CAP,
};
use forbdist::io::{format_edge_list, parse_edge_list, read_spec};
use forbdist::metrics::{cut_distance_exact, cut_distance_heuristic, d1, distance_to_property_exact, edit_distance, CUT_EXACT_CAP};
use forbdist::partition::random_equipartition;
use forbdist::quotient::{reduce, reduce_exact, SearchMode};
use forbdist::regularity::{fk_partition, FkConfig};
use forbdist::{Equipartition, Error, Graph, WeightedGraph};

/// Overrides the exact-density work cap (number of maps).
const WORK_CAP_ENV: &str = "FORBDIST_WORK_CAP";

#[derive(Parser)]
#[command(name = "forbdist", version, about = "Distance to induced-F-free graph properties")]
struct Cli {
    /// Where to write the report; `-` is standard output.
    #[arg(long, short, global = true, default_value = "-")]
    output: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph as an edge list.
    Gen(GenArgs),
    /// Reduced graph of a graph under an equipartition.
    Quotient(QuotientArgs),
    /// Induced homomorphism density of a pattern in a graph or weighted graph.
    Hom(HomArgs),
    /// Distance between two graphs, or from a graph to a property.
    Dist(DistArgs),
    /// Weak regular partition by witness refinement.
    Fk(FkArgs),
    /// Estimate the distance to a property.
    Estimate(EstimateArgs),
    /// Densest small pattern of the family.
    Probe(ProbeArgs),
    /// Build a codebook of reduced graphs from member graphs.
    Codebook(CodebookArgs),
    /// Codebook parameters from removal-lemma constants.
    Constants(ConstantsArgs),
    /// Run the inequality suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Random,
    Complete,
    Empty,
    Cycle,
    Path,
    Bipartite,
    Planted,
    Sample,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Vertex count (for `bipartite` and `planted`, the size of each part).
    #[arg(long)]
    n: usize,
    /// Edge probability for `random`.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Second part size for `bipartite`; defaults to `n`.
    #[arg(long)]
    b: Option<usize>,
    /// Planted edges inside the parts for `planted`.
    #[arg(long, default_value_t = 0)]
    extra: usize,
    /// Weighted graph JSON for `sample`.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct QuotientArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Partition file (text `n k` + class indices, or JSON).
    #[arg(long, conflicts_with = "k")]
    partition: Option<PathBuf>,
    /// Use a seeded random equipartition into `k` classes instead.
    #[arg(long, requires = "seed")]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also report the weights as exact fractions.
    #[arg(long)]
    exact_rational: bool,
}

#[derive(Args)]
struct HomArgs {
    #[arg(long)]
    pattern: PathBuf,
    /// Edge list, graph JSON, or weighted graph JSON.
    #[arg(long)]
    host: PathBuf,
    /// Monte-Carlo samples, used when the exact count exceeds the work cap.
    #[arg(long, conflicts_with = "exact_rational")]
    mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exact fraction via arbitrary-precision arithmetic.
    #[arg(long)]
    exact_rational: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum DistKind {
    Edit,
    D1,
    Cut,
    Property,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    kind: DistKind,
    a: PathBuf,
    /// Second input; not used with `--kind property`.
    b: Option<PathBuf>,
    /// Property spec JSON for `--kind property`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Cut distance by alternating search with this many restarts.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FkArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    k0: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to `ceil(2 / gamma^2) + 1`.
    #[arg(long)]
    max_rounds: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sample,
    Codebook,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Sample size.
    #[arg(long, default_value_t = 7)]
    s: usize,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Local-search restarts for the codebook method; exhaustive if absent.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0)]
    mc_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CodebookArgs {
    #[arg(long, required = true, num_args = 1..)]
    members: Vec<PathBuf>,
    /// Most classes per entry.
    #[arg(long = "K")]
    max_classes: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    k0: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check members against this property first.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long = "M")]
    m: usize,
    #[arg(long)]
    n0: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// `lemmas` for every suite, or one suite name.
    #[arg(long, default_value = "lemmas")]
    suite: String,
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Lib(Error),
    Usage(String),
    SuitesFailed(Report),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T> = Result<T, Failure>;

struct Report {
    command: &'static str,
    inputs: Vec<Value>,
    config: Value,
    result: Value,
}

fn read(path: &Path) -> Outcome<(String, Value)> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))?;
    Ok((text, json!({"path": path.display().to_string(), "sha256": digest})))
}

enum Host {
    Graph(Graph),
    Weighted(WeightedGraph),
}

/// Parses JSON text, unwrapping `result.<field>` if the text is a report.
fn artifact(text: &str, field: &str) -> Outcome<Value> {
    let v: Value = serde_json::from_str(text).map_err(Error::from)?;
    Ok(match v.get("result").and_then(|r| r.get(field)) {
        Some(inner) => inner.clone(),
        None => v,
    })
}

fn parse_host(text: &str) -> Outcome<Host> {
    if !text.trim_start().starts_with('{') {
        return Ok(Host::Graph(parse_edge_list(text)?));
    }
    let v = artifact(text, "reduced")?;
    if v.get("w").is_some() {
        Ok(Host::Weighted(serde_json::from_value(v).map_err(Error::from)?))
    } else {
        Ok(Host::Graph(serde_json::from_value(v).map_err(Error::from)?))
    }
}

fn parse_graph(text: &str) -> Outcome<Graph> {
    match parse_host(text)? {
        Host::Graph(g) => Ok(g),
        Host::Weighted(_) => Err(Failure::Usage("expected a graph, got a weighted graph".into())),
    }
}

fn parse_weighted(text: &str) -> Outcome<WeightedGraph> {
    Ok(match parse_host(text)? {
        Host::Graph(g) => g.to_weighted(),
        Host::Weighted(w) => w,
    })
}

fn work_cap() -> Outcome<u128> {
    match std::env::var(WORK_CAP_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{WORK_CAP_ENV} must be a non-negative integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_WORK_CAP),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn gen(args: &GenArgs) -> Outcome<String> {
    let g = match args.kind {
        GenKind::Random => Graph::random(args.n, args.p, args.seed)?,
        GenKind::Complete => Graph::complete(args.n),
        GenKind::Empty => Graph::empty(args.n),
        GenKind::Cycle => Graph::cycle(args.n),
        GenKind::Path => Graph::path(args.n),
        GenKind::Bipartite => Graph::complete_bipartite(args.n, args.b.unwrap_or(args.n)),
        GenKind::Planted => Graph::planted_bipartite(args.n, args.extra, args.seed)?,
        GenKind::Sample => {
            let path = args
                .weights
                .as_ref()
                .ok_or_else(|| Failure::Usage("--kind sample needs --weights".into()))?;
            let (text, _) = read(path)?;
            Graph::sample_from_weighted(&parse_weighted(&text)?, args.n, args.seed)?
        }
    };
    Ok(format_edge_list(&g))
}

fn quotient(args: &QuotientArgs) -> Outcome<Report> {
    let (text, input) = read(&args.graph)?;
    let g = parse_graph(&text)?;
    let mut inputs = vec![input];
    let p = match (&args.partition, args.k) {
        (Some(path), _) => {
            let (text, input) = read(path)?;
            inputs.push(input);
            if text.trim_start().starts_with('{') {
                serde_json::from_value(artifact(&text, "partition")?).map_err(Error::from)?
            } else {
                Equipartition::from_text(&text)?
            }
        }
        (None, Some(k)) => random_equipartition(g.n(), k, args.seed.unwrap_or(0))?,
        (None, None) => return Err(Failure::Usage("give --partition or --k with --seed".into())),
    };
    if p.n() != g.n() {
        return Err(Failure::Usage(format!("partition covers {} vertices, graph has {}", p.n(), g.n())));
    }
    let r = reduce(&g, &p)?;
    let mut result = json!({"reduced": r, "partition": p});
    if args.exact_rational {
        let exact = reduce_exact(&g, &p)?;
        result["reduced_exact"] = rational_rows(&exact);
    }
    Ok(Report {
        command: "quotient",
        inputs,
        config: json!({"k": args.k, "seed": args.seed, "exact_rational": args.exact_rational}),
        result,
    })
}

fn rational_rows(r: &RationalWeightedGraph) -> Value {
    let k = r.k();
    let rows: Vec<Vec<String>> = (0..k).map(|i| (0..k).map(|j| r.get(i, j).to_string()).collect()).collect();
    json!({"k": k, "w": rows})
}

fn hom(args: &HomArgs) -> Outcome<Report> {
    let (ftext, fin) = read(&args.pattern)?;
    let (htext, hin) = read(&args.host)?;
    let f = parse_graph(&ftext)?;
    let host = parse_host(&htext)?;
    let cap = work_cap()?;
    let config = json!({"mc": args.mc, "seed": args.seed, "exact_rational": args.exact_rational, "work_cap": cap.to_string()});
    let result = if args.exact_rational {
        let exact = match &host {
            Host::Graph(g) => hom_density_graph_exact(&f, g)?,
            Host::Weighted(w) => hom_density_rational(&f, &RationalWeightedGraph::from_weighted(w))?,
        };
        json!({"value": forbdist::hom::rational_to_f64(&exact), "exact": true, "fraction": exact.to_string()})
    } else {
        let opts = DensityOptions {
            work_cap: cap,
            monte_carlo: args.mc.map(|samples| MonteCarlo { samples, seed: args.seed }),
        };
        let d = match &host {
            Host::Graph(g) => hom_density_graph_with(&f, g, &opts)?,
            Host::Weighted(w) => hom_density_weighted_with(&f, w, &opts)?,
        };
        json!({"value": d.value, "exact": d.exact, "std_error": d.std_error, "maps_evaluated": d.maps_evaluated.to_string()})
    };
    Ok(Report {
        command: "hom",
        inputs: vec![fin, hin],
        config,
        result,
    })
}

fn dist(args: &DistArgs) -> Outcome<Report> {
    let (atext, ain) = read(&args.a)?;
    let mut inputs = vec![ain];
    let mut second = || -> Outcome<String> {
        let path = args
            .b
            .as_ref()
            .ok_or_else(|| Failure::Usage("this distance needs two inputs".into()))?;
        let (text, input) = read(path)?;
        inputs.push(input);
        Ok(text)
    };
    let result = match args.kind {
        DistKind::Edit => {
            let b = second()?;
            json!({"value": edit_distance(&parse_graph(&atext)?, &parse_graph(&b)?)?})
        }
        DistKind::D1 => {
            let b = second()?;
            json!({"value": d1(&parse_weighted(&atext)?, &parse_weighted(&b)?)?})
        }
        DistKind::Cut => {
            let b = second()?;
            let (x, y) = (parse_weighted(&atext)?, parse_weighted(&b)?);
            let c = match args.restarts {
                Some(r) => cut_distance_heuristic(&x, &y, r, args.seed)?,
                None if x.k() > CUT_EXACT_CAP => {
                    return Err(Failure::Lib(Error::CapExceeded {
                        what: "vertices for exact cut norm (pass --restarts)",
                        value: x.k() as u128,
                        cap: CUT_EXACT_CAP as u128,
                    }))
                }
                None => cut_distance_exact(&x, &y)?,
            };
            json!({"value": c.value, "exact": args.restarts.is_none(), "witness": c.witness})
        }
        DistKind::Property => {
            let path = args
                .spec
                .as_ref()
                .ok_or_else(|| Failure::Usage("--kind property needs --spec".into()))?;
            let (_, sin) = read(path)?;
            inputs.push(sin);
            let spec = read_spec(path)?;
            let d = distance_to_property_exact(&parse_graph(&atext)?, &spec)?;
            json!({"value": d.value, "edits": d.edits, "witness": d.witness, "flipped": d.flipped})
        }
    };
    Ok(Report {
        command: "dist",
        inputs,
        config: json!({"kind": args.kind, "restarts": args.restarts, "seed": args.seed}),
        result,
    })
}

fn fk(args: &FkArgs) -> Outcome<Report> {
    let (text, input) = read(&args.graph)?;
    let g = parse_graph(&text)?;
    let cfg = FkConfig {
        gamma: args.gamma,
        k0: args.k0,
        max_rounds: args.max_rounds,
        seed: args.seed,
    };
    let r = fk_partition(&g, &cfg)?;
    Ok(Report {
        command: "fk",
        inputs: vec![input],
        config: json!({"gamma": cfg.gamma, "k0": cfg.k0, "max_rounds": cfg.round_budget(), "seed": cfg.seed}),
        result: to_value(&r),
    })
}

fn estimate(args: &EstimateArgs) -> Outcome<Report> {
    let (text, input) = read(&args.graph)?;
    let g = parse_graph(&text)?;
    let mut inputs = vec![input];
    let report = match args.method {
        Method::Sample => {
            let path = args
                .spec
                .as_ref()
                .ok_or_else(|| Failure::Usage("--method sample needs --spec".into()))?;
            inputs.push(read(path)?.1);
            sample_estimate(&g, &read_spec(path)?, args.s, args.trials, args.seed)?
        }
        Method::Codebook => {
            let path = args
                .codebook
                .as_ref()
                .ok_or_else(|| Failure::Usage("--method codebook needs --codebook".into()))?;
            let (btext, bin) = read(path)?;
            inputs.push(bin);
            let book: AttestationCodebook = serde_json::from_value(artifact(&btext, "codebook")?).map_err(Error::from)?;
            let mode = match args.budget {
                Some(restarts) => SearchMode::Heuristic { restarts, seed: args.seed },
                None => SearchMode::Exact,
            };
            codebook_estimate(&g, &book, mode)?
        }
    };
    Ok(Report {
        command: "estimate",
        inputs,
        config: to_value(&report.config),
        result: to_value(&report),
    })
}

fn probe(args: &ProbeArgs) -> Outcome<Report> {
    let (text, input) = read(&args.graph)?;
    let (_, sin) = read(&args.spec)?;
    let g = parse_graph(&text)?;
    let spec = read_spec(&args.spec)?;
    let cap = work_cap()?;
    let r = removal_probe_with(&g, &spec, args.mc_samples, args.seed, cap)?;
    Ok(Report {
        command: "probe",
        inputs: vec![input, sin],
        config: json!({"mc_samples": args.mc_samples, "seed": args.seed, "removal": spec.removal(), "work_cap": cap.to_string()}),
        result: to_value(&r),
    })
}

fn codebook(args: &CodebookArgs) -> Outcome<Report> {
    let mut inputs = Vec::new();
    let mut members = Vec::new();
    for path in &args.members {
        let (text, input) = read(path)?;
        inputs.push(input);
        members.push(parse_graph(&text)?);
    }
    let spec = match &args.spec {
        Some(path) => {
            inputs.push(read(path)?.1);
            Some(read_spec(path)?)
        }
        None => None,
    };
    let cfg = CodebookConfig {
        max_classes: args.max_classes,
        gamma: args.gamma,
        k0: args.k0,
        seed: args.seed,
    };
    let book = build_codebook(&members, &cfg, spec.as_ref())?;
    Ok(Report {
        command: "codebook",
        inputs,
        config: to_value(&cfg),
        result: json!({"codebook": book}),
    })
}

fn constants(args: &ConstantsArgs) -> Outcome<Report> {
    let (k0, gamma) = attest_constants(args.delta, args.m, args.n0)?;
    Ok(Report {
        command: "constants",
        inputs: Vec::new(),
        config: json!({"delta": args.delta, "M": args.m, "n0": args.n0}),
        result: json!({"k0": k0, "gamma": gamma}),
    })
}

fn verify(args: &VerifyArgs) -> Outcome<Report> {
    let suites = checks::run_all(args.max_n, args.seed)?;
    let selected: Vec<_> = if args.suite == "lemmas" {
        suites
    } else {
        suites.into_iter().filter(|s| s.name == args.suite).collect()
    };
    if selected.is_empty() {
        return Err(Failure::Usage(format!("unknown suite {:?}", args.suite)));
    }
    let passed = selected.iter().all(|s| s.passed());
    let report = Report {
        command: "verify",
        inputs: Vec::new(),
        config: json!({"suite": args.suite, "max_n": args.max_n, "seed": args.seed}),
        result: json!({"passed": passed, "suites": selected}),
    };
    if passed {
        Ok(report)
    } else {
        Err(Failure::SuitesFailed(report))
    }
}

fn write_output(dest: &str, text: &str) -> Result<(), String> {
    if dest == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(dest, text).map_err(|e| format!("cannot write {dest}: {e}"))
    }
}

fn render(report: Report, started: Instant) -> String {
    let ms = started.elapsed().as_secs_f64() * 1e3;
    let v = json!({
        "command": report.command,
        "inputs": report.inputs,
        "config": report.config,
        "result": report.result,
        "wall_time_ms": ms,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 1,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let started = Instant::now();
    let outcome = match &cli.command {
        Command::Gen(a) => match gen(a) {
            Ok(text) => {
                return match write_output(&cli.output, &text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(2)
                    }
                }
            }
            Err(f) => Err(f),
        },
        Command::Quotient(a) => quotient(a),
        Command::Hom(a) => hom(a),
        Command::Dist(a) => dist(a),
        Command::Fk(a) => fk(a),
        Command::Estimate(a) => estimate(a),
        Command::Probe(a) => probe(a),
        Command::Codebook(a) => codebook(a),
        Command::Constants(a) => constants(a),
        Command::Verify(a) => verify(a),
    };
    let (report, code) = match outcome {
        Ok(r) => (r, 0),
        Err(Failure::SuitesFailed(r)) => (r, 4),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::CapExceeded { .. } => 3,
                _ => 2,
            });
        }
    };
    if let Err(e) = write_output(&cli.output, &render(report, started)) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
