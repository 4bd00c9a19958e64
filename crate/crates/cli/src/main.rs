//! `asnav`: compile ground normal programs into counting artifacts and
//! count answer sets under assumptions.
//!
//! Exit codes: 0 success, 1 usage, 2 input error, 3 budget exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use asnav_core::artifact::{build, is_artifact, BuildOptions, CompiledArtifact, NnfSource};
use asnav_core::depgraph::{CycleMode, DEFAULT_CYCLE_CAP};
use asnav_core::inclexcl::RefineOptions;
use asnav_core::lp::{parse_assumptions, parse_program};
use asnav_core::nnf::{CompileOptions, VarOrder, DEFAULT_NODE_CAP};
use asnav_core::oracle::{count_under, Semantics};
use asnav_core::Error;
use asnav_service::CountResponse;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "asnav", version, about = "Answer set counting under assumptions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a program into an artifact and print its statistics.
    Compile(CompileArgs),
    /// Count answer sets under assumptions.
    Count(CountArgs),
    /// Count each free atom assumed true and false.
    Facets(CountArgs),
    /// Brute-force count for small programs.
    Oracle(OracleArgs),
    /// Run the HTTP navigation service.
    Serve(ServeArgs),
}

#[derive(Args, Clone)]
struct BuildArgs {
    /// Cycle catalog: simple cycles or all closed-walk vertex sets.
    #[arg(long, default_value = "simple")]
    cycles: CycleMode,
    /// `internal` or `nnf-file=<path>` for an sd-DNNF of the completion
    /// produced elsewhere (see `--emit-cnf`).
    #[arg(long, default_value = "internal")]
    compiler: String,
    /// Branching order of the internal compiler.
    #[arg(long, value_enum, default_value = "index")]
    order: Order,
    /// Node limit of the internal compiler.
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    budget_nodes: usize,
    /// Limit on enumerated cycles.
    #[arg(long, default_value_t = DEFAULT_CYCLE_CAP)]
    budget_cycles: usize,
}

#[derive(Copy, Clone, ValueEnum)]
enum Order {
    Index,
    Minfill,
}

#[derive(Args)]
struct CompileArgs {
    program: PathBuf,
    /// Artifact path; defaults to the program path with extension `.ccg`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the completion CNF in DIMACS and its variable map to
    /// `<path>.map`.
    #[arg(long)]
    emit_cnf: Option<PathBuf>,
    #[command(flatten)]
    build: BuildArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CountArgs {
    /// An artifact from `compile`, or program text to compile on the fly.
    input: PathBuf,
    /// Comma separated literals, `-` marks negation: `a,-b`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    assume: String,
    /// Refinement depth, or `full`.
    #[arg(long, default_value = "full")]
    depth: String,
    /// Round an odd depth up to the next even one.
    #[arg(long)]
    round_even: bool,
    /// Limit on graph evaluations.
    #[arg(long)]
    budget_evals: Option<u64>,
    /// Check that the artifact was compiled from this program.
    #[arg(long)]
    program: Option<PathBuf>,
    #[command(flatten)]
    build: BuildArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    program: PathBuf,
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    assume: String,
    #[arg(long, value_enum, default_value = "answer")]
    semantics: SemanticsArg,
    #[arg(long)]
    json: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum SemanticsArg {
    Answer,
    Supported,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address; defaults to `$ASNAV_BIND` or 127.0.0.1:8080.
    #[arg(long)]
    bind: Option<String>,
    /// Directory for cached artifacts; defaults to `$ASNAV_CACHE_DIR`.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Allowed CORS origin; defaults to `$ASNAV_CORS_ORIGIN` or any.
    #[arg(long)]
    cors_origin: Option<String>,
}

enum Failure {
    Usage(String),
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_budget() {
            Failure::Budget(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<asnav_core::lp::AssumptionError> for Failure {
    fn from(e: asnav_core::lp::AssumptionError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(|_| Failure::Input(format!("{}: not UTF-8", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn build_options(args: &BuildArgs) -> Result<BuildOptions, Failure> {
    let nnf = match args.compiler.as_str() {
        "internal" => NnfSource::Internal(CompileOptions {
            order: match args.order {
                Order::Index => VarOrder::Index,
                Order::Minfill => VarOrder::MinFill,
            },
            node_cap: args.budget_nodes,
        }),
        other => match other.strip_prefix("nnf-file=") {
            Some(path) => NnfSource::External(read_text(Path::new(path))?),
            None => {
                return Err(Failure::Usage(format!(
                    "--compiler: expected `internal` or `nnf-file=<path>`, got `{other}`"
                )))
            }
        },
    };
    Ok(BuildOptions { cycle_mode: args.cycles, cycle_cap: args.budget_cycles, nnf })
}

fn parse_depth(text: &str) -> Result<Option<usize>, Failure> {
    match text {
        "full" => Ok(None),
        t => t
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("--depth: expected a non-negative integer or `full`, got `{t}`"))),
    }
}

fn secs(s: f64) -> String {
    format!("{s:.3}s")
}

fn compile(args: CompileArgs) -> Outcome {
    let text = read_text(&args.program)?;
    let artifact = build(&text, &build_options(&args.build)?)?;
    let out = args.output.unwrap_or_else(|| args.program.with_extension("ccg"));
    write(&out, &artifact.to_bytes())?;
    if let Some(cnf_path) = &args.emit_cnf {
        let cnf = artifact.cnf();
        write(cnf_path, cnf.to_dimacs().as_bytes())?;
        let mut map = cnf_path.clone().into_os_string();
        map.push(".map");
        write(Path::new(&map), cnf.variable_map(&artifact.program).as_bytes())?;
    }

    let (s, t) = (&artifact.stats, &artifact.timings);
    if args.json {
        let v = json!({ "artifact": out, "digest": artifact.digest, "stats": s, "timings": t });
        println!("{v}");
        return Ok(());
    }
    let completeness = if s.catalog_complete { "complete" } else { "may be incomplete" };
    println!("artifact     {}", out.display());
    println!("digest       {}", artifact.digest);
    println!("atoms        {}", s.atoms);
    println!("rules        {}", s.rules);
    println!("tight        {}", s.tight);
    println!("cycles       {} ({}, {completeness})", s.cycles, s.cycle_mode);
    println!("support aux  {}", s.support_aux_atoms);
    println!("cnf          {} vars, {} clauses", s.cnf_vars, s.cnf_clauses);
    println!("sd-DNNF      {} nodes, {} edges ({})", s.nnf.node_count, s.nnf.edge_count, s.compiler);
    println!("compressed   {} nodes, {} edges", s.compressed.node_count, s.compressed.edge_count);
    println!("supported    {}", s.supported_count);
    println!(
        "timings      parse {} normalize {} completion {} cycles {} sd-DNNF {} ccg {}",
        secs(t.parse_s),
        secs(t.normalize_s),
        secs(t.completion_s),
        secs(t.cycles_s),
        secs(t.sddnnf_s),
        secs(t.ccg_s)
    );
    Ok(())
}

/// Loads an artifact, or compiles when `input` holds program text.
fn load(args: &CountArgs) -> Result<CompiledArtifact, Failure> {
    let bytes = read(&args.input)?;
    let artifact = if is_artifact(&bytes) {
        CompiledArtifact::read_from(bytes.as_slice())?
    } else {
        let text =
            String::from_utf8(bytes).map_err(|_| Failure::Input(format!("{}: not UTF-8", args.input.display())))?;
        build(&text, &build_options(&args.build)?)?
    };
    if let Some(p) = &args.program {
        artifact.check_program(&read_text(p)?)?;
    }
    Ok(artifact)
}

fn refine_options(args: &CountArgs) -> Result<RefineOptions, Failure> {
    Ok(RefineOptions {
        depth: parse_depth(&args.depth)?,
        round_to_even: args.round_even,
        max_evaluations: args.budget_evals,
    })
}

fn count(args: CountArgs) -> Outcome {
    let artifact = load(&args)?;
    let l = artifact.parse_assumptions(&args.assume)?;
    let resp = CountResponse::compute(&artifact, &l, &refine_options(&args)?)?;
    let r = &resp.report;
    if let Some(w) = &r.warning {
        eprintln!("warning: {w} assumptions");
    }
    if args.json {
        println!("{}", serde_json::to_string(&resp).unwrap());
        return Ok(());
    }
    println!("{} ({})", r.count, r.bound);
    for l in &r.trace {
        println!("depth {}: terms={} skipped={} partial={}", l.depth, l.terms, l.skipped, l.partial);
    }
    for n in &r.notes {
        println!("note: {n}");
    }
    Ok(())
}

fn facets(args: CountArgs) -> Outcome {
    let artifact = load(&args)?;
    let l = artifact.parse_assumptions(&args.assume)?;
    let report = artifact.facets(&l, &refine_options(&args)?)?;
    if args.json {
        println!("{}", serde_json::to_string(&report).unwrap());
        return Ok(());
    }
    let width = report.facets.iter().map(|f| f.atom.len()).max().unwrap_or(4).max(4);
    println!("{:width$}  {:>16}  {:>16}  ratio", "atom", "true", "false");
    for f in &report.facets {
        let t = format!("{} ({})", f.count_true, f.bound_true);
        let e = format!("{} ({})", f.count_false, f.bound_false);
        let ratio = f.ratio_true.map_or_else(|| "-".to_owned(), |r| format!("{r:.3}"));
        println!("{:width$}  {t:>16}  {e:>16}  {ratio}", f.atom);
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Outcome {
    let program = parse_program(&read_text(&args.program)?).map_err(Error::from)?;
    let l = parse_assumptions(&program, &args.assume)?;
    let (semantics, name) = match args.semantics {
        SemanticsArg::Answer => (Semantics::Answer, "answer"),
        SemanticsArg::Supported => (Semantics::Supported, "supported"),
    };
    let n = count_under(&program, &l, semantics).map_err(Error::from)?;
    if args.json {
        println!("{}", json!({ "count": n.to_string(), "semantics": name }));
    } else {
        println!("{n}");
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Outcome {
    let mut config = asnav_service::Config::from_env();
    if let Some(b) = args.bind {
        config.bind = b;
    }
    if args.cache_dir.is_some() {
        config.cache_dir = args.cache_dir;
    }
    if args.cors_origin.is_some() {
        config.cors_origin = args.cors_origin;
    }
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Input(e.to_string()))?;
    rt.block_on(asnav_service::serve(config)).map_err(|e| Failure::Input(format!("serve: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match cli.command {
        Command::Compile(a) => compile(a),
        Command::Count(a) => count(a),
        Command::Facets(a) => facets(a),
        Command::Oracle(a) => oracle(a),
        Command::Serve(a) => serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exceeded: {m}");
            ExitCode::from(3)
        }
    }
}
