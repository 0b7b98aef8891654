use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ineqlab::gridfn::{CorpusFile, CorpusSet, GridSpec};
use ineqlab::verify::{self, ProbeQuestion, ProbeReport, ReportDocument, RunOptions};
use ineqlab::FORMAT_VERSION;

/// Corpus shipped with the binary; used when `--corpus` is omitted.
const DEFAULT_CORPUS: &str = include_str!("../corpus/default.json");

#[derive(Parser, Debug)]
#[command(name = "ineqlab", version, about = "Numerical checks of rearrangement, Besov and Hardy-space inequalities")]
struct Cli {
    /// JSON file whose keys mirror the command-line flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Corpus generation.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Run registry entries on a corpus.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Escalating evidence for an open question.
    Probe(ProbeArgs),
    /// Render a report directory.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand, Debug)]
enum CorpusCmd {
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Half extent and points per axis, e.g. `4,64`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Run(RunArgs),
    All(AllArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    id: Option<String>,
    #[command(flatten)]
    common: VerifyArgs,
}

#[derive(Args, Debug)]
struct AllArgs {
    #[command(flatten)]
    common: VerifyArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Corpus file (default: the shipped corpus).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use only the first K members of each set.
    #[arg(long)]
    members: Option<usize>,
    /// Skip the refined-grid pass.
    #[arg(long)]
    no_refine: bool,
    /// Skip dilation sweeps.
    #[arg(long)]
    no_dilation: bool,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long)]
    question: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ReportCmd {
    Render(RenderArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Svg,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Output directory (default: the input directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Contents of `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    threads: Option<usize>,
    seed: Option<u64>,
    count: Option<usize>,
    dim: Option<usize>,
    grid: Option<String>,
    out: Option<PathBuf>,
    id: Option<String>,
    corpus: Option<PathBuf>,
    members: Option<usize>,
    no_refine: Option<bool>,
    no_dilation: Option<bool>,
    question: Option<String>,
    depth: Option<usize>,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    format: Option<Format>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ineqlab::Error> for Failure {
    fn from(e: ineqlab::Error) -> Self {
        match e {
            ineqlab::Error::UnknownEntry(_) | ineqlab::Error::InvalidArgument(_) | ineqlab::Error::InvalidGrid(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("missing required flag --{flag}")))
}

/// Writes via a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(contents).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn parse_grid(s: &str) -> Result<(f64, usize), Failure> {
    let bad = || usage(format!("--grid expects `L,Npts`, got `{s}`"));
    let (l, n) = s.split_once(',').ok_or_else(bad)?;
    let l: f64 = l.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok((l, n))
}

fn load_corpus(path: Option<&Path>) -> Result<CorpusFile, Failure> {
    let text = match path {
        Some(p) => read(p)?,
        None => DEFAULT_CORPUS.to_string(),
    };
    CorpusFile::from_json(&text).map_err(|e| usage(format!("corpus: {e}")))
}

fn run_options(a: &VerifyArgs, cfg: &Config) -> RunOptions {
    RunOptions {
        members: a.members.or(cfg.members),
        refine: !(a.no_refine || cfg.no_refine.unwrap_or(false)),
        dilation: !(a.no_dilation || cfg.no_dilation.unwrap_or(false)),
    }
}

fn write_report(doc: &ReportDocument, out: &Path) -> Result<bool, Failure> {
    write_atomic(&out.join("report.json"), doc.to_json()?.as_bytes())?;
    for e in &doc.entries {
        let status = if e.passed { "ok" } else { "FAIL" };
        let worst = e
            .instances
            .iter()
            .map(|i| i.empirical_constant)
            .fold(0.0, f64::max);
        println!("{:<20} {:<7} {status:<5} max ratio {worst:.6e}", e.id, format!("{:?}", e.kind).to_lowercase());
    }
    Ok(doc.passed)
}

fn corpus_gen(a: GenArgs, cfg: &Config) -> Result<bool, Failure> {
    let seed = required(a.seed.or(cfg.seed), "seed")?;
    let count = required(a.count.or(cfg.count), "count")?;
    let dim = required(a.dim.or(cfg.dim), "dim")?;
    let grid = required(a.grid.or_else(|| cfg.grid.clone()), "grid")?;
    let out = required(a.out.or_else(|| cfg.out.clone()), "out")?;
    if count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    if !(1..=3).contains(&dim) {
        return Err(usage("--dim must be 1, 2 or 3"));
    }
    let (l, pts) = parse_grid(&grid)?;
    let set = CorpusSet::generate(seed, count, GridSpec::cube(dim, l, pts)?)?;
    let file = CorpusFile::new(vec![set]);
    let text = serde_json::to_string_pretty(&file).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_atomic(&out, text.as_bytes())?;
    Ok(true)
}

fn verify_run(a: RunArgs, cfg: &Config) -> Result<bool, Failure> {
    let id = required(a.id.or_else(|| cfg.id.clone()), "id")?;
    let spec = verify::find(&id).ok_or_else(|| usage(format!("unknown registry entry `{id}`")))?;
    let out = required(a.common.out.clone().or_else(|| cfg.out.clone()), "out")?;
    let corpus = load_corpus(a.common.corpus.as_deref().or(cfg.corpus.as_deref()))?;
    let opts = run_options(&a.common, cfg);
    let report = verify::run(&spec, &corpus, &opts)?;
    let seed = corpus.sets.first().and_then(|s| s.seed);
    write_report(&ReportDocument::new(vec![report], seed), &out)
}

fn verify_all(a: AllArgs, cfg: &Config) -> Result<bool, Failure> {
    let out = required(a.common.out.clone().or_else(|| cfg.out.clone()), "out")?;
    let corpus = load_corpus(a.common.corpus.as_deref().or(cfg.corpus.as_deref()))?;
    let opts = run_options(&a.common, cfg);
    let reports = verify::run_all(&corpus, &opts)?;
    let seed = corpus.sets.first().and_then(|s| s.seed);
    write_report(&ReportDocument::new(reports, seed), &out)
}

#[derive(Serialize)]
struct ProbeDocument<'a> {
    format_version: u32,
    #[serde(flatten)]
    report: &'a ProbeReport,
}

fn probe(a: ProbeArgs, cfg: &Config) -> Result<bool, Failure> {
    let qid = required(a.question.or_else(|| cfg.question.clone()), "question")?;
    let question: ProbeQuestion = qid.parse().map_err(|_| {
        let known: Vec<_> = ProbeQuestion::ALL.iter().map(|q| q.id()).collect();
        usage(format!("unknown question `{qid}`; expected one of {known:?}"))
    })?;
    let depth = required(a.depth.or(cfg.depth), "depth")?;
    if depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    let out = required(a.out.or_else(|| cfg.out.clone()), "out")?;
    let report = verify::probe(question, depth)?;
    let doc = ProbeDocument {
        format_version: FORMAT_VERSION,
        report: &report,
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_atomic(&out.join(format!("probe_{}.json", question.id())), text.as_bytes())?;
    println!("{}: {}", question.id(), report.label);
    for l in &report.levels {
        println!(
            "  level {} (N = {}, sharpness {}): max ratio {:.6e}, running max {:.6e}",
            l.level,
            l.grid.points()[0],
            l.sharpness,
            l.max_ratio,
            l.running_max
        );
    }
    println!("  {}", report.diagnostic);
    Ok(true)
}

fn render(a: RenderArgs, cfg: &Config) -> Result<bool, Failure> {
    let input = required(a.input.or_else(|| cfg.input.clone()), "in")?;
    let format = required(a.format.or(cfg.format), "format")?;
    let out = a.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| input.clone());
    let path = input.join("report.json");
    let doc = ReportDocument::from_json(&read(&path)?).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    match format {
        Format::Csv => write_atomic(&out.join("report.csv"), verify::render_csv(&doc)?.as_bytes())?,
        Format::Svg => {
            for plot in verify::render_svg(&doc) {
                write_atomic(&out.join("svg").join(format!("{}.svg", plot.name)), plot.content.as_bytes())?;
            }
        }
    }
    Ok(true)
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    let cfg: Config = match &cli.config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => Config::default(),
    };
    if let Some(t) = cli.threads.or(cfg.threads) {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    match cli.command {
        Command::Corpus(CorpusCmd::Gen(a)) => corpus_gen(a, &cfg),
        Command::Verify(VerifyCmd::Run(a)) => verify_run(a, &cfg),
        Command::Verify(VerifyCmd::All(a)) => verify_all(a, &cfg),
        Command::Probe(a) => probe(a, &cfg),
        Command::Report(ReportCmd::Render(a)) => render(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more assert entries failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            eprintln!("{}", <Cli as clap::CommandFactory>::command().render_usage());
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
