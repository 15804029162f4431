use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use freysha::input::load_triples;
use freysha::output::{load_records, parse_integer, render_records};
use freysha::pipeline::{DEFAULT_BURDEN_MAX, DEFAULT_Q_MAX};
use freysha::store::read_json;
use freysha::{
    exit, refine, resume_with, run_many, scan, CandidateRecord, ClassSpec, Error, Journal,
    OutputFormat, ReportFilter, ReportRecord, Result, RunOptions, ScanConfig, SortKey, Status,
    Table,
};
use freysha_core::arith::{BigReal, Precision};

#[derive(Parser, Debug)]
#[command(
    name = "freysha",
    version,
    about = "Analytic orders of Tate-Shafarevich groups of twisted Frey curves"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Largest twist magnitude scanned.
    #[arg(long, global = true, env = "FREYSHA_QMAX", default_value_t = DEFAULT_Q_MAX)]
    qmax: u64,
    /// Smallest G/L kept by the scan.
    #[arg(
        long = "gl-min",
        global = true,
        env = "FREYSHA_GL_MIN",
        default_value = "1"
    )]
    gl_min: String,
    /// Largest burden a job may have.
    #[arg(long = "burden-max", global = true, env = "FREYSHA_BURDEN_MAX", default_value_t = DEFAULT_BURDEN_MAX)]
    burden_max: u64,
    /// Working precision in decimal digits.
    #[arg(long, global = true, env = "FREYSHA_PRECISION", default_value_t = Precision::DEFAULT_DIGITS)]
    precision: u32,
    /// Coefficient cache size in bytes; K, M and G suffixes allowed.
    #[arg(long = "memory-budget", global = true, env = "FREYSHA_MEMORY_BUDGET", default_value = "400M", value_parser = parse_bytes)]
    memory_budget: u64,
    /// Terms per step of the stopping rule.
    #[arg(long, global = true, env = "FREYSHA_STEP", default_value_t = freysha_core::lseries::DEFAULT_STEP)]
    step: u64,
    /// Tail-bound constant in the truncation estimate.
    #[arg(long = "K", global = true, env = "FREYSHA_K", default_value = "4")]
    k: String,
    #[arg(long, global = true, env = "FREYSHA_OUT", value_enum, default_value_t = OutputFormat::Text)]
    out: OutputFormat,
    #[arg(
        long = "checkpoint-dir",
        global = true,
        env = "FREYSHA_CHECKPOINT_DIR",
        default_value = "freysha-jobs"
    )]
    checkpoint_dir: PathBuf,
    /// Truncation points of the rough estimates, comma separated.
    #[arg(
        long,
        global = true,
        env = "FREYSHA_STAGES",
        value_delimiter = ',',
        default_value = "10000000,100000000"
    )]
    stages: Vec<u64>,
    /// Candidates whose rough L falls below this are screened out.
    #[arg(
        long = "l-min",
        global = true,
        env = "FREYSHA_L_MIN",
        default_value = "1"
    )]
    l_min: String,
    /// Result list (JSON lines); defaults to results.jsonl in the checkpoint directory.
    #[arg(long, global = true, env = "FREYSHA_RESULTS")]
    results: Option<PathBuf>,
    /// Candidate ledger (JSON lines); defaults to ledger.jsonl in the checkpoint directory.
    #[arg(long, global = true, env = "FREYSHA_LEDGER")]
    ledger: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operations on abc triples.
    #[command(subcommand)]
    Triple(TripleCommand),
    /// Operations on isogeny classes.
    #[command(subcommand)]
    Class(ClassCommand),
    /// Screen every square-free twist of every listed triple by G/L.
    Scan(ScanArgs),
    /// Evaluate L(1) for one class, or for candidates from a scan.
    Run(RunArgs),
    /// Continue a checkpointed job.
    Resume(ResumeArgs),
    /// Filter and sort result records.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
enum TripleCommand {
    /// Print a, b, c, the radical, the quality and the merit.
    Analyze(TripleArgs),
}

#[derive(Subcommand, Debug)]
enum ClassCommand {
    /// Print the curves, conductor, Tamagawa data and G/L.
    Inspect(ClassArgs),
}

#[derive(Args, Debug)]
struct TripleArgs {
    #[arg(short, long, required_unless_present = "file", requires = "c")]
    a: Option<String>,
    #[arg(short, long)]
    c: Option<String>,
    #[arg(short, long)]
    b: Option<String>,
    /// Triple list, one `a=<a> c=<c>` (optionally `b=<b>`) per line.
    #[arg(long, conflicts_with = "a")]
    file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ClassArgs {
    #[arg(short, long)]
    a: String,
    #[arg(short, long)]
    c: String,
    #[arg(short, long)]
    b: Option<String>,
    /// Square-free twist.
    #[arg(short, long, allow_negative_numbers = true)]
    q: i64,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Triple list.
    triples: PathBuf,
    /// Also compute rough L at each stage.
    #[arg(long)]
    rough: bool,
    /// Keep at most this many candidates.
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(short, long, required_unless_present = "from", requires_all = ["c", "q"])]
    a: Option<String>,
    #[arg(short, long)]
    c: Option<String>,
    #[arg(short, long)]
    b: Option<String>,
    #[arg(short, long, allow_negative_numbers = true)]
    q: Option<i64>,
    /// Candidates written by `scan --out json`.
    #[arg(long, conflicts_with = "a")]
    from: Option<PathBuf>,
    /// Number of promising candidates taken from `--from`.
    #[arg(long, default_value_t = 1)]
    top: usize,
    /// Concurrent jobs.
    #[arg(long, env = "FREYSHA_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Stop after this many steps; the checkpoint stays resumable.
    #[arg(long = "max-steps")]
    max_steps: Option<u64>,
    /// Give up after this many terms.
    #[arg(long = "max-terms")]
    max_terms: Option<u64>,
    /// Known estimate of L for the burden check.
    #[arg(long)]
    estimate: Option<String>,
}

#[derive(Args, Debug)]
struct ResumeArgs {
    checkpoint: PathBuf,
    #[arg(long = "max-steps")]
    max_steps: Option<u64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Result files: JSON lines, a JSON array or CSV. Defaults to the result list.
    files: Vec<PathBuf>,
    /// Smallest sqrt|Sha| kept.
    #[arg(long = "min-root")]
    min_root: Option<String>,
    /// Smallest G kept.
    #[arg(long = "min-g")]
    min_g: Option<f64>,
    #[arg(short, long)]
    a: Option<String>,
    #[arg(short, long)]
    c: Option<String>,
    #[arg(long, value_enum, default_value_t = SortKey::Sha)]
    sort: SortKey,
}

fn parse_bytes(text: &str) -> std::result::Result<u64, String> {
    let t = text.trim();
    let (digits, scale) = match t.char_indices().last() {
        Some((i, 'K' | 'k')) => (&t[..i], 1_000),
        Some((i, 'M' | 'm')) => (&t[..i], 1_000_000),
        Some((i, 'G' | 'g')) => (&t[..i], 1_000_000_000),
        _ => (t, 1),
    };
    let n: u64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("not a byte count: {text:?}"))?;
    n.checked_mul(scale)
        .ok_or_else(|| format!("byte count too large: {text:?}"))
}

fn real(name: &str, text: &str, precision: Precision) -> Result<BigReal> {
    BigReal::parse_decimal(text, precision)
        .map_err(|e| Error::Validation(format!("--{name} {text:?}: {e}")))
}

impl Global {
    fn precision(&self) -> Result<Precision> {
        if self.precision < 10 {
            return Err(Error::Validation(
                "--precision must be at least 10 digits".into(),
            ));
        }
        Ok(Precision::digits(self.precision))
    }

    fn journal(&self) -> Journal {
        let dir = &self.checkpoint_dir;
        Journal::new(
            self.ledger
                .clone()
                .unwrap_or_else(|| dir.join("ledger.jsonl")),
            self.results
                .clone()
                .unwrap_or_else(|| dir.join("results.jsonl")),
        )
    }

    fn run_options(&self) -> Result<RunOptions> {
        let precision = self.precision()?;
        Ok(RunOptions {
            checkpoint_dir: self.checkpoint_dir.clone(),
            step: self.step,
            precision,
            memory_budget: self.memory_budget,
            k: real("K", &self.k, precision)?,
            burden_max: self.burden_max,
            max_terms: None,
            max_steps: None,
            estimate: None,
        })
    }

    fn scan_config(&self, triples: PathBuf) -> Result<ScanConfig> {
        let precision = self.precision()?;
        Ok(ScanConfig {
            triples,
            q_max: self.qmax,
            gl_min: real("gl-min", &self.gl_min, precision)?,
            burden_max: self.burden_max,
            stages: self.stages.clone(),
            l_min: real("l-min", &self.l_min, precision)?,
            precision,
            memory_budget: self.memory_budget,
            k: real("K", &self.k, precision)?,
        })
    }
}

fn triple_analyze(g: &Global, args: &TripleArgs) -> Result<String> {
    let precision = g.precision()?;
    let triples = match &args.file {
        Some(path) => {
            let (triples, bad) = load_triples(path, precision)?;
            for e in bad {
                eprintln!("{}: line {}: {}", path.display(), e.line, e.error);
            }
            triples
        }
        None => {
            let spec = ClassSpec::new(
                args.a.as_deref().unwrap_or_default(),
                args.c.as_deref().unwrap_or_default(),
                args.b.as_deref(),
                1,
            );
            vec![spec.triple(precision)?]
        }
    };
    let mut table = Table::new(["a", "b", "c", "r", "lambda", "merit"]);
    for t in &triples {
        table.push([
            t.a().render(),
            t.b().render(),
            t.c().render(),
            t.radical().render(),
            t.lambda().to_sig_string(6),
            t.merit().to_sig_string(6),
        ]);
    }
    table.render(g.out)
}

fn class_inspect(g: &Global, args: &ClassArgs) -> Result<String> {
    let spec = ClassSpec::new(&args.a, &args.c, args.b.as_deref(), args.q);
    let class = spec.class(g.precision()?)?;
    let mut headers = vec!["a".to_string(), "b".into(), "c".into(), "q".into()];
    let t = class.triple();
    let mut row = vec![
        t.a().render(),
        t.b().render(),
        t.c().render(),
        class.q().render(),
    ];
    for (i, e) in class.curves().iter().enumerate() {
        headers.push(format!("E{}", i + 1));
        row.push(e.to_string());
    }
    headers.extend(["N", "s"].map(String::from));
    row.extend([class.conductor().render(), class.s().to_string()]);
    for (i, c) in class.c().iter().enumerate() {
        headers.push(format!("C{}", i + 1));
        row.push(c.to_string());
    }
    headers.extend(["k", "t", "alpha", "AGM", "G/L", "hash"].map(String::from));
    row.extend([
        class.k_star().to_string(),
        class.t().to_string(),
        class.alpha().to_sig_string(20),
        class.agm().to_sig_string(25),
        class.g_over_l().to_sig_string(8),
        class.hash(),
    ]);
    Table {
        headers,
        rows: vec![row],
    }
    .render(g.out)
}

fn candidate_table(candidates: &[CandidateRecord]) -> Table {
    let mut table = Table::new(["c", "a", "q", "G/L", "q|r", "L", "status"]);
    for c in candidates {
        let l = c
            .stages
            .last()
            .map(|s| s.l.to_sig_string(6))
            .unwrap_or_default();
        let status = c.status().map(|s| format!("{s:?}")).unwrap_or_default();
        table.push([
            c.class.c.clone(),
            c.class.a.clone(),
            c.class.q.to_string(),
            c.g_over_l.to_sig_string(6),
            c.q_divides_r.to_string(),
            l,
            status,
        ]);
    }
    table
}

fn scan_cmd(g: &Global, args: &ScanArgs) -> Result<String> {
    let config = g.scan_config(args.triples.clone())?;
    let journal = g.journal();
    let mut outcome = scan(&config, Some(&journal.ledger))?;
    for f in &outcome.failures {
        eprintln!("{} q={}: {}", f.triple, f.q, f.error);
    }
    eprintln!(
        "kept {}, screened out {}",
        outcome.candidates.len(),
        outcome.screened_out
    );
    if let Some(top) = args.top {
        outcome.candidates.truncate(top);
    }
    if args.rough {
        for c in &mut outcome.candidates {
            refine(c, &config, Some(&journal.ledger))?;
        }
    }
    match g.out {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&outcome.candidates).expect("serializable");
            text.push('\n');
            Ok(text)
        }
        format => candidate_table(&outcome.candidates).render(format),
    }
}

fn run_cmd(g: &Global, args: &RunArgs) -> Result<String> {
    let mut opts = g.run_options()?;
    opts.max_steps = args.max_steps;
    opts.max_terms = args.max_terms;
    opts.estimate = args
        .estimate
        .as_deref()
        .map(|e| real("estimate", e, opts.precision))
        .transpose()?;
    let journal = g.journal();
    let specs: Vec<ClassSpec> = match &args.from {
        Some(path) => {
            let candidates: Vec<CandidateRecord> = read_json(path)?;
            candidates
                .into_iter()
                .filter(|c| c.status() == Some(Status::Promising))
                .take(args.top)
                .map(|c| c.class)
                .collect()
        }
        None => vec![ClassSpec::new(
            args.a.as_deref().unwrap_or_default(),
            args.c.as_deref().unwrap_or_default(),
            args.b.as_deref(),
            args.q.unwrap_or(1),
        )],
    };
    let started = Instant::now();
    let mut records = Vec::new();
    let mut first_error = None;
    for r in run_many(&specs, &opts, &journal, args.jobs) {
        match r {
            Ok(report) => records.push(ReportRecord::from_report(
                &report,
                started.elapsed().as_secs_f64(),
            )),
            Err(e) if specs.len() == 1 => return Err(e),
            Err(e) => {
                eprintln!("{e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if records.is_empty() {
        if let Some(e) = first_error {
            return Err(e);
        }
    }
    render_records(&records, g.out)
}

fn resume_cmd(g: &Global, args: &ResumeArgs) -> Result<String> {
    let started = Instant::now();
    let journal = g.journal();
    let report = resume_with(&args.checkpoint, args.max_steps, &journal)?;
    render_records(
        &[ReportRecord::from_report(
            &report,
            started.elapsed().as_secs_f64(),
        )],
        g.out,
    )
}

fn report_cmd(g: &Global, args: &ReportArgs) -> Result<String> {
    let integer = |name: &str, text: &Option<String>| {
        text.as_deref()
            .map(|t| {
                parse_integer(t)
                    .ok_or_else(|| Error::Validation(format!("--{name} {t:?} is not an integer")))
            })
            .transpose()
    };
    let filter = ReportFilter {
        min_root: integer("min-root", &args.min_root)?,
        min_g: args.min_g,
        a: integer("a", &args.a)?,
        c: integer("c", &args.c)?,
    };
    let files = if args.files.is_empty() {
        vec![g.journal().results.path().to_path_buf()]
    } else {
        args.files.clone()
    };
    let mut records = Vec::new();
    for f in &files {
        records.extend(load_records(f)?);
    }
    render_records(
        &freysha::output::select(&records, &filter, args.sort),
        g.out,
    )
}

fn dispatch(cli: &Cli) -> Result<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Triple(TripleCommand::Analyze(args)) => triple_analyze(g, args),
        Command::Class(ClassCommand::Inspect(args)) => class_inspect(g, args),
        Command::Scan(args) => scan_cmd(g, args),
        Command::Run(args) => run_cmd(g, args),
        Command::Resume(args) => resume_cmd(g, args),
        Command::Report(args) => report_cmd(g, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(exit::SUCCESS as u8)
        }
        Err(e) => {
            eprintln!("freysha: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
