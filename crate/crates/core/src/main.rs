use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hadamard_bench::harness::{builtin_corpus, run_suite, select_entries, Config, CorpusEntry, Report};
use hadamard_bench::{parse, Error, Rect};

#[derive(Parser)]
#[command(
    name = "hadamard",
    version,
    about = "Verify Hadamard-type inequalities on rectangles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run suites on a single expression.
    Verify(VerifyArgs),
    /// Work with the builtin corpus.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Run suites over the corpus.
    Run(RunArgs),
    /// List corpus entries.
    List,
}

#[derive(Args)]
struct Common {
    /// Comma-separated suites, or `all`.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; a `.csv` path also writes the JSON report next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    expr: String,
    /// Rectangle as `a,b,c,d`.
    #[arg(long, allow_hyphen_values = true)]
    rect: String,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated entry names.
    #[arg(long)]
    entry: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn load_config(common: &Common, extra: &[(&str, Option<String>)]) -> Result<Config, Error> {
    let mut config = match &common.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    let overrides = [
        ("suites", common.suite.clone()),
        ("tol", common.tol.map(|v| v.to_string())),
        ("seed", common.seed.map(|v| v.to_string())),
    ];
    for (key, value) in overrides.iter().chain(extra) {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    config.validate()?;
    Ok(config)
}

fn finish(report: &Report, out: Option<&Path>) -> ExitCode {
    if let Some(path) = out {
        if let Err(e) = report.write_to(path) {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(2);
        }
    }
    for entry in &report.entries {
        for rec in &entry.results {
            match &rec.note {
                Some(note) => println!("{:<14} {:<9} {:<13} {note}", entry.name, rec.suite, rec.outcome.name()),
                None => println!("{:<14} {:<9} {}", entry.name, rec.suite, rec.outcome.name()),
            }
        }
    }
    for f in &report.errata {
        match f.entry.as_str() {
            "*" => println!("erratum: {}: margin {:.3e}", f.statement, f.margin),
            entry => println!("erratum: {} on {entry}: margin {:.3e}", f.statement, f.margin),
        }
    }
    let failures = report.unexpected_failures();
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failures} unexpected failure(s)");
        ExitCode::from(1)
    }
}

fn verify(args: VerifyArgs) -> Result<(Config, Vec<CorpusEntry>), Error> {
    parse(&args.expr)?;
    let rect: Rect = args.rect.parse()?;
    let config = load_config(
        &args.common,
        &[
            ("p", args.p.map(|v| v.to_string())),
            ("q", args.q.map(|v| v.to_string())),
        ],
    )?;
    let entry = CorpusEntry::new("expr", &args.expr, rect, None, "command line");
    Ok((config, vec![entry]))
}

fn corpus_run(args: &RunArgs) -> Result<(Config, Vec<CorpusEntry>), Error> {
    let config = load_config(&args.common, &[("entries", args.entry.clone())])?;
    let entries = select_entries(&config.entries)?;
    Ok((config, entries))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (prepared, out) = match cli.command {
        Command::Verify(args) => {
            let out = args.common.out.clone();
            (verify(args), out)
        }
        Command::Corpus {
            command: CorpusCommand::Run(args),
        } => (corpus_run(&args), args.common.out.clone()),
        Command::Corpus {
            command: CorpusCommand::List,
        } => {
            for e in builtin_corpus() {
                let class = e.expected_class.map_or("-", |c| c.name());
                println!(
                    "{:<14} {:<12} {:<20} {:<29} {}",
                    e.name,
                    e.expression,
                    e.rect.to_string(),
                    class,
                    e.notes
                );
            }
            return ExitCode::SUCCESS;
        }
    };
    let (config, entries) = match prepared {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_suite(&config, &entries) {
        Ok(report) => finish(&report, out.as_deref()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
