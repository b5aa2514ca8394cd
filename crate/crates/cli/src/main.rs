use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use germlens_cli::{report, run, Command, ExperimentConfig, Result};

const USAGE_EXIT: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "germ-lens", version, about = "Experiments on set-germs at the origin")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for `<subcommand>.json` and `<subcommand>.csv`.
    #[arg(long, default_value = "germ-lens-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    fixture: Option<String>,
}

fn execute(args: Args) -> Result<u8> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = cfg.subcommand.filter(|c| *c != args.command) {
        return Err(germlens_cli::CliError::Invalid(format!(
            "config is for `{}`, command line asks for `{}`",
            c.name(),
            args.command.name()
        )));
    }
    cfg.subcommand = Some(args.command);
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(f) = args.fixture {
        cfg.fixture = Some(f);
        cfg.a = None;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| germlens_cli::CliError::Invalid(format!("thread pool: {e}")))?;
    }
    let (rep, table) = run(&cfg)?;
    let (json, csv) = report::write(&args.out, &rep, &table)?;
    println!("{}: {:?}", args.command.name(), rep.verdict);
    if let Some(why) = &rep.explanation {
        println!("  {why}");
    }
    println!("  report {}\n  data   {}", json.display(), csv.display());
    Ok(rep.verdict.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_EXIT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE_EXIT)
        }
    }
}
