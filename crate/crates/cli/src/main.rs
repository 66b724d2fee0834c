use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frs_cli::{execute, CliError, Command, Manifest, RunOptions, RunResult};

/// Matrix-valued Fisher-Rao geometry experiments.
#[derive(Parser, Debug)]
#[command(name = "frs", version)]
struct Args {
    /// Command to run; must match the manifest's `command` field.
    #[arg(value_enum)]
    command: Command,
    /// Experiment manifest (JSON). Optional for `check`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory for result, metadata and CSV files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Maximum number of worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    verbose: bool,
    /// Perturbs the check suite so that it fails.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn load(args: &Args) -> Result<Manifest, CliError> {
    let manifest = match &args.manifest {
        Some(path) => Manifest::load(path)?,
        None if args.command == Command::Check => Manifest::bare(Command::Check),
        None => return Err(CliError::Validation(format!("command {} needs --manifest", args.command.name()))),
    };
    if manifest.command != args.command {
        return Err(CliError::Validation(format!(
            "manifest is for command {}, not {}",
            manifest.command.name(),
            args.command.name()
        )));
    }
    Ok(manifest)
}

fn run(args: &Args) -> Result<i32, CliError> {
    let manifest = load(args)?;
    let opts = RunOptions { out_dir: args.out.clone(), threads: args.threads, inject_fault: args.inject_fault };
    let outcome = execute(&manifest, &opts)?;
    if let RunResult::Check { groups, all_passed } = &outcome.result {
        for g in groups {
            println!("{:<14} {}", g.name, if g.passed { "pass" } else { "FAIL" });
            if !g.passed {
                for item in g.items.iter().filter(|i| !i.passed) {
                    println!("    {}: {:.3e} (bound {:.3e})", item.name, item.value, item.bound);
                }
                if let Some(e) = &g.error {
                    println!("    error: {e}");
                }
            }
        }
        if !all_passed {
            return Err(CliError::CheckFailed { failed: groups.iter().filter(|g| !g.passed).count() });
        }
    }
    println!("{}", outcome.result_path.display());
    if !outcome.converged {
        return Err(CliError::NotConverged("results were written, but the solver stopped early".into()));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("frs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
