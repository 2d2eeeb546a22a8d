use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use iks_core::layout::pack_shard;
use iks_sim::run::{run_scenario, write_outputs, RunOptions};
use iks_sim::scenario::{Mode, Scenario};
use iks_sim::{shard_file, synthetic, SimError, SimResult};

#[derive(Parser)]
#[command(name = "iks", version, about = "Simulator for a near-memory exact vector search device")]
struct Cli {
    /// Write the event trace here (functional runs).
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for package execution. Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report files.
    Run { scenario: PathBuf },
    /// Run a functional scenario and compare every result with the oracle.
    OracleCheck { scenario: PathBuf },
    /// Run a scenario and print one report to stdout.
    Report {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        scenario: PathBuf,
    },
    /// Write a seeded synthetic corpus as a shard file.
    GenCorpus {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        out: PathBuf,
    },
}

fn load(cli: &Cli, path: &Path) -> SimResult<Scenario> {
    let mut s = Scenario::load(path)?;
    if let Some(seed) = cli.seed {
        s.override_seed(seed);
    }
    Ok(s)
}

fn execute(cli: &Cli) -> SimResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| SimError::Scenario(format!("thread pool: {e}")))?;
    }
    let opts = RunOptions {
        trace: cli.trace.is_some(),
        oracle_check: false,
    };
    match &cli.command {
        Command::Run { scenario } => {
            let s = load(cli, scenario)?;
            let out = run_scenario(&s, opts)?;
            for p in write_outputs(&s, &out, cli.trace.as_deref())? {
                eprintln!("wrote {}", p.display());
            }
            check_oracle(&out)
        }
        Command::OracleCheck { scenario } => {
            let s = load(cli, scenario)?;
            if s.mode != Mode::Functional {
                return Err(SimError::Scenario("oracle-check needs a functional scenario".into()));
            }
            let out = run_scenario(&s, RunOptions { oracle_check: true, ..opts })?;
            if let (Some(path), Some(text)) = (&cli.trace, &out.trace) {
                std::fs::write(path, text).map_err(|e| SimError::io(path, e))?;
            }
            check_oracle(&out)?;
            let n = out.oracle.map_or(0, |o| o.queries_checked);
            println!("oracle check passed: {n} queries");
            Ok(())
        }
        Command::Report { format, scenario } => {
            let s = load(cli, scenario)?;
            let out = run_scenario(&s, opts)?;
            match format {
                Format::Csv => print!("{}", out.csv()),
                Format::Json => print!("{}", out.json()),
            }
            if let (Some(path), Some(text)) = (&cli.trace, &out.trace) {
                std::fs::write(path, text).map_err(|e| SimError::io(path, e))?;
            }
            check_oracle(&out)
        }
        Command::GenCorpus { n, dim, out } => {
            let corpus = synthetic::corpus(*n, *dim, cli.seed.unwrap_or(0))?;
            let shard = pack_shard(*dim, corpus.iter(), 0)?;
            shard_file::write(out, &shard)
        }
    }
}

fn check_oracle(out: &iks_sim::run::RunOutput) -> SimResult<()> {
    match &out.oracle {
        Some(o) if !o.passed() => Err(SimError::OracleMismatch(format!(
            "{} of {} queries differ, first: {}",
            o.mismatches.len(),
            o.queries_checked,
            o.mismatches[0]
        ))),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage mistakes count as validation errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("iks: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
