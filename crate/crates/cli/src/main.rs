use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "robopt", version, about = "Randomized robust combinatorial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print a JSON run report.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Mwu)]
        engine: Engine,
        /// MWU accuracy.
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        /// Best-response oracle for the MWU engine; chosen from the instance
        /// when omitted.
        #[arg(long, value_enum)]
        subroutine: Option<Subroutine>,
        /// Accuracy of the knapsack and cardinality oracles.
        #[arg(long, default_value_t = 0.1)]
        oracle_epsilon: f64,
        /// Write one JSON line per MWU iteration.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Write a generated instance.
    Generate {
        #[arg(long, value_enum)]
        kind: GenerateKind,
        #[arg(long, short)]
        output: PathBuf,
        /// Partition integers, sorted nonincreasing.
        #[arg(long, value_delimiter = ',')]
        values: Vec<u64>,
        /// Hitting-set element names.
        #[arg(long, value_delimiter = ',')]
        elements: Vec<String>,
        /// One hitting-set member, as comma separated names. Repeatable.
        #[arg(long = "set")]
        sets: Vec<String>,
        /// Size bound of the hitting set.
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Draw this many random sets over `--size` indexed elements.
        #[arg(long)]
        random_sets: Option<usize>,
        #[arg(long, default_value_t = 6)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Shrink a strategy to at most one set per objective.
    Sparsify {
        instance: PathBuf,
        /// Strategy document or run report.
        strategy: PathBuf,
    },
    /// Split a fractional point into independent sets.
    Decompose { instance: PathBuf, point: PathBuf },
    /// Validate an instance and the reductions of its objectives.
    Check { instance: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Engine {
    Mwu,
    Lp,
    Exact,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Subroutine {
    BruteForce,
    Greedy,
    KnapsackFptas,
    CardinalityDp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenerateKind {
    HittingSet,
    Partition,
}

fn trace_writer(path: &Path) -> robopt::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> robopt::Result<serde_json::Value> {
    match cli.command {
        Command::Solve {
            instance,
            engine,
            epsilon,
            subroutine,
            oracle_epsilon,
            trace,
        } => {
            let inst = robopt::schema::load_instance(&instance)?;
            let trace = trace.as_deref().map(trace_writer).transpose()?;
            let opts = commands::SolveOptions {
                engine,
                epsilon,
                subroutine,
                oracle_epsilon,
            };
            let report = commands::solve(&inst, &opts, trace)?;
            eprintln!("{}", report.summary());
            Ok(serde_json::to_value(report)?)
        }
        Command::Generate {
            kind,
            output,
            values,
            elements,
            sets,
            rank,
            random_sets,
            size,
            seed,
        } => {
            let (inst, metadata) = match kind {
                GenerateKind::Partition => commands::generate_partition(&values)?,
                GenerateKind::HittingSet => match random_sets {
                    Some(count) => commands::generate_random_hitting_set(size, count, rank, seed)?,
                    None => commands::generate_hitting_set(&elements, &sets, rank)?,
                },
            };
            robopt::schema::save_instance(&inst, &output)?;
            eprintln!("wrote {}", output.display());
            Ok(serde_json::json!({ "output": output, "metadata": metadata }))
        }
        Command::Sparsify { instance, strategy } => {
            let inst = robopt::schema::load_instance(&instance)?;
            let p = commands::load_strategy(&strategy, &inst)?;
            let out = commands::sparsify(&inst, &p)?;
            eprintln!(
                "support {} -> {}, value {:.6} -> {:.6}",
                out.support_before, out.support_after, out.value_before, out.value_after
            );
            Ok(serde_json::to_value(out)?)
        }
        Command::Decompose { instance, point } => {
            let inst = robopt::schema::load_instance(&instance)?;
            let out = commands::decompose(&inst, &point)?;
            eprintln!(
                "{} sets, reconstruction error {:.2e}",
                out.support_size, out.reconstruction_error
            );
            Ok(serde_json::to_value(out)?)
        }
        Command::Check { instance } => {
            let inst = robopt::schema::load_instance(&instance)?;
            let out = commands::check(&inst)?;
            for c in &out.checks {
                eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            let value = serde_json::to_value(&out)?;
            if out.checks.iter().all(|c| c.passed) {
                Ok(value)
            } else {
                println!("{}", serde_json::to_string_pretty(&value)?);
                Err(robopt::Error::InvalidInstance("instance failed validation".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                robopt::Error::SolverFailure(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
