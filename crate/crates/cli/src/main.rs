use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mimalloc::MiMalloc;
use senseref::semantics::Budget;
use senseref::sense::SenseMode;
use senseref_cli::batch::{run_batch_text, EXIT_SYNTAX};
use senseref_cli::{repl, Config, Session};

#[global_allocator]
static GLOBAL: MiMalloc = MiMalloc;

// Deep terms recurse deeply in the checker; every worker gets this much stack.
const STACK_BYTES: usize = 512 << 20;

#[derive(Parser)]
#[command(name = "senseref", version, about = "Evaluate terms and check meaning-explanation judgments")]
struct Cli {
    #[command(subcommand)]
    command: Option<Mode>,
    /// Transition steps per evaluation.
    #[arg(long, global = true, default_value_t = 100_000)]
    fuel: u64,
    /// Largest enumerated instance size.
    #[arg(long, global = true, default_value_t = 7)]
    bound: usize,
    /// Random instances per hypothesis.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true, default_value = "defn")]
    mode: SenseMode,
    /// Let member comparison decide type equality when the ordinary check fails.
    #[arg(long, global = true)]
    extensional: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    unicode: bool,
    /// Evaluate independent batch commands concurrently.
    #[arg(long, global = true)]
    parallel: bool,
    /// Write replayable evidence files to this directory.
    #[arg(long, global = true)]
    evidence: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Mode {
    /// Interactive session (the default).
    Repl,
    /// Run a batch file.
    Batch { file: PathBuf },
    /// Run one command.
    Run { command: String },
}

fn run(cli: Cli) -> u8 {
    let config = Config {
        budget: Budget {
            fuel: cli.fuel,
            instance_size: cli.bound,
            samples: cli.samples,
            seed: cli.seed,
        },
        mode: cli.mode,
        extensional: cli.extensional,
        unicode: cli.unicode,
        evidence: cli.evidence,
        ..Config::default()
    };
    let mut session = Session::new(config);
    match cli.command.unwrap_or(Mode::Repl) {
        Mode::Repl => match repl::run_stdio(&mut session) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("{e}");
                1
            }
        },
        Mode::Batch { file } => {
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    return EXIT_SYNTAX as u8;
                }
            };
            session.base = file.parent().map(PathBuf::from).unwrap_or_default();
            let report = run_batch_text(&text, &mut session, cli.parallel);
            print!("{}", report.output);
            for d in &report.diagnostics {
                eprintln!("{d}");
            }
            report.exit_code as u8
        }
        Mode::Run { command } => {
            let report = run_batch_text(&command, &mut session, false);
            print!("{}", report.output);
            for d in &report.diagnostics {
                eprintln!("{d}");
            }
            report.exit_code as u8
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.parallel {
        rayon::ThreadPoolBuilder::new()
            .stack_size(STACK_BYTES)
            .build_global()
            .expect("the global pool is configured once");
    }
    let worker = std::thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(move || run(cli))
        .expect("spawn the main worker");
    ExitCode::from(worker.join().unwrap_or(1))
}
