use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lambdap::{compile, run_program, Mode, RunConfig};

const EXIT_RUNTIME: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "lambdap",
    version,
    about = "Run lambda calculus programs with parallel effect handlers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a program and print its final value.
    Run {
        file: PathBuf,
        /// Print one trace event per line to standard error.
        #[arg(long)]
        trace: bool,
        /// Worker threads for parallel loops (default: host parallelism).
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        workers: Option<u32>,
        #[arg(long, value_enum, default_value_t = ModeArg::Parallel)]
        mode: ModeArg,
        /// Do not load the standard handlers.
        #[arg(long)]
        no_prelude: bool,
    },
    /// Parse and desugar a program without evaluating it.
    Check {
        file: PathBuf,
        #[arg(long)]
        no_prelude: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Parallel,
    Sequential,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            file,
            trace,
            workers,
            mode,
            no_prelude,
        } => {
            let mut cfg = RunConfig::default().with_trace(trace);
            if let Some(w) = workers {
                cfg = cfg.with_workers(w as usize);
            }
            cfg.mode = match mode {
                ModeArg::Parallel => Mode::Parallel,
                ModeArg::Sequential => Mode::Sequential,
            };
            run(&file, !no_prelude, &cfg)
        }
        Command::Check { file, no_prelude } => match load(&file, !no_prelude) {
            Ok(_) => ExitCode::SUCCESS,
            Err(code) => code,
        },
    }
}

fn load(file: &PathBuf, prelude: bool) -> Result<lambdap::Expr, ExitCode> {
    let source = std::fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", file.display());
        ExitCode::from(EXIT_USAGE)
    })?;
    compile(&source, prelude).map_err(|e| {
        eprintln!("parse error: {e}");
        ExitCode::from(EXIT_PARSE)
    })
}

fn run(file: &PathBuf, prelude: bool, cfg: &RunConfig) -> ExitCode {
    let program = match load(file, prelude) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let outcome = run_program(&program, cfg);
    if cfg.trace {
        let mut err = std::io::stderr().lock();
        for event in &outcome.trace {
            let _ = writeln!(err, "{event}");
        }
    }
    match outcome.value {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
