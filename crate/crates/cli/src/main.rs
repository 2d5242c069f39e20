mod args;
mod commands;
mod setup;

use std::process::ExitCode;

use clap::Parser;
use privrec::Error;

use args::{Cli, Command};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_)
        | Error::Parse { .. }
        | Error::Audit { .. }
        | Error::EmptyCore { .. }
        | Error::MalformedList { .. } => 2,
        Error::Infeasible(_) => 3,
        Error::BudgetExhausted { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Prepare(a) => commands::prepare(a),
        Command::Recommend(a) => commands::recommend(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
