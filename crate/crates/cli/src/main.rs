use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;
mod schema;

use args::{Cli, Command, Job};
use error::CliResult;

fn dispatch(command: Command) -> CliResult<()> {
    let job = match command {
        Command::Gen(a) => Job::Gen(a),
        Command::Gram(a) => Job::Gram(a),
        Command::Eval(a) => Job::Eval(a),
        Command::Robust(a) => Job::Robust(a),
        Command::Mine(a) => Job::Mine(a),
        Command::Rerun(a) => {
            let mut job = commands::load_run_config(&a.config)?.job;
            if let Some(out) = a.out {
                *job.out_mut() = out;
            }
            job
        }
    };
    commands::run(job)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(error::CliError::Usage("--threads must be positive".into())),
        Some(n) => ordkern::exec::with_threads(n, || dispatch(cli.command)),
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
