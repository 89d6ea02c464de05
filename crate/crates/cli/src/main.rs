use std::io;
use std::process::ExitCode;

use clap::Parser;
use kscale_cli::args::{Cli, Command};
use kscale_cli::{commands, ExpandConfig, Result, RunConfig};

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = RunConfig::resolve(args.config.as_deref(), args.flags())?;
            commands::sweep(&cfg)?;
        }
        Command::Verify(args) if args.list => commands::list_suites(io::stdout().lock())?,
        Command::Verify(args) => commands::verify(args.suite.as_deref(), io::stdout().lock())?,
        Command::Expand(args) => {
            let cfg = ExpandConfig::resolve(args.config.as_deref(), args.flags())?;
            let report = commands::expand(&cfg)?;
            print!("{}", report.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kscale: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
