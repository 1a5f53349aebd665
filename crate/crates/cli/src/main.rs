use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use frontier_cli::commands::{run, Cli};
use frontier_cli::config::help_text;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FRONTIER_LOG")).init();
    let help = help_text();
    let mut cmd = Cli::command().after_long_help(help.clone());
    for name in ["scene-gen", "oracle-dump", "explore", "evaluate"] {
        cmd = cmd.mut_subcommand(name, |c| c.after_long_help(help.clone()));
    }
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
