use std::process::ExitCode;

use clap::Parser;
use ergolab_cli::config::{parse_config, Cli};
use ergolab_cli::run::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match parse_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            println!("wrote {} files to {}", outcome.files.len(), cfg.out.display());
            if outcome.violations > 0 {
                eprintln!("error: {} hard-invariant violations", outcome.violations);
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
