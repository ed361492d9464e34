use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use parareal_cli::config::OUTPUT_DIR_ENV;
use parareal_cli::{parse_config, run_experiment, CliArgs, EXIT_ERROR};

fn main() -> ExitCode {
    let args = CliArgs::parse();
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let outcome = parse_config(&args, env_dir).and_then(|cfg| run_experiment(&cfg));
    match outcome {
        Ok(report) => {
            for line in report.summary_lines() {
                println!("{line}");
            }
            println!(
                "wrote {} tables to {}",
                report.tables().len(),
                report.config.output_dir.display()
            );
            ExitCode::from(report.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
