use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use uav_aoi::cli::Cli;
use uav_aoi::error::{classify, ExitKind};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { ExitKind::Usage.code() as u8 });
        }
    };
    if let Err(e) = uav_aoi::init_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(ExitKind::Usage.code() as u8);
    }
    match uav_aoi::commands::run(&cli.command) {
        Ok(kind) => ExitCode::from(kind.code() as u8),
        Err(e) => {
            let e = classify(e);
            eprintln!("error: {e}");
            ExitCode::from(e.kind.code() as u8)
        }
    }
}
