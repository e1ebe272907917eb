use clap::Parser;

use bzl_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match bzl_cli::run(cli) {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report.summary).expect("serializable")
            );
            log::info!("manifest written to {}", report.manifest.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
