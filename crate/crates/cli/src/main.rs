use clap::Parser;
use spinnet_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for l in &report.lines {
                println!("{l}");
            }
            println!("artifacts in {}", report.out.display());
        }
        Err(e) => {
            eprintln!("spinnet: {e:#}");
            std::process::exit(e.exit_code());
        }
    }
}
