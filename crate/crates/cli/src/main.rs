use clap::Parser;
use hrc_risk_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("hrc-risk: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
