use clap::Parser;
use structfdi_cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are rejected input; help and version are not errors.
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    std::process::exit(run(&cli));
}
