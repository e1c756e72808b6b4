use std::io;

use clap::Parser;

use anticonc::cli::{run, Cli, PRECISION_ENV};

fn main() {
    let cli = Cli::parse();
    let env = std::env::var(PRECISION_ENV).ok();
    let code = run(
        &cli,
        env.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
