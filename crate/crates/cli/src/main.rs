use std::io::Write;

use clap::Parser;
use fcrystal_cli::commands::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let out = execute(&cli);
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = if out.error { writeln!(std::io::stderr(), "{}", out.text) } else { writeln!(std::io::stdout(), "{}", out.text) };
    std::process::exit(out.code);
}
