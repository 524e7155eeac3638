//! Acceptance criteria 1–10: one line per criterion, nonzero exit on any
//! failure or precision insufficiency.

use std::process::ExitCode;
use std::time::Instant;

use fcrystal_cli::commands::bundled_documents;
use fcrystal_cli::suite::{self, Outcome, SuiteConfig, TOLERANCE};

const SEED: u64 = 0x5eed_2024;

fn main() -> ExitCode {
    assert_eq!(TOLERANCE, 0, "acceptance compares exactly");
    let docs = bundled_documents().expect("bundled documents parse");
    let cfg = SuiteConfig::new(SEED, docs);
    let t = Instant::now();
    let results = suite::run_all(&cfg);
    let mut ok = true;
    for r in &results {
        println!("{}", r.line());
        for n in &r.notes {
            println!("    note: {n}");
        }
        ok &= r.outcome == Outcome::Pass;
    }
    let passed = results.iter().filter(|r| r.outcome == Outcome::Pass).count();
    println!("acceptance: {passed}/{} criteria passed in {:.2?} (seed {SEED:#x})", results.len(), t.elapsed());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
