//! Acceptance suite: one line per criterion.
//!
//! A few sub-checks are unattainable as stated (see the README section
//! "Known failures"). They are run and reported as FAIL; the binary exits
//! non-zero only when some other sub-check fails.

use std::process::ExitCode;

use oeb_cli::verify::{run_suite, Level, Mutation};

/// `(criterion, sub-check label)` pairs that cannot hold for any
/// implementation.
const UNATTAINABLE: &[(u8, &str)] = &[(6, "Test 1"), (7, "Test 2"), (7, "Test 3")];

fn main() -> ExitCode {
    let outcomes = run_suite(Level::Full, Mutation::None);
    let mut unexpected = Vec::new();
    for o in &outcomes {
        println!("{}", o.line());
        for p in o.parts.iter().filter(|p| !p.ok) {
            if UNATTAINABLE.contains(&(o.id, p.label.as_str())) {
                println!("       known failure {} / {}: {}", o.id, p.label, p.detail);
            } else {
                unexpected.push(format!("{} / {}", o.id, p.label));
            }
        }
        if o.checks_passed && !o.passed {
            unexpected.push(format!("{} runtime budget", o.id));
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
