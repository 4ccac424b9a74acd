//! Acceptance suite: one line per criterion.
//!
//! Criteria 7 and 8 are posed at a base state that is exactly resonant
//! (ω₂ = 0 for the rigid gravitational disk with the particle at a₀ = 2),
//! so the linearization has no inverse there. Those two lines print FAIL
//! and the test asserts that the failure is that resonance; the same checks
//! at a₀ = 3 appear in the detail text and are asserted in `continuation.rs`.

use tidal_core::verify::{run_all, VerifyOptions};

// Runs without the libtest harness so the lines are never captured.
fn main() {
    let report = run_all(&VerifyOptions::default());
    let mut unexpected = 0;
    for c in &report.criteria {
        println!("{}", c.line());
        let expected = match c.id {
            7 | 8 => !c.passed && c.detail.contains("resonant mode n = 2"),
            _ => c.passed,
        };
        if !expected {
            unexpected += 1;
            println!("  unexpected outcome for criterion {}", c.id);
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
    println!("acceptance: outcomes as documented (7 and 8 fail on the resonant base state)");
}
