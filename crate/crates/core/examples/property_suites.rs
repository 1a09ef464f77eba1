//! Every property suite with its measured values.
//!
//! cargo run --example property_suites -- [seed]

use twofluid::harness::{run_property_suite, Suite};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for suite in Suite::ALL {
        let r = run_property_suite(suite, seed);
        println!("[{suite}] passed: {}", r.passed);
        for c in &r.checks {
            println!("  {:<36} {:>11.3e}  limit {:.1e}", c.name, c.value, c.limit);
        }
    }
}
