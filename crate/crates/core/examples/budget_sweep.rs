//! Solves the three-bus toy case over a grid of uncertainty budgets and prints the
//! sweep as CSV.

use std::time::Instant;

use robust_tnep::report::{rows_to_csv, SweepRow};
use robust_tnep::{bundled, solve_robust_tnep, CcgConfig};

fn main() {
    let base = bundled::toy3();
    let mut rows = Vec::new();
    for (d, g, w) in [(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1), (2, 1, 1), (2, 2, 1)] {
        let t = Instant::now();
        let outcome = base
            .with_budgets(d, g, w)
            .map_err(|e| e.to_string())
            .and_then(|case| solve_robust_tnep(&case, &CcgConfig::default()).map_err(|e| e.to_string()));
        rows.push(SweepRow::from_outcome("gamma", format!("{d}/{g}/{w}"), &outcome, t.elapsed().as_secs_f64()));
    }
    print!("{}", rows_to_csv(&rows));
}
