//! Compares the decomposition against the extensive form, one budget point at a time.
//!
//! ```text
//! cargo run --release --example oracle_verify -- toy3
//! ```

use std::time::Instant;

use robust_tnep::bundled;
use robust_tnep::oracle::{extensive_form, OracleConfig};
use robust_tnep::uncertainty::vertex_count;
use robust_tnep::verify::{budget_points, case_at};
use robust_tnep::{solve_robust_tnep, CcgConfig};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "toy2".into());
    let base = bundled::by_name(&name).unwrap_or_else(|| panic!("unknown bundled case `{name}`"));
    for point in budget_points(&name) {
        let case = case_at(&base, point).expect("budgets fit the case");
        let t = Instant::now();
        let ccg = solve_robust_tnep(&case, &CcgConfig::default()).expect("decomposition converges");
        let ccg_secs = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let ef = extensive_form(&case, &OracleConfig::default()).expect("extensive form solves");
        let ef_secs = t.elapsed().as_secs_f64();
        println!(
            "G=({},{},{}) budget {:>7}: {:>4} vertices, ccg {:.9} in {} outer ({ccg_secs:.1}s), oracle {:.9} ({ef_secs:.1}s), delta {:.1e}",
            point.0,
            point.1,
            point.2,
            point.3,
            vertex_count(&case.uncertainty, &case),
            ccg.upper_bound,
            ccg.log.outer.len(),
            ef.upper_bound,
            (ccg.upper_bound - ef.upper_bound).abs()
        );
    }
}
