//! Drops the storage mode binaries on a small congested network and shows the store
//! charging and discharging in the same hour, which the binaries forbid.

use robust_tnep::oracle::{compare_relaxation, OracleConfig};
use robust_tnep::{bundled, DeviationVector, ExpansionPlan};

fn main() {
    let case = bundled::relaxed_demo();
    let rep = compare_relaxation(&case, &ExpansionPlan::empty(&case), &DeviationVector::nominal(&case), &OracleConfig::default()).unwrap();
    println!("with mode binaries: {:.6} M€/year, {} simultaneous hours", rep.binary_cost, rep.binary_simultaneous);
    println!("relaxed:            {:.6} M€/year", rep.relaxed_cost);
    for (id, d, t, pc, pd) in &rep.simultaneous {
        println!("  {id} day {} hour {}: charging {pc:.2} MW while discharging {pd:.2} MW", d + 1, t + 1);
    }
}
