//! Loads a case (the bundled Garver system by default) and prints what it contains,
//! plus the capital cost of two hand-picked expansion plans.
//!
//! ```text
//! cargo run --example load_garver
//! cargo run --example load_garver -- path/to/case.toml
//! ```

use std::path::Path;

use robust_tnep::plan::annualize;
use robust_tnep::{bundled, load_case_file, plan_capital_cost, ExpansionPlan};

fn main() {
    let case = match std::env::args().nth(1) {
        Some(p) => load_case_file(Path::new(&p)).unwrap_or_else(|e| panic!("{p}: {e}")),
        None => bundled::garver(),
    };
    println!("{}: {} buses, reference bus {}", case.name, case.num_buses(), case.reference_bus());
    for g in &case.generators {
        println!("  unit {:<4} bus {} {:>6.1} MW at {:>5.1} €/MWh{}", g.id, g.bus, g.nominal_capacity, g.operating_cost, if g.is_wind() { " (wind)" } else { "" });
    }
    for s in &case.storage_units {
        let status = if s.is_candidate() { format!("candidate, up to {} units at {:.1}", s.max_buildable, s.unit_capital_cost) } else { "existing".into() };
        println!("  storage {:<4} bus {} {:>6.1} MWh ({status})", s.id, s.bus, s.max_energy);
    }
    for d in &case.demands {
        println!("  demand {:<4} bus {} {:>6.1} MW, shedding {:.0} €/MWh", d.id, d.bus, d.nominal_level, d.shed_cost);
    }
    println!("  corridors (existing/max, cost per circuit in 10³ €):");
    for c in &case.corridors {
        println!("    {:<4} X={:.2} {:>5.0} MW  {}/{}  {:>9.2}", c.label(), c.reactance, c.capacity, c.existing_count, c.max_total_count, c.circuit_capital_cost);
    }
    let weights: Vec<f64> = case.representative_days.iter().map(|d| d.weight).collect();
    println!("  {} representative days of {} hours, weights {weights:?}", weights.len(), case.hours_per_day());
    println!("  budget {:.1} (10³ €), amortization {}", case.economics.investment_budget, case.economics.amortization_rate);

    if case.name != "garver" {
        return;
    }
    let plans = [
        ("lines 2-3 x2, 3-5 x2, 4-6 x2, two storage units", &[(2, 3, 2), (3, 5, 2), (4, 6, 2)][..], 2),
        ("lines 2-3 x1, 2-6 x3, 3-5 x2, three storage units", &[(2, 3, 1), (2, 6, 3), (3, 5, 2)][..], 3),
    ];
    for (label, lines, units) in plans {
        let plan = ExpansionPlan::from_entries(&case, lines, &[(6, units)]).expect("plan fits the case");
        let cost = plan_capital_cost(&plan, &case).expect("plan is valid");
        println!("{label}: capital {:.1}, annualized {:.3} (10³ €)", cost.total, annualize(cost.total, &case.economics));
    }
}
