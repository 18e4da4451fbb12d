//! Second-stage dispatch of the three-bus toy case for a fixed plan, at the nominal
//! realization and with every parameter at its bound.

use robust_tnep::bundled;
use robust_tnep::formulation::{solve_operational, FormulationOptions};
use robust_tnep::milp::SolverConfig;
use robust_tnep::{DeviationVector, ExpansionPlan};

fn main() {
    let case = bundled::toy3().with_budgets(2, 2, 1).unwrap();
    let plan = ExpansionPlan::from_entries(&case, &[(1, 3, 1)], &[(3, 1)]).unwrap();
    let nominal = DeviationVector::nominal(&case);
    let stressed = DeviationVector {
        demand: vec![true; nominal.demand.len()],
        conventional: vec![true; nominal.conventional.len()],
        wind: vec![true; nominal.wind.len()],
    };
    for u in [nominal, stressed] {
        let op = solve_operational(&case, &plan, &u, &FormulationOptions::default(), &SolverConfig::default()).unwrap();
        println!("{}: cost {:.6} M€/year, shed {:.2} MWh per day set", u.label(), op.cost, op.shed_energy);
        for s in &op.schedules {
            let id = &case.storage_units[s.slot.unit].id;
            for (t, ((pc, pd), e)) in s.charge[0].iter().zip(&s.discharge[0]).zip(&s.energy[0]).enumerate() {
                println!("  {id}#{} hour {}: charge {pc:>6.2} discharge {pd:>6.2} energy {e:>6.2}", s.slot.index, t + 1);
            }
        }
    }
}
