//! Ground truth by enumeration, for instances with few uncertainty vertices.

use std::time::Instant;

use thiserror::Error;

use crate::case::PlanningCase;
use crate::ccg::{IterationLog, RobustSolution};
use crate::formulation::{build_master, solve_operational, FormulationError, FormulationOptions, CAPITAL_SCALE};
use crate::milp::{SolveStatus, SolverConfig};
use crate::plan::{plan_capital_cost, ExpansionPlan};
use crate::uncertainty::{enumerate_vertices, vertex_count, DeviationVector};

pub const DEFAULT_VERTEX_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{count} uncertainty vertices exceed the cap of {cap}")]
    CapExceeded { count: u128, cap: usize },
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error("extensive form is infeasible")]
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub vertex_cap: usize,
    pub solver: SolverConfig,
    pub formulation: FormulationOptions,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { vertex_cap: DEFAULT_VERTEX_CAP, solver: SolverConfig::default(), formulation: FormulationOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase {
    /// M€/year
    pub cost: f64,
    pub u: DeviationVector,
    pub vertices: usize,
}

fn sorted_vertices(case: &PlanningCase, cap: usize) -> Result<Vec<DeviationVector>, OracleError> {
    let count = vertex_count(&case.uncertainty, case);
    if count > cap as u128 {
        return Err(OracleError::CapExceeded { count, cap });
    }
    let mut v = enumerate_vertices(&case.uncertainty, case);
    v.sort();
    Ok(v)
}

/// Maximum operational cost over every vertex; ties go to the smallest vertex.
pub fn brute_force_worst_case(case: &PlanningCase, plan: &ExpansionPlan, config: &OracleConfig) -> Result<WorstCase, OracleError> {
    let vertices = sorted_vertices(case, config.vertex_cap)?;
    let mut best: Option<(f64, DeviationVector)> = None;
    for u in &vertices {
        let cost = solve_operational(case, plan, u, &config.formulation, &config.solver)?.cost;
        if best.as_ref().map_or(true, |(c, _)| cost > *c + 1e-9 * c.abs().max(1.0)) {
            best = Some((cost, u.clone()));
        }
    }
    let (cost, u) = best.expect("at least the nominal vertex");
    Ok(WorstCase { cost, u, vertices: vertices.len() })
}

/// One MILP with an operational copy for every vertex.
pub fn extensive_form(case: &PlanningCase, config: &OracleConfig) -> Result<RobustSolution, OracleError> {
    let started = Instant::now();
    let vertices = sorted_vertices(case, config.vertex_cap)?;
    let master = build_master(case, &vertices, &config.formulation)?;
    let r = master.solve(&config.solver)?;
    if r.status == SolveStatus::Infeasible {
        return Err(OracleError::Infeasible);
    }
    crate::formulation::require_optimal(&r, "extensive form")?;
    let plan = master.plan.decode(&r.values);
    let capital = plan_capital_cost(&plan, case).map_err(FormulationError::from)?.total;
    let operating = r.value(master.eta);
    let mut worst = (f64::NEG_INFINITY, DeviationVector::nominal(case));
    for s in &master.scenarios {
        let c = r.eval(&s.vars.cost);
        if c > worst.0 + 1e-9 * c.abs().max(1.0) {
            worst = (c, s.u.clone());
        }
    }
    Ok(RobustSolution {
        plan,
        worst_case_u: worst.1,
        capital_cost: capital,
        annual_investment: capital * case.economics.amortization_rate,
        worst_case_operating_cost: operating / CAPITAL_SCALE,
        total_annual_cost: r.objective / CAPITAL_SCALE,
        lower_bound: r.objective,
        upper_bound: r.objective,
        converged: true,
        log: IterationLog::default(),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Operational costs with and without mode binaries at one plan and realization.
#[derive(Clone, Debug)]
pub struct RelaxationReport {
    /// M€/year
    pub binary_cost: f64,
    pub relaxed_cost: f64,
    /// `(storage id, day, hour, charge MW, discharge MW)` in the relaxed dispatch.
    pub simultaneous: Vec<(String, usize, usize, f64, f64)>,
    /// Simultaneous hours left in the binary dispatch (always empty for a correct model).
    pub binary_simultaneous: usize,
}

pub fn compare_relaxation(
    case: &PlanningCase,
    plan: &ExpansionPlan,
    u: &DeviationVector,
    config: &OracleConfig,
) -> Result<RelaxationReport, OracleError> {
    let strict = FormulationOptions { relax_modes: false, ..config.formulation.clone() };
    let relaxed = FormulationOptions { relax_modes: true, ..config.formulation.clone() };
    let b = solve_operational(case, plan, u, &strict, &config.solver)?;
    let r = solve_operational(case, plan, u, &relaxed, &config.solver)?;
    let simultaneous = r
        .simultaneous
        .iter()
        .map(|&(s, d, t)| {
            let sched = &r.schedules[s];
            (case.storage_units[sched.slot.unit].id.clone(), d, t, sched.charge[d][t], sched.discharge[d][t])
        })
        .collect();
    Ok(RelaxationReport { binary_cost: b.cost, relaxed_cost: r.cost, simultaneous, binary_simultaneous: b.simultaneous.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn zero_budgets_match_single_solve() {
        let case = bundled::toy3();
        let plan = ExpansionPlan::empty(&case);
        let wc = brute_force_worst_case(&case, &plan, &OracleConfig::default()).unwrap();
        let nominal = solve_operational(&case, &plan, &DeviationVector::nominal(&case), &FormulationOptions::default(), &SolverConfig::default())
            .unwrap();
        assert_eq!(wc.vertices, 1);
        assert_eq!(wc.cost, nominal.cost);
    }

    #[test]
    fn demand_increase_is_worst_on_toy2() {
        let case = bundled::toy2().with_budgets(1, 0, 0).unwrap();
        let plan = ExpansionPlan::from_entries(&case, &[(1, 2, 1)], &[]).unwrap();
        let wc = brute_force_worst_case(&case, &plan, &OracleConfig::default()).unwrap();
        assert_eq!(wc.vertices, 2);
        assert_eq!(wc.u.demand, vec![true]);
    }

    #[test]
    fn cap_is_enforced() {
        let case = bundled::garver().with_budgets(5, 3, 1).unwrap();
        let cfg = OracleConfig { vertex_cap: 100, ..Default::default() };
        let err = brute_force_worst_case(&case, &ExpansionPlan::empty(&case), &cfg).unwrap_err();
        assert!(matches!(err, OracleError::CapExceeded { count: 512, cap: 100 }));
    }

    #[test]
    fn larger_budgets_never_lower_the_extensive_form() {
        let base = extensive_form(&bundled::toy2(), &OracleConfig::default()).unwrap();
        let maxed = extensive_form(&bundled::toy2().with_budgets(1, 1, 0).unwrap(), &OracleConfig::default()).unwrap();
        assert!(maxed.upper_bound >= base.upper_bound - 1e-9);
    }

    #[test]
    fn relaxed_demo_shows_simultaneous_hours() {
        let case = bundled::relaxed_demo();
        let plan = ExpansionPlan::empty(&case);
        let rep = compare_relaxation(&case, &plan, &DeviationVector::nominal(&case), &OracleConfig::default()).unwrap();
        assert!(!rep.simultaneous.is_empty());
        assert_eq!(rep.binary_simultaneous, 0);
        assert!(rep.relaxed_cost < rep.binary_cost - 1e-6);
    }
}
