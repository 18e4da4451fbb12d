//! Nested column-and-constraint generation.
//!
//! The outer loop alternates an investment master (one operational copy per
//! identified scenario) with a worst-case search at the master's plan. The
//! worst-case search is itself a loop: the operational MILP at a fixed
//! realization gives a lower bound and a fresh mode pattern, and the dualized
//! inner master over all patterns seen so far gives an upper bound and the next
//! realization to try.
//!
//! Bounds are in M€/year; reported costs are converted to 10³ €.

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::{CaseError, PlanningCase};
use crate::formulation::{
    build_inner_master, build_master, solve_operational, FormulationError, FormulationOptions, InnerMaster, ModePattern,
    CAPITAL_SCALE,
};
use crate::milp::{SolveStatus, SolverConfig};
use crate::plan::{plan_capital_cost, ExpansionPlan};
use crate::uncertainty::{vertex_count, DeviationVector};

#[derive(Debug, Error)]
pub enum CcgError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error("master problem is infeasible with scenarios [{}]", .scenarios.join("; "))]
    MasterInfeasible { scenarios: Vec<String> },
    #[error("inner master is unbounded; dual bounds are missing or too loose")]
    InnerMasterUnbounded,
    #[error("no convergence: gap {:.3e} after {} outer iterations", .0.upper_bound - .0.lower_bound, .0.log.outer.len())]
    NotConverged(Box<RobustSolution>),
}

impl CcgError {
    fn from_formulation(e: FormulationError, what: &str) -> Self {
        match e {
            FormulationError::Status { status: SolveStatus::Unbounded, .. } if what == "inner" => CcgError::InnerMasterUnbounded,
            other => CcgError::Formulation(other),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CcgConfig {
    pub solver: SolverConfig,
    pub formulation: FormulationOptions,
    /// Overrides the case's outer tolerance (M€).
    pub outer_tolerance: Option<f64>,
    /// Overrides the case's inner tolerance (M€).
    pub inner_tolerance: Option<f64>,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    /// Wall-clock budget for the whole run, checked between iterations.
    pub time_limit: Option<f64>,
}

impl Default for CcgConfig {
    fn default() -> Self {
        CcgConfig {
            solver: SolverConfig::default(),
            formulation: FormulationOptions::default(),
            outer_tolerance: None,
            inner_tolerance: None,
            max_outer_iterations: 50,
            max_inner_iterations: 200,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerIteration {
    pub index: usize,
    /// Realization evaluated by the subproblem.
    pub u: DeviationVector,
    /// Operational cost at `u` (M€).
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
    /// Realization proposed by the inner master.
    pub next_u: DeviationVector,
    pub new_pattern: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterIteration {
    pub index: usize,
    pub master_objective: f64,
    pub lower: f64,
    pub upper: f64,
    pub plan: ExpansionPlan,
    /// 10³ €
    pub capital_cost: f64,
    pub inner_upper: f64,
    pub inner_converged: bool,
    pub next_u: DeviationVector,
    pub inner: Vec<InnerIteration>,
    pub master_seconds: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub outer: Vec<OuterIteration>,
}

impl IterationLog {
    pub fn inner_iterations(&self) -> Vec<usize> {
        self.outer.iter().map(|o| o.inner.len()).collect()
    }

    /// Checks the monotone bound trajectories of both loops.
    pub fn check_bounds(&self) -> Result<(), String> {
        for w in self.outer.windows(2) {
            if w[1].lower < w[0].lower {
                return Err(format!("outer lower bound decreased at iteration {}", w[1].index));
            }
            if w[1].upper > w[0].upper {
                return Err(format!("outer upper bound increased at iteration {}", w[1].index));
            }
        }
        for o in &self.outer {
            for w in o.inner.windows(2) {
                if w[1].lower < w[0].lower || w[1].upper > w[0].upper {
                    return Err(format!("inner bounds not monotone in outer iteration {} at {}", o.index, w[1].index));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustSolution {
    pub plan: ExpansionPlan,
    pub worst_case_u: DeviationVector,
    /// 10³ €
    pub capital_cost: f64,
    /// 10³ €/year
    pub annual_investment: f64,
    /// 10³ €/year
    pub worst_case_operating_cost: f64,
    /// 10³ €/year
    pub total_annual_cost: f64,
    /// M€/year
    pub lower_bound: f64,
    /// M€/year
    pub upper_bound: f64,
    pub converged: bool,
    pub log: IterationLog,
    pub seconds: f64,
}

impl RobustSolution {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerOutcome {
    /// Upper bound on the worst-case operating cost (M€).
    pub upper: f64,
    /// Largest operating cost found (M€).
    pub lower: f64,
    /// Realization handed to the outer loop.
    pub worst_u: DeviationVector,
    pub converged: bool,
    pub iterations: Vec<InnerIteration>,
}

/// Annualized investment (M€/year) and capital (10³ €) of a plan.
fn plan_costs(case: &PlanningCase, plan: &ExpansionPlan) -> Result<(f64, f64), CcgError> {
    let capital = plan_capital_cost(plan, case).map_err(FormulationError::from)?.total;
    Ok((capital * case.economics.amortization_rate * CAPITAL_SCALE, capital))
}

/// Worst-case operating cost of a fixed plan.
pub fn inner_loop(case: &PlanningCase, plan: &ExpansionPlan, config: &CcgConfig) -> Result<InnerOutcome, CcgError> {
    let tol = config.inner_tolerance.unwrap_or(case.economics.inner_tolerance);
    let opts = &config.formulation;
    // A single-vertex set is just the nominal realization.
    let single_vertex = vertex_count(&case.uncertainty, case) == 1;
    let mut u = DeviationVector::nominal(case);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut master: Option<InnerMaster> = None;
    let mut seen: HashSet<Option<ModePattern>> = HashSet::new();
    let mut iterations = Vec::new();
    for index in 1..=config.max_inner_iterations {
        let started = Instant::now();
        let sub = solve_operational(case, plan, &u, opts, &config.solver).map_err(|e| CcgError::from_formulation(e, "sub"))?;
        lower = lower.max(sub.cost);
        if single_vertex {
            upper = sub.cost;
            iterations.push(InnerIteration {
                index,
                u: u.clone(),
                cost: sub.cost,
                lower,
                upper,
                next_u: u.clone(),
                new_pattern: true,
                seconds: started.elapsed().as_secs_f64(),
            });
            return Ok(InnerOutcome { upper, lower, worst_u: u, converged: true, iterations });
        }
        let new_pattern = seen.insert(sub.modes.clone());
        if new_pattern {
            match master.as_mut() {
                Some(m) => m.add_cut(case, plan, sub.modes.as_ref(), opts)?,
                None => master = Some(build_inner_master(case, plan, std::slice::from_ref(&sub.modes), opts)?),
            }
        }
        let m = master.as_ref().expect("master exists after the first pattern");
        let (xi, next_u, _) = m.solve(&config.solver).map_err(|e| CcgError::from_formulation(e, "inner"))?;
        upper = upper.min(xi);
        log::debug!("inner {index}: u={} c={:.9} LB={lower:.9} UB={upper:.9}", u.label(), sub.cost);
        iterations.push(InnerIteration {
            index,
            u: u.clone(),
            cost: sub.cost,
            lower,
            upper,
            next_u: next_u.clone(),
            new_pattern,
            seconds: started.elapsed().as_secs_f64(),
        });
        if upper - lower <= tol {
            return Ok(InnerOutcome { upper, lower, worst_u: next_u, converged: true, iterations });
        }
        if !new_pattern {
            // The master is unchanged, so it would propose the same realization again.
            log::warn!("inner loop stalled with gap {:.3e}", upper - lower);
            return Ok(InnerOutcome { upper, lower, worst_u: next_u, converged: false, iterations });
        }
        u = next_u;
    }
    let worst_u = iterations.last().map(|it| it.next_u.clone()).unwrap_or(u);
    Ok(InnerOutcome { upper, lower, worst_u, converged: false, iterations })
}

/// Solves the robust planning problem of `case`.
pub fn solve_robust_tnep(case: &PlanningCase, config: &CcgConfig) -> Result<RobustSolution, CcgError> {
    case.validate()?;
    let started = Instant::now();
    let tol = config.outer_tolerance.unwrap_or(case.economics.outer_tolerance);
    let opts = &config.formulation;
    let mut master = build_master(case, &[DeviationVector::nominal(case)], opts)?;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut log = IterationLog::default();
    let mut best: Option<(ExpansionPlan, DeviationVector, f64)> = None;
    let mut converged = false;
    for index in 1..=config.max_outer_iterations {
        let iter_start = Instant::now();
        let r = master.solve(&config.solver)?;
        if r.status == SolveStatus::Infeasible {
            return Err(CcgError::MasterInfeasible { scenarios: master.scenarios.iter().map(|s| s.u.label()).collect() });
        }
        crate::formulation::require_optimal(&r, "master")?;
        let master_seconds = r.stats.seconds;
        let plan = master.plan.decode(&r.values);
        lower = lower.max(r.objective);
        let inner = inner_loop(case, &plan, config)?;
        let (investment, capital) = plan_costs(case, &plan)?;
        if investment + inner.upper < upper {
            upper = investment + inner.upper;
            best = Some((plan.clone(), inner.worst_u.clone(), inner.upper));
        }
        log::info!(
            "outer {index}: LB={lower:.9} UB={upper:.9} plan lines={:?} storage={:?} inner iters={}",
            plan.line_entries(case),
            plan.storage_entries(case),
            inner.iterations.len()
        );
        let next_u = inner.worst_u.clone();
        log.outer.push(OuterIteration {
            index,
            master_objective: r.objective,
            lower,
            upper,
            plan,
            capital_cost: capital,
            inner_upper: inner.upper,
            inner_converged: inner.converged,
            next_u: next_u.clone(),
            inner: inner.iterations,
            master_seconds,
            seconds: iter_start.elapsed().as_secs_f64(),
        });
        if upper - lower <= tol {
            converged = true;
            break;
        }
        if master.scenarios.iter().any(|s| s.u == next_u) {
            log::warn!("outer loop stalled: scenario {} already in the master", next_u.label());
            break;
        }
        if config.time_limit.is_some_and(|t| started.elapsed().as_secs_f64() > t) {
            break;
        }
        master.add_scenario(case, &next_u, opts)?;
    }
    let (plan, worst_case_u, operating) = best.expect("at least one outer iteration");
    let (investment, capital) = plan_costs(case, &plan)?;
    let solution = RobustSolution {
        plan,
        worst_case_u,
        capital_cost: capital,
        annual_investment: investment / CAPITAL_SCALE,
        worst_case_operating_cost: operating / CAPITAL_SCALE,
        total_annual_cost: upper / CAPITAL_SCALE,
        lower_bound: lower,
        upper_bound: upper,
        converged,
        log,
        seconds: started.elapsed().as_secs_f64(),
    };
    if converged {
        Ok(solution)
    } else {
        Err(CcgError::NotConverged(Box::new(solution)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn zero_budgets_take_one_inner_iteration() {
        let case = bundled::toy3();
        let plan = ExpansionPlan::empty(&case);
        let out = inner_loop(&case, &plan, &CcgConfig::default()).unwrap();
        assert_eq!(out.iterations.len(), 1);
        assert_eq!(out.upper, out.lower);
        let nominal = solve_operational(&case, &plan, &DeviationVector::nominal(&case), &FormulationOptions::default(), &SolverConfig::default())
            .unwrap();
        assert!((out.upper - nominal.cost).abs() < 1e-12);
    }

    #[test]
    fn toy2_demand_budget_converges() {
        let case = bundled::toy2().with_budgets(1, 0, 0).unwrap();
        let sol = solve_robust_tnep(&case, &CcgConfig::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.gap() <= 1e-6);
        assert!(sol.worst_case_u.demand[0]);
        sol.log.check_bounds().unwrap();
        assert!(sol.plan.validate(&case).is_ok());
    }

    #[test]
    fn inner_loop_brackets_its_iterates() {
        let case = bundled::toy3().with_budgets(2, 1, 1).unwrap();
        let plan = ExpansionPlan::from_entries(&case, &[(1, 3, 1)], &[(3, 1)]).unwrap();
        let out = inner_loop(&case, &plan, &CcgConfig::default()).unwrap();
        assert!(out.converged);
        for it in &out.iterations {
            assert!(it.cost <= it.upper + 1e-6);
        }
    }
}
