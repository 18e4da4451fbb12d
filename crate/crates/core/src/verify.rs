//! Cross-checks of the decomposition against the extensive-form oracle.

use std::fmt;

use serde::Serialize;

use crate::bundled;
use crate::case::PlanningCase;
use crate::ccg::{solve_robust_tnep, CcgConfig, CcgError};
use crate::oracle::{compare_relaxation, extensive_form, OracleConfig};
use crate::plan::ExpansionPlan;
use crate::uncertainty::DeviationVector;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Instance names understood by [`verify_instance`].
pub const INSTANCES: [&str; 5] = ["toy2", "toy3", "garver-reduced", "garver-zero", "relaxed-demo"];

/// `(Γ^D, Γ^G, Γ^W, investment budget)`
pub type BudgetPoint = (usize, usize, usize, f64);

/// Budget combinations checked for each instance.
pub fn budget_points(instance: &str) -> Vec<BudgetPoint> {
    match instance {
        "toy2" => {
            let gammas = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)];
            [1000.0, 500.0].iter().flat_map(|&b| gammas.iter().map(move |&(d, g, w)| (d, g, w, b))).collect()
        }
        "toy3" => vec![(0, 0, 0, 1500.0), (1, 0, 0, 1500.0), (0, 1, 0, 1500.0), (0, 0, 1, 1500.0), (1, 1, 1, 1500.0), (2, 2, 1, 1500.0)],
        "garver-reduced" => [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 2, 0), (0, 1, 1)]
            .iter()
            .map(|&(d, g, w)| (d, g, w, 60_000.0))
            .collect(),
        "garver-zero" => vec![(0, 0, 0, 60_000.0)],
        _ => Vec::new(),
    }
}

fn base_case(instance: &str) -> Option<PlanningCase> {
    match instance {
        "garver-zero" => Some(bundled::garver()),
        other => bundled::by_name(other),
    }
}

pub fn case_at(base: &PlanningCase, point: BudgetPoint) -> Result<PlanningCase, String> {
    let mut case = base.with_budgets(point.0, point.1, point.2).map_err(|e| e.to_string())?;
    case.economics.investment_budget = point.3;
    Ok(case)
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub instance: String,
    pub point: BudgetPoint,
    /// Objectives in M€/year.
    pub decomposition: Option<f64>,
    pub oracle: Option<f64>,
    pub delta: Option<f64>,
    pub outer_iterations: Option<usize>,
    pub error: Option<String>,
}

impl Comparison {
    pub fn passed(&self, tol: f64) -> bool {
        self.error.is_none() && self.delta.is_some_and(|d| d <= tol)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RelaxationSummary {
    pub instance: String,
    pub binary_cost: f64,
    pub relaxed_cost: f64,
    pub simultaneous: Vec<(String, usize, usize, f64, f64)>,
    pub binary_simultaneous: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub comparisons: Vec<Comparison>,
    pub relaxations: Vec<RelaxationSummary>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(|c| c.passed(self.tolerance))
            && self.relaxations.iter().all(|r| r.binary_simultaneous == 0 && !r.simultaneous.is_empty())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.9}"));
        for c in &self.comparisons {
            let (d, g, w, b) = c.point;
            writeln!(
                f,
                "{:<15} G=({d},{g},{w}) budget={b:<8} ccg={} oracle={} delta={} {}",
                c.instance,
                show(c.decomposition),
                show(c.oracle),
                c.delta.map_or("-".to_string(), |v| format!("{v:.2e}")),
                match &c.error {
                    Some(e) => format!("ERROR {e}"),
                    None if c.passed(self.tolerance) => "ok".into(),
                    None => "MISMATCH".into(),
                }
            )?;
        }
        for r in &self.relaxations {
            writeln!(f, "{}: binary cost {:.9}, relaxed cost {:.9}", r.instance, r.binary_cost, r.relaxed_cost)?;
            writeln!(f, "  simultaneous charge/discharge hours in relaxed dispatch: {}", r.simultaneous.len())?;
            for (id, d, t, pc, pd) in &r.simultaneous {
                writeln!(f, "    {id} day {} hour {}: charge {pc:.3} MW, discharge {pd:.3} MW", d + 1, t + 1)?;
            }
            writeln!(f, "  simultaneous hours with mode binaries: {}", r.binary_simultaneous)?;
        }
        Ok(())
    }
}

/// Runs the decomposition and the oracle at one budget point.
pub fn compare_point(instance: &str, case: &PlanningCase, point: BudgetPoint, ccg: &CcgConfig, oracle: &OracleConfig) -> Comparison {
    let mut out = Comparison { instance: instance.into(), point, decomposition: None, oracle: None, delta: None, outer_iterations: None, error: None };
    match solve_robust_tnep(case, ccg) {
        Ok(s) => {
            out.decomposition = Some(s.upper_bound);
            out.outer_iterations = Some(s.log.outer.len());
        }
        Err(CcgError::NotConverged(s)) => {
            out.decomposition = Some(s.upper_bound);
            out.error = Some(format!("not converged, gap {:.3e}", s.gap()));
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    match extensive_form(case, oracle) {
        Ok(s) => out.oracle = Some(s.upper_bound),
        Err(e) => out.error = Some(e.to_string()),
    }
    if let (Some(a), Some(b)) = (out.decomposition, out.oracle) {
        out.delta = Some((a - b).abs());
    }
    out
}

pub fn verify_instance(instance: &str, ccg: &CcgConfig, oracle: &OracleConfig) -> Result<VerifyReport, String> {
    let base = base_case(instance).ok_or_else(|| format!("unknown instance `{instance}` (expected one of {})", INSTANCES.join(", ")))?;
    let mut report = VerifyReport { tolerance: DEFAULT_TOLERANCE, ..Default::default() };
    if instance == "relaxed-demo" {
        let plan = ExpansionPlan::empty(&base);
        let r = compare_relaxation(&base, &plan, &DeviationVector::nominal(&base), oracle).map_err(|e| e.to_string())?;
        report.relaxations.push(RelaxationSummary {
            instance: instance.into(),
            binary_cost: r.binary_cost,
            relaxed_cost: r.relaxed_cost,
            simultaneous: r.simultaneous,
            binary_simultaneous: r.binary_simultaneous,
        });
        return Ok(report);
    }
    for point in budget_points(instance) {
        let c = match case_at(&base, point) {
            Ok(case) => compare_point(instance, &case, point, ccg, oracle),
            Err(e) => Comparison { instance: instance.into(), point, decomposition: None, oracle: None, delta: None, outer_iterations: None, error: Some(e) },
        };
        report.comparisons.push(c);
    }
    Ok(report)
}
