//! Cardinality-constrained uncertainty set over demands, conventional units and
//! wind units.
//!
//! A deviation flag pushes one parameter to its adversarial bound for the whole
//! planning horizon: a flagged demand rises by `demand_deviation`, a flagged
//! unit loses `gen_deviation` (or `wind_deviation`) of its nominal capacity.
//! Each group carries a budget `Γ` on the number of flags.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::{CaseError, PlanningCase};
use crate::milp::{LinExpr, ModelBuilder, RowId, RowSense, VarId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintySpec {
    #[serde(default)]
    pub gamma_demand: usize,
    #[serde(default)]
    pub gamma_conventional: usize,
    #[serde(default)]
    pub gamma_wind: usize,
    /// Upward fraction for flagged demands.
    #[serde(default = "default_demand_deviation")]
    pub demand_deviation: f64,
    /// Downward fraction for flagged conventional units.
    #[serde(default = "default_gen_deviation")]
    pub gen_deviation: f64,
    /// Downward fraction for flagged wind units.
    #[serde(default = "default_gen_deviation")]
    pub wind_deviation: f64,
}

fn default_demand_deviation() -> f64 {
    0.20
}

fn default_gen_deviation() -> f64 {
    0.50
}

impl Default for UncertaintySpec {
    fn default() -> Self {
        UncertaintySpec {
            gamma_demand: 0,
            gamma_conventional: 0,
            gamma_wind: 0,
            demand_deviation: default_demand_deviation(),
            gen_deviation: default_gen_deviation(),
            wind_deviation: default_gen_deviation(),
        }
    }
}

impl UncertaintySpec {
    pub fn validate_for(&self, case: &PlanningCase) -> Result<(), CaseError> {
        let (nd, ng, nw) = group_sizes(case);
        let check = |name: &str, gamma: usize, n: usize| {
            if gamma > n {
                Err(CaseError::Validation(format!("{name} budget {gamma} exceeds group size {n}")))
            } else {
                Ok(())
            }
        };
        check("demand", self.gamma_demand, nd)?;
        check("conventional", self.gamma_conventional, ng)?;
        check("wind", self.gamma_wind, nw)?;
        for (name, v) in [
            ("demand_deviation", self.demand_deviation),
            ("gen_deviation", self.gen_deviation),
            ("wind_deviation", self.wind_deviation),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CaseError::Validation(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// `(#demands, #conventional units, #wind units)`
pub fn group_sizes(case: &PlanningCase) -> (usize, usize, usize) {
    (case.demands.len(), case.conventional_units().len(), case.wind_units().len())
}

#[derive(Debug, Error, PartialEq)]
pub enum UncertaintyError {
    #[error("{group} flags: {got} set, budget is {budget}")]
    BudgetExceeded { group: &'static str, got: usize, budget: usize },
    #[error("{group} flags: expected {expected} entries, got {got}")]
    Shape { group: &'static str, expected: usize, got: usize },
}

/// Binary realization of the uncertainty: one flag per uncertain parameter.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeviationVector {
    pub demand: Vec<bool>,
    pub conventional: Vec<bool>,
    pub wind: Vec<bool>,
}

impl DeviationVector {
    /// Nominal realization (no deviations).
    pub fn nominal(case: &PlanningCase) -> Self {
        let (nd, ng, nw) = group_sizes(case);
        DeviationVector { demand: vec![false; nd], conventional: vec![false; ng], wind: vec![false; nw] }
    }

    pub fn flags(&self) -> impl Iterator<Item = bool> + '_ {
        self.demand.iter().chain(&self.conventional).chain(&self.wind).copied()
    }

    pub fn count(&self) -> usize {
        self.flags().filter(|&f| f).count()
    }

    /// Flags as 0/1 values in demand, conventional, wind order.
    pub fn as_values(&self) -> Vec<f64> {
        self.flags().map(|f| if f { 1.0 } else { 0.0 }).collect()
    }

    pub fn check(&self, case: &PlanningCase) -> Result<(), UncertaintyError> {
        let spec = &case.uncertainty;
        let (nd, ng, nw) = group_sizes(case);
        for (group, flags, n, budget) in [
            ("demand", &self.demand, nd, spec.gamma_demand),
            ("conventional", &self.conventional, ng, spec.gamma_conventional),
            ("wind", &self.wind, nw, spec.gamma_wind),
        ] {
            if flags.len() != n {
                return Err(UncertaintyError::Shape { group, expected: n, got: flags.len() });
            }
            let got = flags.iter().filter(|&&f| f).count();
            if got > budget {
                return Err(UncertaintyError::BudgetExceeded { group, got, budget });
            }
        }
        Ok(())
    }

    /// Compact `D:01000 G:000 W:1` form used in logs and reports.
    pub fn label(&self) -> String {
        let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        format!("D:{} G:{} W:{}", bits(&self.demand), bits(&self.conventional), bits(&self.wind))
    }
}

/// Parameter values under one realization; hourly profiles still apply on top.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedParameters {
    /// MW, per demand
    pub demand_level: Vec<f64>,
    /// MW, per generator (case order, wind included)
    pub capacity: Vec<f64>,
}

pub fn realize(case: &PlanningCase, u: &DeviationVector) -> Result<RealizedParameters, UncertaintyError> {
    u.check(case)?;
    let spec = &case.uncertainty;
    let demand_level = case
        .demands
        .iter()
        .zip(&u.demand)
        .map(|(d, &f)| d.nominal_level * if f { 1.0 + spec.demand_deviation } else { 1.0 })
        .collect();
    let mut capacity: Vec<f64> = case.generators.iter().map(|g| g.nominal_capacity).collect();
    for (&g, &f) in case.conventional_units().iter().zip(&u.conventional) {
        if f {
            capacity[g] *= 1.0 - spec.gen_deviation;
        }
    }
    for (&g, &f) in case.wind_units().iter().zip(&u.wind) {
        if f {
            capacity[g] *= 1.0 - spec.wind_deviation;
        }
    }
    Ok(RealizedParameters { demand_level, capacity })
}

/// Model variables standing for the deviation flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UncertaintyVars {
    pub demand: Vec<VarId>,
    pub conventional: Vec<VarId>,
    pub wind: Vec<VarId>,
}

impl UncertaintyVars {
    /// Binary flags, one per uncertain parameter of `case`.
    pub fn add_binaries(builder: &mut ModelBuilder, case: &PlanningCase) -> Self {
        let mut out = UncertaintyVars::default();
        for d in &case.demands {
            out.demand.push(builder.add_binary(format!("u_dem[{}]", d.id)));
        }
        for g in case.conventional_units() {
            out.conventional.push(builder.add_binary(format!("u_conv[{}]", case.generators[g].id)));
        }
        for g in case.wind_units() {
            out.wind.push(builder.add_binary(format!("u_wind[{}]", case.generators[g].id)));
        }
        out
    }

    /// Continuous `[0, 1]` stand-ins, used as symbolic right-hand-side parameters.
    pub fn add_parameters(builder: &mut ModelBuilder, case: &PlanningCase) -> Self {
        let mut out = UncertaintyVars::default();
        for d in &case.demands {
            out.demand.push(builder.add_continuous(format!("p_dem[{}]", d.id), 0.0, 1.0));
        }
        for g in case.conventional_units() {
            out.conventional.push(builder.add_continuous(format!("p_conv[{}]", case.generators[g].id), 0.0, 1.0));
        }
        for g in case.wind_units() {
            out.wind.push(builder.add_continuous(format!("p_wind[{}]", case.generators[g].id), 0.0, 1.0));
        }
        out
    }

    pub fn all(&self) -> Vec<VarId> {
        self.demand.iter().chain(&self.conventional).chain(&self.wind).copied().collect()
    }

    pub fn decode(&self, values: &[f64]) -> DeviationVector {
        let get = |vs: &[VarId]| vs.iter().map(|v| values[v.index()] > 0.5).collect();
        DeviationVector { demand: get(&self.demand), conventional: get(&self.conventional), wind: get(&self.wind) }
    }
}

/// Adds `Σu ≤ Γ` for each of the three groups.
pub fn emit_budget_constraints(
    spec: &UncertaintySpec,
    case: &PlanningCase,
    builder: &mut ModelBuilder,
    vars: &UncertaintyVars,
) -> Result<[RowId; 3], UncertaintyError> {
    let (nd, ng, nw) = group_sizes(case);
    let mut rows = Vec::with_capacity(3);
    for (group, vs, n, gamma) in [
        ("demand", &vars.demand, nd, spec.gamma_demand),
        ("conventional", &vars.conventional, ng, spec.gamma_conventional),
        ("wind", &vars.wind, nw, spec.gamma_wind),
    ] {
        if vs.len() != n {
            return Err(UncertaintyError::Shape { group, expected: n, got: vs.len() });
        }
        let mut e = LinExpr::new();
        for &v in vs {
            e.add_term(v, 1.0);
        }
        rows.push(builder.add_constraint(format!("budget[{group}]"), e, RowSense::Le, gamma as f64));
    }
    Ok([rows[0], rows[1], rows[2]])
}

fn subsets_up_to(n: usize, budget: usize) -> Vec<Vec<bool>> {
    (0u64..(1u64 << n))
        .filter(|m| m.count_ones() as usize <= budget)
        .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Every binary vector satisfying the three budget rows.
pub fn enumerate_vertices(spec: &UncertaintySpec, case: &PlanningCase) -> Vec<DeviationVector> {
    let (nd, ng, nw) = group_sizes(case);
    let ds = subsets_up_to(nd, spec.gamma_demand);
    let gs = subsets_up_to(ng, spec.gamma_conventional);
    let ws = subsets_up_to(nw, spec.gamma_wind);
    let mut out = Vec::with_capacity(ds.len() * gs.len() * ws.len());
    for d in &ds {
        for g in &gs {
            for w in &ws {
                out.push(DeviationVector { demand: d.clone(), conventional: g.clone(), wind: w.clone() });
            }
        }
    }
    out
}

/// `Π_groups Σ_{k≤Γ} C(n, k)` without enumerating.
pub fn vertex_count(spec: &UncertaintySpec, case: &PlanningCase) -> u128 {
    fn partial(n: usize, budget: usize) -> u128 {
        let mut c: u128 = 1;
        let mut total = 0;
        for k in 0..=budget.min(n) {
            if k > 0 {
                c = c * (n - k + 1) as u128 / k as u128;
            }
            total += c;
        }
        total
    }
    let (nd, ng, nw) = group_sizes(case);
    partial(nd, spec.gamma_demand) * partial(ng, spec.gamma_conventional) * partial(nw, spec.gamma_wind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::milp::{solve, ObjectiveSense, SolverConfig};
    use std::collections::HashSet;

    #[test]
    fn nominal_realization_is_identity() {
        let case = bundled::garver();
        let r = realize(&case, &DeviationVector::nominal(&case)).unwrap();
        assert_eq!(r.demand_level, case.demands.iter().map(|d| d.nominal_level).collect::<Vec<_>>());
        assert_eq!(r.capacity, case.generators.iter().map(|g| g.nominal_capacity).collect::<Vec<_>>());
    }

    #[test]
    fn flagged_demand_and_unit() {
        let case = bundled::garver().with_budgets(1, 1, 0).unwrap();
        let mut u = DeviationVector::nominal(&case);
        u.demand[0] = true;
        u.conventional[0] = true;
        let r = realize(&case, &u).unwrap();
        assert!((r.demand_level[0] - 120.0).abs() < 1e-12);
        assert!((r.capacity[0] - 75.0).abs() < 1e-12);
        assert_eq!(r.demand_level[1], 300.0);
    }

    #[test]
    fn budget_violation_is_rejected() {
        let case = bundled::garver();
        let mut u = DeviationVector::nominal(&case);
        u.demand[2] = true;
        assert_eq!(
            realize(&case, &u),
            Err(UncertaintyError::BudgetExceeded { group: "demand", got: 1, budget: 0 })
        );
    }

    #[test]
    fn vertex_counts() {
        let case = bundled::garver();
        let zero = enumerate_vertices(&case.uncertainty, &case);
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].count(), 0);
        let one = case.with_budgets(1, 0, 0).unwrap();
        assert_eq!(enumerate_vertices(&one.uncertainty, &one).len(), 6);
        let full = case.with_budgets(5, 3, 1).unwrap();
        let all = enumerate_vertices(&full.uncertainty, &full);
        assert_eq!(all.len(), 512);
        assert_eq!(vertex_count(&full.uncertainty, &full), 512);
        assert!(all.iter().any(|u| u.count() == 9));
    }

    #[test]
    fn budget_rows_force_zero() {
        let case = bundled::garver();
        let mut b = ModelBuilder::new(ObjectiveSense::Maximize);
        let vars = UncertaintyVars::add_binaries(&mut b, &case);
        emit_budget_constraints(&case.uncertainty, &case, &mut b, &vars).unwrap();
        let mut obj = LinExpr::new();
        for v in vars.all() {
            obj.add_term(v, 1.0);
        }
        b.set_objective(ObjectiveSense::Maximize, obj);
        let r = solve(&b, &SolverConfig::default()).unwrap();
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn budget_row_shape() {
        let case = bundled::garver().with_budgets(2, 0, 0).unwrap();
        let mut b = ModelBuilder::default();
        let vars = UncertaintyVars::add_binaries(&mut b, &case);
        let rows = emit_budget_constraints(&case.uncertainty, &case, &mut b, &vars).unwrap();
        let row = &b.constraints()[rows[0].index()];
        assert_eq!(row.terms.len(), 5);
        assert_eq!(row.rhs, 2.0);
        let mut short = vars.clone();
        short.demand.pop();
        assert!(emit_budget_constraints(&case.uncertainty, &case, &mut b, &short).is_err());
    }

    proptest::proptest! {
        #[test]
        fn enumeration_is_complete_and_distinct(gd in 0usize..=5, gg in 0usize..=3, gw in 0usize..=1) {
            let case = bundled::garver().with_budgets(gd, gg, gw).unwrap();
            let all = enumerate_vertices(&case.uncertainty, &case);
            proptest::prop_assert_eq!(all.len() as u128, vertex_count(&case.uncertainty, &case));
            let distinct: HashSet<_> = all.iter().collect();
            proptest::prop_assert_eq!(distinct.len(), all.len());
            for u in &all {
                proptest::prop_assert!(realize(&case, u).is_ok());
            }
            if gd == 5 && gg == 3 && gw == 1 {
                proptest::prop_assert!(all.iter().any(|u| u.count() == 9));
            }
        }
    }
}
