//! First-stage decisions and their capital accounting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::{EconomicParams, PlanningCase};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("unknown corridor {0}-{1}")]
    UnknownCorridor(usize, usize),
    #[error("no candidate storage site at bus {0}")]
    UnknownSite(usize),
    #[error("plan has {got} corridor entries, case has {expected}")]
    CorridorCount { got: usize, expected: usize },
    #[error("plan has {got} storage entries, case has {expected}")]
    StorageCount { got: usize, expected: usize },
    #[error("corridor {0}: existing plus new circuits exceed the corridor maximum")]
    TooManyCircuits(String),
    #[error("storage `{0}`: more units than can be built")]
    TooManyUnits(String),
    #[error("existing storage `{0}` cannot be built")]
    ExistingStorageBuilt(String),
    #[error("capital cost {cost:.1} exceeds the investment budget {budget:.1}")]
    OverBudget { cost: f64, budget: f64 },
}

/// New circuits per corridor and new units per storage record (both in case order).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpansionPlan {
    pub lines_built: Vec<u32>,
    pub storage_built: Vec<u32>,
}

impl ExpansionPlan {
    pub fn empty(case: &PlanningCase) -> Self {
        ExpansionPlan {
            lines_built: vec![0; case.corridors.len()],
            storage_built: vec![0; case.storage_units.len()],
        }
    }

    /// Builds a plan from `(from, to, count)` line entries and `(bus, count)` storage entries.
    pub fn from_entries(
        case: &PlanningCase,
        lines: &[(usize, usize, u32)],
        storage: &[(usize, u32)],
    ) -> Result<Self, PlanError> {
        let mut plan = Self::empty(case);
        for &(a, b, n) in lines {
            let c = case.corridor_index(a, b).ok_or(PlanError::UnknownCorridor(a, b))?;
            plan.lines_built[c] += n;
        }
        for &(bus, n) in storage {
            let s = case.candidate_storage_at(bus).ok_or(PlanError::UnknownSite(bus))?;
            plan.storage_built[s] += n;
        }
        Ok(plan)
    }

    pub fn is_empty(&self) -> bool {
        self.lines_built.iter().chain(&self.storage_built).all(|&n| n == 0)
    }

    pub fn total_storage_units(&self) -> u32 {
        self.storage_built.iter().sum()
    }

    /// Circuits in service on corridor `c` (existing plus new).
    pub fn circuits(&self, case: &PlanningCase, c: usize) -> u32 {
        case.corridors[c].existing_count + self.lines_built[c]
    }

    fn check_shape(&self, case: &PlanningCase) -> Result<(), PlanError> {
        if self.lines_built.len() != case.corridors.len() {
            return Err(PlanError::CorridorCount { got: self.lines_built.len(), expected: case.corridors.len() });
        }
        if self.storage_built.len() != case.storage_units.len() {
            return Err(PlanError::StorageCount { got: self.storage_built.len(), expected: case.storage_units.len() });
        }
        Ok(())
    }

    /// Structural limits and the investment budget.
    pub fn validate(&self, case: &PlanningCase) -> Result<(), PlanError> {
        self.check_shape(case)?;
        for (c, &n) in case.corridors.iter().zip(&self.lines_built) {
            if c.existing_count + n > c.max_total_count {
                return Err(PlanError::TooManyCircuits(c.label()));
            }
        }
        for (s, &n) in case.storage_units.iter().zip(&self.storage_built) {
            if !s.is_candidate() && n > 0 {
                return Err(PlanError::ExistingStorageBuilt(s.id.clone()));
            }
            if n > s.max_buildable {
                return Err(PlanError::TooManyUnits(s.id.clone()));
            }
        }
        let cost = plan_capital_cost(self, case)?;
        if cost.over_budget {
            return Err(PlanError::OverBudget { cost: cost.total, budget: case.economics.investment_budget });
        }
        Ok(())
    }

    /// `(from, to, count)` for corridors with new circuits.
    pub fn line_entries(&self, case: &PlanningCase) -> Vec<(usize, usize, u32)> {
        case.corridors
            .iter()
            .zip(&self.lines_built)
            .filter(|(_, &n)| n > 0)
            .map(|(c, &n)| (c.from_bus, c.to_bus, n))
            .collect()
    }

    /// `(bus, count)` for storage sites with new units.
    pub fn storage_entries(&self, case: &PlanningCase) -> Vec<(usize, u32)> {
        case.storage_units
            .iter()
            .zip(&self.storage_built)
            .filter(|(_, &n)| n > 0)
            .map(|(s, &n)| (s.bus, n))
            .collect()
    }
}

impl std::ops::Add for &ExpansionPlan {
    type Output = ExpansionPlan;
    fn add(self, rhs: &ExpansionPlan) -> ExpansionPlan {
        let zip = |a: &[u32], b: &[u32]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        ExpansionPlan {
            lines_built: zip(&self.lines_built, &rhs.lines_built),
            storage_built: zip(&self.storage_built, &rhs.storage_built),
        }
    }
}

/// Annual payment for a capital outlay (same currency unit as `capital`).
pub fn annualize(capital: f64, econ: &EconomicParams) -> f64 {
    capital * econ.amortization_rate
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapitalCost {
    /// 10³ €
    pub total: f64,
    pub over_budget: bool,
}

/// Capital cost of new circuits and new storage units. Existing assets never count.
pub fn plan_capital_cost(plan: &ExpansionPlan, case: &PlanningCase) -> Result<CapitalCost, PlanError> {
    plan.check_shape(case)?;
    let lines: f64 = case.corridors.iter().zip(&plan.lines_built).map(|(c, &n)| n as f64 * c.circuit_capital_cost).sum();
    let storage: f64 = case
        .storage_units
        .iter()
        .zip(&plan.storage_built)
        .filter(|(s, _)| s.is_candidate())
        .map(|(s, &n)| n as f64 * s.unit_capital_cost)
        .sum();
    let total = lines + storage;
    // Small slack so budgets hit exactly by decimal data are not flagged.
    let over_budget = total > case.economics.investment_budget * (1.0 + 1e-12) + 1e-9;
    Ok(CapitalCost { total, over_budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn annualize_examples() {
        let econ = bundled::garver().economics;
        assert!((annualize(10_000.0, &econ) - 1_100.0).abs() < 1e-9);
        assert_eq!(annualize(0.0, &econ), 0.0);
        // 3861.60 * 0.11 = 424.776
        assert!((annualize(3_861.60, &econ) - 424.776).abs() < 1e-9);
    }

    #[test]
    fn empty_plan_costs_nothing() {
        let case = bundled::garver();
        let c = plan_capital_cost(&ExpansionPlan::empty(&case), &case).unwrap();
        assert_eq!(c.total, 0.0);
        assert!(!c.over_budget);
    }

    #[test]
    fn unknown_entries_are_rejected() {
        let case = bundled::garver();
        assert_eq!(ExpansionPlan::from_entries(&case, &[(1, 7, 1)], &[]), Err(PlanError::UnknownCorridor(1, 7)));
        assert_eq!(ExpansionPlan::from_entries(&case, &[], &[(2, 1)]), Err(PlanError::UnknownSite(2)));
        let bad = ExpansionPlan { lines_built: vec![0; 3], storage_built: vec![0; 2] };
        assert!(matches!(plan_capital_cost(&bad, &case), Err(PlanError::CorridorCount { .. })));
    }

    #[test]
    fn corridor_limits_are_enforced() {
        let case = bundled::garver();
        // 1-2 already has one circuit; three more would make four.
        let plan = ExpansionPlan::from_entries(&case, &[(1, 2, 3)], &[]).unwrap();
        assert!(matches!(plan.validate(&case), Err(PlanError::TooManyCircuits(_))));
    }

    #[test]
    fn over_budget_is_flagged() {
        let case = bundled::garver();
        let plan = ExpansionPlan::from_entries(&case, &[(1, 6, 3), (3, 4, 3)], &[(6, 3)]).unwrap();
        let c = plan_capital_cost(&plan, &case).unwrap();
        assert!(c.over_budget);
        assert!(matches!(plan.validate(&case), Err(PlanError::OverBudget { .. })));
    }
}
