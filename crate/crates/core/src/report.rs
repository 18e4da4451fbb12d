//! Result documents written by the command-line tool.

use serde::{Deserialize, Serialize};

use crate::case::PlanningCase;
use crate::ccg::RobustSolution;
use crate::uncertainty::DeviationVector;

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineEntry {
    pub corridor: String,
    pub new_circuits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageEntry {
    pub site: String,
    pub bus: usize,
    pub units: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub outer: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub capital_cost: f64,
    pub inner_iterations: usize,
    pub next_u: String,
    pub seconds: f64,
}

/// Outcome of one robust solve. Money in 10³ €, bounds in M€.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub case: String,
    pub gamma_demand: usize,
    pub gamma_conventional: usize,
    pub gamma_wind: usize,
    pub investment_budget: f64,
    pub relax_modes: bool,
    pub lines_built: Vec<LineEntry>,
    pub storage_built: Vec<StorageEntry>,
    pub capital_cost: f64,
    pub annual_investment: f64,
    pub worst_case_operating_cost: f64,
    pub total_annual_cost: f64,
    pub worst_case_u: DeviationVector,
    pub worst_case_label: String,
    pub outer_iterations: usize,
    pub inner_iterations: Vec<usize>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub converged: bool,
    pub wall_time_seconds: f64,
    pub iterations: Vec<IterationRecord>,
}

impl ResultDocument {
    pub fn new(case: &PlanningCase, sol: &RobustSolution, relax_modes: bool) -> Self {
        let lines_built = sol
            .plan
            .line_entries(case)
            .into_iter()
            .map(|(a, b, n)| LineEntry { corridor: format!("{a}-{b}"), new_circuits: n })
            .collect();
        let storage_built = case
            .storage_units
            .iter()
            .zip(&sol.plan.storage_built)
            .filter(|(_, &n)| n > 0)
            .map(|(s, &n)| StorageEntry { site: s.id.clone(), bus: s.bus, units: n })
            .collect();
        ResultDocument {
            case: case.name.clone(),
            gamma_demand: case.uncertainty.gamma_demand,
            gamma_conventional: case.uncertainty.gamma_conventional,
            gamma_wind: case.uncertainty.gamma_wind,
            investment_budget: case.economics.investment_budget,
            relax_modes,
            lines_built,
            storage_built,
            capital_cost: round1(sol.capital_cost),
            annual_investment: round1(sol.annual_investment),
            worst_case_operating_cost: round1(sol.worst_case_operating_cost),
            total_annual_cost: round1(sol.total_annual_cost),
            worst_case_u: sol.worst_case_u.clone(),
            worst_case_label: sol.worst_case_u.label(),
            outer_iterations: sol.log.outer.len(),
            inner_iterations: sol.log.inner_iterations(),
            lower_bound: sol.lower_bound,
            upper_bound: sol.upper_bound,
            converged: sol.converged,
            wall_time_seconds: sol.seconds,
            iterations: sol
                .log
                .outer
                .iter()
                .map(|o| IterationRecord {
                    outer: o.index,
                    lower_bound: o.lower,
                    upper_bound: o.upper,
                    capital_cost: round1(o.capital_cost),
                    inner_iterations: o.inner.len(),
                    next_u: o.next_u.label(),
                    seconds: o.seconds,
                })
                .collect(),
        }
    }

    /// Copy with every timing field zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut d = self.clone();
        d.wall_time_seconds = 0.0;
        for it in &mut d.iterations {
            it.seconds = 0.0;
        }
        d
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_row(&self) -> ResultRow {
        let join = |v: Vec<String>| v.join(";");
        ResultRow {
            case: self.case.clone(),
            gamma_demand: self.gamma_demand,
            gamma_conventional: self.gamma_conventional,
            gamma_wind: self.gamma_wind,
            investment_budget: self.investment_budget,
            lines_built: join(self.lines_built.iter().map(|l| format!("{}:{}", l.corridor, l.new_circuits)).collect()),
            storage_built: join(self.storage_built.iter().map(|s| format!("{}@{}:{}", s.site, s.bus, s.units)).collect()),
            capital_cost: self.capital_cost,
            total_annual_cost: self.total_annual_cost,
            worst_case_u: self.worst_case_label.clone(),
            outer_iterations: self.outer_iterations,
            inner_iterations: join(self.inner_iterations.iter().map(|n| n.to_string()).collect()),
            converged: self.converged,
            wall_time_seconds: self.wall_time_seconds,
        }
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&[self.to_row()])
    }
}

/// Flat, one-line form of a [`ResultDocument`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub case: String,
    pub gamma_demand: usize,
    pub gamma_conventional: usize,
    pub gamma_wind: usize,
    pub investment_budget: f64,
    pub lines_built: String,
    pub storage_built: String,
    pub capital_cost: f64,
    pub total_annual_cost: f64,
    pub worst_case_u: String,
    pub outer_iterations: usize,
    pub inner_iterations: String,
    pub converged: bool,
    pub wall_time_seconds: f64,
}

/// One point of a budget or representative-day sweep; failures keep the row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub capital_cost: Option<f64>,
    pub total_annual_cost: Option<f64>,
    pub outer_iterations: Option<usize>,
    pub wall_time_seconds: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn from_outcome(axis: &str, value: String, outcome: &Result<RobustSolution, String>, seconds: f64) -> Self {
        match outcome {
            Ok(s) => SweepRow {
                axis: axis.into(),
                value,
                capital_cost: Some(round1(s.capital_cost)),
                total_annual_cost: Some(round1(s.total_annual_cost)),
                outer_iterations: Some(s.log.outer.len()),
                wall_time_seconds: seconds,
                error: None,
            },
            Err(e) => SweepRow {
                axis: axis.into(),
                value,
                capital_cost: None,
                total_annual_cost: None,
                outer_iterations: None,
                wall_time_seconds: seconds,
                error: Some(e.clone()),
            },
        }
    }
}

pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn rows_from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::ccg::IterationLog;
    use crate::plan::ExpansionPlan;

    fn sample() -> ResultDocument {
        let case = bundled::garver();
        let plan = ExpansionPlan::from_entries(&case, &[(2, 3, 2), (3, 5, 2), (4, 6, 2)], &[(6, 2)]).unwrap();
        let sol = RobustSolution {
            plan,
            worst_case_u: DeviationVector::nominal(&case),
            capital_cost: 47_031.2,
            annual_investment: 5_173.432,
            worst_case_operating_cost: 1000.0,
            total_annual_cost: 6_173.432,
            lower_bound: 6.173432,
            upper_bound: 6.173432,
            converged: true,
            log: IterationLog::default(),
            seconds: 1.5,
        };
        ResultDocument::new(&case, &sol, false)
    }

    #[test]
    fn json_round_trip() {
        let doc = sample();
        assert_eq!(ResultDocument::from_json(&doc.to_json()).unwrap(), doc);
        assert_eq!(doc.storage_built, vec![StorageEntry { site: "es6".into(), bus: 6, units: 2 }]);
        assert_eq!(doc.total_annual_cost, 6_173.4);
    }

    #[test]
    fn csv_round_trip() {
        let doc = sample();
        let rows: Vec<ResultRow> = rows_from_csv(&doc.to_csv()).unwrap();
        assert_eq!(rows, vec![doc.to_row()]);
        assert_eq!(rows[0].lines_built, "2-3:2;3-5:2;4-6:2");
    }

    #[test]
    fn sweep_rows_keep_failures() {
        let rows = vec![
            SweepRow::from_outcome("K", "3".into(), &Err("boom".into()), 0.1),
            SweepRow { axis: "K".into(), value: "4".into(), capital_cost: Some(1.0), total_annual_cost: Some(2.0), outer_iterations: Some(1), wall_time_seconds: 0.2, error: None },
        ];
        let back: Vec<SweepRow> = rows_from_csv(&rows_to_csv(&rows)).unwrap();
        assert_eq!(back, rows);
    }
}
