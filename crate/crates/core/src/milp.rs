//! Solver-agnostic model building and the single entry point to the MILP backend.
//!
//! Models are assembled in a [`ModelBuilder`] as plain data (variables, rows,
//! objective). [`solve`] hands the data to HiGHS; nothing else in the crate
//! talks to the backend. [`extract_standard_form`] turns a purely continuous
//! model into the `{min bᵀy : Ey = r, Fy ≥ s}` shape used for symbolic
//! dualization.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::time::Instant;

use highs::{HighsModelStatus, RowProblem, Sense as HighsSense};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Handle to a variable inside one [`ModelBuilder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowId(pub(crate) usize);

impl RowId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn is_discrete(&self) -> bool {
        self.kind != VarKind::Continuous
    }

    pub fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

/// Affine expression `Σ coef·var + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: value }
    }

    pub fn term(var: VarId, coef: f64) -> Self {
        LinExpr { terms: vec![(var, coef)], constant: 0.0 }
    }

    pub fn add_term(&mut self, var: VarId, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((var, coef));
        }
        self
    }

    pub fn add_constant(&mut self, value: f64) -> &mut Self {
        self.constant += value;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(v, c) in &other.terms {
            self.add_term(v, c * scale);
        }
        self.constant += other.constant * scale;
        self
    }

    /// Merges duplicate variables and drops zero coefficients.
    pub fn compact(&self) -> LinExpr {
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        LinExpr {
            terms: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>() + self.constant
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::term(v, 1.0)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_expr(&rhs, 1.0);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_expr(&rhs, -1.0);
        self
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        self.add_expr(rhs, 1.0);
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("row `{row}` references a variable that does not exist in this model")]
    UnknownVariable { row: String },
    #[error("coefficient in row `{row}` is not finite")]
    NonFiniteCoefficient { row: String },
    #[error("discrete variable `{0}` is not fixed; standard form requires a continuous model")]
    UnfixedDiscrete(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("solver backend rejected the model: {0}")]
    Backend(String),
    #[error("solver reported a numerical failure ({0})")]
    Numerical(String),
}

/// Variables, rows and objective of one optimization model.
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    vars: Vec<Variable>,
    rows: Vec<Constraint>,
    objective: LinExpr,
    sense: ObjectiveSense,
}

impl Default for ModelBuilder {
    fn default() -> Self {
        Self::new(ObjectiveSense::Minimize)
    }
}

impl ModelBuilder {
    pub fn new(sense: ObjectiveSense) -> Self {
        ModelBuilder { vars: Vec::new(), rows: Vec::new(), objective: LinExpr::new(), sense }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        self.vars.push(Variable { name: name.into(), kind, lower, upper });
        VarId(self.vars.len() - 1)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds `expr (sense) rhs`; the expression's constant is moved to the right-hand side.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinExpr,
        sense: RowSense,
        rhs: f64,
    ) -> RowId {
        let e = expr.compact();
        self.rows.push(Constraint { name: name.into(), terms: e.terms, sense, rhs: rhs - e.constant });
        RowId(self.rows.len() - 1)
    }

    pub fn set_objective(&mut self, sense: ObjectiveSense, objective: LinExpr) {
        self.sense = sense;
        self.objective = objective.compact();
    }

    pub fn fix_var(&mut self, var: VarId, value: f64) {
        let v = &mut self.vars[var.0];
        v.lower = value;
        v.upper = value;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.vars[var.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn sense(&self) -> ObjectiveSense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_discrete(&self) -> usize {
        self.vars.iter().filter(|v| v.is_discrete()).count()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper || v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(ModelError::InvalidBounds { name: v.name.clone(), lower: v.lower, upper: v.upper });
            }
        }
        let n = self.vars.len();
        for r in &self.rows {
            for &(v, c) in &r.terms {
                if v.0 >= n {
                    return Err(ModelError::UnknownVariable { row: r.name.clone() });
                }
                if !c.is_finite() {
                    return Err(ModelError::NonFiniteCoefficient { row: r.name.clone() });
                }
            }
            if r.rhs.is_nan() {
                return Err(ModelError::NonFiniteCoefficient { row: r.name.clone() });
            }
        }
        for &(v, c) in &self.objective.terms {
            if v.0 >= n {
                return Err(ModelError::UnknownVariable { row: "objective".into() });
            }
            if !c.is_finite() {
                return Err(ModelError::NonFiniteCoefficient { row: "objective".into() });
            }
        }
        Ok(())
    }
}

/// Backend settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Seconds per individual solve; `None` means unlimited.
    pub time_limit: Option<f64>,
    pub mip_rel_gap: f64,
    pub mip_abs_gap: f64,
    pub threads: u32,
    pub seed: i32,
    pub feasibility_tolerance: f64,
    pub integrality_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: None,
            mip_rel_gap: 1e-9,
            mip_abs_gap: 1e-9,
            threads: 1,
            seed: 0,
            feasibility_tolerance: 1e-9,
            integrality_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub seconds: f64,
    pub mip_gap: f64,
    pub num_vars: usize,
    pub num_rows: usize,
    pub num_discrete: usize,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    /// Primal values indexed by [`VarId::index`]; empty unless `status` is optimal.
    pub values: Vec<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    pub fn eval(&self, expr: &LinExpr) -> f64 {
        expr.evaluate(&self.values)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Limit => "limit",
        };
        f.write_str(s)
    }
}

fn bound_pair(lower: f64, upper: f64) -> (std::ops::Bound<f64>, std::ops::Bound<f64>) {
    use std::ops::Bound::*;
    let lo = if lower == f64::NEG_INFINITY { Unbounded } else { Included(lower) };
    let hi = if upper == f64::INFINITY { Unbounded } else { Included(upper) };
    (lo, hi)
}

/// Solves `model` with HiGHS.
pub fn solve(model: &ModelBuilder, config: &SolverConfig) -> Result<SolveResult, SolverError> {
    model.validate()?;
    let started = Instant::now();
    let mut pb = RowProblem::default();
    let mut cols = Vec::with_capacity(model.vars.len());
    let mut cost = vec![0.0; model.vars.len()];
    for &(v, c) in &model.objective.terms {
        cost[v.0] += c;
    }
    let has_discrete = model.vars.iter().any(|v| v.is_discrete());
    for (i, v) in model.vars.iter().enumerate() {
        let col = if v.is_discrete() {
            pb.add_integer_column(cost[i], bound_pair(v.lower, v.upper))
        } else if has_discrete {
            pb.add_column_with_integrality(cost[i], bound_pair(v.lower, v.upper), false)
        } else {
            pb.add_column(cost[i], bound_pair(v.lower, v.upper))
        };
        cols.push(col);
    }
    for r in &model.rows {
        let factors: Vec<_> = r.terms.iter().map(|&(v, c)| (cols[v.0], c)).collect();
        match r.sense {
            RowSense::Le => pb.add_row(..=r.rhs, factors),
            RowSense::Ge => pb.add_row(r.rhs.., factors),
            RowSense::Eq => pb.add_row(r.rhs..=r.rhs, factors),
        }
    }
    let sense = match model.sense {
        ObjectiveSense::Minimize => HighsSense::Minimise,
        ObjectiveSense::Maximize => HighsSense::Maximise,
    };
    let mut hm = pb
        .try_optimise(sense)
        .map_err(|s| SolverError::Backend(format!("{s:?}")))?;
    hm.make_quiet();
    set_option(&mut hm, "mip_rel_gap", config.mip_rel_gap)?;
    set_option(&mut hm, "mip_abs_gap", config.mip_abs_gap)?;
    set_option(&mut hm, "threads", config.threads.max(1) as i32)?;
    set_option(&mut hm, "random_seed", config.seed)?;
    set_option(&mut hm, "primal_feasibility_tolerance", config.feasibility_tolerance)?;
    set_option(&mut hm, "dual_feasibility_tolerance", config.feasibility_tolerance)?;
    set_option(&mut hm, "mip_feasibility_tolerance", config.integrality_tolerance)?;
    if let Some(t) = config.time_limit {
        set_option(&mut hm, "time_limit", t)?;
    }
    let solved = hm.try_solve().map_err(|s| SolverError::Backend(format!("{s:?}")))?;
    let hs = solved.status();
    let mut stats = SolveStats {
        seconds: 0.0,
        mip_gap: 0.0,
        num_vars: model.vars.len(),
        num_rows: model.rows.len(),
        num_discrete: model.num_discrete(),
    };
    let status = match hs {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
        HighsModelStatus::Infeasible => SolveStatus::Infeasible,
        HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Unbounded,
        HighsModelStatus::ReachedTimeLimit
        | HighsModelStatus::ReachedIterationLimit
        | HighsModelStatus::ReachedSolutionLimit
        | HighsModelStatus::ReachedMemoryLimit
        | HighsModelStatus::ReachedInterrupt
        | HighsModelStatus::ObjectiveBound
        | HighsModelStatus::ObjectiveTarget => SolveStatus::Limit,
        other => return Err(SolverError::Numerical(format!("{other:?}"))),
    };
    let (objective, values) = if status == SolveStatus::Optimal {
        let mut values = solved.get_solution().columns().to_vec();
        if hs == HighsModelStatus::ModelEmpty {
            values = model.vars.iter().map(|v| clamp_to_bounds(0.0, v)).collect();
        }
        for (val, var) in values.iter_mut().zip(&model.vars) {
            // HiGHS may return values just outside their bounds.
            *val = if var.is_discrete() { val.round() } else { clamp_to_bounds(*val, var) };
        }
        if has_discrete {
            stats.mip_gap = solved.mip_gap();
        }
        (model.objective.evaluate(&values), values)
    } else {
        (f64::NAN, Vec::new())
    };
    stats.seconds = started.elapsed().as_secs_f64();
    Ok(SolveResult { status, objective, values, stats })
}

fn set_option<V: highs::HighsOptionValue>(hm: &mut highs::Model, name: &str, value: V) -> Result<(), SolverError> {
    hm.try_set_option(name, value)
        .map_err(|e| SolverError::Backend(format!("option {name}: {e:?}")))
}

fn clamp_to_bounds(x: f64, v: &Variable) -> f64 {
    x.max(v.lower).min(v.upper)
}

/// A continuous model written as `min bᵀy + b0  s.t.  Ey = r(p),  Fy ≥ s(p)` with every
/// decision variable free. Each right-hand side is affine in the declared parameters:
/// `r(p) = r0 + Σ_k R_k p_k`.
#[derive(Clone, Debug, Default)]
pub struct StandardForm {
    /// Model variables kept as columns of `y`, in column order.
    pub columns: Vec<VarId>,
    /// Parameters moved to the right-hand side, in parameter order.
    pub params: Vec<VarId>,
    pub eq: Vec<StdRow>,
    pub ge: Vec<StdRow>,
    pub cost: Vec<f64>,
    pub cost_offset: f64,
}

/// One row: `Σ coef·y_col (=|≥) rhs + Σ param_coef·p`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StdRow {
    pub name: String,
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub param_coefs: Vec<(usize, f64)>,
}

impl StdRow {
    pub fn rhs_at(&self, params: &[f64]) -> f64 {
        self.rhs + self.param_coefs.iter().map(|&(k, c)| c * params[k]).sum::<f64>()
    }
}

impl StandardForm {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }
}

/// Standard form of a model with no free discrete variables (discrete ones must be fixed).
pub fn extract_standard_form(model: &ModelBuilder) -> Result<StandardForm, ModelError> {
    extract_parametric_form(model, &[])
}

/// Like [`extract_standard_form`], with `params` treated as symbolic right-hand-side parameters.
pub fn extract_parametric_form(model: &ModelBuilder, params: &[VarId]) -> Result<StandardForm, ModelError> {
    model.validate()?;
    let param_pos: BTreeMap<VarId, usize> = params.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut col_of = vec![usize::MAX; model.vars.len()];
    let mut fixed: Vec<Option<f64>> = vec![None; model.vars.len()];
    let mut columns = Vec::new();
    let param_set: HashSet<VarId> = params.iter().copied().collect();
    for (i, v) in model.vars.iter().enumerate() {
        let id = VarId(i);
        if param_set.contains(&id) {
            continue;
        }
        if v.is_discrete() {
            if !v.is_fixed() {
                return Err(ModelError::UnfixedDiscrete(v.name.clone()));
            }
            fixed[i] = Some(v.lower);
            continue;
        }
        col_of[i] = columns.len();
        columns.push(id);
    }
    let sign = match model.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; columns.len()];
    let mut cost_offset = sign * model.objective.constant;
    for &(v, c) in &model.objective.terms {
        if let Some(x) = fixed[v.0] {
            cost_offset += sign * c * x;
        } else if param_set.contains(&v) {
            return Err(ModelError::UnknownVariable { row: "objective (parameter in objective)".into() });
        } else {
            cost[col_of[v.0]] += sign * c;
        }
    }
    let mut eq = Vec::new();
    let mut ge = Vec::new();
    for r in &model.rows {
        let mut row = StdRow { name: r.name.clone(), rhs: r.rhs, ..Default::default() };
        for &(v, c) in &r.terms {
            if let Some(x) = fixed[v.0] {
                row.rhs -= c * x;
            } else if let Some(&k) = param_pos.get(&v) {
                row.param_coefs.push((k, -c));
            } else {
                row.coefs.push((col_of[v.0], c));
            }
        }
        match r.sense {
            RowSense::Eq => eq.push(row),
            RowSense::Ge => ge.push(row),
            RowSense::Le => {
                for t in row.coefs.iter_mut().chain(row.param_coefs.iter_mut()) {
                    t.1 = -t.1;
                }
                row.rhs = -row.rhs;
                ge.push(row);
            }
        }
    }
    for (j, &id) in columns.iter().enumerate() {
        let v = &model.vars[id.0];
        if v.lower.is_finite() {
            ge.push(StdRow { name: format!("lb:{}", v.name), coefs: vec![(j, 1.0)], rhs: v.lower, param_coefs: vec![] });
        }
        if v.upper.is_finite() {
            ge.push(StdRow { name: format!("ub:{}", v.name), coefs: vec![(j, -1.0)], rhs: -v.upper, param_coefs: vec![] });
        }
    }
    Ok(StandardForm { columns, params: params.to_vec(), eq, ge, cost, cost_offset })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_lower_bound() {
        let mut m = ModelBuilder::new(ObjectiveSense::Minimize);
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY);
        m.add_constraint("c", x.into(), RowSense::Ge, 3.0);
        m.set_objective(ObjectiveSense::Minimize, x.into());
        let r = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn binary_knapsack_matches_enumeration() {
        // Enumerate the four points of {0,1}² against a + b ≤ 1.
        let best = (0..4)
            .map(|k| ((k & 1) as f64, ((k >> 1) & 1) as f64))
            .filter(|(a, b)| a + b <= 1.0)
            .map(|(a, b)| 3.0 * a + 2.0 * b)
            .fold(f64::MIN, f64::max);
        let mut m = ModelBuilder::new(ObjectiveSense::Maximize);
        let a = m.add_binary("a");
        let b = m.add_binary("b");
        m.add_constraint("cap", LinExpr::from(a) + LinExpr::from(b), RowSense::Le, 1.0);
        m.set_objective(ObjectiveSense::Maximize, LinExpr::term(a, 3.0) + LinExpr::term(b, 2.0));
        let r = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(best, 3.0);
        assert!((r.objective - best).abs() < 1e-9);
        assert_eq!(r.value(a), 1.0);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut m = ModelBuilder::new(ObjectiveSense::Minimize);
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY);
        m.add_constraint("lo", x.into(), RowSense::Ge, 1.0);
        m.add_constraint("hi", x.into(), RowSense::Le, 0.0);
        m.set_objective(ObjectiveSense::Minimize, x.into());
        let r = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.values.is_empty());
    }

    #[test]
    fn unbounded_is_reported() {
        let mut m = ModelBuilder::new(ObjectiveSense::Minimize);
        let x = m.add_continuous("x", f64::NEG_INFINITY, 0.0);
        m.set_objective(ObjectiveSense::Minimize, x.into());
        m.add_constraint("dummy", LinExpr::term(x, 1.0), RowSense::Le, 5.0);
        let r = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded);
    }

    #[test]
    fn resolve_is_deterministic() {
        let mut m = ModelBuilder::new(ObjectiveSense::Maximize);
        let xs: Vec<_> = (0..6).map(|i| m.add_binary(format!("x{i}"))).collect();
        let mut cap = LinExpr::new();
        let mut obj = LinExpr::new();
        for (i, &x) in xs.iter().enumerate() {
            cap.add_term(x, 1.0 + i as f64);
            obj.add_term(x, 2.0 + (i % 3) as f64);
        }
        m.add_constraint("cap", cap, RowSense::Le, 9.0);
        m.set_objective(ObjectiveSense::Maximize, obj);
        let a = solve(&m, &SolverConfig::default()).unwrap();
        let b = solve(&m, &SolverConfig::default()).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn standard_form_equality_row() {
        let mut m = ModelBuilder::new(ObjectiveSense::Minimize);
        let y1 = m.add_continuous("y1", f64::NEG_INFINITY, f64::INFINITY);
        let y2 = m.add_continuous("y2", f64::NEG_INFINITY, f64::INFINITY);
        m.add_constraint("sum", LinExpr::from(y1) + LinExpr::from(y2), RowSense::Eq, 1.0);
        let sf = extract_standard_form(&m).unwrap();
        assert_eq!(sf.eq.len(), 1);
        assert_eq!(sf.eq[0].coefs, vec![(0, 1.0), (1, 1.0)]);
        assert_eq!(sf.eq[0].rhs, 1.0);
        assert!(sf.ge.is_empty());
    }

    #[test]
    fn standard_form_folds_bounds() {
        let mut m = ModelBuilder::new(ObjectiveSense::Minimize);
        m.add_continuous("y", 0.0, f64::INFINITY);
        let sf = extract_standard_form(&m).unwrap();
        assert!(sf.eq.is_empty());
        assert_eq!(sf.ge.len(), 1);
        assert_eq!(sf.ge[0].coefs, vec![(0, 1.0)]);
        assert_eq!(sf.ge[0].rhs, 0.0);
    }

    #[test]
    fn standard_form_rejects_free_binary() {
        let mut m = ModelBuilder::new(ObjectiveSense::Minimize);
        m.add_binary("z");
        assert!(matches!(extract_standard_form(&m), Err(ModelError::UnfixedDiscrete(_))));
    }

    #[test]
    fn standard_form_substitutes_fixed_binary_and_moves_params() {
        let mut m = ModelBuilder::new(ObjectiveSense::Minimize);
        let y = m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY);
        let z = m.add_binary("z");
        let p = m.add_continuous("p", 0.0, 1.0);
        m.fix_var(z, 1.0);
        // y + 2z - 3p <= 4  ->  -y >= -4 + 2 - 3p
        m.add_constraint("r", LinExpr::from(y) + LinExpr::term(z, 2.0) + LinExpr::term(p, -3.0), RowSense::Le, 4.0);
        let sf = extract_parametric_form(&m, &[p]).unwrap();
        assert_eq!(sf.columns, vec![y]);
        let row = &sf.ge[0];
        assert_eq!(row.coefs, vec![(0, -1.0)]);
        assert_eq!(row.rhs, -2.0);
        assert_eq!(row.param_coefs, vec![(0, -3.0)]);
        assert_eq!(row.rhs_at(&[1.0]), -5.0);
    }
}
