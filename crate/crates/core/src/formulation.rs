//! Optimization models of the planning problem.
//!
//! Every model is assembled from one operational block, [`add_operational_block`],
//! which writes the hourly dispatch of all representative days into a
//! [`ModelBuilder`]. The block is parameterized along three axes:
//!
//! * the expansion plan is either fixed numbers or master-problem binaries,
//! * the deviation flags are either fixed or symbolic parameters (for dualization),
//! * storage modes are binary, fixed to a pattern, or dropped (relaxed diagnostic).
//!
//! Objective values are in M€ per year.

use thiserror::Error;

use crate::case::PlanningCase;
use crate::milp::{
    extract_parametric_form, LinExpr, ModelBuilder, ModelError, ObjectiveSense, RowSense, SolveResult, SolveStatus,
    SolverConfig, SolverError, StandardForm, VarId,
};
use crate::plan::{ExpansionPlan, PlanError};
use crate::uncertainty::{emit_budget_constraints, DeviationVector, UncertaintyError, UncertaintyVars};

/// € to M€
pub const MONEY_SCALE: f64 = 1e-6;
/// 10³ € to M€
pub const CAPITAL_SCALE: f64 = 1e-3;
/// Charge or discharge above this (MW) counts as active.
pub const ACTIVITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("mode pattern does not match the storage layout: {0}")]
    PatternShape(String),
    #[error("a fixed mode pattern is required to dualize a model with storage")]
    MissingPattern,
    #[error("inner master needs at least one mode pattern")]
    NoPatterns,
    #[error("bounds [{0}, {1}] are not finite")]
    InfiniteBound(f64, f64),
    #[error("{what} solve ended with status {status}")]
    Status { what: String, status: SolveStatus },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulationOptions {
    /// Multiplier on the default big-M of candidate circuits.
    pub big_m_scale: f64,
    /// Dual-bound multiplier for the inner master (see [`InnerMaster`]).
    pub dual_bound_factor: f64,
    /// Drop the storage mode binaries (diagnostic).
    pub relax_modes: bool,
}

impl Default for FormulationOptions {
    fn default() -> Self {
        FormulationOptions { big_m_scale: 1.0, dual_bound_factor: 10.0, relax_modes: false }
    }
}

/// Investment binaries: one per candidate circuit and per buildable storage unit.
#[derive(Clone, Debug, Default)]
pub struct PlanVars {
    /// `[corridor][k]`
    pub lines: Vec<Vec<VarId>>,
    /// `[storage unit][k]`, empty for existing units
    pub storage: Vec<Vec<VarId>>,
}

impl PlanVars {
    /// Adds the binaries and the symmetry ordering `x_k ≥ x_{k+1}`.
    pub fn add(builder: &mut ModelBuilder, case: &PlanningCase) -> Self {
        let order = |b: &mut ModelBuilder, xs: &[VarId], name: &str| {
            for (k, w) in xs.windows(2).enumerate() {
                b.add_constraint(format!("order[{name},{k}]"), LinExpr::from(w[0]) - LinExpr::from(w[1]), RowSense::Ge, 0.0);
            }
        };
        let mut lines = Vec::with_capacity(case.corridors.len());
        for c in &case.corridors {
            let xs: Vec<VarId> =
                (0..c.candidate_count()).map(|k| builder.add_binary(format!("x_line[{},{k}]", c.label()))).collect();
            order(builder, &xs, &c.label());
            lines.push(xs);
        }
        let mut storage = Vec::with_capacity(case.storage_units.len());
        for s in &case.storage_units {
            let n = if s.is_candidate() { s.max_buildable } else { 0 };
            let xs: Vec<VarId> = (0..n).map(|k| builder.add_binary(format!("x_sto[{},{k}]", s.id))).collect();
            order(builder, &xs, &s.id);
            storage.push(xs);
        }
        PlanVars { lines, storage }
    }

    /// Capital cost in 10³ €.
    pub fn capital_expr(&self, case: &PlanningCase) -> LinExpr {
        let mut e = LinExpr::new();
        for (c, xs) in case.corridors.iter().zip(&self.lines) {
            for &x in xs {
                e.add_term(x, c.circuit_capital_cost);
            }
        }
        for (s, xs) in case.storage_units.iter().zip(&self.storage) {
            for &x in xs {
                e.add_term(x, s.unit_capital_cost);
            }
        }
        e
    }

    pub fn decode(&self, values: &[f64]) -> ExpansionPlan {
        let count = |xs: &Vec<VarId>| xs.iter().filter(|x| values[x.index()] > 0.5).count() as u32;
        ExpansionPlan {
            lines_built: self.lines.iter().map(count).collect(),
            storage_built: self.storage.iter().map(count).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum PlanInput<'a> {
    Fixed(&'a ExpansionPlan),
    Variables(&'a PlanVars),
}

#[derive(Clone, Copy, Debug)]
pub enum DeviationInput<'a> {
    Fixed(&'a DeviationVector),
    Parametric(&'a UncertaintyVars),
}

#[derive(Clone, Copy, Debug)]
pub enum ModeInput<'a> {
    Binary,
    Relaxed,
    Fixed(&'a ModePattern),
}

/// Charging flags `[slot][day][hour]` for the storage slots of a fixed plan.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModePattern {
    pub charging: Vec<Vec<Vec<bool>>>,
}

/// One physical storage unit in the model: an existing record, or the `index`-th
/// buildable unit of a candidate record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StorageSlot {
    pub unit: usize,
    pub index: u32,
}

/// Storage slots present in a model for the given plan input.
pub fn storage_slots(case: &PlanningCase, plan: PlanInput<'_>) -> Vec<StorageSlot> {
    let mut out = Vec::new();
    for (i, s) in case.storage_units.iter().enumerate() {
        let n = match (s.is_candidate(), plan) {
            (false, _) => 1,
            (true, PlanInput::Fixed(p)) => p.storage_built[i],
            (true, PlanInput::Variables(v)) => v.storage[i].len() as u32,
        };
        out.extend((0..n).map(|index| StorageSlot { unit: i, index }));
    }
    out
}

/// Handles into one operational block.
#[derive(Clone, Debug)]
pub struct OperationalVars {
    pub slots: Vec<StorageSlot>,
    /// `[generator][day][hour]`
    pub generation: Vec<Vec<Vec<VarId>>>,
    /// `[demand][day][hour]`
    pub shedding: Vec<Vec<Vec<VarId>>>,
    /// `[slot][day][hour]`
    pub charge: Vec<Vec<Vec<VarId>>>,
    pub discharge: Vec<Vec<Vec<VarId>>>,
    pub energy: Vec<Vec<Vec<VarId>>>,
    /// Charging-mode binaries `[slot][day][hour]`, present in binary mode only.
    pub modes: Option<Vec<Vec<Vec<VarId>>>>,
    /// Weighted operating cost (M€/year).
    pub cost: LinExpr,
}

impl OperationalVars {
    pub fn mode_pattern(&self, values: &[f64]) -> Option<ModePattern> {
        self.modes.as_ref().map(|m| ModePattern {
            charging: m.iter().map(|d| d.iter().map(|h| h.iter().map(|z| values[z.index()] > 0.5).collect()).collect()).collect(),
        })
    }

    /// `(slot, day, hour)` where both charge and discharge exceed [`ACTIVITY_THRESHOLD`].
    pub fn simultaneous_hours(&self, values: &[f64]) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (s, (pc, pd)) in self.charge.iter().zip(&self.discharge).enumerate() {
            for (d, (pcd, pdd)) in pc.iter().zip(pd).enumerate() {
                for (t, (c, w)) in pcd.iter().zip(pdd).enumerate() {
                    if values[c.index()] > ACTIVITY_THRESHOLD && values[w.index()] > ACTIVITY_THRESHOLD {
                        out.push((s, d, t));
                    }
                }
            }
        }
        out
    }
}

/// Per-parameter factor scaling: `value = nominal·(1 + sign·deviation·u)`.
enum Param {
    Fixed(f64),
    Var(VarId),
}

fn param_term(u: DeviationInput<'_>, group: usize, i: usize) -> Param {
    match u {
        DeviationInput::Fixed(v) => {
            let flags = [&v.demand, &v.conventional, &v.wind][group];
            Param::Fixed(if flags[i] { 1.0 } else { 0.0 })
        }
        DeviationInput::Parametric(vars) => Param::Var([&vars.demand, &vars.conventional, &vars.wind][group][i]),
    }
}

/// Adds `lhs (sense) nominal·(1 + slope·u)` with `u` fixed or symbolic.
fn add_param_row(b: &mut ModelBuilder, name: String, mut lhs: LinExpr, sense: RowSense, nominal: f64, slope: f64, u: Param) {
    match u {
        Param::Fixed(f) => {
            b.add_constraint(name, lhs, sense, nominal * (1.0 + slope * f));
        }
        Param::Var(v) => {
            lhs.add_term(v, -nominal * slope);
            b.add_constraint(name, lhs, sense, nominal);
        }
    }
}

fn check_pattern(p: &ModePattern, slots: usize, days: usize, hours: usize) -> Result<(), FormulationError> {
    if p.charging.len() != slots {
        return Err(FormulationError::PatternShape(format!("{} slots, expected {slots}", p.charging.len())));
    }
    for s in &p.charging {
        if s.len() != days || s.iter().any(|d| d.len() != hours) {
            return Err(FormulationError::PatternShape(format!("expected {days} days of {hours} hours")));
        }
    }
    Ok(())
}

fn connect(balance: &mut [LinExpr], from: usize, to: usize, flow: VarId) {
    balance[from].add_term(flow, -1.0);
    balance[to].add_term(flow, 1.0);
}

/// Writes the operational problem of every representative day into `b`.
pub fn add_operational_block(
    b: &mut ModelBuilder,
    case: &PlanningCase,
    plan: PlanInput<'_>,
    u: DeviationInput<'_>,
    modes: ModeInput<'_>,
    opts: &FormulationOptions,
    tag: &str,
) -> Result<OperationalVars, FormulationError> {
    if let PlanInput::Fixed(p) = plan {
        p.validate(case)?;
    }
    if let DeviationInput::Fixed(v) = u {
        v.check(case)?;
    }
    let days = case.representative_days.len();
    let hours = case.hours_per_day();
    let slots = storage_slots(case, plan);
    if let ModeInput::Fixed(p) = modes {
        check_pattern(p, slots.len(), days, hours)?;
    }
    let spec = &case.uncertainty;
    let net = &case.network;
    let nb = case.num_buses();
    let wind_pos: Vec<Option<usize>> = {
        let wind = case.wind_units();
        (0..case.generators.len()).map(|g| wind.iter().position(|&w| w == g)).collect()
    };
    let conv_pos: Vec<Option<usize>> = {
        let conv = case.conventional_units();
        (0..case.generators.len()).map(|g| conv.iter().position(|&c| c == g)).collect()
    };
    let grid = |n: usize| vec![vec![Vec::with_capacity(hours); days]; n];
    let mut ov = OperationalVars {
        generation: grid(case.generators.len()),
        shedding: grid(case.demands.len()),
        charge: grid(slots.len()),
        discharge: grid(slots.len()),
        energy: grid(slots.len()),
        modes: matches!(modes, ModeInput::Binary).then(|| grid(slots.len())),
        slots: slots.clone(),
        cost: LinExpr::new(),
    };
    let slot_avail = |s: &StorageSlot| -> Option<VarId> {
        match plan {
            PlanInput::Variables(v) if case.storage_units[s.unit].is_candidate() => Some(v.storage[s.unit][s.index as usize]),
            _ => None,
        }
    };

    for (d, day) in case.representative_days.iter().enumerate() {
        let w = day.weight * MONEY_SCALE;
        for t in 0..hours {
            let at = format!("{tag}[{d},{t}]");
            let mut balance: Vec<LinExpr> = vec![LinExpr::new(); nb];

            for (g, gen) in case.generators.iter().enumerate() {
                let p = b.add_continuous(format!("p{at}[{}]", gen.id), 0.0, f64::INFINITY);
                ov.generation[g][d].push(p);
                ov.cost.add_term(p, w * gen.operating_cost);
                balance[case.bus_index(gen.bus)].add_term(p, 1.0);
                let (avail, param, slope) = match (wind_pos[g], conv_pos[g]) {
                    (Some(k), _) => (gen.nominal_capacity * day.wind_cf[k][t], param_term(u, 2, k), -spec.wind_deviation),
                    (None, Some(k)) => (gen.nominal_capacity, param_term(u, 1, k), -spec.gen_deviation),
                    (None, None) => unreachable!("generator is either wind or conventional"),
                };
                add_param_row(b, format!("gcap{at}[{}]", gen.id), p.into(), RowSense::Le, avail, slope, param);
            }

            for (k, dem) in case.demands.iter().enumerate() {
                let ls = b.add_continuous(format!("ls{at}[{}]", dem.id), 0.0, f64::INFINITY);
                ov.shedding[k][d].push(ls);
                ov.cost.add_term(ls, w * dem.shed_cost);
                balance[case.bus_index(dem.bus)].add_term(ls, 1.0);
                let level = dem.nominal_level * day.demand_factor[k][t];
                add_param_row(b, format!("lscap{at}[{}]", dem.id), ls.into(), RowSense::Le, level, spec.demand_deviation, param_term(u, 0, k));
            }

            let theta: Vec<VarId> = (0..nb)
                .map(|n| b.add_continuous(format!("th{at}[{}]", n + 1), -net.angle_limit, net.angle_limit))
                .collect();
            b.add_constraint(format!("ref{at}"), theta[case.bus_index(case.reference_bus())].into(), RowSense::Eq, 0.0);

            for (c, cor) in case.corridors.iter().enumerate() {
                let (i, j) = (case.bus_index(cor.from_bus), case.bus_index(cor.to_bus));
                let susceptance = net.base_mva / cor.reactance;
                let dtheta = LinExpr::from(theta[i]) - LinExpr::from(theta[j]);
                let fixed_circuits = match plan {
                    PlanInput::Fixed(p) => p.circuits(case, c),
                    PlanInput::Variables(_) => cor.existing_count,
                };
                if fixed_circuits > 0 {
                    let n = fixed_circuits as f64;
                    let f = b.add_continuous(format!("f{at}[{}]", cor.label()), -n * cor.capacity, n * cor.capacity);
                    b.add_constraint(format!("dc{at}[{}]", cor.label()), LinExpr::from(f) - dtheta.clone() * (n * susceptance), RowSense::Eq, 0.0);
                    connect(&mut balance, i, j, f);
                }
                if let PlanInput::Variables(v) = plan {
                    let big_m = opts.big_m_scale * susceptance * 2.0 * net.angle_limit;
                    for (k, &x) in v.lines[c].iter().enumerate() {
                        let name = format!("{at}[{},{k}]", cor.label());
                        let f = b.add_continuous(format!("fc{name}"), -cor.capacity, cor.capacity);
                        b.add_constraint(format!("fcap+{name}"), LinExpr::from(f) - LinExpr::term(x, cor.capacity), RowSense::Le, 0.0);
                        b.add_constraint(format!("fcap-{name}"), LinExpr::from(f) + LinExpr::term(x, cor.capacity), RowSense::Ge, 0.0);
                        let dev = LinExpr::from(f) - dtheta.clone() * susceptance;
                        b.add_constraint(format!("dc+{name}"), dev.clone() + LinExpr::term(x, big_m), RowSense::Le, big_m);
                        b.add_constraint(format!("dc-{name}"), dev - LinExpr::term(x, big_m), RowSense::Ge, -big_m);
                        connect(&mut balance, i, j, f);
                    }
                }
            }

            for (s, slot) in slots.iter().enumerate() {
                let unit = &case.storage_units[slot.unit];
                let name = format!("{at}[{},{}]", unit.id, slot.index);
                let (mut cmax, mut dmax) = (unit.charge_cap, unit.discharge_cap);
                if let ModeInput::Fixed(p) = modes {
                    if p.charging[s][d][t] {
                        dmax = 0.0;
                    } else {
                        cmax = 0.0;
                    }
                }
                let pc = b.add_continuous(format!("pc{name}"), 0.0, cmax);
                let pd = b.add_continuous(format!("pd{name}"), 0.0, dmax);
                let e = b.add_continuous(format!("e{name}"), 0.0, unit.max_energy);
                let bus = case.bus_index(unit.bus);
                balance[bus].add_term(pd, 1.0);
                balance[bus].add_term(pc, -1.0);
                let avail = slot_avail(slot);
                if let Some(x) = avail {
                    b.add_constraint(format!("emax{name}"), LinExpr::from(e) - LinExpr::term(x, unit.max_energy), RowSense::Le, 0.0);
                    b.add_constraint(format!("cbuilt{name}"), LinExpr::from(pc) - LinExpr::term(x, unit.charge_cap), RowSense::Le, 0.0);
                    b.add_constraint(format!("dbuilt{name}"), LinExpr::from(pd) - LinExpr::term(x, unit.discharge_cap), RowSense::Le, 0.0);
                }
                // Energy balance; the first hour starts from the initial level.
                let mut eb = LinExpr::from(e) - LinExpr::term(pc, unit.charge_eff) + LinExpr::term(pd, 1.0 / unit.discharge_eff);
                if t == 0 {
                    match avail {
                        Some(x) => eb.add_term(x, -unit.initial_energy),
                        None => eb.add_constant(-unit.initial_energy),
                    };
                } else {
                    eb.add_term(ov.energy[s][d][t - 1], -1.0);
                }
                b.add_constraint(format!("ebal{name}"), eb, RowSense::Eq, 0.0);
                if t + 1 == hours {
                    let mut term = LinExpr::from(e);
                    match avail {
                        Some(x) => term.add_term(x, -unit.initial_energy),
                        None => term.add_constant(-unit.initial_energy),
                    };
                    b.add_constraint(format!("eend{name}"), term, RowSense::Ge, 0.0);
                }
                if let Some(m) = ov.modes.as_mut() {
                    let z = b.add_binary(format!("z{name}"));
                    b.add_constraint(format!("zc{name}"), LinExpr::from(pc) - LinExpr::term(z, unit.charge_cap), RowSense::Le, 0.0);
                    b.add_constraint(format!("zd{name}"), LinExpr::from(pd) + LinExpr::term(z, unit.discharge_cap), RowSense::Le, unit.discharge_cap);
                    m[s][d].push(z);
                }
                ov.charge[s][d].push(pc);
                ov.discharge[s][d].push(pd);
                ov.energy[s][d].push(e);
            }

            for (n, bal) in balance.into_iter().enumerate() {
                let demands: Vec<usize> = (0..case.demands.len()).filter(|&k| case.bus_index(case.demands[k].bus) == n).collect();
                match (u, demands.as_slice()) {
                    (_, []) => {
                        b.add_constraint(format!("bal{at}[{}]", n + 1), bal, RowSense::Eq, 0.0);
                    }
                    (DeviationInput::Fixed(_), ks) => {
                        let rhs: f64 = ks
                            .iter()
                            .map(|&k| {
                                let Param::Fixed(f) = param_term(u, 0, k) else { unreachable!() };
                                case.demands[k].nominal_level * day.demand_factor[k][t] * (1.0 + spec.demand_deviation * f)
                            })
                            .sum();
                        b.add_constraint(format!("bal{at}[{}]", n + 1), bal, RowSense::Eq, rhs);
                    }
                    (DeviationInput::Parametric(vars), ks) => {
                        let mut lhs = bal;
                        let mut rhs = 0.0;
                        for &k in ks {
                            let level = case.demands[k].nominal_level * day.demand_factor[k][t];
                            rhs += level;
                            lhs.add_term(vars.demand[k], -level * spec.demand_deviation);
                        }
                        b.add_constraint(format!("bal{at}[{}]", n + 1), lhs, RowSense::Eq, rhs);
                    }
                }
            }
        }
    }
    Ok(ov)
}

fn mode_input(opts: &FormulationOptions) -> ModeInput<'static> {
    if opts.relax_modes {
        ModeInput::Relaxed
    } else {
        ModeInput::Binary
    }
}

/// Operational problem at a fixed plan and realization (MILP in dispatch and modes).
pub fn build_operational_model(
    case: &PlanningCase,
    plan: &ExpansionPlan,
    u: &DeviationVector,
    opts: &FormulationOptions,
) -> Result<(ModelBuilder, OperationalVars), FormulationError> {
    let mut b = ModelBuilder::new(ObjectiveSense::Minimize);
    let ov = add_operational_block(&mut b, case, PlanInput::Fixed(plan), DeviationInput::Fixed(u), mode_input(opts), opts, "")?;
    b.set_objective(ObjectiveSense::Minimize, ov.cost.clone());
    Ok((b, ov))
}

/// The worst-case-identification subproblem is the operational problem itself.
pub fn build_inner_subproblem(
    case: &PlanningCase,
    plan: &ExpansionPlan,
    u: &DeviationVector,
    opts: &FormulationOptions,
) -> Result<(ModelBuilder, OperationalVars), FormulationError> {
    build_operational_model(case, plan, u, opts)
}

/// Charge and discharge of one storage slot, `[day][hour]` in MW.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotSchedule {
    pub slot: StorageSlot,
    pub charge: Vec<Vec<f64>>,
    pub discharge: Vec<Vec<f64>>,
    pub energy: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct OperationalSolution {
    /// M€/year
    pub cost: f64,
    pub modes: Option<ModePattern>,
    pub schedules: Vec<SlotSchedule>,
    /// `(slot, day, hour)` with simultaneous charge and discharge.
    pub simultaneous: Vec<(usize, usize, usize)>,
    /// MWh of load shed over the representative days (unweighted).
    pub shed_energy: f64,
    pub seconds: f64,
}

pub(crate) fn require_optimal(r: &SolveResult, what: &str) -> Result<(), FormulationError> {
    if r.is_optimal() {
        Ok(())
    } else {
        Err(FormulationError::Status { what: what.into(), status: r.status })
    }
}

/// Builds and solves the operational problem.
pub fn solve_operational(
    case: &PlanningCase,
    plan: &ExpansionPlan,
    u: &DeviationVector,
    opts: &FormulationOptions,
    solver: &SolverConfig,
) -> Result<OperationalSolution, FormulationError> {
    let (model, ov) = build_operational_model(case, plan, u, opts)?;
    let r = crate::milp::solve(&model, solver)?;
    require_optimal(&r, "operational")?;
    let grab = |g: &Vec<Vec<Vec<VarId>>>, s: usize| -> Vec<Vec<f64>> {
        g[s].iter().map(|d| d.iter().map(|v| r.value(*v)).collect()).collect()
    };
    let schedules = ov
        .slots
        .iter()
        .enumerate()
        .map(|(s, &slot)| SlotSchedule { slot, charge: grab(&ov.charge, s), discharge: grab(&ov.discharge, s), energy: grab(&ov.energy, s) })
        .collect();
    let shed_energy = ov.shedding.iter().flatten().flatten().map(|v| r.value(*v)).sum();
    Ok(OperationalSolution {
        cost: r.objective,
        modes: ov.mode_pattern(&r.values),
        schedules,
        simultaneous: ov.simultaneous_hours(&r.values),
        shed_energy,
        seconds: r.stats.seconds,
    })
}

/// One scenario copy in the master problem.
#[derive(Clone, Debug)]
pub struct ScenarioColumn {
    pub index: usize,
    pub u: DeviationVector,
    pub vars: OperationalVars,
}

/// Outer master problem: investment binaries, `η`, and one operational copy per scenario.
#[derive(Clone, Debug)]
pub struct Master {
    pub builder: ModelBuilder,
    pub plan: PlanVars,
    pub eta: VarId,
    pub investment: LinExpr,
    pub scenarios: Vec<ScenarioColumn>,
}

impl Master {
    pub fn add_scenario(&mut self, case: &PlanningCase, u: &DeviationVector, opts: &FormulationOptions) -> Result<(), FormulationError> {
        let index = self.scenarios.len() + 1;
        let vars = add_operational_block(
            &mut self.builder,
            case,
            PlanInput::Variables(&self.plan),
            DeviationInput::Fixed(u),
            mode_input(opts),
            opts,
            &format!("s{index}"),
        )?;
        self.builder.add_constraint(format!("eta[{index}]"), LinExpr::from(self.eta) - vars.cost.clone(), RowSense::Ge, 0.0);
        self.scenarios.push(ScenarioColumn { index, u: u.clone(), vars });
        Ok(())
    }

    pub fn solve(&self, solver: &SolverConfig) -> Result<SolveResult, FormulationError> {
        Ok(crate::milp::solve(&self.builder, solver)?)
    }
}

/// Annualized investment (M€/year) of a capital expression in 10³ €.
fn annual_investment(case: &PlanningCase, capital: &LinExpr) -> LinExpr {
    capital.clone() * (case.economics.amortization_rate * CAPITAL_SCALE)
}

pub fn build_master(case: &PlanningCase, scenarios: &[DeviationVector], opts: &FormulationOptions) -> Result<Master, FormulationError> {
    let mut b = ModelBuilder::new(ObjectiveSense::Minimize);
    let plan = PlanVars::add(&mut b, case);
    let capital = plan.capital_expr(case);
    b.add_constraint("budget", capital.clone(), RowSense::Le, case.economics.investment_budget);
    let eta = b.add_continuous("eta", 0.0, f64::INFINITY);
    let investment = annual_investment(case, &capital);
    b.set_objective(ObjectiveSense::Minimize, investment.clone() + LinExpr::from(eta));
    let mut m = Master { builder: b, plan, eta, investment, scenarios: Vec::new() };
    for u in scenarios {
        m.add_scenario(case, u, opts)?;
    }
    Ok(m)
}

/// Parametric standard form of the operational LP at a fixed plan and mode pattern.
///
/// Parameters are the deviation flags in demand, conventional, wind order.
#[derive(Clone, Debug)]
pub struct DualSystem {
    pub form: StandardForm,
}

/// Handles of one dual block added to a model.
#[derive(Clone, Debug)]
pub struct DualBlock {
    pub lambda: Vec<VarId>,
    pub mu: Vec<VarId>,
    /// Dual objective without the parameter-dependent part.
    pub objective: LinExpr,
    /// `Σ_r R_{r,m}·dual_r` for each parameter `m`.
    pub param_sums: Vec<LinExpr>,
}

pub fn dualize_operational_lp(
    case: &PlanningCase,
    plan: &ExpansionPlan,
    modes: ModeInput<'_>,
    opts: &FormulationOptions,
) -> Result<DualSystem, FormulationError> {
    if matches!(modes, ModeInput::Binary) {
        if storage_slots(case, PlanInput::Fixed(plan)).is_empty() {
            return dualize_operational_lp(case, plan, ModeInput::Relaxed, opts);
        }
        return Err(FormulationError::MissingPattern);
    }
    let mut b = ModelBuilder::new(ObjectiveSense::Minimize);
    let params = UncertaintyVars::add_parameters(&mut b, case);
    let ov = add_operational_block(&mut b, case, PlanInput::Fixed(plan), DeviationInput::Parametric(&params), modes, opts, "")?;
    b.set_objective(ObjectiveSense::Minimize, ov.cost);
    let form = extract_parametric_form(&b, &params.all())?;
    Ok(DualSystem { form })
}

impl DualSystem {
    /// Adds `Eᵀλ + Fᵀμ = b`, `μ ≥ 0` to `b` and returns the objective pieces.
    pub fn add_to(&self, b: &mut ModelBuilder, tag: &str) -> DualBlock {
        let f = &self.form;
        let mut cols = vec![LinExpr::new(); f.num_columns()];
        let mut objective = LinExpr::constant(f.cost_offset);
        let mut param_sums = vec![LinExpr::new(); f.params.len()];
        let mut add_rows = |rows: &[crate::milp::StdRow], lower: f64, prefix: &str, out: &mut Vec<VarId>| {
            for (r, row) in rows.iter().enumerate() {
                let y = b.add_continuous(format!("{prefix}{tag}[{r}]"), lower, f64::INFINITY);
                for &(j, c) in &row.coefs {
                    cols[j].add_term(y, c);
                }
                objective.add_term(y, row.rhs);
                for &(m, c) in &row.param_coefs {
                    param_sums[m].add_term(y, c);
                }
                out.push(y);
            }
        };
        let mut lambda = Vec::new();
        let mut mu = Vec::new();
        add_rows(&f.eq, f64::NEG_INFINITY, "lam", &mut lambda);
        add_rows(&f.ge, 0.0, "mu", &mut mu);
        for (j, e) in cols.into_iter().enumerate() {
            b.add_constraint(format!("dualfeas{tag}[{j}]"), e, RowSense::Eq, f.cost[j]);
        }
        DualBlock { lambda, mu, objective, param_sums }
    }

    /// Solves the dual LP at fixed parameter values; returns its optimal objective.
    pub fn solve_at(&self, params: &[f64], solver: &SolverConfig) -> Result<f64, FormulationError> {
        let mut b = ModelBuilder::new(ObjectiveSense::Maximize);
        let block = self.add_to(&mut b, "");
        let mut obj = block.objective;
        for (sum, &p) in block.param_sums.iter().zip(params) {
            obj.add_expr(sum, p);
        }
        b.set_objective(ObjectiveSense::Maximize, obj);
        let r = crate::milp::solve(&b, solver)?;
        require_optimal(&r, "dual")?;
        Ok(r.objective)
    }

    /// `Σ_r |R_{r,m}|` for each parameter `m`.
    fn param_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.form.params.len()];
        for row in self.form.eq.iter().chain(&self.form.ge) {
            for &(m, c) in &row.param_coefs {
                w[m] += c.abs();
            }
        }
        w
    }
}

/// Adds `w = bin·cont` through four linear rows, valid for `cont ∈ [lower, upper]`.
pub fn linearize_product(
    b: &mut ModelBuilder,
    bin: VarId,
    cont: VarId,
    lower: f64,
    upper: f64,
    name: &str,
) -> Result<VarId, FormulationError> {
    if !lower.is_finite() || !upper.is_finite() {
        return Err(FormulationError::InfiniteBound(lower, upper));
    }
    let w = b.add_continuous(name, lower.min(0.0), upper.max(0.0));
    b.add_constraint(format!("{name}.ub_bin"), LinExpr::from(w) - LinExpr::term(bin, upper), RowSense::Le, 0.0);
    b.add_constraint(format!("{name}.lb_bin"), LinExpr::from(w) - LinExpr::term(bin, lower), RowSense::Ge, 0.0);
    b.add_constraint(format!("{name}.ub_cont"), LinExpr::from(w) - LinExpr::from(cont) - LinExpr::term(bin, lower), RowSense::Le, -lower);
    b.add_constraint(format!("{name}.lb_cont"), LinExpr::from(w) - LinExpr::from(cont) - LinExpr::term(bin, upper), RowSense::Ge, -upper);
    Ok(w)
}

/// Inner-loop master: `max ξ` over budgeted flags, with one dual cut per mode pattern.
///
/// Each cut bounds `ξ` by the dual objective of the operational LP at that pattern.
/// The bilinear part `Σ_m u_m·S_m`, where `S_m` collects the dual variables
/// multiplying flag `m`, is linearized per flag. `S_m` is boxed by
/// `dual_bound_factor · max_weight · max_shed_cost · Σ_r |R_{r,m}|` (M€ units),
/// which holds whenever prices stay within `dual_bound_factor` times the
/// weighted shedding cost.
#[derive(Clone, Debug)]
pub struct InnerMaster {
    pub builder: ModelBuilder,
    pub u: UncertaintyVars,
    pub xi: VarId,
    pub cuts: usize,
    price_bound: f64,
}

impl InnerMaster {
    pub fn add_cut(
        &mut self,
        case: &PlanningCase,
        plan: &ExpansionPlan,
        pattern: Option<&ModePattern>,
        opts: &FormulationOptions,
    ) -> Result<(), FormulationError> {
        let modes = match pattern {
            Some(p) => ModeInput::Fixed(p),
            None => ModeInput::Relaxed,
        };
        let dual = dualize_operational_lp(case, plan, modes, opts)?;
        let k = self.cuts + 1;
        let tag = format!("k{k}");
        let block = dual.add_to(&mut self.builder, &tag);
        let mut rhs = block.objective.clone();
        let u_all = self.u.all();
        for (m, (sum, weight)) in block.param_sums.iter().zip(dual.param_weights()).enumerate() {
            if weight == 0.0 {
                continue;
            }
            let bound = self.price_bound * weight;
            let s = self.builder.add_continuous(format!("S{tag}[{m}]"), -bound, bound);
            self.builder.add_constraint(format!("Sdef{tag}[{m}]"), LinExpr::from(s) - sum.clone(), RowSense::Eq, 0.0);
            let w = linearize_product(&mut self.builder, u_all[m], s, -bound, bound, &format!("w{tag}[{m}]"))?;
            rhs.add_term(w, 1.0);
        }
        self.builder.add_constraint(format!("cut[{k}]"), LinExpr::from(self.xi) - rhs, RowSense::Le, 0.0);
        self.cuts = k;
        Ok(())
    }

    /// Returns `(ξ, u)` at the optimum.
    pub fn solve(&self, solver: &SolverConfig) -> Result<(f64, DeviationVector, SolveResult), FormulationError> {
        if self.cuts == 0 {
            return Err(FormulationError::NoPatterns);
        }
        let r = crate::milp::solve(&self.builder, solver)?;
        require_optimal(&r, "inner master")?;
        Ok((r.value(self.xi), self.u.decode(&r.values), r))
    }
}

/// Inner master with one cut per pattern (`None` for the relaxed, mode-free model).
pub fn build_inner_master(
    case: &PlanningCase,
    plan: &ExpansionPlan,
    patterns: &[Option<ModePattern>],
    opts: &FormulationOptions,
) -> Result<InnerMaster, FormulationError> {
    let mut b = ModelBuilder::new(ObjectiveSense::Maximize);
    let u = UncertaintyVars::add_binaries(&mut b, case);
    emit_budget_constraints(&case.uncertainty, case, &mut b, &u)?;
    let xi = b.add_continuous("xi", f64::NEG_INFINITY, f64::INFINITY);
    b.set_objective(ObjectiveSense::Maximize, xi.into());
    let max_weight = case.representative_days.iter().map(|d| d.weight).fold(0.0, f64::max);
    let price_bound = opts.dual_bound_factor * max_weight * case.max_shed_cost() * MONEY_SCALE;
    let mut m = InnerMaster { builder: b, u, xi, cuts: 0, price_bound };
    for p in patterns {
        m.add_cut(case, plan, p.as_ref(), opts)?;
    }
    if m.cuts == 0 {
        return Err(FormulationError::NoPatterns);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::milp::{solve, VarKind};

    fn solver() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn product_grid_is_exact() {
        for &c in &[-10.0, -3.0, 0.0, 5.0, 10.0] {
            for bin in [0.0, 1.0] {
                for sense in [ObjectiveSense::Minimize, ObjectiveSense::Maximize] {
                    let mut b = ModelBuilder::new(sense);
                    let x = b.add_var("b", VarKind::Binary, bin, bin);
                    let y = b.add_continuous("c", c, c);
                    let w = linearize_product(&mut b, x, y, -10.0, 10.0, "w").unwrap();
                    b.set_objective(sense, w.into());
                    let r = solve(&b, &solver()).unwrap();
                    assert!((r.value(w) - bin * c).abs() < 1e-9, "bin {bin} cont {c}: {}", r.value(w));
                }
            }
        }
    }

    #[test]
    fn product_rejects_infinite_bounds() {
        let mut b = ModelBuilder::default();
        let x = b.add_binary("b");
        let y = b.add_continuous("c", 0.0, 1.0);
        assert!(matches!(linearize_product(&mut b, x, y, 0.0, f64::INFINITY, "w"), Err(FormulationError::InfiniteBound(..))));
    }

    #[test]
    fn one_variable_duality() {
        // min y s.t. y ≥ 4  ⇒  max 4μ s.t. μ = 1
        let mut b = ModelBuilder::default();
        let y = b.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY);
        b.add_constraint("c", y.into(), RowSense::Ge, 4.0);
        b.set_objective(ObjectiveSense::Minimize, y.into());
        let dual = DualSystem { form: crate::milp::extract_standard_form(&b).unwrap() };
        assert!((dual.solve_at(&[], &solver()).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn single_bus_cost_is_dispatch_cost() {
        let case = bundled::single_bus();
        let plan = ExpansionPlan::empty(&case);
        let u = DeviationVector::nominal(&case);
        let sol = solve_operational(&case, &plan, &u, &FormulationOptions::default(), &solver()).unwrap();
        let g = &case.generators[0];
        let d = &case.demands[0];
        let day = &case.representative_days[0];
        let energy: f64 = day.demand_factor[0].iter().map(|f| f * d.nominal_level).sum();
        let expected = g.operating_cost * energy * day.weight * MONEY_SCALE;
        assert!((sol.cost - expected).abs() < 1e-9, "{} vs {expected}", sol.cost);
        assert_eq!(sol.shed_energy, 0.0);
    }

    #[test]
    fn toy2_standard_form_matches_hand_count() {
        // Per hour: p, ls, two angles, one corridor flow, pc, pd, e.
        // Equalities per hour: reference angle, flow definition, energy balance, two nodal balances.
        // Inequalities: generator and shedding caps per hour, one end-of-day energy row,
        // and 14 finite variable bounds per hour.
        let case = bundled::toy2();
        let plan = ExpansionPlan::from_entries(&case, &[(1, 2, 1)], &[(2, 1)]).unwrap();
        let u = DeviationVector::nominal(&case);
        let mut b = ModelBuilder::new(ObjectiveSense::Minimize);
        let ov = add_operational_block(&mut b, &case, PlanInput::Fixed(&plan), DeviationInput::Fixed(&u), ModeInput::Relaxed, &FormulationOptions::default(), "")
            .unwrap();
        b.set_objective(ObjectiveSense::Minimize, ov.cost);
        let f = crate::milp::extract_standard_form(&b).unwrap();
        assert_eq!(f.num_columns(), 4 * 8);
        assert_eq!(f.eq.len(), 4 * 5);
        assert_eq!(f.ge.len(), 4 * 2 + 1 + 4 * 14);
    }

    #[test]
    fn isolated_bus_unit_stays_idle() {
        let case = bundled::garver().reduced(&[0], &(0..24).collect::<Vec<_>>()).unwrap();
        let plan = ExpansionPlan::empty(&case);
        let u = DeviationVector::nominal(&case);
        let (model, ov) = build_operational_model(&case, &plan, &u, &FormulationOptions::default()).unwrap();
        let r = solve(&model, &solver()).unwrap();
        let g6 = case.generators.iter().position(|g| g.bus == 6).unwrap();
        for v in ov.generation[g6].iter().flatten() {
            assert!(r.value(*v).abs() < 1e-9);
        }
    }

    #[test]
    fn modes_are_exclusive_and_pattern_matches() {
        let case = bundled::toy3();
        let plan = ExpansionPlan { lines_built: vec![0; case.corridors.len()], storage_built: case.storage_units.iter().map(|s| if s.is_candidate() { s.max_buildable } else { 0 }).collect() };
        let u = DeviationVector::nominal(&case);
        let sol = solve_operational(&case, &plan, &u, &FormulationOptions::default(), &solver()).unwrap();
        assert!(sol.simultaneous.is_empty());
        let pattern = sol.modes.unwrap();
        for (s, sched) in sol.schedules.iter().enumerate() {
            for d in 0..sched.charge.len() {
                for t in 0..sched.charge[d].len() {
                    if sched.charge[d][t] > ACTIVITY_THRESHOLD {
                        assert!(pattern.charging[s][d][t]);
                    }
                    if sched.discharge[d][t] > ACTIVITY_THRESHOLD {
                        assert!(!pattern.charging[s][d][t]);
                    }
                    assert!(sched.energy[d][t] >= -1e-9);
                    assert!(sched.energy[d][t] <= case.storage_units[sched.slot.unit].max_energy + 1e-9);
                }
                let unit = &case.storage_units[sched.slot.unit];
                assert!(*sched.energy[d].last().unwrap() >= unit.initial_energy - 1e-9);
            }
        }
    }

    #[test]
    fn fixed_optimal_pattern_reproduces_cost_and_dual() {
        let case = bundled::toy3().with_budgets(1, 1, 1).unwrap();
        let plan = ExpansionPlan::from_entries(&case, &[(1, 3, 1)], &[(3, 1)]).unwrap();
        let mut u = DeviationVector::nominal(&case);
        u.demand[0] = true;
        u.wind[0] = true;
        let opts = FormulationOptions::default();
        let sol = solve_operational(&case, &plan, &u, &opts, &solver()).unwrap();
        let pattern = sol.modes.unwrap();
        let dual = dualize_operational_lp(&case, &plan, ModeInput::Fixed(&pattern), &opts).unwrap();
        let dual_obj = dual.solve_at(&u.as_values(), &solver()).unwrap();
        assert!((dual_obj - sol.cost).abs() < 1e-6, "{dual_obj} vs {}", sol.cost);
    }

    #[test]
    fn dualize_requires_pattern_with_storage() {
        let case = bundled::toy3();
        let plan = ExpansionPlan::empty(&case);
        let err = dualize_operational_lp(&case, &plan, ModeInput::Binary, &FormulationOptions::default()).unwrap_err();
        assert!(matches!(err, FormulationError::MissingPattern));
    }

    #[test]
    fn pattern_shape_is_checked() {
        let case = bundled::toy3();
        let plan = ExpansionPlan::empty(&case);
        let bad = ModePattern { charging: vec![] };
        let mut b = ModelBuilder::default();
        let u = DeviationVector::nominal(&case);
        let err = add_operational_block(&mut b, &case, PlanInput::Fixed(&plan), DeviationInput::Fixed(&u), ModeInput::Fixed(&bad), &FormulationOptions::default(), "")
            .unwrap_err();
        assert!(matches!(err, FormulationError::PatternShape(_)));
    }

    #[test]
    fn empty_master_with_zero_budget() {
        let mut case = bundled::toy2();
        case.economics.investment_budget = 0.0;
        let m = build_master(&case, &[], &FormulationOptions::default()).unwrap();
        let r = m.solve(&solver()).unwrap();
        assert!(r.objective.abs() < 1e-12);
        assert!(m.plan.decode(&r.values).is_empty());
        assert_eq!(r.value(m.eta), 0.0);
    }

    #[test]
    fn zero_budget_inner_master_is_min_over_patterns() {
        let case = bundled::toy3();
        let plan = ExpansionPlan::from_entries(&case, &[], &[(3, 1)]).unwrap();
        let opts = FormulationOptions::default();
        let u = DeviationVector::nominal(&case);
        let sol = solve_operational(&case, &plan, &u, &opts, &solver()).unwrap();
        let p1 = sol.modes.unwrap();
        let mut p2 = p1.clone();
        for slot in &mut p2.charging {
            for day in slot {
                for z in day {
                    *z = !*z;
                }
            }
        }
        let standalone: Vec<f64> = [&p1, &p2]
            .iter()
            .map(|p| dualize_operational_lp(&case, &plan, ModeInput::Fixed(p), &opts).unwrap().solve_at(&u.as_values(), &solver()).unwrap())
            .collect();
        let im = build_inner_master(&case, &plan, &[Some(p1), Some(p2)], &opts).unwrap();
        let (xi, worst, _) = im.solve(&solver()).unwrap();
        assert_eq!(worst, u);
        let expected = standalone.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((xi - expected).abs() < 1e-6, "{xi} vs {expected}");
    }
}
