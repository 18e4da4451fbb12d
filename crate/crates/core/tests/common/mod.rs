#![allow(dead_code)]

use rand::Rng;

use robust_tnep::bundled;
use robust_tnep::case::{HourlyTable, PlanningCase};
use robust_tnep::formulation::{
    add_operational_block, storage_slots, DeviationInput, FormulationOptions, ModeInput, ModePattern, PlanInput,
};
use robust_tnep::milp::{self, ModelBuilder, ObjectiveSense, SolverConfig};
use robust_tnep::uncertainty::{group_sizes, DeviationVector};
use robust_tnep::{load_case, plan_capital_cost, ExpansionPlan};

/// Toy case with every budget at its group size.
pub fn maxed(case: &PlanningCase) -> PlanningCase {
    let (nd, ng, nw) = group_sizes(case);
    case.with_budgets(nd, ng, nw).unwrap()
}

pub fn toys() -> Vec<PlanningCase> {
    vec![maxed(&bundled::toy2()), maxed(&bundled::toy3())]
}

/// Random plan within the investment budget.
pub fn random_plan(case: &PlanningCase, rng: &mut impl Rng) -> ExpansionPlan {
    loop {
        let plan = draw_plan(case, rng);
        if plan.validate(case).is_ok() && !plan_capital_cost(&plan, case).unwrap().over_budget {
            return plan;
        }
    }
}

fn draw_plan(case: &PlanningCase, rng: &mut impl Rng) -> ExpansionPlan {
    ExpansionPlan {
        lines_built: case.corridors.iter().map(|c| rng.gen_range(0..=c.candidate_count())).collect(),
        storage_built: case
            .storage_units
            .iter()
            .map(|s| if s.is_candidate() { rng.gen_range(0..=s.max_buildable) } else { 0 })
            .collect(),
    }
}

/// Random realization within the case's budgets.
pub fn random_u(case: &PlanningCase, rng: &mut impl Rng) -> DeviationVector {
    let spec = &case.uncertainty;
    let (nd, ng, nw) = group_sizes(case);
    let mut pick = |n: usize, budget: usize| {
        let mut flags = vec![false; n];
        let k = rng.gen_range(0..=budget.min(n));
        for i in rand::seq::index::sample(rng, n, k) {
            flags[i] = true;
        }
        flags
    };
    DeviationVector {
        demand: pick(nd, spec.gamma_demand),
        conventional: pick(ng, spec.gamma_conventional),
        wind: pick(nw, spec.gamma_wind),
    }
}

pub fn random_pattern(case: &PlanningCase, plan: &ExpansionPlan, rng: &mut impl Rng) -> ModePattern {
    let hours = case.hours_per_day();
    let days = case.representative_days.len();
    ModePattern {
        charging: storage_slots(case, PlanInput::Fixed(plan))
            .iter()
            .map(|_| (0..days).map(|_| (0..hours).map(|_| rng.gen_bool(0.5)).collect()).collect())
            .collect(),
    }
}

/// Operational LP at fixed plan, realization and mode pattern.
pub fn primal_with_pattern(
    case: &PlanningCase,
    plan: &ExpansionPlan,
    u: &DeviationVector,
    pattern: &ModePattern,
    opts: &FormulationOptions,
) -> f64 {
    let mut b = ModelBuilder::new(ObjectiveSense::Minimize);
    let ov = add_operational_block(
        &mut b,
        case,
        PlanInput::Fixed(plan),
        DeviationInput::Fixed(u),
        ModeInput::Fixed(pattern),
        opts,
        "",
    )
    .unwrap();
    b.set_objective(ObjectiveSense::Minimize, ov.cost);
    let r = milp::solve(&b, &SolverConfig::default()).unwrap();
    assert!(r.is_optimal(), "primal status {:?}", r.status);
    r.objective
}

pub const REGIME_A_DAYS: usize = 200;

/// 365 days in two regimes: high demand with low wind, then low demand with high wind.
///
/// Within a regime each value moves by at most `noise`; the regimes are 0.4 apart.
pub fn two_regime_series(noise: f64, rng: &mut impl Rng) -> HourlyTable {
    let days = (0..365)
        .map(|d| {
            let (demand, wind) = if d < REGIME_A_DAYS { (0.9, 0.1) } else { (0.4, 0.8) };
            let mut jitter = |v: f64, t: usize| v + 0.05 * (t as f64 / 23.0) + noise * rng.gen_range(-1.0..=1.0);
            vec![(0..24).map(|t| jitter(demand, t)).collect(), (0..24).map(|t| jitter(wind, t)).collect()]
        })
        .collect();
    HourlyTable {
        columns: vec!["d1".into(), "w1".into()],
        day_labels: (1..=365).map(|d| d.to_string()).collect(),
        days,
    }
}

/// Two buses: cheap and expensive thermal at bus 1, wind isolated at bus 2 behind a
/// candidate circuit, load at bus 1.
pub fn isolated_wind_case() -> PlanningCase {
    let hours = vec![1.0; 24];
    let doc = format!(
        r#"
name = "isolated-wind"

[[buses]]
id = 1
reference = true

[[buses]]
id = 2

[[generators]]
id = "g1"
bus = 1
technology = "conventional"
nominal_capacity = 60
operating_cost = 20

[[generators]]
id = "g2"
bus = 1
technology = "conventional"
nominal_capacity = 60
operating_cost = 70

[[generators]]
id = "w1"
bus = 2
technology = "wind"
nominal_capacity = 80
operating_cost = 0

[[demands]]
id = "d1"
bus = 1
nominal_level = 100
shed_cost = 1000

[[corridors]]
from_bus = 1
to_bus = 2
reactance = 0.1
capacity = 50
existing_count = 0
max_total_count = 2
circuit_capital_cost = 800

[representative_days]
[[representative_days.days]]
weight = 365
demand_factor = {{ d1 = {hours:?} }}
wind_cf = {{ w1 = {hours:?} }}

[uncertainty]
gamma_demand = 1

[economics]
amortization_rate = 0.11
investment_budget = 2000
"#
    );
    load_case(&doc, None).unwrap()
}
