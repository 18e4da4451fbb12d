mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robust_tnep::bundled;
use robust_tnep::ccg::inner_loop;
use robust_tnep::formulation::{build_master, FormulationOptions};
use robust_tnep::milp::SolverConfig;
use robust_tnep::oracle::{brute_force_worst_case, extensive_form, OracleConfig};
use robust_tnep::uncertainty::enumerate_vertices;
use robust_tnep::{solve_robust_tnep, CcgConfig, DeviationVector, ExpansionPlan};

use common::{maxed, random_plan};

#[test]
fn master_objective_grows_with_scenarios() {
    let case = maxed(&bundled::toy3());
    let opts = FormulationOptions::default();
    let vertices = enumerate_vertices(&case.uncertainty, &case);
    let mut master = build_master(&case, &[DeviationVector::nominal(&case)], &opts).unwrap();
    let mut last = master.solve(&SolverConfig::default()).unwrap().objective;
    for u in vertices.iter().step_by(5) {
        master.add_scenario(&case, u, &opts).unwrap();
        let obj = master.solve(&SolverConfig::default()).unwrap().objective;
        assert!(obj >= last - 1e-9, "{obj} < {last}");
        last = obj;
    }
}

#[test]
fn toy3_all_unit_budgets_match_extensive_form() {
    let case = bundled::toy3().with_budgets(1, 1, 1).unwrap();
    let ccg = solve_robust_tnep(&case, &CcgConfig::default()).unwrap();
    let ef = extensive_form(&case, &OracleConfig::default()).unwrap();
    assert!((ccg.upper_bound - ef.upper_bound).abs() <= 1e-6, "{} vs {}", ccg.upper_bound, ef.upper_bound);
    assert!(ef.upper_bound <= ccg.upper_bound + 1e-6 && ef.upper_bound >= ccg.lower_bound - 1e-6);
    ccg.log.check_bounds().unwrap();
}

#[test]
fn zero_budget_run_matches_deterministic_expansion() {
    let case = bundled::toy3();
    let ccg = solve_robust_tnep(&case, &CcgConfig::default()).unwrap();
    let ef = extensive_form(&case, &OracleConfig::default()).unwrap();
    assert_eq!(ccg.log.outer.len(), 1);
    assert!((ccg.upper_bound - ef.upper_bound).abs() <= 1e-6);
}

#[test]
fn inner_loop_matches_brute_force_on_toys() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in [maxed(&bundled::toy2()), maxed(&bundled::toy3())] {
        for _ in 0..3 {
            let plan = random_plan(&case, &mut rng);
            let inner = inner_loop(&case, &plan, &CcgConfig::default()).unwrap();
            let brute = brute_force_worst_case(&case, &plan, &OracleConfig::default()).unwrap();
            assert!(inner.converged);
            assert!((inner.upper - brute.cost).abs() <= 1e-6, "{}: {} vs {}", case.name, inner.upper, brute.cost);
        }
    }
}

#[test]
fn inner_costs_never_exceed_the_preceding_bound() {
    let case = maxed(&bundled::toy3());
    let plan = ExpansionPlan::from_entries(&case, &[(2, 3, 1)], &[(3, 2)]).unwrap();
    let inner = inner_loop(&case, &plan, &CcgConfig::default()).unwrap();
    for pair in inner.iterations.windows(2) {
        assert!(pair[1].cost <= pair[0].upper + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn worst_case_cost_is_monotone_in_budgets(seed in any::<u64>(), toy in 0usize..2, grow in 0usize..3) {
        let base = if toy == 0 { bundled::toy2() } else { bundled::toy3() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = random_plan(&base, &mut rng);
        let small = base.with_budgets(0, 0, 0).unwrap();
        let mut gammas = [0usize; 3];
        gammas[grow] = 1;
        let (nd, ng, nw) = robust_tnep::uncertainty::group_sizes(&base);
        let sizes = [nd, ng, nw];
        let gammas: Vec<usize> = gammas.iter().zip(sizes).map(|(g, n)| (*g).min(n)).collect();
        let mid = base.with_budgets(gammas[0], gammas[1], gammas[2]).unwrap();
        let big = maxed(&base);
        let cfg = OracleConfig::default();
        let a = brute_force_worst_case(&small, &plan, &cfg).unwrap().cost;
        let b = brute_force_worst_case(&mid, &plan, &cfg).unwrap().cost;
        let c = brute_force_worst_case(&big, &plan, &cfg).unwrap().cost;
        prop_assert!(a <= b + 1e-9 && b <= c + 1e-9, "{} {} {}", a, b, c);
    }
}
