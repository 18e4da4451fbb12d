//! Robust expansion of the Garver system with the nested decomposition, printing the
//! bound trajectory of both loops.
//!
//! ```text
//! cargo run --release --example nested_ccg_garver               # reduced case, budgets (1,0,0)
//! cargo run --release --example nested_ccg_garver -- 0 1 1
//! cargo run --release --example nested_ccg_garver -- 0 0 0 full # ten full days
//! ```

use robust_tnep::{bundled, solve_robust_tnep, CcgConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let gamma = |i: usize, default: usize| args.get(i).map_or(default, |s| s.parse().expect("budget is an integer"));
    let base = if args.get(3).is_some_and(|s| s == "full") { bundled::garver() } else { bundled::garver_reduced() };
    let case = base.with_budgets(gamma(0, 1), gamma(1, 0), gamma(2, 0)).unwrap();

    let sol = match solve_robust_tnep(&case, &CcgConfig::default()) {
        Ok(s) => s,
        Err(robust_tnep::ccg::CcgError::NotConverged(s)) => {
            eprintln!("stopped before convergence");
            *s
        }
        Err(e) => panic!("{e}"),
    };
    for o in &sol.log.outer {
        println!("outer {}: LB {:.6} UB {:.6} capital {:.1} next {}", o.index, o.lower, o.upper, o.capital_cost, o.next_u.label());
        for i in &o.inner {
            println!("    inner {}: u {} cost {:.6} [{:.6}, {:.6}]", i.index, i.u.label(), i.cost, i.lower, i.upper);
        }
    }
    println!("lines {:?}, storage {:?}", sol.plan.line_entries(&case), sol.plan.storage_entries(&case));
    println!(
        "capital {:.1}, total annual cost {:.1} (10³ €), worst case {} in {:.1} s",
        sol.capital_cost,
        sol.total_annual_cost,
        sol.worst_case_u.label(),
        sol.seconds
    );
}
