//! Robust transmission expansion planning with energy storage.
//!
//! The planner picks new circuits and storage units that minimize annualized
//! investment plus worst-case operating cost over a budgeted uncertainty set of
//! demand and generation deviations. Storage charge/discharge exclusivity is
//! enforced with binary recourse variables, so the worst-case subproblem is a
//! max-min with integer recourse; it is solved by an inner column-and-constraint
//! loop nested inside the outer one ([`ccg::solve_robust_tnep`]).
//!
//! Independent ground truth for small instances lives in [`oracle`].

pub mod bundled;
pub mod case;
pub mod ccg;
pub mod clustering;
pub mod formulation;
pub mod milp;
pub mod oracle;
pub mod plan;
pub mod report;
pub mod uncertainty;
pub mod verify;

pub use case::{load_case, load_case_file, PlanningCase};
pub use ccg::{solve_robust_tnep, CcgConfig, RobustSolution};
pub use plan::{plan_capital_cost, ExpansionPlan};
pub use uncertainty::{DeviationVector, UncertaintySpec};
