mod common;

use mbsplan_core::lp::{solve_lp, LpStatus};
use rayon::prelude::*;

#[test]
fn random_lps_match_vertex_enumeration() {
    let mismatches: Vec<String> = (0..500u64)
        .into_par_iter()
        .filter_map(|seed| {
            let lp = common::random_small_lp(seed);
            let sol = solve_lp(&lp).expect("solver error");
            match (common::vertex_enumeration(&lp), sol.status) {
                (None, LpStatus::Infeasible) => None,
                (Some(best), LpStatus::Optimal) => {
                    let ok = (sol.objective_value - best).abs() <= 1e-7 * (1.0 + best.abs())
                        && lp.feasibility_report(&sol.variables).is_feasible();
                    (!ok).then(|| format!("seed {seed}: simplex {} vs {best}", sol.objective_value))
                }
                (oracle, status) => Some(format!("seed {seed}: {status:?} vs oracle {oracle:?}")),
            }
        })
        .collect();
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}

#[test]
fn random_lps_include_both_outcomes() {
    let statuses: Vec<LpStatus> = (0..500u64)
        .map(|seed| solve_lp(&common::random_small_lp(seed)).unwrap().status)
        .collect();
    let optimal = statuses.iter().filter(|s| **s == LpStatus::Optimal).count();
    assert!(optimal > 100 && optimal < 500, "{optimal} optimal of 500");
}
