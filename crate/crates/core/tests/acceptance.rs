//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mbsplan_core::allocation::{optimal_plan, peak_aggregate_demand, verify_plan, CostModel};
use mbsplan_core::dimensioning::{DemandMatrix, Dimensioner};
use mbsplan_core::lp::{solve_lp, LpStatus};
use mbsplan_core::pipeline::{
    density_ratio_scenario, parse_range, plan_scenario, run_pipeline, sweep_cost_ratio, PlanOutcome,
    PLAN_JSON, SAVINGS_JSON,
};
use mbsplan_core::qos::{mc_delay_oracle, overlap_area, QosModel};
use mbsplan_core::scenario::{synth_profile, ProfileKind, Scenario};
use mbsplan_core::units::per_km2_to_per_m2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SPOTS_PER_KM2: [(f64, f64); 3] = [(10.0, 100.0), (30.0, 1000.0), (100.0, 10000.0)];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn areas(scenario: &Scenario) -> Vec<f64> {
    scenario.regions.iter().map(|r| r.area_km2).collect()
}

/// Textbook intersection area of two discs with radii `a`, `b` and centers
/// `d` apart.
fn lens_area(a: f64, b: f64, d: f64) -> f64 {
    if d >= a + b {
        return 0.0;
    }
    if d <= (a - b).abs() {
        let m = a.min(b);
        return PI * m * m;
    }
    let ca = ((d * d + a * a - b * b) / (2.0 * d * a)).clamp(-1.0, 1.0);
    let cb = ((d * d + b * b - a * a) / (2.0 * d * b)).clamp(-1.0, 1.0);
    let k = ((-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b)).max(0.0);
    a * a * ca.acos() + b * b * cb.acos() - 0.5 * k.sqrt()
}

fn geometry() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let r = rng.random_range(1e-3..2.0);
        let x = rng.random_range(0.0..2.0);
        let theta = rng.random_range(-PI..PI);
        let d = (x * x + r * r + 2.0 * x * r * theta.sin()).max(0.0).sqrt();
        let expected = PI * x * x - lens_area(r, x, d);
        let got = overlap_area(r, x, theta).expect("valid sample");
        worst = worst.max((got - expected).abs());
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("max abs error {worst:.2e} over 10^4 samples, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn linearity(model: &QosModel) -> Outcome {
    let mut worst = 0.0f64;
    let mut zero_exact = true;
    for &(lb, lu) in &SPOTS_PER_KM2 {
        let (lb, lu) = (per_km2_to_per_m2(lb), per_km2_to_per_m2(lu));
        for u in [0.0, 0.5, 1.0] {
            let base = model.delay_given_utilization(lb, lu, u).unwrap();
            for c in [0.0, 0.5, 2.0] {
                let scaled = model.delay_given_utilization(lb, c * lu, u).unwrap();
                worst = worst.max(rel(scaled, c * base));
            }
            zero_exact &= model.delay_given_utilization(lb, 0.0, u).unwrap() == 0.0;
        }
    }
    outcome(
        worst <= 1e-12 && zero_exact,
        format!("max relative error {worst:.2e}, zero-user delay exact: {zero_exact}"),
    )
}

fn monte_carlo(scenario: &Scenario, model: &QosModel) -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for &(lb, lu) in &SPOTS_PER_KM2 {
        let (lb, lu) = (per_km2_to_per_m2(lb), per_km2_to_per_m2(lu));
        let analytic = model.delay_given_utilization(lb, lu, 1.0).unwrap();
        let simulated = mc_delay_oracle(lb, lu, 1.0, &scenario.radio, 10_000, 2024);
        worst = worst.max((analytic - simulated).abs() / simulated);
    }
    let elapsed = started.elapsed();
    outcome(
        worst < 0.05 && elapsed < Duration::from_secs(120),
        format!("max relative gap {worst:.4} at 10^4 trials, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn quadrature_stability(scenario: &Scenario, model: &QosModel) -> Outcome {
    let fine = QosModel::new(scenario.radio, scenario.quadrature.refined()).unwrap();
    let mut worst = 0.0f64;
    for &(lb, lu) in &SPOTS_PER_KM2 {
        let (lb, lu) = (per_km2_to_per_m2(lb), per_km2_to_per_m2(lu));
        let coarse = model.evaluate(lb, lu).unwrap().delay_s_per_bit;
        let refined = fine.evaluate(lb, lu).unwrap().delay_s_per_bit;
        worst = worst.max(rel(coarse, refined));
    }
    outcome(worst < 1e-4, format!("max relative change {worst:.2e} on doubling nodes"))
}

fn density_oracle(scenario: &Scenario) -> Outcome {
    let dimensioner = Dimensioner::new(scenario.radio, scenario.quadrature).unwrap();
    let model = dimensioner.model();
    let tau0 = model.target_delay();
    let mut worst_cells = 0.0f64;
    let mut monotone = true;
    for &(_, lu) in &SPOTS_PER_KM2 {
        let lu = per_km2_to_per_m2(lu);
        let solved = dimensioner.solve(lu).unwrap().density;
        let meets = |lb: f64| model.evaluate(lb, lu).unwrap().delay_s_per_bit <= tau0;
        let (lo, hi) = (per_km2_to_per_m2(1e-2), per_km2_to_per_m2(1e5));
        match common::grid_min_density(meets, lo, hi, 2000) {
            Some((k, grid)) => {
                let step = (grid[1] / grid[0]).ln();
                worst_cells = worst_cells.max((solved / grid[k]).ln().abs() / step);
            }
            None => worst_cells = f64::INFINITY,
        }
        let check: Vec<f64> = (0..50)
            .map(|i| per_km2_to_per_m2(1e-1 * 1e6f64.powf(i as f64 / 49.0)))
            .collect();
        let delays: Vec<f64> = check
            .iter()
            .map(|&lb| model.evaluate(lb, lu).unwrap().delay_s_per_bit)
            .collect();
        monotone &= delays.windows(2).all(|w| w[1] <= w[0]);
    }
    outcome(
        worst_cells <= 1.0 && monotone,
        format!("max distance to grid minimum {worst_cells:.3} cells, delay non-increasing in density: {monotone}"),
    )
}

fn lp_correctness() -> Outcome {
    let demand = DemandMatrix::from_rows_per_km2(&[vec![10.0, 2.0], vec![2.0, 10.0]]);
    let plan = optimal_plan(&demand, &[1.0, 1.0], &CostModel::default()).unwrap();
    let report = mbsplan_core::allocation::savings(&plan, &demand, &[1.0, 1.0]);
    let static_km2: Vec<f64> = plan.static_density.iter().map(|s| s * 1e6).collect();
    let hand_ok = (plan.objective_value - 12.0).abs() <= 1e-7
        && static_km2.iter().all(|s| (s - 2.0).abs() <= 1e-7)
        && (plan.fleet_size - 8.0).abs() <= 1e-7
        && (report.total_saving_fraction - 0.4).abs() <= 1e-7
        && report
            .per_region_static_saving_fraction
            .iter()
            .all(|s| (s - 0.8).abs() <= 1e-7);

    let mismatches: usize = (0..500u64)
        .into_par_iter()
        .filter(|&seed| {
            let lp = common::random_small_lp(seed);
            let solved = solve_lp(&lp).unwrap();
            match (common::vertex_enumeration(&lp), solved.status) {
                (Some(best), LpStatus::Optimal) => {
                    (solved.objective_value - best).abs() > 1e-7 * (1.0 + best.abs())
                        || !lp.feasibility_report(&solved.variables).is_feasible()
                }
                (None, LpStatus::Infeasible) => false,
                _ => true,
            }
        })
        .count();
    outcome(
        hand_ok && mismatches == 0,
        format!(
            "hand instance objective {:.9}, M {:.9}; {mismatches}/500 random programs disagree with vertex enumeration",
            plan.objective_value, plan.fleet_size
        ),
    )
}

fn peak_aggregate(points: &[(f64, Scenario, PlanOutcome)]) -> Outcome {
    let mut worst = 0.0f64;
    for (_, scenario, o) in points {
        // independent recount from the demand matrix
        let peak = (0..o.demand.slots())
            .map(|j| {
                (0..o.demand.regions())
                    .map(|z| o.demand.values.get(j, z) * 1e6 * scenario.regions[z].area_km2)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        worst = worst.max(rel(o.plan.objective_value, peak));
        worst = worst.max(rel(peak_aggregate_demand(&o.demand, &areas(scenario)), peak));
    }
    outcome(
        worst <= 1e-7,
        format!("max relative gap {worst:.2e} over default and {} sweep points", points.len() - 1),
    )
}

fn closed_system(points: &[(f64, Scenario, PlanOutcome)], cost_plans: &[PlanOutcome], base: &Scenario) -> Outcome {
    let mut worst = 0.0f64;
    let mut violations = 0;
    let all = points
        .iter()
        .map(|(_, s, o)| (s, o))
        .chain(cost_plans.iter().map(|o| (base, o)));
    let mut count = 0;
    for (scenario, o) in all {
        count += 1;
        let a = areas(scenario);
        let per_slot: Vec<f64> = (0..o.demand.slots())
            .map(|j| (0..a.len()).map(|z| o.plan.mbs_schedule.get(j, z) * 1e6 * a[z]).sum())
            .collect();
        let scale = per_slot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            let spread = per_slot.iter().fold(0.0f64, |m, v| m.max((v - per_slot[0]).abs()));
            worst = worst.max(spread / scale);
            worst = worst.max((per_slot[0] - o.plan.fleet_size).abs() / scale);
        }
        violations += verify_plan(&o.plan, &o.demand, &a).len();
    }
    outcome(
        worst <= 1e-8 && violations == 0,
        format!("{count} plans: max relative slot imbalance {worst:.2e}, {violations} verification violations"),
    )
}

fn trends(points: &[(f64, Scenario, PlanOutcome)], base: &Scenario) -> Outcome {
    let sweep: Vec<&(f64, Scenario, PlanOutcome)> = points.iter().skip(1).collect();
    let savings: Vec<f64> = sweep.iter().map(|p| p.2.report.total_saving_fraction).collect();
    let band = savings.iter().all(|&s| s > 0.0 && (0.05..=0.35).contains(&s));

    // One ulp of noise in an unchanged region must not count as an increase.
    let static_monotone = (0..base.num_regions()).all(|z| {
        sweep.windows(2).all(|w| {
            let (before, after) = (
                w[0].2.report.per_region_static_saving_fraction[z],
                w[1].2.report.per_region_static_saving_fraction[z],
            );
            after <= before + 1e-9
        })
    });

    let o = &points[0].2;
    let residential = base.region_index("residential").expect("reference has a residential region");
    let users = &o.users.values;
    let peak_users = users.column_max()[residential];
    let peak_fraction = (0..users.slots())
        .filter(|&j| users.get(j, residential) >= 0.9 * peak_users)
        .map(|j| o.report.mbs_fraction_series.get(j, residential))
        .fold(0.0, f64::max);

    let ratios = parse_range("1:3:9").unwrap();
    let cost = sweep_cost_ratio(base, &ratios).unwrap();
    let fleet_monotone = cost.failures.is_empty()
        && cost
            .fleet_size
            .windows(2)
            .all(|w| w[1] >= w[0] - 1e-9 * (1.0 + w[0]));

    outcome(
        band && static_monotone && peak_fraction > 0.8 && fleet_monotone,
        format!(
            "(a) saving in [{:.4}, {:.4}] {band}; (b) static saving non-increasing {static_monotone}; \
             (c) residential peak fleet share {peak_fraction:.3}; (d) fleet {:.2} -> {:.2} non-decreasing {fleet_monotone}",
            savings.iter().copied().fold(f64::INFINITY, f64::min),
            savings.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            cost.fleet_size[0],
            cost.fleet_size[cost.fleet_size.len() - 1],
        ),
    )
}

fn perfect_correlation(base: &Scenario) -> Outcome {
    let mut scenario = base.clone();
    for profile in scenario.profiles.iter_mut() {
        let region_id = profile.region_id.clone();
        *profile = synth_profile(ProfileKind::Office);
        profile.region_id = region_id;
    }
    let o = plan_scenario(&scenario, &CostModel::default()).unwrap();
    let s = o.report.total_saving_fraction;
    outcome(s.abs() <= 1e-7, format!("total saving {s:.3e}, fleet {:.3e}", o.plan.fleet_size))
}

fn end_to_end(config: &Path) -> (Outcome, Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let first = run_pipeline(config, &dir.path().join("a"));
    let elapsed = started.elapsed();
    let second = run_pipeline(config, &dir.path().join("b"));
    let runtime = outcome(
        first.is_ok() && elapsed < Duration::from_secs(120),
        format!("default pipeline in {:.2}s", elapsed.as_secs_f64()),
    );
    let determinism = match (first, second) {
        (Ok(a), Ok(b)) => {
            let same = |name: &str| {
                fs::read(a.plan_json_path.with_file_name(name)).unwrap()
                    == fs::read(b.plan_json_path.with_file_name(name)).unwrap()
            };
            let (plan, savings) = (same(PLAN_JSON), same(SAVINGS_JSON));
            outcome(plan && savings, format!("plan identical {plan}, savings identical {savings}"))
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("run failed: {e}")),
    };
    (runtime, determinism)
}

fn main() -> ExitCode {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.json");
    let base = Scenario::reference();
    let model = QosModel::new(base.radio, base.quadrature).unwrap();

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 geometry oracle", geometry()));
    results.push(("2 delay linearity in user density", linearity(&model)));
    results.push(("3 Monte Carlo equivalence", monte_carlo(&base, &model)));
    results.push(("4 quadrature stability", quadrature_stability(&base, &model)));
    results.push(("5 minimum density vs grid search", density_oracle(&base)));
    results.push(("6 LP correctness", lp_correctness()));

    // default scenario first, then density ratios 1..10
    let mut points: Vec<(f64, Scenario, PlanOutcome)> =
        vec![(f64::NAN, base.clone(), plan_scenario(&base, &CostModel::default()).unwrap())];
    let swept: Vec<(f64, Scenario, PlanOutcome)> = (1..=10)
        .into_par_iter()
        .map(|r| {
            let ratio = f64::from(r);
            let s = density_ratio_scenario(&base, ratio).unwrap();
            let o = plan_scenario(&s, &CostModel::default()).unwrap();
            (ratio, s, o)
        })
        .collect();
    points.extend(swept);
    let cost_plans: Vec<PlanOutcome> = [1.0, 1.5, 2.0, 3.0]
        .iter()
        .map(|&c| {
            plan_scenario(
                &base,
                &CostModel {
                    static_unit_cost: c,
                    mobile_unit_cost: 1.0,
                },
            )
            .unwrap()
        })
        .collect();

    results.push(("7 peak-aggregate identity", peak_aggregate(&points)));
    results.push(("8 closed-system invariant", closed_system(&points, &cost_plans, &base)));
    results.push(("9 qualitative trends", trends(&points, &base)));
    results.push(("10 identical-profile null", perfect_correlation(&base)));
    let (runtime, determinism) = end_to_end(&config);
    results.push(("11 end-to-end runtime", runtime));
    results.push(("12 determinism", determinism));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
