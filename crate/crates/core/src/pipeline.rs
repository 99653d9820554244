//! End-to-end runs: scenario → user densities → baseline → plan → savings,
//! plus the two parameter sweeps and the oracle validation report.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocation::{
    optimal_plan, savings, verify_plan, CostModel, DeploymentPlan, SavingsReport, TIE_BREAK_EPSILON,
};
use crate::dimensioning::{demand_matrix, static_only_deployment, DemandMatrix, Dimensioner};
use crate::error::{Error, Result};
use crate::matrix::SlotRegionMatrix;
use crate::qos::{mc_delay_estimate, QosModel};
use crate::scenario::{load_scenario, user_density_matrix, Region, Scenario, UserDensityMatrix};
use crate::units::{per_km2_to_per_m2, per_m2_to_per_km2};

pub const DEMAND_CSV: &str = "demand.csv";
pub const PLAN_JSON: &str = "plan.json";
pub const SAVINGS_JSON: &str = "savings.json";
pub const SERIES_CSV: &str = "series.csv";
pub const EXCESS_CSV: &str = "excess.csv";
pub const MBS_FRACTION_CSV: &str = "mbs_fraction.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub users: UserDensityMatrix,
    pub demand: DemandMatrix,
    pub plan: DeploymentPlan,
    pub report: SavingsReport,
}

fn areas_km2(regions: &[Region]) -> Vec<f64> {
    regions.iter().map(|r| r.area_km2).collect()
}

/// Runs every stage in memory and checks the resulting plan.
pub fn plan_scenario(scenario: &Scenario, costs: &CostModel) -> Result<PlanOutcome> {
    scenario.validate()?;
    let users = user_density_matrix(scenario);
    let demand = demand_matrix(&users, &scenario.radio, &scenario.quadrature)?;
    plan_for_demand(scenario, users, demand, costs)
}

fn plan_for_demand(
    scenario: &Scenario,
    users: UserDensityMatrix,
    demand: DemandMatrix,
    costs: &CostModel,
) -> Result<PlanOutcome> {
    let areas = areas_km2(&scenario.regions);
    let plan = optimal_plan(&demand, &areas, costs)?;
    let violations = verify_plan(&plan, &demand, &areas);
    if !violations.is_empty() {
        return Err(Error::Verification(format!(
            "optimal plan violates {} constraint(s), first: {:?}",
            violations.len(),
            violations[0]
        )));
    }
    let report = savings(&plan, &demand, &areas);
    Ok(PlanOutcome {
        users,
        demand,
        plan,
        report,
    })
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_path: String,
    pub config_sha256: String,
    pub wall_time_s: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub demand_csv_path: PathBuf,
    pub plan_json_path: PathBuf,
    pub savings_json_path: PathBuf,
    pub series_csv_path: PathBuf,
    pub excess_csv_path: PathBuf,
    pub mbs_fraction_csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    pub outcome: PlanOutcome,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads the configuration at `config_path`, plans it and writes every
/// artifact into `out_dir` (created if missing). Files written before a
/// failure are removed again.
pub fn run_pipeline(config_path: &Path, out_dir: &Path) -> Result<RunArtifacts> {
    let started = Instant::now();
    let bytes = fs::read(config_path).map_err(|e| Error::io(config_path, e))?;
    let document = String::from_utf8(bytes.clone()).map_err(|e| {
        Error::InvalidArgument(format!("{}: not UTF-8: {e}", config_path.display()))
    })?;
    let base_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let scenario = load_scenario(&document, base_dir)?;
    let outcome = plan_scenario(&scenario, &CostModel::default())?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut writer = ArtifactWriter::new(out_dir);
    let result = (|| -> Result<RunArtifacts> {
        let demand_csv_path = writer.write(DEMAND_CSV, |p| write_demand_csv(p, &scenario, &outcome))?;
        let plan_json_path = writer.write(PLAN_JSON, |p| write_json(p, &PlanExport::new(&scenario, &outcome.plan)))?;
        let savings_json_path =
            writer.write(SAVINGS_JSON, |p| write_json(p, &SavingsExport::new(&scenario, &outcome.report)))?;
        let series_csv_path = writer.write(SERIES_CSV, |p| write_series_csv(p, &scenario, &outcome))?;
        let excess_csv_path = writer.write(EXCESS_CSV, |p| {
            write_matrix_csv(p, &scenario, &outcome.report.excess_capacity_series.map(per_m2_to_per_km2))
        })?;
        let mbs_fraction_csv_path = writer.write(MBS_FRACTION_CSV, |p| {
            write_matrix_csv(p, &scenario, &outcome.report.mbs_fraction_series)
        })?;
        let manifest = Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_path: config_path.display().to_string(),
            config_sha256: sha256_hex(&bytes),
            wall_time_s: started.elapsed().as_secs_f64(),
            files: writer.names(),
        };
        let manifest_path = writer.write(MANIFEST_JSON, |p| write_json(p, &manifest))?;
        Ok(RunArtifacts {
            demand_csv_path,
            plan_json_path,
            savings_json_path,
            series_csv_path,
            excess_csv_path,
            mbs_fraction_csv_path,
            manifest_path,
            manifest,
            outcome: outcome.clone(),
        })
    })();
    if result.is_err() {
        writer.remove_all();
    }
    result
}

/// Tracks written files so a failed run can remove them.
struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&Path) -> Result<()>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        f(&path)?;
        Ok(path)
    }

    fn names(&self) -> Vec<String> {
        self.written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect()
    }

    fn remove_all(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

fn finish_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRow {
    pub slot: usize,
    pub time_h: f64,
    pub region_id: String,
    pub user_density_per_km2: f64,
    pub min_bs_density_per_km2: f64,
    pub achieved_delay_s_per_bit: f64,
}

pub fn demand_rows(scenario: &Scenario, users: &UserDensityMatrix, demand: &DemandMatrix) -> Vec<DemandRow> {
    let mut rows = Vec::with_capacity(demand.slots() * demand.regions());
    for j in 0..demand.slots() {
        for (z, region) in scenario.regions.iter().enumerate() {
            rows.push(DemandRow {
                slot: j,
                time_h: users.slot_times_h[j],
                region_id: region.id.clone(),
                user_density_per_km2: per_m2_to_per_km2(users.values.get(j, z)),
                min_bs_density_per_km2: per_m2_to_per_km2(demand.values.get(j, z)),
                achieved_delay_s_per_bit: demand.diagnostics(j, z).achieved_delay_s_per_bit,
            });
        }
    }
    rows
}

pub fn write_demand_csv(path: &Path, scenario: &Scenario, outcome: &PlanOutcome) -> Result<()> {
    finish_csv(path, demand_rows(scenario, &outcome.users, &outcome.demand))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub slot: usize,
    pub time_h: f64,
    pub region_id: String,
    pub baseline_per_km2: f64,
    pub static_only_per_km2: f64,
    pub static_per_km2: f64,
    pub mbs_per_km2: f64,
    pub total_per_km2: f64,
    pub excess_per_km2: f64,
    pub mbs_fraction: f64,
}

pub fn series_rows(scenario: &Scenario, outcome: &PlanOutcome) -> Vec<SeriesRow> {
    let static_only = static_only_deployment(&outcome.demand);
    let demand = &outcome.demand;
    let mut rows = Vec::with_capacity(demand.slots() * demand.regions());
    for j in 0..demand.slots() {
        for (z, region) in scenario.regions.iter().enumerate() {
            let baseline = per_m2_to_per_km2(demand.values.get(j, z));
            let stat = per_m2_to_per_km2(outcome.plan.static_density[z]);
            let mbs = per_m2_to_per_km2(outcome.plan.mbs_schedule.get(j, z));
            let total = stat + mbs;
            rows.push(SeriesRow {
                slot: j,
                time_h: outcome.users.slot_times_h[j],
                region_id: region.id.clone(),
                baseline_per_km2: baseline,
                static_only_per_km2: per_m2_to_per_km2(static_only[z]),
                static_per_km2: stat,
                mbs_per_km2: mbs,
                total_per_km2: total,
                excess_per_km2: total - baseline,
                mbs_fraction: outcome.report.mbs_fraction_series.get(j, z),
            });
        }
    }
    rows
}

pub fn write_series_csv(path: &Path, scenario: &Scenario, outcome: &PlanOutcome) -> Result<()> {
    finish_csv(path, series_rows(scenario, outcome))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub slot: usize,
    pub time_h: f64,
    pub region_id: String,
    pub value: f64,
}

/// `slot,time_h,region_id,value`, one row per cell.
pub fn write_matrix_csv(path: &Path, scenario: &Scenario, matrix: &SlotRegionMatrix) -> Result<()> {
    let times = scenario.slot_times_h();
    let rows = (0..matrix.slots()).flat_map(|j| {
        let times = &times;
        scenario.regions.iter().enumerate().map(move |(z, region)| MatrixRow {
            slot: j,
            time_h: times[j],
            region_id: region.id.clone(),
            value: matrix.get(j, z),
        })
    });
    finish_csv(path, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanExport {
    pub region_ids: Vec<String>,
    pub fleet_size: f64,
    pub fleet_size_ceil: u64,
    pub static_density_per_km2: BTreeMap<String, f64>,
    /// One row per slot, columns in `region_ids` order.
    pub mbs_schedule_per_km2: Vec<Vec<f64>>,
    pub objective_value: f64,
    pub cost_model: CostModel,
    pub tie_break_epsilon: f64,
}

impl PlanExport {
    pub fn new(scenario: &Scenario, plan: &DeploymentPlan) -> Self {
        Self {
            region_ids: scenario.regions.iter().map(|r| r.id.clone()).collect(),
            fleet_size: plan.fleet_size,
            fleet_size_ceil: plan.fleet_size_ceil(),
            static_density_per_km2: scenario
                .regions
                .iter()
                .zip(&plan.static_density)
                .map(|(r, s)| (r.id.clone(), per_m2_to_per_km2(*s)))
                .collect(),
            mbs_schedule_per_km2: plan.mbs_schedule.map(per_m2_to_per_km2).to_rows(),
            objective_value: plan.objective_value,
            cost_model: plan.cost_model,
            tie_break_epsilon: TIE_BREAK_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsExport {
    pub region_ids: Vec<String>,
    pub static_only_total: f64,
    pub hybrid_total: f64,
    pub total_saving_fraction: f64,
    pub cost_saving_fraction: f64,
    pub per_region_static_saving_fraction: BTreeMap<String, f64>,
    pub peak_aggregate_demand: f64,
    pub excess_capacity_series_per_km2: Vec<Vec<f64>>,
    pub mbs_fraction_series: Vec<Vec<f64>>,
}

impl SavingsExport {
    pub fn new(scenario: &Scenario, report: &SavingsReport) -> Self {
        Self {
            region_ids: scenario.regions.iter().map(|r| r.id.clone()).collect(),
            static_only_total: report.static_only_total,
            hybrid_total: report.hybrid_total,
            total_saving_fraction: report.total_saving_fraction,
            cost_saving_fraction: report.cost_saving_fraction,
            per_region_static_saving_fraction: scenario
                .regions
                .iter()
                .zip(&report.per_region_static_saving_fraction)
                .map(|(r, f)| (r.id.clone(), *f))
                .collect(),
            peak_aggregate_demand: report.peak_aggregate_demand,
            excess_capacity_series_per_km2: report.excess_capacity_series.map(per_m2_to_per_km2).to_rows(),
            mbs_fraction_series: report.mbs_fraction_series.to_rows(),
        }
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Parses `start:stop:count` into `count` evenly spaced values, both ends
/// included.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidArgument(format!("range '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad("expected start:stop:count"));
    };
    let start: f64 = start.trim().parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad("stop is not a number"))?;
    let count: usize = count.trim().parse().map_err(|_| bad("count is not a positive integer"))?;
    if !(start.is_finite() && stop.is_finite()) {
        return Err(bad("bounds must be finite"));
    }
    match count {
        0 => Err(bad("count must be >= 1")),
        1 => Ok(vec![start]),
        n => Ok((0..n)
            .map(|i| {
                if i == n - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: String,
    pub region_ids: Vec<String>,
    pub parameter_values: Vec<f64>,
    pub total_saving_fraction: Vec<f64>,
    /// One row per parameter value, one column per region.
    pub per_region_static_saving: Vec<Vec<f64>>,
    pub fleet_size: Vec<f64>,
    pub objective: Vec<f64>,
    /// Points that failed, with the error; their entries above are NaN.
    pub failures: Vec<(f64, String)>,
}

#[derive(Debug, Clone)]
struct SweepPoint {
    saving: f64,
    static_saving: Vec<f64>,
    fleet: f64,
    objective: f64,
}

fn collect_sweep(
    parameter: &str,
    scenario: &Scenario,
    values: &[f64],
    points: Vec<Result<SweepPoint>>,
) -> SweepResult {
    let z = scenario.num_regions();
    let mut out = SweepResult {
        parameter: parameter.to_string(),
        region_ids: scenario.regions.iter().map(|r| r.id.clone()).collect(),
        parameter_values: values.to_vec(),
        total_saving_fraction: Vec::new(),
        per_region_static_saving: Vec::new(),
        fleet_size: Vec::new(),
        objective: Vec::new(),
        failures: Vec::new(),
    };
    for (&v, point) in values.iter().zip(points) {
        match point {
            Ok(p) => {
                out.total_saving_fraction.push(p.saving);
                out.per_region_static_saving.push(p.static_saving);
                out.fleet_size.push(p.fleet);
                out.objective.push(p.objective);
            }
            Err(e) => {
                out.total_saving_fraction.push(f64::NAN);
                out.per_region_static_saving.push(vec![f64::NAN; z]);
                out.fleet_size.push(f64::NAN);
                out.objective.push(f64::NAN);
                out.failures.push((v, e.to_string()));
            }
        }
    }
    out
}

/// The scenario with the second region's peak density set to
/// `peak_1/ratio` and its area scaled so its peak user count is unchanged.
pub fn density_ratio_scenario(base: &Scenario, ratio: f64) -> Result<Scenario> {
    if base.num_regions() < 2 {
        return Err(Error::InvalidArgument(
            "the density-ratio sweep needs at least two regions".into(),
        ));
    }
    if !(ratio.is_finite() && ratio >= 1.0) {
        return Err(Error::InvalidArgument(format!("density ratio {ratio} must be >= 1")));
    }
    let mut scenario = base.clone();
    let reference_peak = base.regions[0].peak_user_density_per_km2;
    let varied = &mut scenario.regions[1];
    let peak_users = varied.area_km2 * varied.peak_user_density_per_km2;
    varied.peak_user_density_per_km2 = reference_peak / ratio;
    if varied.peak_user_density_per_km2 <= 0.0 {
        return Err(Error::InvalidArgument(
            "the first region needs a positive peak density for a density-ratio sweep".into(),
        ));
    }
    varied.area_km2 = peak_users / varied.peak_user_density_per_km2;
    scenario.validate()?;
    Ok(scenario)
}

/// Full pipeline at every density ratio (first-to-second region peak user
/// density), holding the second region's peak user count fixed.
pub fn sweep_density_ratio(base: &Scenario, ratios: &[f64]) -> SweepResult {
    let points: Vec<Result<SweepPoint>> = ratios
        .par_iter()
        .map(|&ratio| {
            let scenario = density_ratio_scenario(base, ratio)?;
            let o = plan_scenario(&scenario, &CostModel::default())?;
            Ok(SweepPoint {
                saving: o.report.total_saving_fraction,
                static_saving: o.report.per_region_static_saving_fraction,
                fleet: o.plan.fleet_size,
                objective: o.plan.objective_value,
            })
        })
        .collect();
    collect_sweep("density_ratio", base, ratios, points)
}

/// One plan per static-to-mobile unit cost ratio (mobile cost fixed at 1)
/// on the scenario's baseline, which is computed once. The saving column
/// is the cost saving against an all-static network.
pub fn sweep_cost_ratio(base: &Scenario, ratios: &[f64]) -> Result<SweepResult> {
    base.validate()?;
    let users = user_density_matrix(base);
    let demand = demand_matrix(&users, &base.radio, &base.quadrature)?;
    let points: Vec<Result<SweepPoint>> = ratios
        .par_iter()
        .map(|&ratio| {
            if !(ratio.is_finite() && ratio >= 1.0) {
                return Err(Error::InvalidArgument(format!("cost ratio {ratio} must be >= 1")));
            }
            let costs = CostModel {
                static_unit_cost: ratio,
                mobile_unit_cost: 1.0,
            };
            let o = plan_for_demand(base, users.clone(), demand.clone(), &costs)?;
            Ok(SweepPoint {
                saving: o.report.cost_saving_fraction,
                static_saving: o.report.per_region_static_saving_fraction,
                fleet: o.plan.fleet_size,
                objective: o.plan.objective_value,
            })
        })
        .collect();
    Ok(collect_sweep("cost_ratio", base, ratios, points))
}

/// Writes `sweep` as CSV; `label` names the destination in errors.
pub fn write_sweep_csv<W: std::io::Write>(out: W, sweep: &SweepResult, label: &Path) -> Result<()> {
    write_sweep_records(csv::Writer::from_writer(out), sweep).map_err(|e| Error::csv(label, e))
}

fn write_sweep_records<W: std::io::Write>(
    mut w: csv::Writer<W>,
    sweep: &SweepResult,
) -> std::result::Result<(), csv::Error> {
    let mut header = vec![
        "parameter".to_string(),
        "total_saving_fraction".into(),
        "fleet_size".into(),
        "objective".into(),
    ];
    header.extend(sweep.region_ids.iter().map(|id| format!("static_saving_{id}")));
    w.write_record(&header)?;
    for i in 0..sweep.parameter_values.len() {
        let mut record = vec![
            sweep.parameter_values[i].to_string(),
            sweep.total_saving_fraction[i].to_string(),
            sweep.fleet_size[i].to_string(),
            sweep.objective[i].to_string(),
        ];
        record.extend(sweep.per_region_static_saving[i].iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Station and user densities (per km²) of the Monte Carlo spot checks.
pub const SPOT_DENSITIES_PER_KM2: [(f64, f64); 3] = [(10.0, 100.0), (30.0, 1000.0), (100.0, 10000.0)];
/// Relative tolerance of the Monte Carlo comparison.
pub const MC_REL_TOLERANCE: f64 = 0.05;
/// Log grid of the brute-force minimum-density oracle, BS/km².
pub const GRID_ORACLE_RANGE_PER_KM2: (f64, f64) = (1e-2, 1e5);
pub const GRID_ORACLE_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationCheck {
    pub name: String,
    pub analytic: f64,
    pub oracle: f64,
    /// Relative error for delay checks, grid cells for density checks.
    pub error: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "validation: {} trials, seed {}", self.trials, self.seed)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: analytic {:.6e}, oracle {:.6e}, error {:.3e} (limit {})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.analytic,
                c.oracle,
                c.error,
                c.threshold
            )?;
        }
        write!(
            f,
            "{}",
            if self.all_passed() {
                "all checks passed"
            } else {
                "some checks failed"
            }
        )
    }
}

/// First feasible point of the brute-force log grid and the grid itself.
pub fn grid_oracle_density(model: &QosModel, lambda_u: f64) -> Result<Option<(usize, Vec<f64>)>> {
    let (lo, hi) = GRID_ORACLE_RANGE_PER_KM2;
    let n = GRID_ORACLE_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| per_km2_to_per_m2(lo * (hi / lo).powf(i as f64 / (n - 1) as f64)))
        .collect();
    for (i, &g) in grid.iter().enumerate() {
        if model.evaluate(g, lambda_u)?.delay_s_per_bit <= model.target_delay() {
            return Ok(Some((i, grid)));
        }
    }
    Ok(None)
}

/// Analytic delay against the Monte Carlo simulator at the spot densities,
/// and the bisection minimum against a brute-force grid scan.
pub fn validate_scenario(scenario: &Scenario, trials: usize, seed: u64) -> Result<ValidationReport> {
    if trials < 1000 {
        return Err(Error::InvalidArgument(format!(
            "at least 1000 Monte Carlo trials are needed, got {trials}"
        )));
    }
    let dimensioner = Dimensioner::new(scenario.radio, scenario.quadrature)?;
    let model = dimensioner.model();
    let mut checks = Vec::new();

    for &(lb, lu) in &SPOT_DENSITIES_PER_KM2 {
        let (lb_m2, lu_m2) = (per_km2_to_per_m2(lb), per_km2_to_per_m2(lu));
        let analytic = model.delay_given_utilization(lb_m2, lu_m2, 1.0)?;
        let oracle = mc_delay_estimate(lb_m2, lu_m2, 1.0, &scenario.radio, trials, seed).mean;
        let error = ((analytic - oracle) / oracle).abs();
        checks.push(ValidationCheck {
            name: format!("delay at ({lb}, {lu})/km² vs simulation"),
            analytic,
            oracle,
            error,
            threshold: MC_REL_TOLERANCE,
            passed: error < MC_REL_TOLERANCE,
        });
    }

    let lb0 = per_km2_to_per_m2(SPOT_DENSITIES_PER_KM2[0].0);
    let analytic = model.delay_given_utilization(lb0, 0.0, 1.0)?;
    let oracle = mc_delay_estimate(lb0, 0.0, 1.0, &scenario.radio, trials, seed).mean;
    checks.push(ValidationCheck {
        name: "delay without users".into(),
        analytic,
        oracle,
        error: (analytic - oracle).abs(),
        threshold: 0.0,
        passed: analytic == 0.0 && oracle == 0.0,
    });

    for &(_, lu) in &SPOT_DENSITIES_PER_KM2 {
        let lu_m2 = per_km2_to_per_m2(lu);
        let analytic = dimensioner.solve(lu_m2)?.density;
        let (error, oracle) = match grid_oracle_density(model, lu_m2)? {
            Some((k, grid)) => {
                let step = (grid[1] / grid[0]).ln();
                ((analytic / grid[k]).ln().abs() / step, grid[k])
            }
            None => (f64::INFINITY, f64::NAN),
        };
        checks.push(ValidationCheck {
            name: format!("minimum density for {lu} users/km² vs grid scan"),
            analytic: per_m2_to_per_km2(analytic),
            oracle: per_m2_to_per_km2(oracle),
            error,
            threshold: 1.0,
            passed: error <= 1.0,
        });
    }
    Ok(ValidationReport { trials, seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_range("1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_range("1:10:10").unwrap()[9], 10.0);
        assert_eq!(parse_range("2.5:9:1").unwrap(), vec![2.5]);
        let r = parse_range("1:3:21").unwrap();
        assert_eq!(r.len(), 21);
        assert_eq!(*r.last().unwrap(), 3.0);
        for bad in ["1:3", "a:3:2", "1:3:0", "1:3:-1", "1:inf:3"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn density_ratio_construction() {
        let base = Scenario::reference();
        let at10 = density_ratio_scenario(&base, 10.0).unwrap();
        assert_eq!(at10, base);
        let at1 = density_ratio_scenario(&base, 1.0).unwrap();
        assert_eq!(at1.regions[1].peak_user_density_per_km2, 1e4);
        assert_eq!(at1.regions[1].area_km2, 1.0);
        assert_eq!(at1.regions[0], base.regions[0]);
        assert!(density_ratio_scenario(&base, 0.5).is_err());
    }

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn sweep_csv_header() {
        let sweep = SweepResult {
            parameter: "cost_ratio".into(),
            region_ids: vec!["a".into(), "b".into()],
            parameter_values: vec![1.0],
            total_saving_fraction: vec![0.25],
            per_region_static_saving: vec![vec![0.5, 0.75]],
            fleet_size: vec![3.0],
            objective: vec![9.0],
            failures: vec![],
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &sweep, Path::new("buf")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "parameter,total_saving_fraction,fleet_size,objective,static_saving_a,static_saving_b\n1,0.25,3,9,0.5,0.75\n"
        );
    }
}
