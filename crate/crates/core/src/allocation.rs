//! Fleet allocation: how much of the baseline to cover with static stations
//! and how many moving stations to shuttle between regions over the day.
//!
//! The linear program works in operator units (BS/km², km², BS counts) so
//! its coefficients are O(1..1e4); plans are converted back to BS/m².

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimensioning::DemandMatrix;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus};
use crate::matrix::SlotRegionMatrix;
use crate::units::{per_km2_to_per_m2, per_m2_to_per_km2};

/// Relative markup on the moving-station cost used to break ties between
/// equal-cost optima in favor of static capacity.
pub const TIE_BREAK_EPSILON: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AllocationError {
    #[error("invalid allocation input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("allocation program reported {0:?}; static-only deployment should always be feasible")]
    UnexpectedStatus(LpStatus),
}

/// Unit costs of a static and a moving station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub static_unit_cost: f64,
    pub mobile_unit_cost: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            static_unit_cost: 1.0,
            mobile_unit_cost: 1.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), AllocationError> {
        for (name, c) in [
            ("static_unit_cost", self.static_unit_cost),
            ("mobile_unit_cost", self.mobile_unit_cost),
        ] {
            if !(c.is_finite() && c > 0.0) {
                return Err(AllocationError::InvalidInput(format!("{name} = {c} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Static densities per region plus the moving-station schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentPlan {
    /// BS/m² per region.
    pub static_density: Vec<f64>,
    /// MBS/m² per slot and region.
    pub mbs_schedule: SlotRegionMatrix,
    /// Number of moving stations.
    pub fleet_size: f64,
    /// `c_m·M + c_s·Σ static·area`, without the tie-break markup.
    pub objective_value: f64,
    pub cost_model: CostModel,
}

impl DeploymentPlan {
    /// Fleet size rounded up for operator-facing counts.
    pub fn fleet_size_ceil(&self) -> u64 {
        // absorb LP rounding just above an integer
        (self.fleet_size - 1e-9 * (1.0 + self.fleet_size)).ceil().max(0.0) as u64
    }
}

fn check_inputs(demand: &DemandMatrix, areas_km2: &[f64]) -> Result<(), AllocationError> {
    if demand.slots() == 0 || demand.regions() == 0 {
        return Err(AllocationError::InvalidInput("demand matrix is empty".into()));
    }
    if areas_km2.len() != demand.regions() {
        return Err(AllocationError::InvalidInput(format!(
            "{} areas for {} regions",
            areas_km2.len(),
            demand.regions()
        )));
    }
    if let Some(a) = areas_km2.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(AllocationError::InvalidInput(format!("region area {a} km² must be > 0")));
    }
    demand
        .validate()
        .map_err(|e| AllocationError::InvalidInput(e.to_string()))
}

/// Per-region cap on static and moving density: the column peak, BS/km².
fn caps_per_km2(demand: &DemandMatrix) -> Vec<f64> {
    demand.values.column_max().into_iter().map(per_m2_to_per_km2).collect()
}

/// Index of the moving density for `(slot, region)` among the LP variables.
fn mbs_var(slot: usize, region: usize, regions: usize) -> usize {
    1 + regions + slot * regions + region
}

/// Allocation program over `[M, static_1..static_Z, mbs_(1,1)..mbs_(J,Z)]`
/// (densities in BS/km², `M` a count). One equality per slot keeps the
/// fleet size fixed; one inequality per cell enforces coverage.
pub fn build_allocation_lp(
    demand: &DemandMatrix,
    areas_km2: &[f64],
    costs: &CostModel,
) -> Result<LinearProgram, AllocationError> {
    check_inputs(demand, areas_km2)?;
    costs.validate()?;
    let (slots, regions) = (demand.slots(), demand.regions());
    let n = 1 + regions + slots * regions;
    let caps = caps_per_km2(demand);
    let mut lp = LinearProgram::new(n);

    lp.objective[0] = costs.mobile_unit_cost;
    for z in 0..regions {
        lp.objective[1 + z] = costs.static_unit_cost * areas_km2[z];
    }

    for j in 0..slots {
        let mut row = vec![0.0; n];
        row[0] = -1.0;
        for z in 0..regions {
            row[mbs_var(j, z, regions)] = areas_km2[z];
        }
        lp.add_eq(row, 0.0);
    }
    for j in 0..slots {
        for z in 0..regions {
            // demand − static − mbs <= 0
            let mut row = vec![0.0; n];
            row[1 + z] = -1.0;
            row[mbs_var(j, z, regions)] = -1.0;
            lp.add_ub(row, -per_m2_to_per_km2(demand.values.get(j, z)));
        }
    }

    for z in 0..regions {
        lp.bounds[1 + z] = (0.0, caps[z]);
        for j in 0..slots {
            lp.bounds[mbs_var(j, z, regions)] = (0.0, caps[z]);
        }
    }
    Ok(lp)
}

/// Least-cost plan. Among equal-cost optima the one with the most static
/// capacity is chosen, and the schedule is put in canonical form.
pub fn optimal_plan(
    demand: &DemandMatrix,
    areas_km2: &[f64],
    costs: &CostModel,
) -> Result<DeploymentPlan, AllocationError> {
    let marked_up = CostModel {
        mobile_unit_cost: costs.mobile_unit_cost * (1.0 + TIE_BREAK_EPSILON),
        ..*costs
    };
    let lp = build_allocation_lp(demand, areas_km2, &marked_up)?;
    let solution = solve_lp(&lp)?;
    if solution.status != LpStatus::Optimal {
        return Err(AllocationError::UnexpectedStatus(solution.status));
    }
    let (slots, regions) = (demand.slots(), demand.regions());
    let x = &solution.variables;
    let fleet_size = x[0];
    let static_km2: Vec<f64> = x[1..=regions].to_vec();
    let schedule_km2 = SlotRegionMatrix::from_fn(slots, regions, |j, z| x[mbs_var(j, z, regions)]);
    let raw = DeploymentPlan {
        static_density: static_km2.iter().copied().map(per_km2_to_per_m2).collect(),
        mbs_schedule: schedule_km2.map(per_km2_to_per_m2),
        fleet_size,
        objective_value: plan_cost(fleet_size, &static_km2, areas_km2, costs),
        cost_model: *costs,
    };
    Ok(canonicalize_schedule(&raw, demand, areas_km2))
}

fn plan_cost(fleet_size: f64, static_km2: &[f64], areas_km2: &[f64], costs: &CostModel) -> f64 {
    let static_count: f64 = static_km2.iter().zip(areas_km2).map(|(s, a)| s * a).sum();
    costs.mobile_unit_cost * fleet_size + costs.static_unit_cost * static_count
}

/// Rebuilds the moving-station schedule deterministically: each slot first
/// covers what static capacity leaves uncovered, then spreads the rest of
/// the fleet over regions in proportion to their remaining headroom (as
/// station counts, `(cap − required)·area`). Static densities and fleet
/// size are kept.
pub fn canonicalize_schedule(
    raw_plan: &DeploymentPlan,
    demand: &DemandMatrix,
    areas_km2: &[f64],
) -> DeploymentPlan {
    let (slots, regions) = (demand.slots(), demand.regions());
    let caps = caps_per_km2(demand);
    let static_km2: Vec<f64> = raw_plan.static_density.iter().copied().map(per_m2_to_per_km2).collect();
    let fleet = raw_plan.fleet_size;
    let mut schedule = SlotRegionMatrix::zeros(slots, regions);
    for j in 0..slots {
        let required: Vec<f64> = (0..regions)
            .map(|z| (per_m2_to_per_km2(demand.values.get(j, z)) - static_km2[z]).max(0.0))
            .collect();
        let required_count: f64 = required.iter().zip(areas_km2).map(|(r, a)| r * a).sum();
        let leftover = (fleet - required_count).max(0.0);
        let headroom: Vec<f64> = (0..regions)
            .map(|z| (caps[z] - required[z]).max(0.0) * areas_km2[z])
            .collect();
        let total_headroom: f64 = headroom.iter().sum();
        let share = if total_headroom > 0.0 {
            (leftover / total_headroom).min(1.0)
        } else {
            0.0
        };
        for z in 0..regions {
            let padded = required[z] + share * (caps[z] - required[z]).max(0.0);
            schedule.set(j, z, per_km2_to_per_m2(padded));
        }
    }
    DeploymentPlan {
        mbs_schedule: schedule,
        ..raw_plan.clone()
    }
}

/// Largest area-weighted baseline over slots, as a station count.
pub fn peak_aggregate_demand(demand: &DemandMatrix, areas_km2: &[f64]) -> f64 {
    (0..demand.slots())
        .map(|j| {
            demand
                .values
                .row(j)
                .iter()
                .zip(areas_km2)
                .map(|(d, a)| per_m2_to_per_km2(*d) * a)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SavingsReport {
    /// Stations a static-only network needs (per-region peaks × areas).
    pub static_only_total: f64,
    /// Static stations plus fleet at the optimum.
    pub hybrid_total: f64,
    /// `1 − hybrid/static_only`; 0 when both are 0.
    pub total_saving_fraction: f64,
    /// `1 − c·optimum/(c_s·static_only)`: the saving in cost units.
    pub cost_saving_fraction: f64,
    /// `1 − static/peak` per region; 0 for regions without demand.
    pub per_region_static_saving_fraction: Vec<f64>,
    /// Station count at the busiest slot.
    pub peak_aggregate_demand: f64,
    /// `static + mbs − demand`, BS/m².
    pub excess_capacity_series: SlotRegionMatrix,
    /// Share of the fleet in each region and slot; all zero without a fleet.
    pub mbs_fraction_series: SlotRegionMatrix,
}

pub fn savings(plan: &DeploymentPlan, demand: &DemandMatrix, areas_km2: &[f64]) -> SavingsReport {
    let peaks = caps_per_km2(demand);
    let static_km2: Vec<f64> = plan.static_density.iter().copied().map(per_m2_to_per_km2).collect();
    let static_only_total: f64 = peaks.iter().zip(areas_km2).map(|(p, a)| p * a).sum();
    let static_count: f64 = static_km2.iter().zip(areas_km2).map(|(s, a)| s * a).sum();
    let hybrid_total = plan.fleet_size + static_count;
    let ratio_saving = |numerator: f64, denominator: f64| {
        if denominator > 0.0 {
            1.0 - numerator / denominator
        } else {
            0.0
        }
    };
    let per_region_static_saving_fraction = peaks
        .iter()
        .zip(&static_km2)
        .map(|(p, s)| ratio_saving(*s, *p))
        .collect();
    let (slots, regions) = (demand.slots(), demand.regions());
    let excess_capacity_series = SlotRegionMatrix::from_fn(slots, regions, |j, z| {
        plan.static_density[z] + plan.mbs_schedule.get(j, z) - demand.values.get(j, z)
    });
    let mbs_fraction_series = SlotRegionMatrix::from_fn(slots, regions, |j, z| {
        if plan.fleet_size > 0.0 {
            per_m2_to_per_km2(plan.mbs_schedule.get(j, z)) * areas_km2[z] / plan.fleet_size
        } else {
            0.0
        }
    });
    SavingsReport {
        static_only_total,
        hybrid_total,
        total_saving_fraction: ratio_saving(hybrid_total, static_only_total),
        cost_saving_fraction: ratio_saving(
            plan.objective_value,
            plan.cost_model.static_unit_cost * static_only_total,
        ),
        per_region_static_saving_fraction,
        peak_aggregate_demand: peak_aggregate_demand(demand, areas_km2),
        excess_capacity_series,
        mbs_fraction_series,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstraintKind {
    /// Fleet deployed in a slot differs from the fleet size.
    ClosedSystem,
    /// Static plus moving density falls short of the baseline.
    Coverage,
    /// Moving density outside `[0, region peak]`.
    MobileCap,
    /// Static density outside `[0, region peak]`.
    StaticCap,
    /// Negative or non-finite fleet size.
    FleetSize,
    /// Plan and demand shapes disagree.
    Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: ConstraintKind,
    pub slot: Option<usize>,
    pub region: Option<usize>,
    /// Amount by which the constraint is exceeded, in BS/km² for densities
    /// and stations for counts.
    pub magnitude: f64,
}

/// Every violated plan invariant. Tolerances are applied in BS/km² and
/// station counts: fleet balance to `1e-8·(1+M)`, coverage to
/// `1e-8·(1+demand)`, caps to `1e-10`.
pub fn verify_plan(plan: &DeploymentPlan, demand: &DemandMatrix, areas_km2: &[f64]) -> Vec<Violation> {
    let (slots, regions) = (demand.slots(), demand.regions());
    let mut out = Vec::new();
    let shape_ok = plan.static_density.len() == regions
        && areas_km2.len() == regions
        && plan.mbs_schedule.slots() == slots
        && plan.mbs_schedule.regions() == regions;
    if !shape_ok {
        out.push(Violation {
            constraint: ConstraintKind::Shape,
            slot: None,
            region: None,
            magnitude: f64::NAN,
        });
        return out;
    }
    let m = plan.fleet_size;
    if !(m.is_finite() && m >= 0.0) {
        out.push(Violation {
            constraint: ConstraintKind::FleetSize,
            slot: None,
            region: None,
            magnitude: if m.is_finite() { -m } else { f64::INFINITY },
        });
    }
    let caps = caps_per_km2(demand);
    let mut cap_check = |kind, slot, z: usize, v_km2: f64| {
        let excess = (-v_km2).max(v_km2 - caps[z]);
        if excess > 1e-10 || !v_km2.is_finite() {
            out.push(Violation {
                constraint: kind,
                slot,
                region: Some(z),
                magnitude: excess,
            });
        }
    };
    let static_km2: Vec<f64> = plan.static_density.iter().copied().map(per_m2_to_per_km2).collect();
    for z in 0..regions {
        cap_check(ConstraintKind::StaticCap, None, z, static_km2[z]);
    }
    for j in 0..slots {
        for z in 0..regions {
            cap_check(ConstraintKind::MobileCap, Some(j), z, per_m2_to_per_km2(plan.mbs_schedule.get(j, z)));
        }
    }
    for j in 0..slots {
        let deployed: f64 = (0..regions)
            .map(|z| per_m2_to_per_km2(plan.mbs_schedule.get(j, z)) * areas_km2[z])
            .sum();
        let gap = (deployed - m).abs();
        if gap > 1e-8 * (1.0 + m.abs()) || !gap.is_finite() {
            out.push(Violation {
                constraint: ConstraintKind::ClosedSystem,
                slot: Some(j),
                region: None,
                magnitude: gap,
            });
        }
        for z in 0..regions {
            let need = per_m2_to_per_km2(demand.values.get(j, z));
            let have = static_km2[z] + per_m2_to_per_km2(plan.mbs_schedule.get(j, z));
            let shortfall = need - have;
            if shortfall > 1e-8 * (1.0 + need) || !have.is_finite() {
                out.push(Violation {
                    constraint: ConstraintKind::Coverage,
                    slot: Some(j),
                    region: Some(z),
                    magnitude: shortfall,
                });
            }
        }
    }
    out
}
