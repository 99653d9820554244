//! Minimum base-station density per slot and region (the baseline demand).
//!
//! Every delay constraint involves a single `(slot, region)` cell, so the
//! network-wide minimum is the sum of per-cell minima. Each cell is solved
//! by bracketing and bisection on the station density, using that the
//! self-consistent delay falls as stations are added.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::SlotRegionMatrix;
use crate::qos::{QosError, QosModel, QuadratureSpec};
use crate::scenario::{RadioParams, UserDensityMatrix};
use crate::units::{per_km2_to_per_m2, per_m2_to_per_km2};

/// Density above which demand is declared unserviceable, BS/km².
pub const DEFAULT_DENSITY_CAP_PER_KM2: f64 = 1e5;
/// Relative width of the final bisection bracket.
pub const BISECTION_REL_TOL: f64 = 1e-4;
/// Points of the fallback log-grid scan.
const FALLBACK_GRID_POINTS: usize = 200;
/// Lower end of the fallback grid relative to the cap.
const FALLBACK_GRID_SPAN: f64 = 1e-7;
/// Relative slack before a delay change against the expected direction
/// counts as non-monotone; absorbs fixed-point noise.
const MONOTONE_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DimensioningError {
    #[error(
        "{lambda_u_per_km2} users/km² cannot meet the delay target with up to \
         {cap_per_km2} BS/km² (delay at the cap: {delay_at_cap:e} s/bit)"
    )]
    InfeasibleDemand {
        lambda_u_per_km2: f64,
        cap_per_km2: f64,
        delay_at_cap: f64,
    },
    #[error("delay increased with station density near {lambda_b_per_km2} BS/km²")]
    NonMonotoneDetected { lambda_b_per_km2: f64 },
    #[error("slot {slot}, region {region}: {source}")]
    Cell {
        slot: usize,
        region: usize,
        #[source]
        source: Box<DimensioningError>,
    },
    #[error(transparent)]
    Qos(#[from] QosError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// How one cell's minimum was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellDiagnostics {
    /// Delay evaluations spent on bracketing, bisection and any grid scan.
    pub iterations: usize,
    /// Self-consistent delay at the returned density (0 for no users).
    pub achieved_delay_s_per_bit: f64,
    /// Whether the utilization fixed point converged at the returned density.
    pub converged: bool,
    /// Set when bracketing saw the delay move the wrong way and the grid
    /// scan took over.
    pub used_grid_fallback: bool,
}

impl Default for CellDiagnostics {
    fn default() -> Self {
        Self {
            iterations: 0,
            achieved_delay_s_per_bit: 0.0,
            converged: true,
            used_grid_fallback: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSolution {
    /// Minimum station density, BS/m².
    pub density: f64,
    pub diagnostics: CellDiagnostics,
}

/// Per-cell minimum-density solver for one radio configuration.
#[derive(Debug, Clone)]
pub struct Dimensioner {
    model: QosModel,
    cap: f64,
}

impl Dimensioner {
    pub fn new(params: RadioParams, quad: QuadratureSpec) -> Result<Self, DimensioningError> {
        Ok(Self {
            model: QosModel::new(params, quad)?,
            cap: per_km2_to_per_m2(DEFAULT_DENSITY_CAP_PER_KM2),
        })
    }

    /// Replaces the density cap (BS/m²).
    pub fn with_cap(mut self, cap: f64) -> Result<Self, DimensioningError> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(DimensioningError::InvalidInput(format!(
                "density cap {cap} must be finite and > 0"
            )));
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn model(&self) -> &QosModel {
        &self.model
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Smallest density whose self-consistent delay meets the target for
    /// `lambda_u` users/m².
    pub fn solve(&self, lambda_u: f64) -> Result<CellSolution, DimensioningError> {
        if !(lambda_u.is_finite() && lambda_u >= 0.0) {
            return Err(DimensioningError::InvalidInput(format!(
                "user density {lambda_u} must be finite and >= 0"
            )));
        }
        if lambda_u == 0.0 {
            return Ok(CellSolution {
                density: 0.0,
                diagnostics: CellDiagnostics::default(),
            });
        }
        let tau0 = self.model.target_delay();
        let delay_at = |lambda_b: f64| -> Result<f64, DimensioningError> {
            Ok(self.model.evaluate(lambda_b, lambda_u)?.delay_s_per_bit)
        };
        let found = search_min_density(delay_at, lambda_u, tau0, self.cap)?;
        let check = self.model.evaluate(found.density, lambda_u)?;
        Ok(CellSolution {
            density: found.density,
            diagnostics: CellDiagnostics {
                iterations: found.evaluations,
                achieved_delay_s_per_bit: check.delay_s_per_bit,
                converged: check.converged,
                used_grid_fallback: found.used_grid_fallback,
            },
        })
    }
}

/// Minimum station density (BS/m²) meeting the delay target for
/// `lambda_u` users/m², searched below `lambda_cap` BS/m².
pub fn min_bs_density(
    lambda_u: f64,
    params: &RadioParams,
    quad: &QuadratureSpec,
    lambda_cap: f64,
) -> Result<f64, DimensioningError> {
    Ok(Dimensioner::new(*params, *quad)?
        .with_cap(lambda_cap)?
        .solve(lambda_u)?
        .density)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SearchResult {
    density: f64,
    evaluations: usize,
    used_grid_fallback: bool,
}

/// Bracket from `lambda_u/10` by doubling or halving, then bisect to
/// [`BISECTION_REL_TOL`]. Falls back to a grid scan if the delay is seen
/// to move against the density.
fn search_min_density<F>(
    mut delay_at: F,
    lambda_u: f64,
    tau0: f64,
    cap: f64,
) -> Result<SearchResult, DimensioningError>
where
    F: FnMut(f64) -> Result<f64, DimensioningError>,
{
    let mut evaluations = 0;
    let mut eval = |lambda: f64| {
        evaluations += 1;
        delay_at(lambda)
    };
    match bracket_and_bisect(&mut eval, lambda_u, tau0, cap) {
        Ok(density) => Ok(SearchResult {
            density,
            evaluations,
            used_grid_fallback: false,
        }),
        Err(DimensioningError::NonMonotoneDetected { .. }) => {
            let density = grid_scan(&mut eval, lambda_u, tau0, cap)?;
            Ok(SearchResult {
                density,
                evaluations,
                used_grid_fallback: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn non_monotone(lambda_b: f64) -> DimensioningError {
    DimensioningError::NonMonotoneDetected {
        lambda_b_per_km2: per_m2_to_per_km2(lambda_b),
    }
}

fn infeasible(lambda_u: f64, cap: f64, delay_at_cap: f64) -> DimensioningError {
    DimensioningError::InfeasibleDemand {
        lambda_u_per_km2: per_m2_to_per_km2(lambda_u),
        cap_per_km2: per_m2_to_per_km2(cap),
        delay_at_cap,
    }
}

fn bracket_and_bisect<F>(eval: &mut F, lambda_u: f64, tau0: f64, cap: f64) -> Result<f64, DimensioningError>
where
    F: FnMut(f64) -> Result<f64, DimensioningError>,
{
    let start = (lambda_u / 10.0).min(cap);
    let start_delay = eval(start)?;
    // (density, delay) at the infeasible and feasible ends
    let (mut lo, mut hi);
    if start_delay <= tau0 {
        hi = (start, start_delay);
        loop {
            let next = 0.5 * hi.0;
            if next < cap * f64::EPSILON {
                // target met by a vanishing density
                return Ok(hi.0);
            }
            let d = eval(next)?;
            if d < hi.1 * (1.0 - MONOTONE_SLACK) {
                return Err(non_monotone(next));
            }
            if d > tau0 {
                lo = (next, d);
                break;
            }
            hi = (next, d);
        }
    } else {
        lo = (start, start_delay);
        loop {
            if lo.0 >= cap {
                return Err(infeasible(lambda_u, cap, lo.1));
            }
            let next = (2.0 * lo.0).min(cap);
            let d = eval(next)?;
            if d > lo.1 * (1.0 + MONOTONE_SLACK) {
                return Err(non_monotone(next));
            }
            if d <= tau0 {
                hi = (next, d);
                break;
            }
            lo = (next, d);
        }
    }
    while hi.0 - lo.0 > BISECTION_REL_TOL * hi.0 {
        let mid = 0.5 * (lo.0 + hi.0);
        let d = eval(mid)?;
        if d > lo.1 * (1.0 + MONOTONE_SLACK) || d < hi.1 * (1.0 - MONOTONE_SLACK) {
            return Err(non_monotone(mid));
        }
        if d <= tau0 {
            hi = (mid, d);
        } else {
            lo = (mid, d);
        }
    }
    Ok(hi.0)
}

/// First feasible point of a log grid below the cap, refined by plain
/// bisection on the segment that precedes it.
fn grid_scan<F>(eval: &mut F, lambda_u: f64, tau0: f64, cap: f64) -> Result<f64, DimensioningError>
where
    F: FnMut(f64) -> Result<f64, DimensioningError>,
{
    let lo_grid = cap * FALLBACK_GRID_SPAN;
    let last = FALLBACK_GRID_POINTS - 1;
    let point = |i: usize| lo_grid * (cap / lo_grid).powf(i as f64 / last as f64);
    let mut previous: Option<f64> = None;
    for i in 0..FALLBACK_GRID_POINTS {
        let lambda = if i == last { cap } else { point(i) };
        let d = eval(lambda)?;
        if d <= tau0 {
            let Some(mut lo) = previous else {
                return Ok(lambda);
            };
            let mut hi = lambda;
            while hi - lo > BISECTION_REL_TOL * hi {
                let mid = 0.5 * (lo + hi);
                if eval(mid)? <= tau0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(hi);
        }
        if i == last {
            return Err(infeasible(lambda_u, cap, d));
        }
        previous = Some(lambda);
    }
    unreachable!("the loop returns at the last grid point")
}

/// Baseline station density per slot and region.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix {
    /// BS/m².
    pub values: SlotRegionMatrix,
    /// Slot-major, one entry per cell.
    pub per_cell_diagnostics: Vec<CellDiagnostics>,
}

impl DemandMatrix {
    /// Wraps precomputed densities (BS/m²) with empty diagnostics.
    pub fn from_values(values: SlotRegionMatrix) -> Self {
        let cells = values.slots() * values.regions();
        Self {
            values,
            per_cell_diagnostics: vec![CellDiagnostics::default(); cells],
        }
    }

    /// Builds from per-km² rows, one row per slot.
    pub fn from_rows_per_km2(rows: &[Vec<f64>]) -> Self {
        Self::from_values(SlotRegionMatrix::from_rows(rows).map(per_km2_to_per_m2))
    }

    pub fn slots(&self) -> usize {
        self.values.slots()
    }

    pub fn regions(&self) -> usize {
        self.values.regions()
    }

    pub fn diagnostics(&self, slot: usize, region: usize) -> &CellDiagnostics {
        &self.per_cell_diagnostics[slot * self.regions() + region]
    }

    /// Checks that entries are finite and non-negative.
    pub fn validate(&self) -> Result<(), DimensioningError> {
        if self.per_cell_diagnostics.len() != self.slots() * self.regions() {
            return Err(DimensioningError::InvalidInput(
                "diagnostics do not cover every cell".into(),
            ));
        }
        for j in 0..self.slots() {
            for z in 0..self.regions() {
                let v = self.values.get(j, z);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(DimensioningError::InvalidInput(format!(
                        "demand at slot {j}, region {z} is {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Memo key: the user density rounded to 12 significant digits.
fn memo_key(lambda_u: f64) -> String {
    format!("{lambda_u:.11e}")
}

/// Solves every cell of `users`; cells with the same (rounded) user density
/// share one solve.
pub fn demand_matrix(
    users: &UserDensityMatrix,
    params: &RadioParams,
    quad: &QuadratureSpec,
) -> Result<DemandMatrix, DimensioningError> {
    demand_matrix_with(&Dimensioner::new(*params, *quad)?, users)
}

pub fn demand_matrix_with(
    dimensioner: &Dimensioner,
    users: &UserDensityMatrix,
) -> Result<DemandMatrix, DimensioningError> {
    let values = &users.values;
    let (slots, regions) = (values.slots(), values.regions());
    // first cell of each distinct load, in slot-major order
    let mut first_cell: HashMap<String, (usize, usize)> = HashMap::new();
    let mut keys: Vec<String> = Vec::new();
    for j in 0..slots {
        for z in 0..regions {
            let key = memo_key(values.get(j, z));
            if !first_cell.contains_key(&key) {
                first_cell.insert(key.clone(), (j, z));
                keys.push(key);
            }
        }
    }
    let solved: Vec<(String, CellSolution)> = keys
        .par_iter()
        .map(|key| {
            let (j, z) = first_cell[key];
            dimensioner
                .solve(values.get(j, z))
                .map(|s| (key.clone(), s))
                .map_err(|e| DimensioningError::Cell {
                    slot: j,
                    region: z,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_, _>>()?;
    let memo: HashMap<String, CellSolution> = solved.into_iter().collect();

    let mut demand = SlotRegionMatrix::zeros(slots, regions);
    let mut diagnostics = Vec::with_capacity(slots * regions);
    for j in 0..slots {
        for z in 0..regions {
            let cell = memo[&memo_key(values.get(j, z))];
            demand.set(j, z, cell.density);
            diagnostics.push(cell.diagnostics);
        }
    }
    Ok(DemandMatrix {
        values: demand,
        per_cell_diagnostics: diagnostics,
    })
}

/// Per-region peak of the baseline, BS/m²: what a static-only network
/// has to install.
pub fn static_only_deployment(demand: &DemandMatrix) -> Vec<f64> {
    demand.values.column_max()
}
