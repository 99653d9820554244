//! Dense two-phase primal simplex with Bland's rule.
//!
//! Sized for the fleet-allocation programs (a few hundred rows); no sparse
//! storage, no refactorization. Same input bits always give the same
//! output bits.

use std::fmt::Write as _;

use thiserror::Error;

/// Smallest pivot magnitude accepted.
pub const PIVOT_TOLERANCE: f64 = 1e-12;
/// Entries below this are treated as zero in ratio tests and pricing.
const ZERO_TOLERANCE: f64 = 1e-9;
/// Phase-1 objective above this (relative to the rhs scale) means infeasible.
const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    InvalidProgram(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// `minimize c·x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lo <= x <= hi`.
///
/// Lower bounds must be finite and non-negative; upper bounds may be
/// `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ub_matrix: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// Program over `num_vars` variables bounded to `[0, ∞)` with zero cost.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ub_matrix: Vec::new(),
            ub_rhs: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_ub(&mut self, row: Vec<f64>, rhs: f64) {
        self.ub_matrix.push(row);
        self.ub_rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let bad = |msg: String| Err(LpError::InvalidProgram(msg));
        if self.bounds.len() != n {
            return bad(format!("{} bounds for {n} variables", self.bounds.len()));
        }
        if self.eq_matrix.len() != self.eq_rhs.len() || self.ub_matrix.len() != self.ub_rhs.len() {
            return bad("row count does not match rhs length".into());
        }
        for (kind, rows) in [("eq", &self.eq_matrix), ("ub", &self.ub_matrix)] {
            if let Some(i) = rows.iter().position(|r| r.len() != n) {
                return bad(format!("{kind} row {i} has {} entries, expected {n}", rows[i].len()));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return bad(format!("non-finite {kind} coefficient"));
            }
        }
        let finite_vectors = [&self.objective, &self.eq_rhs, &self.ub_rhs];
        if finite_vectors.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return bad("non-finite cost or rhs".into());
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && lo >= 0.0) {
                return bad(format!("variable {i}: lower bound {lo} must be finite and >= 0"));
            }
            if hi.is_nan() || lo > hi {
                return bad(format!("variable {i}: bounds [{lo}, {hi}] are empty"));
            }
        }
        Ok(())
    }

    /// Plain-text listing, one constraint per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fmt_row = |row: &[f64]| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, v)| format!("{v:+} x{j}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "min {}", fmt_row(&self.objective));
        for (row, rhs) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            let _ = writeln!(out, "eq  {} = {rhs}", fmt_row(row));
        }
        for (row, rhs) in self.ub_matrix.iter().zip(&self.ub_rhs) {
            let _ = writeln!(out, "ub  {} <= {rhs}", fmt_row(row));
        }
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            let _ = writeln!(out, "bnd {lo} <= x{j} <= {hi}");
        }
        out
    }

    /// Largest constraint violation of `x` (equality residuals, inequality
    /// excess and bound excess), each scaled as in [`LpSolution`] checks.
    pub fn feasibility_report(&self, x: &[f64]) -> FeasibilityReport {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq_residual = self
            .eq_matrix
            .iter()
            .zip(&self.eq_rhs)
            .map(|(row, b)| (dot(row) - b).abs())
            .fold(0.0, f64::max);
        let ub_excess = self
            .ub_matrix
            .iter()
            .zip(&self.ub_rhs)
            .map(|(row, b)| dot(row) - b)
            .fold(0.0, f64::max);
        let bound_excess = x
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| (lo - v).max(v - hi))
            .fold(0.0, f64::max);
        FeasibilityReport {
            eq_residual,
            ub_excess,
            bound_excess,
            eq_scale: 1.0 + inf_norm(&self.eq_rhs),
            ub_scale: 1.0 + inf_norm(&self.ub_rhs),
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub eq_residual: f64,
    pub ub_excess: f64,
    pub bound_excess: f64,
    eq_scale: f64,
    ub_scale: f64,
}

impl FeasibilityReport {
    /// Primal feasibility at 1e-8 (scaled by `1 + |b|∞`) for rows and 1e-10
    /// for bounds.
    pub fn is_feasible(&self) -> bool {
        self.eq_residual <= 1e-8 * self.eq_scale
            && self.ub_excess <= 1e-8 * self.ub_scale
            && self.bound_excess <= 1e-10
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal vertex; empty unless `status` is `Optimal`.
    pub variables: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        Self {
            status,
            variables: Vec::new(),
            objective_value: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

/// Simplex tableau `[A | b]` with basis bookkeeping.
struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major, `cols + 1` entries per row; the last one is the rhs.
    data: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<(), LpError> {
        let width = self.cols + 1;
        let p = self.at(row, col);
        if p.abs() < PIVOT_TOLERANCE {
            return Err(LpError::NumericalBreakdown(format!(
                "pivot {p:e} at row {row}, column {col}"
            )));
        }
        let start = row * width;
        for v in &mut self.data[start..start + width] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[start..start + width].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let factor = self.at(i, col);
            if factor == 0.0 {
                continue;
            }
            let base = i * width;
            for (v, &pv) in self.data[base..base + width].iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            // exact zero in the pivot column
            self.data[base + col] = 0.0;
        }
        self.basis[row] = col;
        Ok(())
    }

    /// Reduced costs `c_j − c_B·B⁻¹A_j` for the given column costs.
    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut d = costs.to_vec();
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                *dj -= cb * self.at(i, j);
            }
        }
        d
    }

    /// Runs simplex iterations on `costs` until optimal. Columns for which
    /// `allowed` is false never enter. Returns `false` if unbounded.
    fn optimize(&mut self, costs: &[f64], allowed: impl Fn(usize) -> bool) -> Result<bool, LpError> {
        // Bland's rule terminates; the cap only guards against a logic error.
        let max_iterations = 50 * (self.rows + self.cols) + 1000;
        for _ in 0..max_iterations {
            let d = self.reduced_costs(costs);
            let entering = (0..self.cols).find(|&j| allowed(j) && d[j] < -ZERO_TOLERANCE);
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a <= ZERO_TOLERANCE {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((best, best_ratio)) => {
                        if ratio < best_ratio
                            || (ratio == best_ratio && self.basis[i] < self.basis[best])
                        {
                            Some((i, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((row, _)) = leaving else {
                return Ok(false);
            };
            self.pivot(row, col)?;
        }
        Err(LpError::NumericalBreakdown(
            "simplex iteration limit reached".into(),
        ))
    }
}

/// Solves `lp` to a vertex optimum.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let lower: Vec<f64> = lp.bounds.iter().map(|b| b.0).collect();
    let shift = |row: &[f64], rhs: f64| rhs - row.iter().zip(&lower).map(|(a, l)| a * l).sum::<f64>();

    // Rows over shifted variables y = x − lo >= 0: (coefficients, rhs, has slack).
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for (row, &b) in lp.eq_matrix.iter().zip(&lp.eq_rhs) {
        rows.push((row.clone(), shift(row, b), false));
    }
    for (row, &b) in lp.ub_matrix.iter().zip(&lp.ub_rhs) {
        rows.push((row.clone(), shift(row, b), true));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            rows.push((row, hi - lo, true));
        }
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.2).count();
    // A row needs an artificial unless its slack can start in the basis.
    let needs_artificial: Vec<bool> = rows.iter().map(|(_, b, slack)| !*slack || *b < 0.0).collect();
    let artificial_count = needs_artificial.iter().filter(|&&a| a).count();
    let cols = n + slack_count + artificial_count;

    let mut kinds = vec![ColumnKind::Structural; n];
    kinds.extend(std::iter::repeat_n(ColumnKind::Slack, slack_count));
    kinds.extend(std::iter::repeat_n(ColumnKind::Artificial, artificial_count));

    let width = cols + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let mut next_slack = n;
    let mut next_artificial = n + slack_count;
    for (i, (coeffs, rhs, has_slack)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        let base = i * width;
        for (j, &a) in coeffs.iter().enumerate() {
            data[base + j] = sign * a;
        }
        data[base + cols] = sign * rhs;
        if *has_slack {
            data[base + next_slack] = sign;
            if !needs_artificial[i] {
                basis[i] = next_slack;
            }
            next_slack += 1;
        }
        if needs_artificial[i] {
            data[base + next_artificial] = 1.0;
            basis[i] = next_artificial;
            next_artificial += 1;
        }
    }
    let mut tableau = Tableau {
        rows: m,
        cols,
        data,
        basis,
        kinds,
    };

    // Phase 1: minimize the sum of artificials.
    if artificial_count > 0 {
        let costs: Vec<f64> = tableau
            .kinds
            .iter()
            .map(|k| if *k == ColumnKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        tableau.optimize(&costs, |_| true)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| tableau.kinds[tableau.basis[i]] == ColumnKind::Artificial)
            .map(|i| tableau.rhs(i).abs())
            .sum();
        let rhs_scale = 1.0 + rows.iter().fold(0.0, |s: f64, r| s.max(r.1.abs()));
        if infeasibility > FEASIBILITY_TOLERANCE * rhs_scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        // Drive remaining (zero-valued) artificials out of the basis. Rows
        // where that is impossible are redundant and stay inert.
        for i in 0..m {
            if tableau.kinds[tableau.basis[i]] != ColumnKind::Artificial {
                continue;
            }
            let replacement = (0..cols).find(|&j| {
                tableau.kinds[j] != ColumnKind::Artificial && tableau.at(i, j).abs() > ZERO_TOLERANCE
            });
            if let Some(j) = replacement {
                tableau.pivot(i, j)?;
            }
        }
    }

    // Phase 2 on the original costs; artificials may not re-enter.
    let mut costs = vec![0.0; cols];
    costs[..n].copy_from_slice(&lp.objective);
    let kinds = tableau.kinds.clone();
    let bounded = tableau.optimize(&costs, |j| kinds[j] != ColumnKind::Artificial)?;
    if !bounded {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut shifted = vec![0.0; n];
    for i in 0..m {
        let j = tableau.basis[i];
        if j < n {
            shifted[j] = tableau.rhs(i);
        }
    }
    let variables: Vec<f64> = shifted
        .iter()
        .zip(&lp.bounds)
        .map(|(&y, &(lo, hi))| {
            // basic values can carry rounding noise just outside the box
            let x = lo + y;
            if x < lo && lo - x <= 1e-9 * (1.0 + lo.abs()) {
                lo
            } else if x > hi && x - hi <= 1e-9 * (1.0 + hi.abs()) {
                hi
            } else {
                x
            }
        })
        .collect();
    let report = lp.feasibility_report(&variables);
    if !report.is_feasible() {
        return Err(LpError::NumericalBreakdown(format!(
            "optimal basis fails the feasibility re-check: {report:?}"
        )));
    }
    let objective_value = lp.objective.iter().zip(&variables).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        variables,
        objective_value,
    })
}
