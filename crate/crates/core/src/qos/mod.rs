//! Mean per-bit delay of a Poisson cellular network.
//!
//! Users and base stations form independent planar Poisson processes; every
//! user attaches to its nearest station, and a station splits its time
//! equally among its users. The mean per-bit delay is
//!
//! ```text
//! τ̄ = ∫₀^∞ λ_u·g(λ_b, r) · e^{−λ_b π r²} λ_b 2π r / C(r, Ī(r)) dr
//! ```
//!
//! with `g` the shared-load kernel ([`shared_load_kernel`]), `C` the
//! Shannon rate ([`capacity`]) and `Ī` the mean interference
//! ([`mean_interference`]), which itself depends on the utilization
//! `U = τ̄/τ₀`. [`QosModel::evaluate`] resolves that loop as a fixed point.

mod gauss;
mod geometry;
mod kernel;
mod link;
mod oracle;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::RadioParams;

pub use gauss::GaussLegendre;
pub use geometry::{overlap_area, pair_distance};
pub use kernel::{shared_load_kernel, void_radius};
pub use link::{capacity, mean_interference, received_power};
pub use oracle::{mc_delay_estimate, mc_delay_oracle, McEstimate};

use kernel::KernelTable;

#[derive(Debug, Error)]
pub enum QosError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite value in delay integral: {0}")]
    NonFinite(String),
    #[error("utilization fixed point did not converge after {iterations} iterations")]
    FixedPointDiverged { iterations: usize },
}

/// Tensor-product Gauss-Legendre settings for the delay integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes on the serving-distance axis.
    pub nodes_r: usize,
    /// Nodes per panel on the other-user distance axis (two panels).
    pub nodes_x: usize,
    /// Nodes on the half-turn angular axis.
    pub nodes_theta: usize,
    /// Tail mass cut from the Poisson void probabilities.
    pub tail_mass_epsilon: f64,
    /// Relative change allowed when every node count is doubled.
    pub refinement_rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_r: 64,
            nodes_x: 64,
            nodes_theta: 64,
            tail_mass_epsilon: 1e-12,
            refinement_rel_tol: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QosError> {
        for (name, n) in [
            ("nodes_r", self.nodes_r),
            ("nodes_x", self.nodes_x),
            ("nodes_theta", self.nodes_theta),
        ] {
            if n < 8 {
                return Err(QosError::InvalidInput(format!("{name} = {n} must be >= 8")));
            }
        }
        if !(self.tail_mass_epsilon > 0.0 && self.tail_mass_epsilon <= 1e-6) {
            return Err(QosError::InvalidInput(format!(
                "tail_mass_epsilon = {} must lie in (0, 1e-6]",
                self.tail_mass_epsilon
            )));
        }
        if !(self.refinement_rel_tol > 0.0 && self.refinement_rel_tol <= 1e-2) {
            return Err(QosError::InvalidInput(format!(
                "refinement_rel_tol = {} must lie in (0, 1e-2]",
                self.refinement_rel_tol
            )));
        }
        Ok(())
    }

    /// Same spec with every node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            nodes_r: 2 * self.nodes_r,
            nodes_x: 2 * self.nodes_x,
            nodes_theta: 2 * self.nodes_theta,
            ..*self
        }
    }
}

/// Outcome of the utilization fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QosEvaluation {
    pub delay_s_per_bit: f64,
    /// `delay / τ₀`; may exceed 1 when the target is missed.
    pub utilization: f64,
    pub fixed_point_iterations: usize,
    pub converged: bool,
}

impl QosEvaluation {
    pub fn require_converged(self) -> Result<Self, QosError> {
        if self.converged {
            Ok(self)
        } else {
            Err(QosError::FixedPointDiverged {
                iterations: self.fixed_point_iterations,
            })
        }
    }
}

/// Iteration cap of the utilization fixed point.
pub const FIXED_POINT_MAX_ITERATIONS: usize = 100;
/// Convergence threshold on successive utilization iterates.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-6;

/// Delay model for one radio configuration and quadrature.
///
/// Cheap to clone; the tabulated kernel is shared between clones and
/// between models with the same [`QuadratureSpec`].
#[derive(Debug, Clone)]
pub struct QosModel {
    radio: RadioParams,
    quad: QuadratureSpec,
    table: Arc<KernelTable>,
}

impl QosModel {
    pub fn new(radio: RadioParams, quad: QuadratureSpec) -> Result<Self, QosError> {
        radio
            .validate()
            .map_err(|e| QosError::InvalidInput(e.to_string()))?;
        quad.validate()?;
        Ok(Self {
            radio,
            quad,
            table: KernelTable::shared(&quad)?,
        })
    }

    pub fn radio(&self) -> &RadioParams {
        &self.radio
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn target_delay(&self) -> f64 {
        self.radio.target_delay_s_per_bit
    }

    /// Delay per unit user density, `τ̄ / λ_u`.
    fn delay_per_user_density(&self, lambda_b: f64, utilization: f64) -> Result<f64, QosError> {
        let sqrt_lambda = lambda_b.sqrt();
        let mut total = 0.0;
        for node in &self.table.nodes {
            let r = node.scaled_r / sqrt_lambda;
            let interference = mean_interference(r, &self.radio, lambda_b, utilization);
            let rate = capacity(r, &self.radio, interference);
            total += node.weight * node.scaled_kernel / rate;
        }
        let value = total / lambda_b;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(QosError::NonFinite(format!(
                "delay at lambda_b = {lambda_b}, utilization = {utilization}"
            )))
        }
    }

    /// Mean per-bit delay at fixed utilization of the interferers.
    pub fn delay_given_utilization(
        &self,
        lambda_b: f64,
        lambda_u: f64,
        utilization: f64,
    ) -> Result<f64, QosError> {
        check_densities(lambda_b, lambda_u)?;
        if !(0.0..=1.0).contains(&utilization) {
            return Err(QosError::InvalidInput(format!(
                "utilization = {utilization} outside [0, 1]"
            )));
        }
        if lambda_u == 0.0 {
            return Ok(0.0);
        }
        Ok(lambda_u * self.delay_per_user_density(lambda_b, utilization)?)
    }

    /// Self-consistent delay, starting from full utilization.
    pub fn evaluate(&self, lambda_b: f64, lambda_u: f64) -> Result<QosEvaluation, QosError> {
        self.evaluate_from(lambda_b, lambda_u, 1.0)
    }

    /// Iterates `u ← clamp(τ̄(u)/τ₀, 0, 1)` from `initial_utilization`,
    /// halving the step once successive steps change sign.
    pub fn evaluate_from(
        &self,
        lambda_b: f64,
        lambda_u: f64,
        initial_utilization: f64,
    ) -> Result<QosEvaluation, QosError> {
        check_densities(lambda_b, lambda_u)?;
        let tau0 = self.target_delay();
        let mut u = initial_utilization.clamp(0.0, 1.0);
        let mut previous_step: Option<f64> = None;
        let mut damped = false;
        let mut delay = 0.0;
        for iteration in 1..=FIXED_POINT_MAX_ITERATIONS {
            delay = self.delay_given_utilization(lambda_b, lambda_u, u)?;
            let step = (delay / tau0).clamp(0.0, 1.0) - u;
            if previous_step.is_some_and(|prev| prev * step < 0.0) {
                damped = true;
            }
            let next = if damped { u + 0.5 * step } else { u + step };
            if (next - u).abs() <= FIXED_POINT_TOLERANCE {
                return Ok(QosEvaluation {
                    delay_s_per_bit: delay,
                    utilization: delay / tau0,
                    fixed_point_iterations: iteration,
                    converged: true,
                });
            }
            previous_step = Some(step);
            u = next;
        }
        Ok(QosEvaluation {
            delay_s_per_bit: delay,
            utilization: delay / tau0,
            fixed_point_iterations: FIXED_POINT_MAX_ITERATIONS,
            converged: false,
        })
    }
}

fn check_densities(lambda_b: f64, lambda_u: f64) -> Result<(), QosError> {
    if !(lambda_b.is_finite() && lambda_b > 0.0) {
        return Err(QosError::InvalidInput(format!(
            "lambda_b = {lambda_b} must be finite and > 0"
        )));
    }
    if !(lambda_u.is_finite() && lambda_u >= 0.0) {
        return Err(QosError::InvalidInput(format!(
            "lambda_u = {lambda_u} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Mean per-bit delay at fixed utilization. Builds (or reuses) the kernel
/// table for `quad`.
pub fn delay_given_utilization(
    lambda_b: f64,
    lambda_u: f64,
    utilization: f64,
    params: &RadioParams,
    quad: &QuadratureSpec,
) -> Result<f64, QosError> {
    QosModel::new(*params, *quad)?.delay_given_utilization(lambda_b, lambda_u, utilization)
}

/// Self-consistent delay and utilization for one cell.
pub fn evaluate_qos(
    lambda_b: f64,
    lambda_u: f64,
    params: &RadioParams,
    quad: &QuadratureSpec,
) -> Result<QosEvaluation, QosError> {
    QosModel::new(*params, *quad)?.evaluate(lambda_b, lambda_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::per_km2_to_per_m2;

    fn model() -> QosModel {
        QosModel::new(RadioParams::default(), QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn quadrature_spec_bounds() {
        let q = QuadratureSpec::default();
        assert!(q.validate().is_ok());
        assert!(QuadratureSpec { nodes_x: 7, ..q }.validate().is_err());
        assert!(QuadratureSpec { tail_mass_epsilon: 1e-5, ..q }.validate().is_err());
        assert!(QuadratureSpec { tail_mass_epsilon: 0.0, ..q }.validate().is_err());
        assert!(QuadratureSpec { refinement_rel_tol: 0.1, ..q }.validate().is_err());
    }

    #[test]
    fn zero_users_zero_delay() {
        let m = model();
        assert_eq!(m.delay_given_utilization(1e-5, 0.0, 1.0).unwrap(), 0.0);
        let e = m.evaluate(1e-5, 0.0).unwrap();
        assert_eq!(e.delay_s_per_bit, 0.0);
        assert_eq!(e.utilization, 0.0);
        assert!(e.converged);
        assert!(e.fixed_point_iterations <= 2);
    }

    #[test]
    fn linear_in_user_density() {
        let m = model();
        let lb = per_km2_to_per_m2(20.0);
        let lu = per_km2_to_per_m2(700.0);
        for u in [0.0, 0.3, 1.0] {
            let base = m.delay_given_utilization(lb, lu, u).unwrap();
            let doubled = m.delay_given_utilization(lb, 2.0 * lu, u).unwrap();
            assert!((doubled - 2.0 * base).abs() <= 1e-12 * doubled);
        }
    }

    #[test]
    fn delay_falls_with_station_density() {
        let m = model();
        let lu = per_km2_to_per_m2(1000.0);
        let mut last = f64::INFINITY;
        for i in 0..50 {
            // 0.1 .. 1000 per km², log-spaced
            let lb = per_km2_to_per_m2(0.1 * 10f64.powf(4.0 * i as f64 / 49.0));
            let d = m.delay_given_utilization(lb, lu, 1.0).unwrap();
            assert!(d <= last, "non-monotone at {lb}");
            last = d;
        }
    }

    #[test]
    fn fixed_point_is_consistent() {
        let m = model();
        let tau0 = m.target_delay();
        for (lb, lu) in [(10.0, 100.0), (30.0, 1000.0), (100.0, 10000.0), (5.0, 2000.0)] {
            let (lb, lu) = (per_km2_to_per_m2(lb), per_km2_to_per_m2(lu));
            let e = m.evaluate(lb, lu).unwrap();
            assert!(e.converged);
            assert_eq!(e.utilization, e.delay_s_per_bit / tau0);
            // the iterate that produced `delay` is within one step of its image
            let u = e.utilization.clamp(0.0, 1.0);
            let again = m.delay_given_utilization(lb, lu, u).unwrap();
            assert!(((again / tau0).clamp(0.0, 1.0) - u).abs() <= 1e-5);
        }
    }

    #[test]
    fn fixed_point_independent_of_start() {
        // Operating points near the dimensioned densities, where u is O(1).
        // At very light load the absolute stopping rule on u is loose in
        // relative terms, so those points are not compared here.
        let m = model();
        for (lb, lu) in [(2.0, 100.0), (20.0, 1000.0), (100.0, 10000.0), (60.0, 3000.0), (200.0, 12000.0)] {
            let (lb, lu) = (per_km2_to_per_m2(lb), per_km2_to_per_m2(lu));
            let high = m.evaluate_from(lb, lu, 1.0).unwrap();
            let low = m.evaluate_from(lb, lu, 0.0).unwrap();
            assert!(high.converged && low.converged);
            let rel = (high.delay_s_per_bit - low.delay_s_per_bit).abs() / high.delay_s_per_bit;
            assert!(rel < 1e-5, "{high:?} vs {low:?}");
            assert!(high.utilization > 0.2, "{high:?}");
        }
    }

    #[test]
    fn rejects_bad_densities() {
        let m = model();
        assert!(m.delay_given_utilization(0.0, 1e-4, 1.0).is_err());
        assert!(m.delay_given_utilization(1e-5, -1.0, 1.0).is_err());
        assert!(m.delay_given_utilization(1e-5, 1e-4, 1.5).is_err());
    }
}
