//! The inner double integral of the delay model and its cache.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::gauss::GaussLegendre;
use super::geometry::{uncovered_area, AngleTerms};
use super::{QosError, QuadratureSpec};

/// Power of the map `v = V·w^p` used on the radial axis. It flattens the
/// `1/log(1/v)` behavior of the rate near the serving station.
pub(crate) const RADIAL_MAP_POWER: i32 = 3;

/// Radius beyond which the Poisson void probability `e^{−λπt²}` drops below
/// `tail_mass_epsilon`.
pub fn void_radius(lambda_b: f64, tail_mass_epsilon: f64) -> f64 {
    ((1.0 / tail_mass_epsilon).ln() / (lambda_b * PI)).sqrt()
}

/// `g(λ_b, r) = ∫₀^{x_max} ∫₀^{2π} e^{−λ_b·A(r,x,θ)} x dθ dx`.
///
/// Multiplied by the user density this is the mean number of other users
/// sharing the serving station of a user whose nearest station is at `r`.
/// The integrand depends on θ only through sinθ, so the angular integral is
/// taken over [−π/2, π/2] and doubled; the radial axis is split at `x = r`
/// where the containment boundary sits.
pub fn shared_load_kernel(lambda_b: f64, r: f64, quad: &QuadratureSpec) -> Result<f64, QosError> {
    if !(lambda_b.is_finite() && lambda_b > 0.0) {
        return Err(QosError::InvalidInput(format!(
            "shared_load_kernel: lambda_b = {lambda_b} must be > 0"
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(QosError::InvalidInput(format!(
            "shared_load_kernel: r = {r} must be > 0"
        )));
    }
    quad.validate()?;
    let rules = Rules::new(quad);
    let value = rules.kernel(lambda_b, r, quad.tail_mass_epsilon);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(QosError::NonFinite(format!(
            "shared_load_kernel(lambda_b = {lambda_b}, r = {r}) = {value}"
        )))
    }
}

struct Rules {
    x_rule: GaussLegendre,
    angles: Vec<(AngleTerms, f64)>,
}

impl Rules {
    fn new(quad: &QuadratureSpec) -> Self {
        let theta_rule = GaussLegendre::new(quad.nodes_theta);
        let angles = theta_rule
            .on_interval(-FRAC_PI_2, FRAC_PI_2)
            .map(|(theta, w)| (AngleTerms::new(theta), 2.0 * w))
            .collect();
        Self {
            x_rule: GaussLegendre::new(quad.nodes_x),
            angles,
        }
    }

    fn kernel(&self, lambda_b: f64, r: f64, eps: f64) -> f64 {
        let x_max = void_radius(lambda_b, eps) + r;
        let mut total = 0.0;
        for (a, b) in [(0.0, r), (r, x_max)] {
            for (x, wx) in self.x_rule.on_interval(a, b) {
                let angular: f64 = self
                    .angles
                    .iter()
                    .map(|(angle, wt)| wt * (-lambda_b * uncovered_area(r, x, angle)).exp())
                    .sum();
                total += wx * x * angular;
            }
        }
        total
    }
}

/// One node of the radial rule, in units where `λ_b = 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialNode {
    /// `r·√λ_b` at this node.
    pub scaled_r: f64,
    /// Quadrature weight including the nearest-station density and the
    /// change of variables.
    pub weight: f64,
    /// `λ_b · g(λ_b, r)`, which depends on `r·√λ_b` only.
    pub scaled_kernel: f64,
}

/// The kernel tabulated at the radial nodes.
///
/// `A(r, x, θ)` is homogeneous of degree two, so substituting `x → x/√λ_b`
/// gives `g(λ_b, r) = g(1, r√λ_b) / λ_b`. The truncation radii scale the
/// same way, so the radial nodes expressed in `r√λ_b` do not depend on the
/// density and one table serves every `λ_b`.
#[derive(Debug)]
pub(crate) struct KernelTable {
    pub nodes: Vec<RadialNode>,
}

impl KernelTable {
    fn build(quad: &QuadratureSpec) -> Result<Self, QosError> {
        let rules = Rules::new(quad);
        // Radial variable v = λπr² on [0, V], V = ln(1/ε); there the nearest
        // station density e^{−λπr²}·2πλr·dr becomes e^{−v}·dv.
        let v_max = (1.0 / quad.tail_mass_epsilon).ln();
        let p = RADIAL_MAP_POWER;
        let radial = GaussLegendre::new(quad.nodes_r);
        let nodes: Vec<(f64, f64)> = radial
            .on_interval(0.0, 1.0)
            .map(|(w, ww)| {
                let v = v_max * w.powi(p);
                let jacobian = v_max * f64::from(p) * w.powi(p - 1);
                ((v / PI).sqrt(), ww * jacobian * (-v).exp())
            })
            .collect();
        let nodes = nodes
            .into_par_iter()
            .map(|(scaled_r, weight)| {
                let scaled_kernel = rules.kernel(1.0, scaled_r, quad.tail_mass_epsilon);
                if scaled_kernel.is_finite() {
                    Ok(RadialNode {
                        scaled_r,
                        weight,
                        scaled_kernel,
                    })
                } else {
                    Err(QosError::NonFinite(format!(
                        "shared-load kernel at scaled radius {scaled_r}"
                    )))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { nodes })
    }

    /// Shared table for `quad`; built on first use. Concurrent callers for
    /// the same spec block until the first build finishes.
    pub fn shared(quad: &QuadratureSpec) -> Result<Arc<Self>, QosError> {
        type Cache = Mutex<HashMap<[u64; 4], Arc<OnceLock<Arc<KernelTable>>>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = [
            quad.nodes_r as u64,
            quad.nodes_x as u64,
            quad.nodes_theta as u64,
            quad.tail_mass_epsilon.to_bits(),
        ];
        let slot = {
            let mut map = CACHE
                .get_or_init(Default::default)
                .lock()
                .unwrap_or_else(|e| e.into_inner());
            Arc::clone(map.entry(key).or_default())
        };
        if let Some(table) = slot.get() {
            return Ok(Arc::clone(table));
        }
        let built = Arc::new(Self::build(quad)?);
        Ok(Arc::clone(slot.get_or_init(|| built)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn positive_at_high_density() {
        let g = shared_load_kernel(1.0, 0.1, &spec()).unwrap();
        assert!(g > 0.0 && g < 10.0, "{g}");
    }

    #[test]
    fn scales_inversely_with_density() {
        let q = spec();
        for (lambda, r) in [(1e-5, 150.0), (4e-4, 12.0), (2.5e-3, 30.0)] {
            let direct = shared_load_kernel(lambda, r, &q).unwrap();
            let scaled = shared_load_kernel(1.0, r * f64::sqrt(lambda), &q).unwrap() / lambda;
            assert!((direct - scaled).abs() <= 1e-12 * direct, "{direct} vs {scaled}");
        }
    }

    #[test]
    fn doubling_nodes_is_within_refinement_tolerance() {
        let q = spec();
        let fine = QuadratureSpec {
            nodes_r: 2 * q.nodes_r,
            nodes_x: 2 * q.nodes_x,
            nodes_theta: 2 * q.nodes_theta,
            ..q
        };
        for (lambda, r) in [(1e-5, 40.0), (1e-5, 300.0), (1e-4, 60.0), (1e-2, 1.0)] {
            let coarse = shared_load_kernel(lambda, r, &q).unwrap();
            let refined = shared_load_kernel(lambda, r, &fine).unwrap();
            assert!(
                ((coarse - refined) / refined).abs() < q.refinement_rel_tol,
                "lambda={lambda} r={r}: {coarse} vs {refined}"
            );
        }
    }

    #[test]
    fn matches_monte_carlo_integration() {
        // Plain uniform sampling of the same double integral over
        // [0, x_max] × [0, 2π], using the textbook lens formula.
        fn lens(r: f64, x: f64, d: f64) -> f64 {
            if d >= r + x {
                return 0.0;
            }
            if d <= (r - x).abs() {
                return PI * r.min(x).powi(2);
            }
            let a = ((d * d + r * r - x * x) / (2.0 * d * r)).clamp(-1.0, 1.0).acos();
            let b = ((d * d + x * x - r * r) / (2.0 * d * x)).clamp(-1.0, 1.0).acos();
            let k = ((-d + r + x) * (d + r - x) * (d - r + x) * (d + r + x)).max(0.0).sqrt();
            r * r * a + x * x * b - 0.5 * k
        }
        let q = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (lambda, r) in [(1e-5, 120.0), (1e-4, 20.0)] {
            let x_max = void_radius(lambda, q.tail_mass_epsilon) + r;
            let n = 1_000_000;
            let mut sum = 0.0;
            for _ in 0..n {
                let x = rng.random::<f64>() * x_max;
                let theta = rng.random::<f64>() * 2.0 * PI;
                let d = (x * x + r * r + 2.0 * x * r * theta.sin()).max(0.0).sqrt();
                let area = PI * x * x - lens(r, x, d);
                sum += (-lambda * area).exp() * x;
            }
            let mc = sum / n as f64 * x_max * 2.0 * PI;
            let g = shared_load_kernel(lambda, r, &q).unwrap();
            assert!(((g - mc) / g).abs() < 0.01, "lambda={lambda} r={r}: {g} vs {mc}");
        }
    }

    #[test]
    fn table_is_shared() {
        let a = KernelTable::shared(&spec()).unwrap();
        let b = KernelTable::shared(&spec()).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.nodes.len(), spec().nodes_r);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(shared_load_kernel(0.0, 1.0, &spec()).is_err());
        assert!(shared_load_kernel(1.0, 0.0, &spec()).is_err());
    }
}
