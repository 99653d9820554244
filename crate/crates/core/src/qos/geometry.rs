//! Two-disc geometry behind the shared-load integral.
//!
//! The tagged user sits at the origin and its serving base station at
//! distance `r`. Another user at distance `x` from that base station, at
//! angle `θ`, is served by the same station iff the disc of radius `x`
//! around it holds no other station. Conditioned on the disc of radius `r`
//! around the origin being empty, only the part of the first disc outside
//! the second matters: that is the overlap area `A(r, x, θ)`.

use std::f64::consts::{FRAC_PI_4, PI};

use super::QosError;

/// `sin θ` together with `1 - sin θ` and `1 + sin θ` evaluated without
/// cancellation near θ = ±π/2.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AngleTerms {
    pub one_minus_sin: f64,
    pub one_plus_sin: f64,
}

impl AngleTerms {
    pub fn new(theta: f64) -> Self {
        let a = (0.5 * theta - FRAC_PI_4).sin();
        let b = (0.5 * theta + FRAC_PI_4).sin();
        Self {
            one_minus_sin: 2.0 * a * a,
            one_plus_sin: 2.0 * b * b,
        }
    }
}

/// `d² = x² + r² + 2xr·sinθ`, written as `(x - r)² + 2xr(1 + sinθ)`.
#[inline]
fn distance_sq(r: f64, x: f64, angle: &AngleTerms) -> f64 {
    let diff = x - r;
    diff * diff + 2.0 * x * r * angle.one_plus_sin
}

/// Distance between the tagged user and the other user, `√(x² + r² + 2xr·sinθ)`.
pub fn pair_distance(r: f64, x: f64, theta: f64) -> f64 {
    distance_sq(r, x, &AngleTerms::new(theta)).sqrt()
}

/// Area of the disc of radius `x` that is not covered by the disc of radius
/// `r`, the centers being `pair_distance(r, x, θ)` apart.
///
/// Result lies in `[0, πx²]`.
pub fn overlap_area(r: f64, x: f64, theta: f64) -> Result<f64, QosError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(QosError::InvalidInput(format!("overlap_area: r = {r} must be > 0")));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(QosError::InvalidInput(format!("overlap_area: x = {x} must be >= 0")));
    }
    if !theta.is_finite() {
        return Err(QosError::InvalidInput(format!("overlap_area: theta = {theta}")));
    }
    Ok(uncovered_area(r, x, &AngleTerms::new(theta)))
}

/// `πx² − [r²·acos((r + x sinθ)/d) + x²·acos((x + r sinθ)/d) − ½√(r² − (d−x)²)·√((d+x)² − r²)]`.
///
/// The two half-angles are computed with `atan2` from the kite area
/// `½√(…)√(…)` instead of `acos`, and every factor under the square roots is
/// rewritten as a product of non-negative terms. This is the same quantity,
/// but it keeps full relative accuracy at tangency, where the `acos`
/// arguments approach ±1.
#[inline]
pub(crate) fn uncovered_area(r: f64, x: f64, angle: &AngleTerms) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let disc = PI * x * x;
    let d = distance_sq(r, x, angle).sqrt();
    if d == 0.0 {
        // Coincident centers: nested discs.
        let inner = r.min(x);
        return (disc - PI * inner * inner).max(0.0);
    }
    let two_xr = 2.0 * x * r;
    let abs_diff = (x - r).abs();
    // r + x - d and d - |x - r|, both >= 0 since |x - r| <= d <= x + r.
    let outer_gap = two_xr * angle.one_minus_sin / (r + x + d);
    let inner_gap = two_xr * angle.one_plus_sin / (d + abs_diff);
    let (r_plus_d_minus_x, d_plus_x_minus_r) = if x >= r {
        (inner_gap, d + abs_diff)
    } else {
        (d + abs_diff, inner_gap)
    };
    // r² − (d − x)² and (d + x)² − r²
    let t1 = outer_gap * r_plus_d_minus_x;
    let t2 = d_plus_x_minus_r * (d + x + r);
    let kite = 0.5 * t1.sqrt() * t2.sqrt();
    // r + x·sinθ and x + r·sinθ
    let r_side = (r - x) + x * angle.one_plus_sin;
    let x_side = (x - r) + r * angle.one_plus_sin;
    let half_angle_r = kite.atan2(r * r_side);
    let half_angle_x = kite.atan2(x * x_side);
    let lens = r * r * half_angle_r + x * x * half_angle_x - kite;
    (disc - lens).clamp(0.0, disc)
}
