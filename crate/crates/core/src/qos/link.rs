use std::f64::consts::{LN_2, PI};

use crate::scenario::RadioParams;

/// Mean co-channel interference at distance `r` from the serving station:
/// `g·P·2π·r^(2−α)·λ_b·U / (k(α−2))`, where `U` is the mean utilization of
/// the interfering stations.
pub fn mean_interference(r: f64, params: &RadioParams, lambda_b: f64, utilization: f64) -> f64 {
    let alpha = params.path_loss_exponent;
    params.reference_gain * params.tx_power_w * 2.0 * PI * r.powf(2.0 - alpha) * lambda_b * utilization
        / (f64::from(params.reuse_factor) * (alpha - 2.0))
}

/// Received signal power at distance `r`, `g·P·r^-α`.
#[inline]
pub fn received_power(r: f64, params: &RadioParams) -> f64 {
    params.reference_gain * params.tx_power_w * r.powf(-params.path_loss_exponent)
}

/// Shannon rate over one reuse partition, bit/s:
/// `(B/k)·log₂(1 + g·P·r^-α / (N₀·B/k + I))`.
pub fn capacity(r: f64, params: &RadioParams, interference: f64) -> f64 {
    let sinr = received_power(r, params) / (params.noise_power_w() + interference);
    params.partition_bandwidth_hz() * sinr.ln_1p() / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interference_vanishes_without_interferers_or_load() {
        let p = RadioParams::default();
        assert_eq!(mean_interference(50.0, &p, 0.0, 1.0), 0.0);
        assert_eq!(mean_interference(50.0, &p, 1e-5, 0.0), 0.0);
    }

    #[test]
    fn interference_is_linear_in_power() {
        let p = RadioParams::default();
        let doubled = RadioParams {
            tx_power_w: 2.0 * p.tx_power_w,
            ..p
        };
        let base = mean_interference(80.0, &p, 3e-5, 0.7);
        assert_eq!(mean_interference(80.0, &doubled, 3e-5, 0.7), 2.0 * base);
    }

    #[test]
    fn unit_sinr_gives_bandwidth() {
        let p = RadioParams {
            bandwidth_hz: 1e7,
            reuse_factor: 1,
            noise_psd_w_per_hz: 0.0,
            ..RadioParams::default()
        };
        let r = 120.0;
        let interference = received_power(r, &p);
        let c = capacity(r, &p, interference);
        assert!((c - 1e7).abs() < 1e-6, "{c}");
    }

    #[test]
    fn capacity_decays_with_distance() {
        let p = RadioParams::default();
        let mut last = f64::INFINITY;
        for r in [1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6] {
            let c = capacity(r, &p, 0.0);
            assert!(c < last);
            last = c;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn capacity_decreases_with_interference() {
        let p = RadioParams::default();
        let mut last = f64::INFINITY;
        for i in [0.0, 1e-15, 1e-13, 1e-11, 1e-9] {
            let c = capacity(300.0, &p, i);
            assert!(c < last);
            last = c;
        }
    }

    #[test]
    fn reuse_two_halves_noise_limited_capacity() {
        // k = 2 halves B/k and N₀B/k. Halving P keeps the SNR fixed, so the
        // rate halves exactly.
        let p1 = RadioParams::default();
        let p2 = RadioParams {
            reuse_factor: 2,
            tx_power_w: p1.tx_power_w / 2.0,
            ..p1
        };
        let r = 400.0;
        let snr1 = received_power(r, &p1) / p1.noise_power_w();
        let snr2 = received_power(r, &p2) / p2.noise_power_w();
        assert!((snr1 - snr2).abs() <= 1e-12 * snr1);
        let c1 = capacity(r, &p1, 0.0);
        let c2 = capacity(r, &p2, 0.0);
        assert!((c2 - 0.5 * c1).abs() <= 1e-12 * c1);
    }
}
