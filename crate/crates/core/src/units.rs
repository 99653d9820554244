//! Unit conversions between operator-facing (km²) and internal SI (m²) values.

/// Square meters in one square kilometer.
pub const M2_PER_KM2: f64 = 1e6;

/// Converts a density expressed per km² into a density per m².
#[inline]
pub fn per_km2_to_per_m2(value: f64) -> f64 {
    value / M2_PER_KM2
}

/// Converts a density expressed per m² into a density per km².
#[inline]
pub fn per_m2_to_per_km2(value: f64) -> f64 {
    value * M2_PER_KM2
}

#[inline]
pub fn km2_to_m2(area: f64) -> f64 {
    area * M2_PER_KM2
}

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
