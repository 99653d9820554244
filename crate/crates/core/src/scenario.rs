//! Scenario ingestion: configuration, daily traffic profiles, time
//! discretization and the per-slot active-user density matrix.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::SlotRegionMatrix;
use crate::qos::QuadratureSpec;
use crate::units::{per_km2_to_per_m2, SPEED_OF_LIGHT};

/// Hours in the periodic observation window.
pub const DAY_HOURS: f64 = 24.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    /// The document does not match the configuration schema (missing or
    /// unknown keys, wrong JSON types, malformed CSV header).
    #[error("schema error: {0}")]
    Schema(String),
    /// A value is well-formed but breaks an invariant.
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Name of the offending field for validation errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            ScenarioError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

type Result<T> = std::result::Result<T, ScenarioError>;

/// Physical-layer constants shared by every cell in the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioParams {
    /// Total system bandwidth B, Hz.
    pub bandwidth_hz: f64,
    /// Frequency reuse factor k.
    pub reuse_factor: u32,
    /// Transmit power P, W.
    pub tx_power_w: f64,
    /// Antenna gain G. Not used by the delay model directly; it is folded
    /// into `reference_gain`.
    pub antenna_gain: f64,
    /// Carrier frequency f, Hz. Only used to derive the default
    /// `reference_gain`.
    pub carrier_freq_hz: f64,
    /// Path-loss exponent α, must exceed 2.
    pub path_loss_exponent: f64,
    /// Noise power spectral density N₀, W/Hz.
    pub noise_psd_w_per_hz: f64,
    /// Target mean per-bit delay τ₀, s/bit.
    pub target_delay_s_per_bit: f64,
    /// Multiplier turning `tx_power_w · r^-α` into received power (antenna
    /// gain and the 1 m free-space loss).
    pub reference_gain: f64,
}

impl RadioParams {
    /// Free-space gain at 1 m, `(c / 4πf)²`.
    pub fn free_space_reference_gain(carrier_freq_hz: f64) -> f64 {
        let ratio = SPEED_OF_LIGHT / (4.0 * PI * carrier_freq_hz);
        ratio * ratio
    }

    /// Noise power in one reuse partition, `N₀ · B / k`.
    pub fn noise_power_w(&self) -> f64 {
        self.noise_psd_w_per_hz * self.partition_bandwidth_hz()
    }

    /// Bandwidth available to one reuse partition, `B / k`.
    pub fn partition_bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz / f64::from(self.reuse_factor)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("radio.bandwidth_hz", self.bandwidth_hz),
            ("radio.tx_power_w", self.tx_power_w),
            ("radio.antenna_gain", self.antenna_gain),
            ("radio.carrier_freq_hz", self.carrier_freq_hz),
            ("radio.path_loss_exponent", self.path_loss_exponent),
            ("radio.noise_psd_w_per_hz", self.noise_psd_w_per_hz),
            ("radio.target_delay_s_per_bit", self.target_delay_s_per_bit),
            ("radio.reference_gain", self.reference_gain),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(ScenarioError::invalid(field, "must be finite"));
            }
        }
        if self.path_loss_exponent <= 2.0 {
            return Err(ScenarioError::invalid(
                "radio.path_loss_exponent",
                format!(
                    "must be > 2 for a finite interference integral, got {}",
                    self.path_loss_exponent
                ),
            ));
        }
        let positive = [
            ("radio.bandwidth_hz", self.bandwidth_hz),
            ("radio.tx_power_w", self.tx_power_w),
            ("radio.target_delay_s_per_bit", self.target_delay_s_per_bit),
            ("radio.reference_gain", self.reference_gain),
            ("radio.carrier_freq_hz", self.carrier_freq_hz),
        ];
        for (field, value) in positive {
            if value <= 0.0 {
                return Err(ScenarioError::invalid(field, format!("must be > 0, got {value}")));
            }
        }
        if self.reuse_factor < 1 {
            return Err(ScenarioError::invalid("radio.reuse_factor", "must be >= 1"));
        }
        if self.noise_psd_w_per_hz < 0.0 {
            return Err(ScenarioError::invalid(
                "radio.noise_psd_w_per_hz",
                "must be >= 0",
            ));
        }
        if self.antenna_gain < 0.0 {
            return Err(ScenarioError::invalid("radio.antenna_gain", "must be >= 0"));
        }
        Ok(())
    }
}

impl Default for RadioParams {
    /// 10 MHz at 1 GHz with a 10 µs/bit (100 kbit/s) target; the remaining
    /// values are typical urban macro-cell figures.
    fn default() -> Self {
        let carrier_freq_hz = 1e9;
        Self {
            bandwidth_hz: 10e6,
            reuse_factor: 1,
            tx_power_w: 1.0,
            antenna_gain: 1.0,
            carrier_freq_hz,
            path_loss_exponent: 3.5,
            // -174 dBm/Hz
            noise_psd_w_per_hz: 3.98e-21,
            target_delay_s_per_bit: 1e-5,
            reference_gain: Self::free_space_reference_gain(carrier_freq_hz),
        }
    }
}

/// A district with its own traffic pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: String,
    pub area_km2: f64,
    pub peak_user_density_per_km2: f64,
}

impl Region {
    pub fn new(id: impl Into<String>, area_km2: f64, peak_user_density_per_km2: f64) -> Self {
        Self {
            id: id.into(),
            area_km2,
            peak_user_density_per_km2,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("regions[{index}].{name}");
        if self.id.trim().is_empty() {
            return Err(ScenarioError::invalid(field("id"), "must not be empty"));
        }
        if !(self.area_km2.is_finite() && self.area_km2 > 0.0) {
            return Err(ScenarioError::invalid(
                field("area_km2"),
                format!("must be finite and > 0, got {}", self.area_km2),
            ));
        }
        if !(self.peak_user_density_per_km2.is_finite() && self.peak_user_density_per_km2 >= 0.0) {
            return Err(ScenarioError::invalid(
                field("peak_user_density_per_km2"),
                format!("must be finite and >= 0, got {}", self.peak_user_density_per_km2),
            ));
        }
        Ok(())
    }
}

/// Shipped daily traffic shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// Business district: morning ramp, peak at 10:00, quiet evenings.
    Office,
    /// Residential district: low during working hours, peak at 21:00.
    Residential,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Office => "office",
            ProfileKind::Residential => "residential",
        }
    }

    /// Hour-by-hour relative load, index = hour of day.
    fn hourly_load(self) -> [f64; 24] {
        match self {
            ProfileKind::Office => [
                0.34, 0.32, 0.31, 0.30, 0.30, 0.31, 0.36, 0.52, 0.76, 0.93, 1.00, 0.96, //
                0.85, 0.88, 0.92, 0.86, 0.74, 0.60, 0.50, 0.45, 0.42, 0.40, 0.38, 0.36,
            ],
            ProfileKind::Residential => [
                0.55, 0.36, 0.22, 0.14, 0.10, 0.10, 0.14, 0.24, 0.30, 0.28, 0.27, 0.29, //
                0.33, 0.34, 0.32, 0.34, 0.42, 0.55, 0.70, 0.84, 0.95, 1.00, 0.88, 0.72,
            ],
        }
    }
}

/// Where a region's traffic profile came from; kept so a scenario can be
/// written back out as a configuration document.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    Builtin(ProfileKind),
    File(PathBuf),
}

impl ProfileSource {
    const BUILTIN_PREFIX: &'static str = "builtin:";

    fn parse(spec: &str, base_dir: &Path) -> Result<Self> {
        match spec.strip_prefix(Self::BUILTIN_PREFIX) {
            Some("office") => Ok(ProfileSource::Builtin(ProfileKind::Office)),
            Some("residential") => Ok(ProfileSource::Builtin(ProfileKind::Residential)),
            Some(other) => Err(ScenarioError::Schema(format!(
                "unknown builtin profile `{other}` (expected office or residential)"
            ))),
            None => {
                let path = Path::new(spec);
                Ok(ProfileSource::File(if path.is_absolute() {
                    path.to_path_buf()
                } else {
                    base_dir.join(path)
                }))
            }
        }
    }

    fn to_config_string(&self) -> String {
        match self {
            ProfileSource::Builtin(kind) => format!("{}{}", Self::BUILTIN_PREFIX, kind.name()),
            ProfileSource::File(path) => path.display().to_string(),
        }
    }
}

impl fmt::Display for ProfileSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config_string())
    }
}

/// Periodic daily load curve, normalized so its maximum is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    pub region_id: String,
    samples: Vec<(f64, f64)>,
    pub source: ProfileSource,
}

impl TrafficProfile {
    /// Validates `(time_h, load)` samples and rescales loads to a unit peak.
    pub fn new(
        region_id: impl Into<String>,
        samples: Vec<(f64, f64)>,
        source: ProfileSource,
    ) -> Result<Self> {
        let region_id = region_id.into();
        let field = format!("profile[{region_id}]");
        if samples.len() < 2 {
            return Err(ScenarioError::invalid(field, "needs at least 2 samples"));
        }
        for (i, &(t, load)) in samples.iter().enumerate() {
            if !(t.is_finite() && (0.0..DAY_HOURS).contains(&t)) {
                return Err(ScenarioError::invalid(
                    format!("{field}.time_h"),
                    format!("sample {i}: time {t} outside [0, 24)"),
                ));
            }
            if !(load.is_finite() && (0.0..=1.0).contains(&load)) {
                return Err(ScenarioError::invalid(
                    format!("{field}.normalized_load"),
                    format!("sample {i}: load {load} outside [0, 1]"),
                ));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(ScenarioError::invalid(
                format!("{field}.time_h"),
                format!("times must be strictly increasing (sample {})", i + 1),
            ));
        }
        let peak = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(ScenarioError::invalid(
                format!("{field}.normalized_load"),
                "all loads are zero; cannot normalize",
            ));
        }
        let samples = samples.into_iter().map(|(t, l)| (t, l / peak)).collect();
        Ok(Self {
            region_id,
            samples,
            source,
        })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Linear interpolation at `time_h`, wrapping around midnight.
    pub fn load_at(&self, time_h: f64) -> f64 {
        let t = time_h.rem_euclid(DAY_HOURS);
        let s = &self.samples;
        let (first, last) = (s[0], s[s.len() - 1]);
        // Segment containing t, with the wrap segment last -> first + 24 h.
        let (a, b) = match s.iter().position(|&(ti, _)| ti > t) {
            Some(0) => ((last.0 - DAY_HOURS, last.1), first),
            Some(i) => (s[i - 1], s[i]),
            None => (last, (first.0 + DAY_HOURS, first.1)),
        };
        let w = (t - a.0) / (b.0 - a.0);
        a.1 + w * (b.1 - a.1)
    }

    /// Reads a `time_h,normalized_load` CSV file.
    pub fn from_csv_path(region_id: &str, path: &Path) -> Result<Self> {
        let read_err = |message: String| ScenarioError::Read {
            path: path.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| read_err(e.to_string()))?;
        let headers = reader.headers().map_err(|e| read_err(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["time_h", "normalized_load"] {
            return Err(ScenarioError::Schema(format!(
                "{}: expected header `time_h,normalized_load`, found `{}`",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for record in reader.deserialize::<(f64, f64)>() {
            samples.push(record.map_err(|e| read_err(e.to_string()))?);
        }
        Self::new(region_id, samples, ProfileSource::File(path.to_path_buf()))
    }
}

/// Returns one of the shipped daily profiles.
pub fn synth_profile(kind: ProfileKind) -> TrafficProfile {
    let samples = kind
        .hourly_load()
        .iter()
        .enumerate()
        .map(|(h, &load)| (h as f64, load))
        .collect();
    TrafficProfile::new(kind.name(), samples, ProfileSource::Builtin(kind))
        .expect("builtin profiles are valid")
}

/// Midpoint of slot `j` out of `num_slots`, in hours.
pub fn slot_midpoint_h(j: usize, num_slots: usize) -> f64 {
    (j as f64 + 0.5) * DAY_HOURS / num_slots as f64
}

/// Samples `profile` at the midpoints of `num_slots` equal slots.
pub fn resample_profile(profile: &TrafficProfile, num_slots: usize) -> Vec<f64> {
    (0..num_slots)
        .map(|j| profile.load_at(slot_midpoint_h(j, num_slots)))
        .collect()
}

/// Full planning scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub regions: Vec<Region>,
    /// One profile per region, same order as `regions`.
    pub profiles: Vec<TrafficProfile>,
    pub num_slots: usize,
    pub radio: RadioParams,
    pub quadrature: QuadratureSpec,
}

impl Scenario {
    pub fn new(
        regions: Vec<Region>,
        profiles: Vec<TrafficProfile>,
        num_slots: usize,
        radio: RadioParams,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        let scenario = Self {
            regions,
            profiles,
            num_slots,
            radio,
            quadrature,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Two districts, office (1 km², 10 000 users/km² at peak) and
    /// residential (10 km², 1 000 users/km²), 60 slots, default radio.
    pub fn reference() -> Self {
        let mut office = synth_profile(ProfileKind::Office);
        let mut residential = synth_profile(ProfileKind::Residential);
        office.region_id = "office".into();
        residential.region_id = "residential".into();
        Self::new(
            vec![
                Region::new("office", 1.0, 10_000.0),
                Region::new("residential", 10.0, 1_000.0),
            ],
            vec![office, residential],
            60,
            RadioParams::default(),
            QuadratureSpec::default(),
        )
        .expect("reference scenario is valid")
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn region_index(&self, id: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.id == id)
    }

    pub fn slot_times_h(&self) -> Vec<f64> {
        (0..self.num_slots)
            .map(|j| slot_midpoint_h(j, self.num_slots))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_slots < 1 {
            return Err(ScenarioError::invalid("num_slots", "must be >= 1"));
        }
        if self.regions.is_empty() {
            return Err(ScenarioError::invalid("regions", "at least one region required"));
        }
        let mut seen = HashSet::new();
        for (i, region) in self.regions.iter().enumerate() {
            region.validate(i)?;
            if !seen.insert(region.id.as_str()) {
                return Err(ScenarioError::invalid(
                    format!("regions[{i}].id"),
                    format!("duplicate region id `{}`", region.id),
                ));
            }
        }
        if self.profiles.len() != self.regions.len() {
            return Err(ScenarioError::invalid(
                "regions",
                "every region needs exactly one profile",
            ));
        }
        for (i, (region, profile)) in self.regions.iter().zip(&self.profiles).enumerate() {
            if region.id != profile.region_id {
                return Err(ScenarioError::invalid(
                    format!("regions[{i}].profile"),
                    format!(
                        "profile belongs to `{}`, not `{}`",
                        profile.region_id, region.id
                    ),
                ));
            }
        }
        self.radio.validate()?;
        self.quadrature
            .validate()
            .map_err(|e| ScenarioError::invalid("quadrature", e.to_string()))?;
        Ok(())
    }

    /// Configuration document describing this scenario.
    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            regions: self
                .regions
                .iter()
                .zip(&self.profiles)
                .map(|(r, p)| RegionConfig {
                    id: r.id.clone(),
                    area_km2: r.area_km2,
                    peak_user_density_per_km2: r.peak_user_density_per_km2,
                    profile: p.source.to_config_string(),
                })
                .collect(),
            num_slots: self.num_slots,
            radio: RadioConfig::from(self.radio),
            quadrature: (self.quadrature != QuadratureSpec::default())
                .then(|| QuadratureConfig::from(self.quadrature)),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_config()).expect("config serializes")
    }
}

/// Active-user density per slot and region, users/m².
#[derive(Debug, Clone, PartialEq)]
pub struct UserDensityMatrix {
    pub values: SlotRegionMatrix,
    pub slot_times_h: Vec<f64>,
}

/// Rescales each region's resampled profile so its peak equals the region's
/// peak user density, converted to users/m².
pub fn user_density_matrix(scenario: &Scenario) -> UserDensityMatrix {
    let j_count = scenario.num_slots;
    let columns: Vec<Vec<f64>> = scenario
        .regions
        .iter()
        .zip(&scenario.profiles)
        .map(|(region, profile)| {
            let peak = per_km2_to_per_m2(region.peak_user_density_per_km2);
            resample_profile(profile, j_count)
                .into_iter()
                .map(|load| load * peak)
                .collect()
        })
        .collect();
    UserDensityMatrix {
        values: SlotRegionMatrix::from_fn(j_count, columns.len(), |j, z| columns[z][j]),
        slot_times_h: scenario.slot_times_h(),
    }
}

// ---------------------------------------------------------------------------
// Configuration document
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub regions: Vec<RegionConfig>,
    pub num_slots: usize,
    pub radio: RadioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub id: String,
    pub area_km2: f64,
    pub peak_user_density_per_km2: f64,
    /// `builtin:office`, `builtin:residential`, or a CSV path relative to
    /// the configuration file.
    pub profile: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    pub reuse_factor: u32,
    pub tx_power_w: f64,
    pub antenna_gain: f64,
    pub carrier_freq_hz: f64,
    pub path_loss_exponent: f64,
    pub noise_psd_w_per_hz: f64,
    pub target_delay_s_per_bit: f64,
    /// Defaults to the free-space gain at 1 m for `carrier_freq_hz`.
    #[serde(default)]
    pub reference_gain: Option<f64>,
}

impl From<RadioParams> for RadioConfig {
    fn from(p: RadioParams) -> Self {
        Self {
            bandwidth_hz: p.bandwidth_hz,
            reuse_factor: p.reuse_factor,
            tx_power_w: p.tx_power_w,
            antenna_gain: p.antenna_gain,
            carrier_freq_hz: p.carrier_freq_hz,
            path_loss_exponent: p.path_loss_exponent,
            noise_psd_w_per_hz: p.noise_psd_w_per_hz,
            target_delay_s_per_bit: p.target_delay_s_per_bit,
            reference_gain: Some(p.reference_gain),
        }
    }
}

impl From<RadioConfig> for RadioParams {
    fn from(c: RadioConfig) -> Self {
        Self {
            bandwidth_hz: c.bandwidth_hz,
            reuse_factor: c.reuse_factor,
            tx_power_w: c.tx_power_w,
            antenna_gain: c.antenna_gain,
            carrier_freq_hz: c.carrier_freq_hz,
            path_loss_exponent: c.path_loss_exponent,
            noise_psd_w_per_hz: c.noise_psd_w_per_hz,
            target_delay_s_per_bit: c.target_delay_s_per_bit,
            reference_gain: c
                .reference_gain
                .unwrap_or_else(|| RadioParams::free_space_reference_gain(c.carrier_freq_hz)),
        }
    }
}

/// Optional overrides for the delay-model quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_x: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_theta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_mass_epsilon: Option<f64>,
}

impl From<QuadratureSpec> for QuadratureConfig {
    fn from(q: QuadratureSpec) -> Self {
        Self {
            nodes_r: Some(q.nodes_r),
            nodes_x: Some(q.nodes_x),
            nodes_theta: Some(q.nodes_theta),
            tail_mass_epsilon: Some(q.tail_mass_epsilon),
        }
    }
}

impl QuadratureConfig {
    fn apply(self, base: QuadratureSpec) -> QuadratureSpec {
        QuadratureSpec {
            nodes_r: self.nodes_r.unwrap_or(base.nodes_r),
            nodes_x: self.nodes_x.unwrap_or(base.nodes_x),
            nodes_theta: self.nodes_theta.unwrap_or(base.nodes_theta),
            tail_mass_epsilon: self.tail_mass_epsilon.unwrap_or(base.tail_mass_epsilon),
            refinement_rel_tol: base.refinement_rel_tol,
        }
    }
}

impl ScenarioConfig {
    /// Resolves profile references (relative to `base_dir`) and validates.
    pub fn into_scenario(self, base_dir: &Path) -> Result<Scenario> {
        let mut regions = Vec::with_capacity(self.regions.len());
        let mut profiles = Vec::with_capacity(self.regions.len());
        for rc in self.regions {
            let region = Region::new(rc.id, rc.area_km2, rc.peak_user_density_per_km2);
            let profile = match ProfileSource::parse(&rc.profile, base_dir)? {
                ProfileSource::Builtin(kind) => {
                    let mut p = synth_profile(kind);
                    p.region_id = region.id.clone();
                    p
                }
                ProfileSource::File(path) => TrafficProfile::from_csv_path(&region.id, &path)?,
            };
            regions.push(region);
            profiles.push(profile);
        }
        let quadrature = self
            .quadrature
            .map_or_else(QuadratureSpec::default, |q| q.apply(QuadratureSpec::default()));
        Scenario::new(
            regions,
            profiles,
            self.num_slots,
            RadioParams::from(self.radio),
            quadrature,
        )
    }
}

/// Parses and validates a JSON configuration document. Relative profile
/// paths are resolved against `base_dir`.
pub fn load_scenario(document: &str, base_dir: &Path) -> Result<Scenario> {
    let config: ScenarioConfig =
        serde_json::from_str(document).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    config.into_scenario(base_dir)
}

/// Reads a configuration file; relative profile paths resolve against the
/// file's directory.
pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    let document = std::fs::read_to_string(path).map_err(|e| ScenarioError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    load_scenario(&document, base_dir)
}
