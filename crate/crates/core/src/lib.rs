//! Capacity planning for hybrid cellular networks that mix static base
//! stations with a fleet of moving base stations (MBS).
//!
//! The pipeline runs in four stages:
//!
//! 1. [`scenario`] turns a configuration plus daily traffic profiles into a
//!    per-slot, per-region active-user density matrix.
//! 2. [`qos`] evaluates the mean per-bit delay of a Poisson network for a
//!    given base-station density, user density and radio configuration.
//! 3. [`dimensioning`] finds, for every slot and region, the minimum
//!    base-station density meeting the delay target (the "baseline").
//! 4. [`allocation`] splits the baseline into static capacity plus a
//!    constant-size MBS fleet by solving a small linear program with
//!    [`lp`], then reports savings against a static-only network.
//!
//! [`pipeline`] wires the stages together and writes CSV/JSON artifacts.

pub mod allocation;
pub mod dimensioning;
pub mod error;
pub mod lp;
pub mod matrix;
pub mod pipeline;
pub mod qos;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
pub use matrix::SlotRegionMatrix;
