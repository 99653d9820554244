//! Monte Carlo estimate of the mean per-bit delay by direct simulation of
//! the Poisson network, used to validate the analytic integral.
//!
//! Each trial drops a user at the origin, draws stations and other users as
//! Poisson processes on a disc ten typical cell radii wide, attaches every
//! user to its nearest station and records `N / C(r)`, where `N` counts the
//! other users of the tagged user's station and `r` is its distance. The
//! rate uses the analytic mean interference, so the estimate checks the
//! geometry and load terms rather than per-realization interference.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::link::{capacity, mean_interference};
use crate::scenario::RadioParams;

/// Trials per independently seeded batch.
const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub trials: usize,
}

impl McEstimate {
    /// Half-width of the normal 95% confidence interval.
    pub fn ci95_half_width(&self) -> f64 {
        1.96 * self.std_error
    }
}

/// Mean of `N / C(r)` over `trials` simulated networks.
pub fn mc_delay_oracle(
    lambda_b: f64,
    lambda_u: f64,
    utilization: f64,
    params: &RadioParams,
    trials: usize,
    rng_seed: u64,
) -> f64 {
    mc_delay_estimate(lambda_b, lambda_u, utilization, params, trials, rng_seed).mean
}

/// Like [`mc_delay_oracle`] but also reports the standard error.
///
/// Trials run in batches of 256; batch `b` draws from ChaCha8 stream `b` of
/// `rng_seed`, and batch sums are combined in batch order, so the result
/// does not depend on the number of worker threads.
pub fn mc_delay_estimate(
    lambda_b: f64,
    lambda_u: f64,
    utilization: f64,
    params: &RadioParams,
    trials: usize,
    rng_seed: u64,
) -> McEstimate {
    assert!(lambda_b > 0.0 && lambda_b.is_finite(), "lambda_b must be > 0");
    assert!(lambda_u >= 0.0 && lambda_u.is_finite(), "lambda_u must be >= 0");
    if lambda_u == 0.0 || trials == 0 {
        return McEstimate {
            mean: 0.0,
            std_error: 0.0,
            trials,
        };
    }
    let batches = trials.div_ceil(BATCH);
    let sums: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(b as u64);
            let count = BATCH.min(trials - b * BATCH);
            let mut sim = Simulator::new(lambda_b, lambda_u, utilization, params);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let value = sim.trial(&mut rng);
                sum += value;
                sum_sq += value * value;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = sums
        .iter()
        .fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let n = trials as f64;
    let mean = sum / n;
    let variance = ((sum_sq / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
    McEstimate {
        mean,
        std_error: (variance / n).sqrt(),
        trials,
    }
}

#[derive(Clone, Copy)]
struct Point {
    x: f64,
    y: f64,
}

impl Point {
    fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

struct Simulator<'a> {
    lambda_b: f64,
    lambda_u: f64,
    utilization: f64,
    params: &'a RadioParams,
    radius: f64,
    stations: Vec<Point>,
    cell: Vec<Point>,
    scratch: Vec<Point>,
}

impl<'a> Simulator<'a> {
    fn new(lambda_b: f64, lambda_u: f64, utilization: f64, params: &'a RadioParams) -> Self {
        Self {
            lambda_b,
            lambda_u,
            utilization,
            params,
            radius: 10.0 / (lambda_b * PI).sqrt(),
            stations: Vec::new(),
            cell: Vec::new(),
            scratch: Vec::new(),
        }
    }

    fn uniform_in_disc(&self, rng: &mut ChaCha8Rng) -> Point {
        let rho = self.radius * rng.random::<f64>().sqrt();
        let phi = 2.0 * PI * rng.random::<f64>();
        Point {
            x: rho * phi.cos(),
            y: rho * phi.sin(),
        }
    }

    fn trial(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        let disc_area = PI * self.radius * self.radius;
        let station_count = Poisson::new(self.lambda_b * disc_area).expect("positive mean");
        let n = loop {
            let n = station_count.sample(rng) as usize;
            if n > 0 {
                break n;
            }
        };
        self.stations.clear();
        for _ in 0..n {
            let p = self.uniform_in_disc(rng);
            self.stations.push(p);
        }
        let serving_index = (0..n)
            .min_by(|&a, &b| self.stations[a].norm_sq().total_cmp(&self.stations[b].norm_sq()))
            .expect("at least one station");
        let serving = self.stations[serving_index];

        // Other users are only sampled in the bounding box of the serving
        // station's Voronoi cell; membership is then decided by a direct
        // nearest-station check.
        let (lo, hi) = self.cell_bounding_box(serving_index);
        let box_area = (hi.x - lo.x) * (hi.y - lo.y);
        let mut sharing = 0usize;
        if box_area > 0.0 {
            let user_count = Poisson::new(self.lambda_u * box_area)
                .expect("positive mean")
                .sample(rng) as usize;
            let r2 = self.radius * self.radius;
            for _ in 0..user_count {
                let u = Point {
                    x: lo.x + (hi.x - lo.x) * rng.random::<f64>(),
                    y: lo.y + (hi.y - lo.y) * rng.random::<f64>(),
                };
                if u.norm_sq() > r2 {
                    continue;
                }
                let own = u.dist_sq(serving);
                let closer_exists = self
                    .stations
                    .iter()
                    .enumerate()
                    .any(|(i, s)| i != serving_index && s.dist_sq(u) < own);
                if !closer_exists {
                    sharing += 1;
                }
            }
        }

        let r = serving.norm_sq().sqrt();
        let interference = mean_interference(r, self.params, self.lambda_b, self.utilization);
        sharing as f64 / capacity(r, self.params, interference)
    }

    /// Bounding box of the Voronoi cell of station `index`, clipped to the
    /// square around the simulation disc.
    fn cell_bounding_box(&mut self, index: usize) -> (Point, Point) {
        let s = self.stations[index];
        let r = self.radius;
        self.cell.clear();
        self.cell.extend([
            Point { x: -r, y: -r },
            Point { x: r, y: -r },
            Point { x: r, y: r },
            Point { x: -r, y: r },
        ]);
        for (i, &b) in self.stations.iter().enumerate() {
            if i == index || self.cell.is_empty() {
                continue;
            }
            // Keep p with |p - s|² <= |p - b|², i.e. n·p <= c.
            let normal = Point {
                x: 2.0 * (b.x - s.x),
                y: 2.0 * (b.y - s.y),
            };
            let c = b.norm_sq() - s.norm_sq();
            clip_half_plane(&self.cell, normal, c, &mut self.scratch);
            std::mem::swap(&mut self.cell, &mut self.scratch);
        }
        let mut lo = Point {
            x: f64::INFINITY,
            y: f64::INFINITY,
        };
        let mut hi = Point {
            x: f64::NEG_INFINITY,
            y: f64::NEG_INFINITY,
        };
        for p in &self.cell {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        if self.cell.is_empty() {
            return (s, s);
        }
        // A hair of slack so rounding in the clipping never trims the cell.
        let pad = 1e-9 * r;
        (
            Point {
                x: lo.x - pad,
                y: lo.y - pad,
            },
            Point {
                x: hi.x + pad,
                y: hi.y + pad,
            },
        )
    }
}

/// Sutherland-Hodgman clip of a convex polygon against `normal·p <= c`.
fn clip_half_plane(polygon: &[Point], normal: Point, c: f64, out: &mut Vec<Point>) {
    out.clear();
    let side = |p: Point| normal.x * p.x + normal.y * p.y - c;
    for (i, &current) in polygon.iter().enumerate() {
        let next = polygon[(i + 1) % polygon.len()];
        let (fc, fn_) = (side(current), side(next));
        if fc <= 0.0 {
            out.push(current);
        }
        if (fc <= 0.0) != (fn_ <= 0.0) {
            let t = fc / (fc - fn_);
            out.push(Point {
                x: current.x + t * (next.x - current.x),
                y: current.y + t * (next.y - current.y),
            });
        }
    }
}
