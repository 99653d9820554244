//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mbsplan_core::lp::LinearProgram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum objective over all vertices of a bounded polytope, found by
/// solving every square subsystem of active constraints. `None` when no
/// vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    // Every constraint as a hyperplane a·x = b.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (row, &b) in lp.eq_matrix.iter().zip(&lp.eq_rhs) {
        planes.push((row.clone(), b));
    }
    for (row, &b) in lp.ub_matrix.iter().zip(&lp.ub_rhs) {
        planes.push((row.clone(), b));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        planes.push((unit.clone(), lo));
        if hi.is_finite() {
            planes.push((unit, hi));
        }
    }
    let feasible = |x: &[f64]| {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        lp.eq_matrix.iter().zip(&lp.eq_rhs).all(|(r, &b)| (dot(r) - b).abs() <= 1e-9)
            && lp.ub_matrix.iter().zip(&lp.ub_rhs).all(|(r, &b)| dot(r) <= b + 1e-9)
            && x.iter().zip(&lp.bounds).all(|(&v, &(lo, hi))| v >= lo - 1e-9 && v <= hi + 1e-9)
    };
    if planes.len() < n || n > MAX_VARS {
        return None;
    }
    let mut best: Option<f64> = None;
    let mut chosen: Vec<usize> = (0..n).collect();
    let mut x = [0.0; MAX_VARS];
    loop {
        if solve_square(&planes, &chosen, &mut x[..n]) && feasible(&x[..n]) {
            let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(value, |b: f64| b.min(value)));
        }
        if !next_combination(&mut chosen, planes.len()) {
            break;
        }
    }
    best
}

const MAX_VARS: usize = 8;

fn next_combination(c: &mut [usize], total: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < total - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the square system formed by the chosen hyperplanes by Gaussian
/// elimination with partial pivoting; false if (near) singular.
fn solve_square(planes: &[(Vec<f64>, f64)], chosen: &[usize], out: &mut [f64]) -> bool {
    let n = chosen.len();
    let mut m = [[0.0; MAX_VARS + 1]; MAX_VARS];
    for (row, &i) in m.iter_mut().zip(chosen) {
        row[..n].copy_from_slice(&planes[i].0);
        row[n] = planes[i].1;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[pivot][col].abs() < 1e-9 {
            return false;
        }
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    for i in 0..n {
        out[i] = m[i][n] / m[i][i];
    }
    true
}

/// Seeded random LP: up to 8 variables with box bounds and up to 8 rows
/// (about a quarter equalities), integer data in [−5, 5].
pub fn random_small_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=8);
    let rows = rng.random_range(0..=8);
    let mut lp = LinearProgram::new(n);
    lp.objective = (0..n).map(|_| f64::from(rng.random_range(-5..=5))).collect();
    for _ in 0..rows {
        let row: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(-5..=5))).collect();
        let rhs = f64::from(rng.random_range(-5..=5));
        if rng.random_bool(0.25) {
            lp.add_eq(row, rhs);
        } else {
            lp.add_ub(row, rhs);
        }
    }
    lp.bounds = (0..n)
        .map(|_| {
            let lo = f64::from(rng.random_range(0..=2));
            (lo, lo + f64::from(rng.random_range(1..=5)))
        })
        .collect();
    lp
}

/// Brute-force minimum density: the first point of an `n`-point log grid
/// over `[lo, hi]` whose self-consistent delay meets the target.
pub fn grid_min_density(
    feasible: impl Fn(f64) -> bool,
    lo: f64,
    hi: f64,
    n: usize,
) -> Option<(usize, Vec<f64>)> {
    let grid: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect();
    let idx = grid.iter().position(|&g| feasible(g))?;
    Some((idx, grid))
}
