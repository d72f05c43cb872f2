//! Recovering relative channel phases from RSSI feedback.
//!
//! With equally spaced training phases the least-squares fit of
//! `alpha + beta cos(theta_n + phi)` decouples from `alpha` and `beta`: the
//! stationary points satisfy `tan(phi) = -sum R_n sin(theta_n) / sum R_n cos(theta_n)`.
//! That equation has two solutions `pi` apart. The one with
//! `sum R_n cos(theta_n + phi) > 0` is the minimum of the fit (the maximum of
//! the received energy), so no extra feedback is needed to pick it.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::codebook::{make_theta, PhaseSet};
use crate::error::{Error, Result};
use crate::feedback::TrainingTable;
use crate::model::{wrap, ChannelVector, SystemParams};

/// Training phases must match `2 (n - 1) pi / N` to within this.
pub const EQUAL_SPACING_TOLERANCE: f64 = 1e-6;

/// Weighted sums below this (relative to `max(1, sum |R_n|)`) are treated as zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// The two solutions of the tangent equation, `b = a - pi` (wrapped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePair {
    /// Principal value of the arctangent, in `(-pi/2, pi/2]`.
    pub a: f64,
    pub b: f64,
}

impl CandidatePair {
    /// Candidates for `tan(phi) = y / x`.
    ///
    /// Both are derived from `atan2(y, x)`, and whichever of the two equals it
    /// is stored bit-for-bit.
    fn from_quadrant(y: f64, x: f64) -> Self {
        let psi = y.atan2(x);
        if psi > -FRAC_PI_2 && psi <= FRAC_PI_2 {
            Self {
                a: psi,
                b: wrap(psi - PI),
            }
        } else {
            Self {
                a: wrap(psi - PI),
                b: psi,
            }
        }
    }
}

/// Result of estimating one relative phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    pub candidate_a: f64,
    pub candidate_b: f64,
    /// The selected candidate.
    pub resolved: f64,
    /// `sum R_n cos(theta_n + candidate_a)`.
    pub discriminant: f64,
    /// The discriminant was exactly zero and `candidate_a` was taken by default.
    pub tie: bool,
}

/// Resolved relative phases `phi_2..phi_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    pub phases: Vec<f64>,
}

fn check_len(rssi: &[f64], theta: &PhaseSet) -> Result<()> {
    if rssi.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            actual: rssi.len(),
        });
    }
    Ok(())
}

fn degenerate(y: f64, x: f64, rssi: &[f64]) -> bool {
    let scale = rssi.iter().map(|r| r.abs()).sum::<f64>().max(1.0);
    y.abs() < DEGENERACY_THRESHOLD * scale && x.abs() < DEGENERACY_THRESHOLD * scale
}

/// Closed-form phase for `N = 3` noiseless feedback at phases `0, 2pi/3, 4pi/3`:
/// `tan(phi) = sqrt(3) (R2 - R3) / ((R2 - R1) + (R3 - R1))`.
pub fn estimate_noiseless_n3(r1: f64, r2: f64, r3: f64) -> Result<PhaseEstimate> {
    let y = 3f64.sqrt() * (r2 - r3);
    let x = (r2 - r1) + (r3 - r1);
    let rssi = [r1, r2, r3];
    if degenerate(y, x, &rssi) {
        return Err(Error::DegenerateFeedback);
    }
    let theta = make_theta(3)?;
    resolve_ambiguity(&rssi, &theta, CandidatePair::from_quadrant(y, x))
}

/// Least-squares misfit `sum (R_n - alpha - beta cos(theta_n + phi))^2`.
pub fn ls_objective(
    rssi: &[f64],
    theta: &PhaseSet,
    alpha: f64,
    beta: f64,
    phi: f64,
) -> Result<f64> {
    check_len(rssi, theta)?;
    Ok(rssi
        .iter()
        .zip(theta.thetas())
        .map(|(r, t)| (r - alpha - beta * (t + phi).cos()).powi(2))
        .sum())
}

/// ML candidates `tan(phi) = -sum R_n sin(theta_n) / sum R_n cos(theta_n)`.
///
/// Requires the equally spaced phase set: that is what makes the estimate
/// independent of `alpha` and `beta`.
pub fn estimate_ml(rssi: &[f64], theta: &PhaseSet) -> Result<CandidatePair> {
    check_len(rssi, theta)?;
    if theta.len() < 3 {
        return Err(Error::CrlbUnbounded("fewer than 3 training phases"));
    }
    if !theta.is_equally_spaced(EQUAL_SPACING_TOLERANCE) {
        return Err(Error::NotEquallySpaced {
            expected: make_theta(theta.len())?.thetas().to_vec(),
        });
    }
    let (s, c) = weighted_sums(rssi, theta);
    if degenerate(s, c, rssi) {
        return Err(Error::DegenerateFeedback);
    }
    Ok(CandidatePair::from_quadrant(-s, c))
}

/// `(sum R_n sin(theta_n), sum R_n cos(theta_n))`.
pub fn weighted_sums(rssi: &[f64], theta: &PhaseSet) -> (f64, f64) {
    rssi.iter()
        .zip(theta.thetas())
        .fold((0.0, 0.0), |(s, c), (r, t)| {
            let (st, ct) = t.sin_cos();
            (s + r * st, c + r * ct)
        })
}

/// Picks `candidate_a` iff `sum R_n cos(theta_n + a) > 0`, otherwise `b`.
/// An exactly zero discriminant keeps `a` and sets the tie flag.
pub fn resolve_ambiguity(
    rssi: &[f64],
    theta: &PhaseSet,
    candidates: CandidatePair,
) -> Result<PhaseEstimate> {
    check_len(rssi, theta)?;
    let discriminant: f64 = rssi
        .iter()
        .zip(theta.thetas())
        .map(|(r, t)| r * (t + candidates.a).cos())
        .sum();
    let tie = discriminant == 0.0;
    let resolved = if discriminant >= 0.0 {
        candidates.a
    } else {
        candidates.b
    };
    Ok(PhaseEstimate {
        candidate_a: candidates.a,
        candidate_b: candidates.b,
        resolved,
        discriminant,
        tie,
    })
}

/// ML estimate followed by ambiguity resolution.
pub fn estimate_phase(rssi: &[f64], theta: &PhaseSet) -> Result<PhaseEstimate> {
    let pair = estimate_ml(rssi, theta)?;
    resolve_ambiguity(rssi, theta, pair)
}

/// Per-slot estimates for a pairwise training table, slot `k = 2..=K` in order.
pub fn estimate_slots(table: &TrainingTable) -> Result<Vec<PhaseEstimate>> {
    table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            estimate_phase(row, table.theta()).map_err(|e| match e {
                Error::DegenerateFeedback => Error::DegenerateSlot { slot: i + 2 },
                other => other,
            })
        })
        .collect()
}

/// Resolved phase estimates `phi_2..phi_K` from a training table.
pub fn estimate_all_phases(table: &TrainingTable) -> Result<EstimateSet> {
    Ok(EstimateSet {
        phases: estimate_slots(table)?.iter().map(|e| e.resolved).collect(),
    })
}

/// Largest grid searched exhaustively; bigger problems use cyclic coordinate
/// search over the same grid.
const FULL_ENUMERATION_LIMIT: usize = 2_000_000;

/// Full-CSI grid search for the EGT phases maximizing received energy.
///
/// Phases take values `m * grid_step`, `m = 0, 1, ...` below `2 pi`. Ties keep
/// the earliest grid point, so a flat objective returns the origin.
pub fn exhaustive_baseline(
    h: &ChannelVector,
    sys: SystemParams,
    grid_step: f64,
) -> Result<EstimateSet> {
    if !(grid_step > 0.0 && grid_step <= FRAC_PI_2) {
        return Err(Error::GridTooCoarse(grid_step));
    }
    let k = h.antennas();
    let points = ((TAU / grid_step) - 1e-9).ceil() as usize;
    let grid: Vec<Complex64> = (0..points)
        .map(|m| Complex64::from_polar(1.0, -(m as f64) * grid_step))
        .collect();
    let amp = (sys.power / k as f64).sqrt();
    let g: Vec<Complex64> = h.gains().iter().map(|x| x * amp).collect();

    let enumerate = points
        .checked_pow((k - 1) as u32)
        .is_some_and(|total| total <= FULL_ENUMERATION_LIMIT);
    let idx = if enumerate {
        grid_enumerate(&g, &grid)
    } else {
        grid_coordinate_search(&g, &grid)
    };
    Ok(EstimateSet {
        phases: idx.iter().map(|&m| wrap(m as f64 * grid_step)).collect(),
    })
}

fn grid_enumerate(g: &[Complex64], grid: &[Complex64]) -> Vec<usize> {
    let dims = g.len() - 1;
    let mut idx = vec![0usize; dims];
    let mut best = idx.clone();
    let mut best_val = f64::NEG_INFINITY;
    loop {
        let s = g[0]
            + g[1..]
                .iter()
                .zip(&idx)
                .map(|(x, &m)| x * grid[m])
                .sum::<Complex64>();
        let v = s.norm_sqr();
        if v > best_val {
            best_val = v;
            best.clone_from(&idx);
        }
        // odometer increment
        let mut d = 0;
        loop {
            if d == dims {
                return best;
            }
            idx[d] += 1;
            if idx[d] < grid.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn grid_coordinate_search(g: &[Complex64], grid: &[Complex64]) -> Vec<usize> {
    // Every antenna moves, including the reference; a common grid shift
    // at the end puts the reference back at index 0 without changing energy.
    let mut idx = vec![0usize; g.len()];
    let mut total: Complex64 = g.iter().sum();
    for _ in 0..1000 {
        let mut changed = false;
        for d in 0..g.len() {
            let term = g[d];
            let rest = total - term * grid[idx[d]];
            let mut best = idx[d];
            let mut best_val = (rest + term * grid[best]).norm_sqr();
            for (m, c) in grid.iter().enumerate() {
                let v = (rest + term * c).norm_sqr();
                if v > best_val {
                    best_val = v;
                    best = m;
                }
            }
            if best != idx[d] {
                idx[d] = best;
                changed = true;
            }
            total = rest + term * grid[idx[d]];
        }
        if !changed {
            break;
        }
    }
    let n = grid.len();
    idx[1..].iter().map(|&m| (m + n - idx[0]) % n).collect()
}
