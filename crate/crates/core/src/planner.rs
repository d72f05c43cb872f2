//! Choosing the training length `N`.
//!
//! Longer training sharpens the phase estimates (error variance falls like
//! `1/N`) but eats into the beamforming time and costs feedback energy. With
//! a common small estimation error `eps / sqrt(N)` on every phase, the
//! beamforming-stage RSSI is approximately `omega1 (1 - omega2 / N)` and the
//! energy harvested over a block of length `T` is
//!
//! ```text
//! E_total(N) = (T - N (K-1) tau) omega1 (1 - omega2 / N) - N (K-1) E_f
//! ```
//!
//! which is concave in `N > 0`.

use crate::error::{Error, Result};
use crate::model::{ChannelVector, SystemParams};

/// Coefficients of the beamforming-stage RSSI approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpbParams {
    /// RSSI with perfect phases.
    pub omega1: f64,
    /// Relative loss per unit of `1/N`.
    pub omega2: f64,
    pub epsilon: f64,
}

/// Block timing and feedback cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingParams {
    /// Block length `T`.
    pub block: f64,
    /// Time to feed back one RSSI value.
    pub tau: f64,
    /// Energy to feed back one RSSI value.
    pub feedback_energy: f64,
    pub antennas: usize,
}

impl TimingParams {
    pub fn new(block: f64, tau: f64, feedback_energy: f64, antennas: usize) -> Result<Self> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(block > 0.0 && block.is_finite()) {
            return bad("block_length", format!("must be positive, got {block}"));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return bad("tau", format!("must be positive, got {tau}"));
        }
        if !(feedback_energy >= 0.0 && feedback_energy.is_finite()) {
            return bad(
                "feedback_energy",
                format!("must be non-negative, got {feedback_energy}"),
            );
        }
        if antennas < 2 {
            return bad("K", format!("need at least 2 antennas, got {antennas}"));
        }
        Ok(Self {
            block,
            tau,
            feedback_energy,
            antennas,
        })
    }

    fn pairs(&self) -> f64 {
        (self.antennas - 1) as f64
    }

    /// Largest `N` whose training fits strictly inside the block.
    pub fn max_feasible_n(&self) -> usize {
        let per = self.pairs() * self.tau;
        let mut n = (self.block / per).floor() as usize;
        while n > 0 && n as f64 * per >= self.block {
            n -= 1;
        }
        n
    }
}

/// `omega1 = alpha1 + sum beta_i + sum beta_ij`, `omega2 = (sum beta_i) eps^2 / (2 omega1)`.
pub fn omega_params(
    alpha1: f64,
    betas: &[f64],
    beta_pairs: &[f64],
    epsilon: f64,
) -> Result<WpbParams> {
    if betas.iter().any(|b| *b < 0.0) {
        return Err(Error::InvalidParameter {
            name: "betas",
            reason: "coefficients must be non-negative".into(),
        });
    }
    let sum_beta: f64 = betas.iter().sum();
    let omega1 = alpha1 + sum_beta + beta_pairs.iter().sum::<f64>();
    if omega1.is_nan() || omega1 <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "omega1",
            reason: format!("must be positive, got {omega1}"),
        });
    }
    Ok(WpbParams {
        omega1,
        omega2: sum_beta * epsilon * epsilon / (2.0 * omega1),
        epsilon,
    })
}

/// Expansion of the beamforming-stage RSSI
/// `alpha1 + sum_i beta_i cos(e_i) + sum_{i<j} beta_ij cos(e_i - e_j)`
/// for phase errors `e_i`, in the same normalization as the pairwise RSSI
/// curve (half the physical `xi |h^T w|^2`). For `K = 2` this gives exactly
/// `alpha1 = alpha`, `beta_2 = beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct WpbCoefficients {
    pub alpha1: f64,
    pub betas: Vec<f64>,
    pub beta_pairs: Vec<f64>,
}

pub fn wpb_coefficients(h: &ChannelVector, sys: SystemParams) -> WpbCoefficients {
    let k = h.antennas();
    let c = sys.xi * sys.power / k as f64;
    let m: Vec<f64> = (0..k).map(|i| h.magnitude(i)).collect();
    let mut beta_pairs = Vec::new();
    for i in 1..k {
        for j in i + 1..k {
            beta_pairs.push(c * m[i] * m[j]);
        }
    }
    WpbCoefficients {
        alpha1: c / 2.0 * m.iter().map(|x| x * x).sum::<f64>(),
        betas: m[1..].iter().map(|x| c * m[0] * x).collect(),
        beta_pairs,
    }
}

/// `omega1 (1 - omega2 / N)`.
pub fn rwpb_approx(w: WpbParams, n: f64) -> f64 {
    w.omega1 * (1.0 - w.omega2 / n)
}

/// Energy harvested over one block with `N` mini-slots per pair.
pub fn e_total(w: WpbParams, t: TimingParams, n: f64) -> Result<f64> {
    let training = n * t.pairs() * t.tau;
    if training >= t.block {
        return Err(Error::InfeasibleTraining {
            n: n as usize,
            training,
            block: t.block,
        });
    }
    Ok((t.block - training) * rwpb_approx(w, n) - n * t.pairs() * t.feedback_energy)
}

/// Optimal training length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NStar {
    /// Unconstrained stationary point `sqrt(psi T / ((K-1) tau))`.
    pub analytic: f64,
    /// `analytic` clamped to `[lower, upper]`.
    pub clamped: f64,
    pub lower: f64,
    /// `sqrt(3 T / ((K-1) tau))`.
    pub upper: f64,
    /// Best feasible integer among the neighbours of `clamped` and the bounds.
    pub integer: usize,
}

/// `psi = omega1 omega2 tau / (omega1 tau + E_f)`.
pub fn psi(w: WpbParams, t: TimingParams) -> f64 {
    w.omega1 * w.omega2 * t.tau / (w.omega1 * t.tau + t.feedback_energy)
}

pub fn n_star(w: WpbParams, t: TimingParams) -> Result<NStar> {
    let max_n = t.max_feasible_n();
    if max_n < 3 {
        return Err(Error::InfeasibleTraining {
            n: 3,
            training: 3.0 * t.pairs() * t.tau,
            block: t.block,
        });
    }
    let at3 = e_total(w, t, 3.0)?;
    if at3 <= 0.0 {
        return Err(Error::BlockTooShort(at3));
    }
    let slots = t.block / (t.pairs() * t.tau);
    let analytic = (psi(w, t) * slots).sqrt();
    let lower = 3.0;
    let upper = (3.0 * slots).sqrt().max(lower);
    let clamped = analytic.clamp(lower, upper);

    let mut candidates = vec![clamped.floor(), clamped.ceil(), lower, upper.floor()];
    candidates.retain(|&n| n >= 3.0 && n as usize <= max_n);
    candidates.sort_by(f64::total_cmp);
    let mut best = (3usize, at3);
    for n in candidates {
        let v = e_total(w, t, n)?;
        if v > best.1 {
            best = (n as usize, v);
        }
    }
    Ok(NStar {
        analytic,
        clamped,
        lower,
        upper,
        integer: best.0,
    })
}

/// Exact integer argmax of `E_total` over every feasible `N >= 3`.
pub fn n_star_brute(w: WpbParams, t: TimingParams) -> Result<usize> {
    let max_n = t.max_feasible_n();
    if max_n < 3 {
        return Err(Error::EmptySearchRange { max: max_n });
    }
    let mut best = (3usize, e_total(w, t, 3.0)?);
    for n in 4..=max_n {
        let v = e_total(w, t, n as f64)?;
        if v > best.1 {
            best = (n, v);
        }
    }
    Ok(best.0)
}
