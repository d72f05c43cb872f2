//! Channel representation, received energy and equal-gain beamforming.
//!
//! Two RSSI normalizations show up in this crate. [`received_energy`] is the
//! physical `xi * |h^T w|^2`. [`PairParams`] carries the pairwise RSSI curve
//! `alpha + beta * cos(theta + phi)` with `alpha = xi P / 4 (|h_i|^2 + |h_j|^2)`
//! and `beta = xi P / 2 |h_i| |h_j|`, which is exactly half of the physical
//! energy for a two-antenna codebook vector. Estimation only depends on the
//! shape of the curve, so the factor never matters there.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFiniteAngle(x));
    }
    Ok(wrap(x))
}

/// Infallible wrap for values already known to be finite.
pub(crate) fn wrap(x: f64) -> f64 {
    let mut r = x.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r <= -PI {
        r += TAU;
    }
    r
}

/// Quasi-static MISO channel `h = [|h_1| e^{j delta_1}, ..., |h_K| e^{j delta_K}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    gains: Vec<Complex64>,
}

impl ChannelVector {
    /// Builds a channel from complex gains. Requires at least two antennas.
    pub fn new(gains: Vec<Complex64>) -> Result<Self> {
        if gains.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "K",
                reason: format!("need at least 2 antennas, got {}", gains.len()),
            });
        }
        if gains.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gains",
                reason: "non-finite channel gain".into(),
            });
        }
        Ok(Self { gains })
    }

    /// Builds a channel from `(magnitude, phase)` pairs.
    pub fn from_polar(pairs: &[(f64, f64)]) -> Result<Self> {
        if let Some(&(m, _)) = pairs.iter().find(|(m, _)| *m < 0.0) {
            return Err(Error::InvalidParameter {
                name: "gains",
                reason: format!("negative magnitude {m}"),
            });
        }
        Self::new(
            pairs
                .iter()
                .map(|&(m, p)| Complex64::from_polar(m, p))
                .collect(),
        )
    }

    pub fn antennas(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn magnitude(&self, k: usize) -> f64 {
        self.gains[k].norm()
    }

    /// Phase `delta_k` wrapped to `(-pi, pi]`.
    pub fn phase(&self, k: usize) -> f64 {
        wrap(self.gains[k].arg())
    }

    /// True relative phases `phi_k = delta_k - delta_1` for `k = 2..K`.
    pub fn relative_phases(&self) -> Vec<f64> {
        let d1 = self.gains[0].arg();
        self.gains[1..].iter().map(|g| wrap(g.arg() - d1)).collect()
    }
}

/// Conversion efficiency and total transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub xi: f64,
    pub power: f64,
}

impl SystemParams {
    pub fn new(xi: f64, power: f64) -> Result<Self> {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "xi",
                reason: format!("conversion efficiency must lie in (0, 1], got {xi}"),
            });
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "power",
                reason: format!("transmit power must be positive, got {power}"),
            });
        }
        Ok(Self { xi, power })
    }
}

impl Default for SystemParams {
    /// `xi = 1`, `P = 2`: unit-magnitude channels then give `alpha = beta = 1`.
    fn default() -> Self {
        Self {
            xi: 1.0,
            power: 2.0,
        }
    }
}

/// Parameters of one antenna pair's RSSI curve `alpha + beta cos(theta + phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
}

impl PairParams {
    /// Noiseless RSSI at training phase `theta`.
    pub fn rssi(&self, theta: f64) -> f64 {
        self.alpha + self.beta * (theta + self.phi).cos()
    }
}

/// Curve parameters for the pair `(i, j)` with `phi = delta_j - delta_i`.
pub fn derive_pair_params(h_i: Complex64, h_j: Complex64, sys: SystemParams) -> PairParams {
    let (mi, mj) = (h_i.norm(), h_j.norm());
    let scale = sys.xi * sys.power;
    // The phase of a zero gain is meaningless; keep phi at zero in that case.
    let phi = if mi == 0.0 || mj == 0.0 {
        0.0
    } else {
        wrap(h_j.arg() - h_i.arg())
    };
    PairParams {
        alpha: scale / 4.0 * (mi * mi + mj * mj),
        beta: scale / 2.0 * mi * mj,
        phi,
    }
}

/// Transmit beamforming vector under a total power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector {
    weights: Vec<Complex64>,
    power_budget: f64,
}

impl BeamVector {
    /// Equal-gain vector `sqrt(P/K) [e^{j psi_1}, ..., e^{j psi_K}]`.
    pub fn equal_gain(phases: &[f64], power: f64) -> Self {
        let amp = (power / phases.len() as f64).sqrt();
        Self {
            weights: phases
                .iter()
                .map(|&p| Complex64::from_polar(amp, p))
                .collect(),
            power_budget: power,
        }
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Received energy `xi |h^T w|^2`.
///
/// The transmit signal reaches the receiver as `sum_k h_k w_k`, so the weight
/// `e^{-j phi_k}` undoes the channel phase `phi_k = delta_k - delta_1`.
pub fn received_energy(h: &ChannelVector, w: &BeamVector, xi: f64) -> Result<f64> {
    if h.antennas() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: h.antennas(),
            actual: w.len(),
        });
    }
    Ok(xi * combine(h.gains(), w.weights()).norm_sqr())
}

pub(crate) fn combine(h: &[Complex64], w: &[Complex64]) -> Complex64 {
    h.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// EGT vector `sqrt(P/K) [1, e^{-j phi_2}, ..., e^{-j phi_K}]` from `K - 1` phase estimates.
pub fn egt_beam_vector(phase_estimates: &[f64], sys: SystemParams) -> Result<BeamVector> {
    if phase_estimates.is_empty() {
        return Err(Error::InvalidParameter {
            name: "phase_estimates",
            reason: "need at least one phase (K >= 2)".into(),
        });
    }
    if let Some(&p) = phase_estimates.iter().find(|p| !p.is_finite()) {
        return Err(Error::NonFiniteAngle(p));
    }
    let phases: Vec<f64> = std::iter::once(0.0)
        .chain(phase_estimates.iter().map(|p| -p))
        .collect();
    Ok(BeamVector::equal_gain(&phases, sys.power))
}

/// Distribution from which channel realizations are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// `h_k ~ CN(0, scale)`, so `E|h_k|^2 = scale`.
    Rayleigh { scale: f64 },
    /// `|h_k| = 1` with phases uniform on `(-pi, pi]`.
    UnitMagnitude,
    /// Always the same vector.
    Fixed(ChannelVector),
}

impl ChannelModel {
    /// Parses a model name. `fixed` needs gains and is not constructible here.
    pub fn from_name(name: &str, rayleigh_scale: f64) -> Result<Self> {
        match name {
            "rayleigh" => Ok(Self::Rayleigh {
                scale: rayleigh_scale,
            }),
            "unit-magnitude-uniform-phase" | "unit" => Ok(Self::UnitMagnitude),
            other => Err(Error::UnknownChannelModel(other.to_string())),
        }
    }

    /// Mean channel power `E|h_k|^2`.
    pub fn mean_power(&self) -> f64 {
        match self {
            Self::Rayleigh { scale } => *scale,
            Self::UnitMagnitude => 1.0,
            Self::Fixed(h) => {
                h.gains().iter().map(|g| g.norm_sqr()).sum::<f64>() / h.antennas() as f64
            }
        }
    }
}

/// Draws a `K`-antenna channel. Antenna `k` takes its randomness from `stream(k)`,
/// so the result does not depend on draw order.
pub fn sample_channel<R, F>(model: &ChannelModel, k: usize, mut stream: F) -> Result<ChannelVector>
where
    R: Rng,
    F: FnMut(usize) -> R,
{
    if k < 2 {
        return Err(Error::InvalidParameter {
            name: "K",
            reason: format!("need at least 2 antennas, got {k}"),
        });
    }
    let gains = match model {
        ChannelModel::Fixed(h) => {
            if h.antennas() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: h.antennas(),
                });
            }
            return Ok(h.clone());
        }
        ChannelModel::UnitMagnitude => (0..k)
            .map(|i| Complex64::from_polar(1.0, uniform_phase(&mut stream(i))))
            .collect(),
        ChannelModel::Rayleigh { scale } => {
            if scale.is_nan() || *scale <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "rayleigh_scale",
                    reason: format!("must be positive, got {scale}"),
                });
            }
            let sd = (scale / 2.0).sqrt();
            (0..k)
                .map(|i| {
                    let mut rng = stream(i);
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(sd * re, sd * im)
                })
                .collect()
        }
    };
    ChannelVector::new(gains)
}

/// Uniform on `(-pi, pi]`.
pub fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // random::<f64>() is in [0, 1); flip it to (0, 1].
    PI - TAU * rng.random::<f64>()
}
