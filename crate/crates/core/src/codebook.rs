//! Training phase sets, the two-antenna codebook, and Cramer-Rao bounds on the
//! relative channel phase.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use rand::Rng;

use crate::model::{uniform_phase, wrap, BeamVector, PairParams};

/// Two training phases closer than this (after wrapping) count as repeated.
pub const REPEAT_TOLERANCE: f64 = 1e-12;

/// Ordered training phases `theta_1..theta_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSet {
    thetas: Vec<f64>,
}

impl PhaseSet {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::InvalidParameter {
                name: "N",
                reason: "phase set must not be empty".into(),
            });
        }
        if let Some(&t) = thetas.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFiniteAngle(t));
        }
        Ok(Self { thetas })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// Whether any two phases coincide modulo `2 pi`.
    pub fn has_repeats(&self) -> bool {
        let t = &self.thetas;
        (0..t.len()).any(|i| (i + 1..t.len()).any(|j| wrap(t[i] - t[j]).abs() < REPEAT_TOLERANCE))
    }

    /// Whether this is the equally spaced set `2 (n - 1) pi / N` up to `tol`.
    pub fn is_equally_spaced(&self, tol: f64) -> bool {
        let n = self.len() as f64;
        self.thetas
            .iter()
            .enumerate()
            .all(|(i, &t)| wrap(t - TAU * i as f64 / n).abs() <= tol)
    }
}

/// Equally spaced training phases `theta_n = 2 (n - 1) pi / N`, `n = 1..N`.
pub fn make_theta(n: usize) -> Result<PhaseSet> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: "need at least one training phase".into(),
        });
    }
    PhaseSet::new((0..n).map(|i| TAU * i as f64 / n as f64).collect())
}

/// `n` independent phases, uniform on `(-pi, pi]`.
pub fn random_theta<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PhaseSet> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: "need at least one training phase".into(),
        });
    }
    PhaseSet::new((0..n).map(|_| uniform_phase(rng)).collect())
}

/// `[4 sin((ti - tj)/2) sin((tj - tk)/2) sin((tk - ti)/2)]^2`.
pub fn delta_ijk(ti: f64, tj: f64, tk: f64) -> f64 {
    let p = 4.0 * ((ti - tj) / 2.0).sin() * ((tj - tk) / 2.0).sin() * ((tk - ti) / 2.0).sin();
    p * p
}

/// Sum of `delta_ijk` over all `i < j < k`.
#[allow(clippy::needless_range_loop)]
pub fn delta_sum(thetas: &[f64]) -> f64 {
    let n = thetas.len();
    // half-angle sines, s[i][j] = sin((t_i - t_j) / 2)
    let s: Vec<Vec<f64>> = thetas
        .iter()
        .map(|a| thetas.iter().map(|b| ((a - b) / 2.0).sin()).collect())
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let sij = 4.0 * s[i][j];
            for k in j + 1..n {
                let p = sij * s[j][k] * s[k][i];
                total += p * p;
            }
        }
    }
    total
}

/// Fisher information of `(alpha, beta, phi)` from `N` Gaussian RSSI samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FimMatrix {
    pub entries: [[f64; 3]; 3],
    pub noise_var: f64,
}

impl FimMatrix {
    pub fn determinant(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Adjugate-based inverse; `None` when the determinant is zero.
    pub fn inverse(&self) -> Option<[[f64; 3]; 3]> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.entries;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Some(adj.map(|row| row.map(|v| v / det)))
    }
}

fn check_noise(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma2",
            reason: format!("noise variance must be positive, got {sigma2}"),
        });
    }
    Ok(())
}

/// FIM with `A_n = cos(theta_n + phi)` and `D_n = -beta sin(theta_n + phi)`.
pub fn fim(params: PairParams, theta: &PhaseSet, sigma2: f64) -> Result<FimMatrix> {
    check_noise(sigma2)?;
    let (mut sa, mut sd, mut saa, mut sad, mut sdd) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &t in theta.thetas() {
        let a = (t + params.phi).cos();
        let d = -params.beta * (t + params.phi).sin();
        sa += a;
        sd += d;
        saa += a * a;
        sad += a * d;
        sdd += d * d;
    }
    let n = theta.len() as f64;
    let m = [[n, sa, sd], [sa, saa, sad], [sd, sad, sdd]];
    Ok(FimMatrix {
        entries: m.map(|row| row.map(|v| v / sigma2)),
        noise_var: sigma2,
    })
}

fn check_estimable(theta: &PhaseSet, beta: f64) -> Result<()> {
    if theta.len() < 3 {
        return Err(Error::CrlbUnbounded("fewer than 3 training phases"));
    }
    if theta.has_repeats() {
        return Err(Error::CrlbUnbounded("repeated training phases"));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::CrlbUnbounded("beta is zero"));
    }
    Ok(())
}

/// Closed-form CRLB of `phi`: `sigma^2 sum_{i<j} (A_i - A_j)^2 / (beta^2 sum Delta)`.
pub fn crlb_phi(params: PairParams, theta: &PhaseSet, sigma2: f64) -> Result<f64> {
    check_noise(sigma2)?;
    check_estimable(theta, params.beta)?;
    let a: Vec<f64> = theta
        .thetas()
        .iter()
        .map(|t| (t + params.phi).cos())
        .collect();
    let mut num = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            num += (a[i] - a[j]).powi(2);
        }
    }
    Ok(sigma2 * num / (params.beta * params.beta * delta_sum(theta.thetas())))
}

/// CRLB of `phi` averaged over `phi` uniform on `(0, 2 pi]`.
///
/// For the equally spaced set this is exactly `2 sigma^2 / (N beta^2)`;
/// other sets go through [`mcrlb_sum`].
pub fn mcrlb(theta: &PhaseSet, beta: f64, sigma2: f64) -> Result<f64> {
    check_noise(sigma2)?;
    check_estimable(theta, beta)?;
    if theta.is_equally_spaced(0.0) {
        return Ok(2.0 * sigma2 / (theta.len() as f64 * beta * beta));
    }
    mcrlb_sum(theta, beta, sigma2)
}

/// The averaged bound from its general form
/// `sigma^2 sum_{i<j} (1 - cos(theta_i - theta_j)) / (beta^2 sum Delta)`.
pub fn mcrlb_sum(theta: &PhaseSet, beta: f64, sigma2: f64) -> Result<f64> {
    check_noise(sigma2)?;
    check_estimable(theta, beta)?;
    let t = theta.thetas();
    let mut num = 0.0;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            num += 1.0 - (t[i] - t[j]).cos();
        }
    }
    Ok(sigma2 * num / (beta * beta * delta_sum(t)))
}

/// Training vectors `b_n = sqrt(P/2) [1, e^{j theta_n}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    vectors: Vec<BeamVector>,
    source: PhaseSet,
}

impl Codebook {
    pub fn vectors(&self) -> &[BeamVector] {
        &self.vectors
    }

    pub fn source(&self) -> &PhaseSet {
        &self.source
    }
}

pub fn make_codebook(theta: &PhaseSet, power: f64) -> Result<Codebook> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "power",
            reason: format!("transmit power must be positive, got {power}"),
        });
    }
    Ok(Codebook {
        vectors: theta
            .thetas()
            .iter()
            .map(|&t| BeamVector::equal_gain(&[0.0, t], power))
            .collect(),
        source: theta.clone(),
    })
}
