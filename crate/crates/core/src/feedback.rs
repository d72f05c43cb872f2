//! Training-stage simulation: noisy RSSI per mini-slot and the pairwise
//! antenna activation schedule for `K > 2`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::codebook::PhaseSet;
use crate::error::{Error, Result};
use crate::model::{derive_pair_params, ChannelVector, PairParams, SystemParams};
use crate::rng::{TrialStreams, LANE_NOISE};

/// Zero-mean i.i.d. Gaussian RSSI perturbation. `sigma2 = 0` is noiseless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma2",
                reason: format!("noise variance must be non-negative, got {sigma2}"),
            });
        }
        Ok(Self { sigma2 })
    }

    pub fn noiseless() -> Self {
        Self { sigma2: 0.0 }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// One RSSI feedback value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssiRecord {
    /// Pair slot `k` in `2..=K`: antennas 1 and `k` are active.
    pub slot: usize,
    /// Mini-slot `n` in `1..=N`.
    pub mini_slot: usize,
    pub value: f64,
}

/// Shape of the pairwise training stage: slot `k - 1` activates antennas `(1, k)`
/// and sweeps all `N` codebook entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingSchedule {
    pub antennas: usize,
    pub mini_slots: usize,
}

impl TrainingSchedule {
    pub fn total_mini_slots(&self) -> usize {
        (self.antennas - 1) * self.mini_slots
    }

    /// `(slot, mini_slot)` pairs in transmission order.
    pub fn order(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.mini_slots;
        (2..=self.antennas).flat_map(move |k| (1..=n).map(move |m| (k, m)))
    }
}

/// RSSI fed back during training, one row per pair slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTable {
    theta: PhaseSet,
    rows: Vec<Vec<f64>>,
}

impl TrainingTable {
    /// `rows[k - 2][n - 1]` holds the RSSI of slot `k`, mini-slot `n`.
    pub fn new(theta: PhaseSet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter {
                name: "rows",
                reason: "training table needs at least one pair slot".into(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != theta.len()) {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                actual: bad.len(),
            });
        }
        Ok(Self { theta, rows })
    }

    pub fn theta(&self) -> &PhaseSet {
        &self.theta
    }

    pub fn schedule(&self) -> TrainingSchedule {
        TrainingSchedule {
            antennas: self.rows.len() + 1,
            mini_slots: self.theta.len(),
        }
    }

    /// RSSI values of pair slot `k` (antennas 1 and `k`).
    pub fn slot(&self, k: usize) -> &[f64] {
        &self.rows[k - 2]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// All records in schedule order.
    pub fn records(&self) -> impl Iterator<Item = RssiRecord> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter().enumerate().map(move |(j, &value)| RssiRecord {
                slot: i + 2,
                mini_slot: j + 1,
                value,
            })
        })
    }
}

/// `R = alpha + beta cos(theta + phi) + z`, `z ~ N(0, sigma^2)`.
///
/// Values are not clamped at zero.
pub fn simulate_rssi<R: Rng + ?Sized>(
    params: PairParams,
    theta: f64,
    noise: NoiseModel,
    rng: &mut R,
) -> f64 {
    let clean = params.rssi(theta);
    if noise.sigma2 == 0.0 {
        return clean;
    }
    let z: f64 = StandardNormal.sample(rng);
    clean + noise.sigma2.sqrt() * z
}

/// Runs the pairwise training stage over every slot `k = 2..=K`.
///
/// The noise of slot `k`, mini-slot `n` comes from stream `(LANE_NOISE + k, n)`.
pub fn run_training(
    h: &ChannelVector,
    theta: &PhaseSet,
    sys: SystemParams,
    noise: NoiseModel,
    streams: &TrialStreams<'_>,
) -> Result<TrainingTable> {
    let g = h.gains();
    let rows = (1..g.len())
        .map(|idx| {
            let k = idx + 1;
            let params = derive_pair_params(g[0], g[idx], sys);
            theta
                .thetas()
                .iter()
                .enumerate()
                .map(|(n, &t)| {
                    let mut rng = streams.stream(LANE_NOISE + k as u32, n as u32 + 1);
                    simulate_rssi(params, t, noise, &mut rng)
                })
                .collect()
        })
        .collect();
    TrainingTable::new(theta.clone(), rows)
}

/// Time and energy spent on feedback: `(N (K-1) tau, N (K-1) E_f)`.
pub fn training_overhead(antennas: usize, n: usize, tau: f64, feedback_energy: f64) -> (f64, f64) {
    let count = (n * antennas.saturating_sub(1)) as f64;
    (count * tau, count * feedback_energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::make_theta;
    use crate::rng::StreamFactory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn noiseless_rssi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let quiet = NoiseModel::noiseless();
        let p = PairParams {
            alpha: 1.0,
            beta: 1.0,
            phi: 0.0,
        };
        assert_eq!(simulate_rssi(p, 0.0, quiet, &mut rng), 2.0);
        assert!(simulate_rssi(p, PI, quiet, &mut rng).abs() < 1e-15);
        let p = PairParams {
            alpha: 2.0,
            beta: 1.0,
            phi: PI / 4.0,
        };
        assert!((simulate_rssi(p, PI / 4.0, quiet, &mut rng) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn negative_noise_variance_rejected() {
        assert!(NoiseModel::new(-1.0).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
        assert!(NoiseModel::new(0.0).is_ok());
    }

    #[test]
    fn schedule_shapes() {
        let f = StreamFactory::new(5);
        let sys = SystemParams::default();
        let noise = NoiseModel::new(0.1).unwrap();
        let h2 = ChannelVector::from_polar(&[(1.0, 0.0), (1.0, 1.0)]).unwrap();
        let t = run_training(&h2, &make_theta(5).unwrap(), sys, noise, &f.trial(0, 0)).unwrap();
        assert_eq!(t.records().count(), 5);

        let h3 = ChannelVector::from_polar(&[(1.0, 0.0), (1.0, 1.0), (0.5, -2.0)]).unwrap();
        let t = run_training(&h3, &make_theta(4).unwrap(), sys, noise, &f.trial(0, 0)).unwrap();
        let order: Vec<_> = t.records().map(|r| (r.slot, r.mini_slot)).collect();
        let want: Vec<_> = t.schedule().order().collect();
        assert_eq!(order.len(), 8);
        assert_eq!(order, want);
    }

    #[test]
    fn noiseless_training_matches_curve() {
        let f = StreamFactory::new(5);
        let sys = SystemParams::new(0.8, 3.0).unwrap();
        let h = ChannelVector::from_polar(&[(1.2, 0.3), (0.7, -1.9)]).unwrap();
        let theta = make_theta(6).unwrap();
        let t = run_training(&h, &theta, sys, NoiseModel::noiseless(), &f.trial(1, 2)).unwrap();
        let p = derive_pair_params(h.gains()[0], h.gains()[1], sys);
        for (r, &th) in t.slot(2).iter().zip(theta.thetas()) {
            assert_eq!(*r, p.alpha + p.beta * (th + p.phi).cos());
        }
    }

    #[test]
    fn overhead_examples() {
        assert_eq!(training_overhead(2, 3, 1.0, 1.0), (3.0, 3.0));
        assert_eq!(training_overhead(10, 4, 0.5, 2.0), (18.0, 72.0));
        assert_eq!(training_overhead(2, 0, 1.0, 1.0), (0.0, 0.0));
    }
}
