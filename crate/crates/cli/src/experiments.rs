//! The Monte Carlo experiments behind each subcommand.
//!
//! Every trial draws from its own counter-keyed random streams, so results
//! do not depend on how trials are scheduled across threads.

use rayon::prelude::*;
use wpb_core::estimator::estimate_slots;
use wpb_core::planner::wpb_coefficients;
use wpb_core::rng::{LANE_CHANNEL, LANE_PHI, LANE_THETA};
use wpb_core::{
    crlb_phi, egt_beam_vector, estimate_all_phases, exhaustive_baseline, make_theta, mcrlb, n_star,
    n_star_brute, omega_params, random_theta, received_energy, run_training, sample_channel,
    uniform_phase, wrap_angle, ChannelModel, ChannelVector, NoiseModel, PairParams, StreamFactory,
    SystemParams, TimingParams, TrainingTable, TrialStreams,
};

use crate::config::Config;
use crate::table::{Cell, ResultTable};
use crate::RunError;

type CoreResult<T> = Result<T, wpb_core::Error>;

/// Runs `f` for trials `0..n` in parallel and returns results in trial order.
/// The reported error is the one from the lowest failing trial.
fn run_trials<T, F>(n: usize, f: F) -> CoreResult<Vec<T>>
where
    T: Send,
    F: Fn(u32) -> CoreResult<T> + Sync + Send,
{
    let out: Vec<CoreResult<T>> = (0..n as u32).into_par_iter().map(f).collect();
    out.into_iter().collect()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Typical pair amplitude `beta` of the configured channel, used to turn an
/// SNR into a noise variance.
pub fn nominal_beta(model: &ChannelModel, sys: SystemParams) -> f64 {
    let c = sys.xi * sys.power / 2.0;
    match model {
        ChannelModel::Fixed(h) => {
            let k = h.antennas();
            c * (1..k).map(|i| h.magnitude(0) * h.magnitude(i)).sum::<f64>() / (k - 1) as f64
        }
        other => c * other.mean_power(),
    }
}

fn draw_channel(model: &ChannelModel, k: usize, t: &TrialStreams) -> CoreResult<ChannelVector> {
    sample_channel(model, k, |i| t.stream(LANE_CHANNEL, i as u32))
}

fn noise_notes(table: &mut ResultTable, cfg: &Config, beta: f64) {
    table.note(format!("nominal beta: {beta:e}"));
    for &snr in &cfg.snr_db {
        table.note(format!(
            "snr_db {snr} -> sigma2 {:e} ({})",
            cfg.snr_convention.sigma2(snr, beta),
            cfg.snr_convention
        ));
    }
}

/// MCRLB of the equally spaced set against the mean over random phase sets,
/// `beta = sigma = 1`, for each `N` in `n_min..=n_max`.
pub fn mcrlb_sweep(cfg: &Config) -> Result<ResultTable, RunError> {
    let seed = cfg.require_seed()?;
    let f = StreamFactory::new(seed);
    let mut table = ResultTable::new(&["N", "mcrlb_def1", "mcrlb_random_mean", "two_over_N"]);
    for n in cfg.n_min..=cfg.n_max {
        let spaced = mcrlb(&make_theta(n)?, 1.0, 1.0)?;
        let random = run_trials(cfg.trials, |trial| {
            let theta = random_theta(n, &mut f.trial(n as u32, trial).stream(LANE_THETA, 0))?;
            mcrlb(&theta, 1.0, 1.0)
        })?;
        table.push(vec![
            n.into(),
            spaced.into(),
            mean(&random).into(),
            (2.0 / n as f64).into(),
        ]);
    }
    Ok(table)
}

/// CRLB at random `(theta, phi)` for `N = n`, beside the equally spaced MCRLB.
pub fn crlb_scatter(cfg: &Config) -> Result<ResultTable, RunError> {
    let seed = cfg.require_seed()?;
    let f = StreamFactory::new(seed);
    let n = cfg.n;
    let spaced = mcrlb(&make_theta(n)?, 1.0, 1.0)?;
    let crlb = run_trials(cfg.trials, |trial| {
        let t = f.trial(0, trial);
        let theta = random_theta(n, &mut t.stream(LANE_THETA, 0))?;
        let phi = uniform_phase(&mut t.stream(LANE_PHI, 0));
        crlb_phi(
            PairParams {
                alpha: 1.0,
                beta: 1.0,
                phi,
            },
            &theta,
            1.0,
        )
    })?;
    let mut table = ResultTable::new(&["realization", "crlb", "mcrlb_def1"]);
    for (i, c) in crlb.into_iter().enumerate() {
        table.push(vec![(i + 1).into(), c.into(), spaced.into()]);
    }
    Ok(table)
}

/// Phase errors of all pairs of one trial, in radians.
fn trial_errors(
    model: &ChannelModel,
    k: usize,
    n: usize,
    sys: SystemParams,
    noise: NoiseModel,
    t: &TrialStreams,
) -> CoreResult<Vec<f64>> {
    let h = draw_channel(model, k, t)?;
    let table = run_training(&h, &make_theta(n)?, sys, noise, t)?;
    let est = estimate_all_phases(&table)?;
    est.phases
        .iter()
        .zip(h.relative_phases())
        .map(|(e, truth)| wrap_angle(e - truth))
        .collect()
}

/// RMSE of the resolved estimate in degrees, per SNR and `N`.
pub fn rmse_sweep(cfg: &Config) -> Result<ResultTable, RunError> {
    let seed = cfg.require_seed()?;
    let (sys, model) = (cfg.system()?, cfg.channel_model()?);
    let beta = nominal_beta(&model, sys);
    let f = StreamFactory::new(seed);
    let mut table = ResultTable::new(&[
        "snr_db",
        "N",
        "samples",
        "rmse_deg",
        "stderr_deg",
        "asymptote_deg",
        "sigma2",
    ]);
    noise_notes(&mut table, cfg, beta);
    let mut cell = 0u32;
    for &snr in &cfg.snr_db {
        let sigma2 = cfg.snr_convention.sigma2(snr, beta);
        let noise = NoiseModel::new(sigma2)?;
        for n in cfg.n_min..=cfg.n_max {
            let errs: Vec<f64> = run_trials(cfg.trials, |trial| {
                trial_errors(&model, cfg.k, n, sys, noise, &f.trial(cell, trial))
            })?
            .concat();
            let sq: Vec<f64> = errs.iter().map(|e| e * e).collect();
            let mse = mean(&sq);
            let rmse = mse.sqrt();
            let m = sq.len() as f64;
            let sd_sq =
                (sq.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (m - 1.0).max(1.0)).sqrt();
            // delta method: se(sqrt(X)) = se(X) / (2 sqrt(X))
            let stderr = if rmse > 0.0 {
                sd_sq / m.sqrt() / (2.0 * rmse)
            } else {
                0.0
            };
            let asymptote = (2.0 / n as f64).sqrt() * sigma2.sqrt() / beta;
            table.push(vec![
                snr.into(),
                n.into(),
                sq.len().into(),
                rmse.to_degrees().into(),
                stderr.to_degrees().into(),
                asymptote.to_degrees().into(),
                sigma2.into(),
            ]);
            cell += 1;
        }
    }
    Ok(table)
}

struct EnergyTrial {
    estimated: f64,
    perfect: f64,
    grid: f64,
}

/// Harvested energy with the estimated phases, with perfect-CSI phases, and
/// with the full-CSI grid baseline.
pub fn energy_cdf(cfg: &Config) -> Result<ResultTable, RunError> {
    let seed = cfg.require_seed()?;
    let (sys, model) = (cfg.system()?, cfg.channel_model()?);
    let beta = nominal_beta(&model, sys);
    let theta = make_theta(cfg.n)?;
    let step = cfg.exhaustive_step_deg.to_radians();
    let f = StreamFactory::new(seed);
    let mut table = ResultTable::new(&[
        "snr_db",
        "trial",
        "energy_est",
        "energy_csi",
        "energy_grid",
        "loss_percent",
        "loss_vs_grid_percent",
        "cdf",
        "energy_est_sorted",
        "loss_percent_sorted",
    ]);
    noise_notes(&mut table, cfg, beta);
    for (si, &snr) in cfg.snr_db.iter().enumerate() {
        let noise = NoiseModel::new(cfg.snr_convention.sigma2(snr, beta))?;
        let trials = run_trials(cfg.trials, |trial| {
            let t = f.trial(si as u32, trial);
            let h = draw_channel(&model, cfg.k, &t)?;
            let training = run_training(&h, &theta, sys, noise, &t)?;
            let est = estimate_all_phases(&training)?;
            let energy =
                |phases: &[f64]| received_energy(&h, &egt_beam_vector(phases, sys)?, sys.xi);
            Ok(EnergyTrial {
                estimated: energy(&est.phases)?,
                perfect: energy(&h.relative_phases())?,
                grid: energy(&exhaustive_baseline(&h, sys, step)?.phases)?,
            })
        })?;
        let loss: Vec<f64> = trials
            .iter()
            .map(|e| 100.0 * (1.0 - e.estimated / e.perfect))
            .collect();
        let est: Vec<f64> = trials.iter().map(|e| e.estimated).collect();
        let (est_sorted, loss_sorted) = (sorted(&est), sorted(&loss));
        let count = trials.len();
        for (i, e) in trials.iter().enumerate() {
            table.push(vec![
                snr.into(),
                (i + 1).into(),
                e.estimated.into(),
                e.perfect.into(),
                e.grid.into(),
                loss[i].into(),
                (100.0 * (1.0 - e.estimated / e.grid)).into(),
                ((i + 1) as f64 / count as f64).into(),
                est_sorted[i].into(),
                loss_sorted[i].into(),
            ]);
        }
    }
    Ok(table)
}

/// Optimal training length per random channel, by brute force and from the
/// closed-form stationary point.
///
/// The per-antenna phase error entering the harvested-energy model is taken at
/// its asymptotic variance: `epsilon^2 = 2 sigma^2 / beta^2`, so that
/// `epsilon^2 / N` is the MCRLB.
pub fn nstar_cdf(cfg: &Config) -> Result<ResultTable, RunError> {
    let seed = cfg.require_seed()?;
    let (sys, model) = (cfg.system()?, cfg.channel_model()?);
    let beta = nominal_beta(&model, sys);
    let timing = TimingParams::new(cfg.block_length, cfg.tau, cfg.feedback_energy, cfg.k)?;
    let f = StreamFactory::new(seed);
    let mut table = ResultTable::new(&[
        "snr_db",
        "trial",
        "n_star_brute",
        "n_star_analytic",
        "n_star_clamped",
        "n_star_integer",
        "omega2",
        "cdf",
        "n_star_brute_sorted",
    ]);
    noise_notes(&mut table, cfg, beta);
    table.note(format!("feasible N range: 3..={}", timing.max_feasible_n()));
    for (si, &snr) in cfg.snr_db.iter().enumerate() {
        let sigma2 = cfg.snr_convention.sigma2(snr, beta);
        let epsilon = (2.0 * sigma2).sqrt() / beta;
        let rows = run_trials(cfg.trials, |trial| {
            let h = draw_channel(&model, cfg.k, &f.trial(si as u32, trial))?;
            let c = wpb_coefficients(&h, sys);
            let w = omega_params(c.alpha1, &c.betas, &c.beta_pairs, epsilon)?;
            Ok((n_star_brute(w, timing)?, n_star(w, timing)?, w.omega2))
        })?;
        let brute: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
        let brute_sorted = sorted(&brute);
        let count = rows.len();
        for (i, (b, s, omega2)) in rows.iter().enumerate() {
            table.push(vec![
                snr.into(),
                (i + 1).into(),
                (*b).into(),
                s.analytic.into(),
                s.clamped.into(),
                s.integer.into(),
                (*omega2).into(),
                ((i + 1) as f64 / count as f64).into(),
                Cell::Int(brute_sorted[i] as i64),
            ]);
        }
    }
    Ok(table)
}

/// Per-slot estimates from a recorded or synthetic feedback trace.
pub fn replay(training: &TrainingTable) -> Result<ResultTable, RunError> {
    let estimates = estimate_slots(training)?;
    let mut table = ResultTable::new(&[
        "slot",
        "candidate_a_rad",
        "candidate_b_rad",
        "discriminant",
        "tie",
        "phi_hat_rad",
        "phi_hat_deg",
    ]);
    table.note(format!(
        "training phases: N = {}, K = {}",
        training.theta().len(),
        training.rows().len() + 1
    ));
    for (i, e) in estimates.iter().enumerate() {
        table.push(vec![
            (i + 2).into(),
            e.candidate_a.into(),
            e.candidate_b.into(),
            e.discriminant.into(),
            e.tie.into(),
            e.resolved.into(),
            e.resolved.to_degrees().into(),
        ]);
    }
    Ok(table)
}

/// The equally spaced training phases for `N = n`.
pub fn theta(n: usize) -> Result<ResultTable, RunError> {
    let set = make_theta(n)?;
    let mut table = ResultTable::new(&["n", "theta_rad", "theta_deg"]);
    for (i, &t) in set.thetas().iter().enumerate() {
        table.push(vec![(i + 1).into(), t.into(), t.to_degrees().into()]);
    }
    Ok(table)
}
