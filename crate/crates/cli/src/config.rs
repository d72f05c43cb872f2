//! Plain-text experiment configuration: one `key = value` per line, `#` starts
//! a comment. Every key except `seed` has a default.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `seed` | required for Monte Carlo runs | base seed of all random streams |
//! | `trials` | 1000 | Monte Carlo trials per cell |
//! | `n` | 3 | training length for single-`N` experiments |
//! | `n_min`, `n_max` | 3, 16 | inclusive `N` range for sweeps |
//! | `k` | 2 | transmit antennas |
//! | `snr_db` | 10 | comma-separated list; `inf` means noiseless |
//! | `snr_convention` | `beta_sq_over_sigma_sq` | or `beta_sq_over_two_sigma_sq` |
//! | `channel` | `unit-magnitude-uniform-phase` | or `rayleigh`, `fixed` |
//! | `rayleigh_scale` | 1 | `E|h|^2` of the Rayleigh model |
//! | `channel_gains` | empty | `magnitude@phase_deg` list, `k` entries, for `fixed` |
//! | `xi`, `power` | 1, 2 | harvesting efficiency and transmit power |
//! | `block_length`, `tau`, `feedback_energy` | 100, 1, 0 | coherence block timing |
//! | `exhaustive_step_deg` | 1 | grid step of the full-CSI baseline |
//! | `out` | stdout | output CSV path |
//! | `trace` | none | replay CSV path |

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;
use wpb_core::{ChannelModel, ChannelVector, SystemParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` set twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("`{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("`seed` is required (set it in the config or pass --seed)")]
    MissingSeed,
}

/// How an SNR in dB maps to the noise variance for a given `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrConvention {
    /// `SNR = beta^2 / sigma^2`
    BetaSqOverSigmaSq,
    /// `SNR = beta^2 / (2 sigma^2)`
    BetaSqOverTwoSigmaSq,
}

impl SnrConvention {
    pub fn name(self) -> &'static str {
        match self {
            Self::BetaSqOverSigmaSq => "beta_sq_over_sigma_sq",
            Self::BetaSqOverTwoSigmaSq => "beta_sq_over_two_sigma_sq",
        }
    }

    pub fn sigma2(self, snr_db: f64, beta: f64) -> f64 {
        let snr = 10f64.powf(snr_db / 10.0);
        match self {
            Self::BetaSqOverSigmaSq => beta * beta / snr,
            Self::BetaSqOverTwoSigmaSq => beta * beta / (2.0 * snr),
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: Option<u64>,
    pub trials: usize,
    pub n: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub k: usize,
    pub snr_db: Vec<f64>,
    pub snr_convention: SnrConvention,
    pub channel: String,
    pub rayleigh_scale: f64,
    /// `(magnitude, phase in degrees)`
    pub channel_gains: Vec<(f64, f64)>,
    pub xi: f64,
    pub power: f64,
    pub block_length: f64,
    pub tau: f64,
    pub feedback_energy: f64,
    pub exhaustive_step_deg: f64,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: None,
            trials: 1000,
            n: 3,
            n_min: 3,
            n_max: 16,
            k: 2,
            snr_db: vec![10.0],
            snr_convention: SnrConvention::BetaSqOverSigmaSq,
            channel: "unit-magnitude-uniform-phase".into(),
            rayleigh_scale: 1.0,
            channel_gains: Vec::new(),
            xi: 1.0,
            power: 2.0,
            block_length: 100.0,
            tau: 1.0,
            feedback_energy: 0.0,
            exhaustive_step_deg: 1.0,
            out: None,
            trace: None,
        }
    }
}

const KEYS: &[&str] = &[
    "seed",
    "trials",
    "n",
    "n_min",
    "n_max",
    "k",
    "snr_db",
    "snr_convention",
    "channel",
    "rayleigh_scale",
    "channel_gains",
    "xi",
    "power",
    "block_length",
    "tau",
    "feedback_energy",
    "exhaustive_step_deg",
    "out",
    "trace",
];

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

fn parse_f64_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|s| parse_num::<f64>(s.trim())).collect()
}

fn parse_gains(v: &str) -> Result<Vec<(f64, f64)>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let (m, p) = item
                .trim()
                .split_once('@')
                .ok_or_else(|| format!("`{}`: expected magnitude@phase_deg", item.trim()))?;
            Ok((parse_num(m.trim())?, parse_num(p.trim())?))
        })
        .collect()
}

impl Config {
    /// Parses the text form. Keys not present keep their defaults. Values are
    /// checked individually here; cross-key checks happen in [`Config::validate`].
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    reason: format!("expected key = value, got `{body}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
            seen.push(known);
            cfg.set(known, value)
                .map_err(|reason| ConfigError::BadValue {
                    line,
                    key: key.into(),
                    reason,
                })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = Some(parse_num(v)?),
            "trials" => self.trials = parse_num(v)?,
            "n" => self.n = parse_num(v)?,
            "n_min" => self.n_min = parse_num(v)?,
            "n_max" => self.n_max = parse_num(v)?,
            "k" => self.k = parse_num(v)?,
            "snr_db" => self.snr_db = parse_f64_list(v)?,
            "snr_convention" => {
                self.snr_convention = match v {
                    "beta_sq_over_sigma_sq" => SnrConvention::BetaSqOverSigmaSq,
                    "beta_sq_over_two_sigma_sq" => SnrConvention::BetaSqOverTwoSigmaSq,
                    other => return Err(format!("unknown convention `{other}`")),
                }
            }
            "channel" => self.channel = v.into(),
            "rayleigh_scale" => self.rayleigh_scale = parse_num(v)?,
            "channel_gains" => self.channel_gains = parse_gains(v)?,
            "xi" => self.xi = parse_num(v)?,
            "power" => self.power = parse_num(v)?,
            "block_length" => self.block_length = parse_num(v)?,
            "tau" => self.tau = parse_num(v)?,
            "feedback_energy" => self.feedback_energy = parse_num(v)?,
            "exhaustive_step_deg" => self.exhaustive_step_deg = parse_num(v)?,
            "out" => self.out = (!v.is_empty()).then(|| v.into()),
            "trace" => self.trace = (!v.is_empty()).then(|| v.into()),
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    /// Range and consistency checks shared by all subcommands.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &'static str, reason: &str| {
            Err(ConfigError::Invalid {
                key,
                reason: reason.into(),
            })
        };
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.trials == 0 {
            return bad("trials", "must be at least 1");
        }
        if self.trials > u32::MAX as usize {
            return bad("trials", "too large");
        }
        if self.n < 3 {
            return bad("n", "need at least 3 training phases");
        }
        if self.n_min < 3 || self.n_min > self.n_max {
            return bad("n_min", "need 3 <= n_min <= n_max");
        }
        if self.k < 2 {
            return bad("k", "need at least 2 antennas");
        }
        if self.snr_db.is_empty()
            || self
                .snr_db
                .iter()
                .any(|s| s.is_nan() || *s == f64::NEG_INFINITY)
        {
            return bad("snr_db", "need a nonempty list of numbers (inf allowed)");
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return bad("xi", "must lie in (0, 1]");
        }
        if !positive(self.power) {
            return bad("power", "must be positive");
        }
        if !positive(self.rayleigh_scale) {
            return bad("rayleigh_scale", "must be positive");
        }
        if !positive(self.block_length) {
            return bad("block_length", "must be positive");
        }
        if !positive(self.tau) {
            return bad("tau", "must be positive");
        }
        if !(self.feedback_energy.is_finite() && self.feedback_energy >= 0.0) {
            return bad("feedback_energy", "must be nonnegative");
        }
        if !(self.exhaustive_step_deg > 0.0 && self.exhaustive_step_deg <= 90.0) {
            return bad("exhaustive_step_deg", "must lie in (0, 90]");
        }
        self.channel_model().map(|_| ())
    }

    pub fn system(&self) -> Result<SystemParams, ConfigError> {
        SystemParams::new(self.xi, self.power).map_err(|e| ConfigError::Invalid {
            key: "xi",
            reason: e.to_string(),
        })
    }

    pub fn channel_model(&self) -> Result<ChannelModel, ConfigError> {
        let invalid = |reason: String| ConfigError::Invalid {
            key: "channel",
            reason,
        };
        if self.channel == "fixed" {
            if self.channel_gains.len() != self.k {
                return Err(ConfigError::Invalid {
                    key: "channel_gains",
                    reason: format!(
                        "fixed channel needs k = {} gains, got {}",
                        self.k,
                        self.channel_gains.len()
                    ),
                });
            }
            let polar: Vec<(f64, f64)> = self
                .channel_gains
                .iter()
                .map(|&(m, p)| (m, p.to_radians()))
                .collect();
            let h = ChannelVector::from_polar(&polar).map_err(|e| invalid(e.to_string()))?;
            return Ok(ChannelModel::Fixed(h));
        }
        ChannelModel::from_name(&self.channel, self.rayleigh_scale)
            .map_err(|e| invalid(e.to_string()))
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or(ConfigError::MissingSeed)
    }

    /// Effective values of every key, in a fixed order, for the output header.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let list = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or(String::new(), |p| p.display().to_string())
        };
        let gains = self
            .channel_gains
            .iter()
            .map(|(m, p)| format!("{m}@{p}"))
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("seed", self.seed.map_or(String::new(), |s| s.to_string())),
            ("trials", self.trials.to_string()),
            ("n", self.n.to_string()),
            ("n_min", self.n_min.to_string()),
            ("n_max", self.n_max.to_string()),
            ("k", self.k.to_string()),
            ("snr_db", list(&self.snr_db)),
            ("snr_convention", self.snr_convention.to_string()),
            ("channel", self.channel.clone()),
            ("rayleigh_scale", self.rayleigh_scale.to_string()),
            ("channel_gains", gains),
            ("xi", self.xi.to_string()),
            ("power", self.power.to_string()),
            ("block_length", self.block_length.to_string()),
            ("tau", self.tau.to_string()),
            ("feedback_energy", self.feedback_energy.to_string()),
            ("exhaustive_step_deg", self.exhaustive_step_deg.to_string()),
            ("out", path(&self.out)),
            ("trace", path(&self.trace)),
        ]
    }

    /// Renders the configuration back to the text form.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(
            Config::parse("# only a comment\n\n   \n").unwrap(),
            Config::default()
        );
    }

    #[test]
    fn parses_keys_and_comments() {
        let cfg = Config::parse(
            "seed = 42\ntrials=10 # inline\nsnr_db = 0, 10,inf\nsnr_convention = beta_sq_over_two_sigma_sq\n\
             channel = fixed\nk = 3\nchannel_gains = 1@0, 0.5@90, 2@-45\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(42));
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.snr_db, vec![0.0, 10.0, f64::INFINITY]);
        assert_eq!(cfg.snr_convention, SnrConvention::BetaSqOverTwoSigmaSq);
        assert_eq!(
            cfg.channel_gains,
            vec![(1.0, 0.0), (0.5, 90.0), (2.0, -45.0)]
        );
        cfg.validate().unwrap();
        match cfg.channel_model().unwrap() {
            ChannelModel::Fixed(h) => {
                assert!((h.phase(1) - std::f64::consts::FRAC_PI_2).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(
            Config::parse("seed = 1\n\nbogus = 3\n"),
            Err(ConfigError::UnknownKey {
                line: 3,
                key: "bogus".into()
            })
        );
        assert_eq!(
            Config::parse("trials = 1\ntrials = 2"),
            Err(ConfigError::DuplicateKey {
                line: 2,
                key: "trials".into()
            })
        );
        assert!(matches!(
            Config::parse("seed 4"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Config::parse("# c\ntrials = many"),
            Err(ConfigError::BadValue { line: 2, .. })
        ));
        assert!(matches!(
            Config::parse("seed = -1"),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn validation_rejects_out_of_range() {
        for text in [
            "trials = 0",
            "n = 2",
            "n_min = 5\nn_max = 4",
            "k = 1",
            "xi = 1.5",
            "power = 0",
            "tau = -1",
            "feedback_energy = nan",
            "exhaustive_step_deg = 0",
            "channel = nakagami",
            "channel = fixed",
            "snr_db = nan",
        ] {
            let cfg = Config::parse(text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
    }

    #[test]
    fn seed_has_no_default() {
        assert_eq!(
            Config::default().require_seed(),
            Err(ConfigError::MissingSeed)
        );
    }

    #[test]
    fn text_round_trip() {
        let cfg = Config::parse(
            "seed=7\nsnr_db=-3.5,0.1\nchannel=rayleigh\nrayleigh_scale=0.3\nout=a b.csv",
        )
        .unwrap();
        assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn snr_conventions() {
        let a = SnrConvention::BetaSqOverSigmaSq.sigma2(10.0, 1.0);
        let b = SnrConvention::BetaSqOverTwoSigmaSq.sigma2(10.0, 1.0);
        assert!((a - 0.1).abs() < 1e-15);
        assert!((b - 0.05).abs() < 1e-15);
        assert_eq!(
            SnrConvention::BetaSqOverSigmaSq.sigma2(f64::INFINITY, 1.0),
            0.0
        );
    }
}
