//! Experiment configuration, read from TOML.

use crate::presets;
use csifb::analytic_bounds::divisors;
use csifb::channel_model::{ChannelStats, Pulse};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("invalid channel: {0}")]
    Channel(#[from] csifb::Error),
}

/// Feedback schemes, in the fixed order used for seeding and output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Analog,
    Rvq,
    TdqLimit,
    TdqSuqRwf,
    TdqSuqGreedy,
    KlSuq,
    PhysTq,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Analog,
        Scheme::Rvq,
        Scheme::TdqLimit,
        Scheme::TdqSuqRwf,
        Scheme::TdqSuqGreedy,
        Scheme::KlSuq,
        Scheme::PhysTq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Analog => "analog",
            Scheme::Rvq => "rvq",
            Scheme::TdqLimit => "tdq-limit",
            Scheme::TdqSuqRwf => "tdq-suq-rwf",
            Scheme::TdqSuqGreedy => "tdq-suq-greedy",
            Scheme::KlSuq => "kl-suq",
            Scheme::PhysTq => "phys-tq",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn index(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Allocation {
    #[default]
    Rwf,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseSpec {
    /// Base width in seconds; defaults to `2/W`.
    Triangular {
        base_width: Option<f64>,
    },
    RaisedCosine {
        rolloff: f64,
        span: f64,
    },
    Tabulated {
        start: f64,
        step: f64,
        values: Vec<f64>,
    },
    UnitSample,
}

impl Default for PulseSpec {
    fn default() -> Self {
        PulseSpec::Triangular { base_width: None }
    }
}

impl PulseSpec {
    fn build(&self, w: f64) -> Pulse {
        match self {
            PulseSpec::Triangular { base_width } => Pulse::Triangular {
                base_width: base_width.unwrap_or(2.0 / w),
            },
            PulseSpec::RaisedCosine { rolloff, span } => Pulse::RaisedCosine {
                rolloff: *rolloff,
                period: 1.0 / w,
                span: *span,
            },
            PulseSpec::Tabulated {
                start,
                step,
                values,
            } => Pulse::Tabulated {
                start: *start,
                step: *step,
                values: values.clone(),
            },
            PulseSpec::UnitSample => Pulse::UnitSample,
        }
    }
}

/// A preset name or an inline channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Preset(String),
    Dip {
        dip: Vec<f64>,
    },
    Physical {
        /// Path delays in seconds.
        delays: Vec<f64>,
        vars: Vec<f64>,
        sample_rate: f64,
        #[serde(default)]
        pulse: PulseSpec,
        n_taps: Option<usize>,
    },
}

impl ChannelSpec {
    pub fn build(&self, n: usize) -> Result<ChannelStats, ConfigError> {
        match self {
            ChannelSpec::Preset(name) => presets::channel(name, n),
            ChannelSpec::Dip { dip } => Ok(ChannelStats::from_dip(dip, n)?),
            ChannelSpec::Physical {
                delays,
                vars,
                sample_rate,
                pulse,
                n_taps,
            } => Ok(ChannelStats::from_paths(
                delays,
                vars,
                pulse.build(*sample_rate),
                *sample_rate,
                *n_taps,
                n,
            )?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalogOptions {
    /// Candidate cluster counts; defaults to the divisors of N.
    pub j_grid: Option<Vec<usize>>,
    /// Feedback-link SNR in dB; defaults to the downlink SNR.
    pub snr_fb_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RvqOptions {
    pub j_grid: Option<Vec<usize>>,
    pub b_cap: u32,
}

impl Default for RvqOptions {
    fn default() -> Self {
        Self {
            j_grid: None,
            b_cap: csifb::quantizers::rvq::DEFAULT_MAX_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocOptions {
    #[serde(default)]
    pub allocation: Allocation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub snr_db_grid: Vec<f64>,
    pub alpha_fb_grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub n_trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub analog: AnalogOptions,
    #[serde(default)]
    pub rvq: RvqOptions,
    #[serde(default)]
    pub kl_suq: AllocOptions,
    #[serde(default)]
    pub phys_tq: AllocOptions,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        Self::from_toml(&text, &shown)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |s: String| Err(ConfigError::Invalid(s));
        if self.m < 2 {
            return bad(format!("M = {} must be at least 2", self.m));
        }
        if self.k != self.m {
            return bad(format!("K = {} must equal M = {}", self.k, self.m));
        }
        if self.n == 0 {
            return bad("N must be positive".into());
        }
        if self.snr_db_grid.is_empty() || self.alpha_fb_grid.is_empty() || self.schemes.is_empty() {
            return bad("snr_db_grid, alpha_fb_grid and schemes must be nonempty".into());
        }
        if self.snr_db_grid.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite".into());
        }
        if self
            .alpha_fb_grid
            .iter()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return bad("alpha_fb values must be finite and >= 0".into());
        }
        if self.n_trials < 2 {
            return bad("n_trials must be at least 2".into());
        }
        for (name, grid) in [("analog", &self.analog.j_grid), ("rvq", &self.rvq.j_grid)] {
            if let Some(g) = grid {
                if g.is_empty() || g.iter().any(|&j| j == 0 || !self.n.is_multiple_of(j)) {
                    return bad(format!(
                        "{name}.j_grid must be nonempty divisors of N = {}",
                        self.n
                    ));
                }
            }
        }
        self.channel.build(self.n)?;
        Ok(())
    }

    pub fn analog_j_grid(&self) -> Vec<usize> {
        self.analog
            .j_grid
            .clone()
            .unwrap_or_else(|| divisors(self.n))
    }

    pub fn rvq_j_grid(&self) -> Vec<usize> {
        self.rvq.j_grid.clone().unwrap_or_else(|| divisors(self.n))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
