//! Built-in channels and experiment setups.

use crate::config::{
    AllocOptions, AnalogOptions, ChannelSpec, ConfigError, ExperimentConfig, RvqOptions, Scheme,
};
use csifb::channel_model::{ChannelStats, Pulse};

pub const PAPER_DIP5: &str = "paper-dip5";
pub const SUI4_OMNI: &str = "sui4-omni";

/// Five-tap delay intensity profile with unit total power.
pub const DIP5_PROFILE: [f64; 5] = [0.5, 0.24, 0.17, 0.06, 0.03];

/// SUI-4 omni-directional profile: delays in seconds, powers linear.
pub const SUI4_DELAYS: [f64; 3] = [0.0, 1.5e-6, 4e-6];
pub const SUI4_VARS: [f64; 3] = [1.0, 0.3162, 0.1585];
pub const SUI4_SAMPLE_RATE: f64 = 1e6;

pub fn names() -> [(&'static str, &'static str); 2] {
    [
        (
            PAPER_DIP5,
            "5-tap discrete channel, DIP {0.5, 0.24, 0.17, 0.06, 0.03}",
        ),
        (
            SUI4_OMNI,
            "SUI-4 omni, 3 paths at {0, 1.5, 4} us, triangular pulse, W = 1 MHz",
        ),
    ]
}

pub fn channel(name: &str, n: usize) -> Result<ChannelStats, ConfigError> {
    match name {
        PAPER_DIP5 => Ok(ChannelStats::from_dip(&DIP5_PROFILE, n)?),
        SUI4_OMNI => Ok(ChannelStats::from_paths(
            &SUI4_DELAYS,
            &SUI4_VARS,
            Pulse::sample_hold_triangle(SUI4_SAMPLE_RATE),
            SUI4_SAMPLE_RATE,
            None,
            n,
        )?),
        other => Err(ConfigError::Invalid(format!(
            "unknown channel preset {other:?}"
        ))),
    }
}

/// Default experiment for a preset: M = K = 4, N = 64, 10 dB.
pub fn experiment(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let schemes = match name {
        PAPER_DIP5 => vec![
            Scheme::Analog,
            Scheme::Rvq,
            Scheme::TdqLimit,
            Scheme::TdqSuqRwf,
            Scheme::TdqSuqGreedy,
        ],
        SUI4_OMNI => vec![
            Scheme::Analog,
            Scheme::TdqLimit,
            Scheme::TdqSuqRwf,
            Scheme::KlSuq,
            Scheme::PhysTq,
        ],
        other => return Err(ConfigError::Invalid(format!("unknown preset {other:?}"))),
    };
    Ok(ExperimentConfig {
        channel: ChannelSpec::Preset(name.to_string()),
        m: 4,
        k: 4,
        n: 64,
        snr_db_grid: vec![10.0],
        alpha_fb_grid: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
        schemes,
        n_trials: 1000,
        master_seed: 1,
        analog: AnalogOptions::default(),
        rvq: RvqOptions::default(),
        kl_suq: AllocOptions::default(),
        phys_tq: AllocOptions::default(),
    })
}
