//! Channel-state feedback for the multiuser MIMO-OFDM downlink.
//!
//! The crate covers channel statistics and sampling ([`channel_model`]),
//! analog feedback with MMSE interpolation ([`analog_feedback`]), digital
//! quantizers ([`quantizers`]), zero-forcing rate estimation
//! ([`zfbf_rates`]) and closed-form rate-gap bounds ([`analytic_bounds`]).
//! [`schemes`] ties a feedback scheme to a CSIT generator usable by the
//! Monte Carlo engine.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analog_feedback;
pub mod analytic_bounds;
pub mod channel_model;
pub mod error;
pub mod linalg;
pub mod quantizers;
pub mod rng;
pub mod schemes;
pub mod special;
pub mod zfbf_rates;

pub use channel_model::{ChannelRealization, ChannelStats, FreqResponse, ModelKind, Pulse};
pub use error::{Error, Result};
