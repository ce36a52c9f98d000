//! Physical-layer security toolkit for frequency-diverse-array directional
//! modulation over fluctuating two-ray fading.
//!
//! The crate covers the full pipeline:
//!
//! * [`array_geometry`] - subcarrier frequency plan and the 3D normalized
//!   steering vector of the symmetrical multi-carrier array
//! * [`precoder`] - useful-signal vector, AN designs (single-point, ZF
//!   projector, null-space basis), and memory accounting
//! * [`ftr_channel`] - fluctuating two-ray fading: sampling and the
//!   analytical SNR distribution series
//! * [`link_model`] - transmit/receive composition and the SNR/SINR laws at
//!   the legitimate receiver and the eavesdropper
//! * [`analytics`] - BER, average secrecy rate (with lower bound), secrecy
//!   outage probability (with upper bound)
//! * [`montecarlo`] - seeded, reproducible sweep engine pairing Monte Carlo
//!   estimates with the analytic curves

pub mod analytics;
pub mod array_geometry;
pub mod error;
pub mod ftr_channel;
pub mod link_model;
pub mod montecarlo;
pub mod precoder;
pub mod special;

pub use error::{Error, Result};
