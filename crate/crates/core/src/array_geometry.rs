//! Symmetrical multi-carrier frequency-diverse array: frequency plan and the
//! normalized 3D steering vector over (range, azimuth, elevation).
//!
//! The array has 2N+1 elements on the x-axis at spacing `d`, element indices
//! n = -N..N, each radiating L subcarriers. The subcarrier (n, l) is offset
//! from the carrier by `delta_f * ln(|n|+1) * ln(l+1)`, which makes the
//! beampattern depend on range as well as on angle.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Soft ceiling on max |frequency increment| / f0; above this the far-field
/// phase approximation starts to degrade noticeably.
pub const INCREMENT_RATIO_WARN: f64 = 1e-4;
/// Hard ceiling; configurations beyond it are rejected.
pub const INCREMENT_RATIO_ERROR: f64 = 1e-3;

/// Geometry and frequency plan of the array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    /// N: element indices run -N..N, 2N+1 elements in total.
    pub n_half: u32,
    /// L: subcarriers per element.
    pub subcarriers: u32,
    /// Carrier frequency f0, Hz.
    pub f0: f64,
    /// Fixed frequency increment, Hz.
    pub delta_f: f64,
    /// Element spacing d, meters.
    pub spacing: f64,
    /// Propagation speed, m/s.
    pub c: f64,
}

impl ArrayConfig {
    /// Build a config with half-wavelength spacing d = c/(2 f0).
    pub fn new(n_half: u32, subcarriers: u32, f0: f64, delta_f: f64) -> Result<Self> {
        let c = SPEED_OF_LIGHT;
        Self::with_spacing(n_half, subcarriers, f0, delta_f, c / (2.0 * f0), c)
    }

    pub fn with_spacing(
        n_half: u32,
        subcarriers: u32,
        f0: f64,
        delta_f: f64,
        spacing: f64,
        c: f64,
    ) -> Result<Self> {
        if n_half < 1 {
            return Err(Error::InvalidArgument("n_half must be >= 1".into()));
        }
        if subcarriers < 1 {
            return Err(Error::InvalidArgument("subcarriers must be >= 1".into()));
        }
        if !(f0 > 0.0) {
            return Err(Error::InvalidArgument(format!("f0 must be > 0, got {f0}")));
        }
        if !(delta_f >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "delta_f must be >= 0, got {delta_f}"
            )));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be > 0, got {spacing}"
            )));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!("c must be > 0, got {c}")));
        }
        let cfg = Self {
            n_half,
            subcarriers,
            f0,
            delta_f,
            spacing,
            c,
        };
        if cfg.increment_ratio() >= INCREMENT_RATIO_ERROR {
            return Err(Error::InvalidArgument(format!(
                "max frequency increment {:.3e} Hz exceeds {INCREMENT_RATIO_ERROR:e} * f0; \
                 the narrowband approximation no longer holds",
                cfg.max_increment()
            )));
        }
        Ok(cfg)
    }

    pub fn num_elements(&self) -> usize {
        2 * self.n_half as usize + 1
    }

    /// Total number of subcarrier channels, (2N+1) L.
    pub fn dim(&self) -> usize {
        self.num_elements() * self.subcarriers as usize
    }

    /// Largest |frequency increment| over the plan.
    pub fn max_increment(&self) -> f64 {
        self.delta_f
            * ((self.n_half as f64 + 1.0).ln())
            * ((self.subcarriers as f64).ln())
    }

    /// max_n,l |delta_f_{n,l}| / f0. The constructor rejects >= 1e-3; values
    /// above 1e-4 deserve a warning at the application boundary.
    pub fn increment_ratio(&self) -> f64 {
        self.max_increment() / self.f0
    }

    fn check_indices(&self, n: i64, l: u32) -> Result<()> {
        let nmax = self.n_half as i64;
        if n < -nmax || n > nmax {
            return Err(Error::IndexOutOfRange(format!(
                "element index {n} outside -{nmax}..{nmax}"
            )));
        }
        if l >= self.subcarriers {
            return Err(Error::IndexOutOfRange(format!(
                "subcarrier index {l} outside 0..{}",
                self.subcarriers
            )));
        }
        Ok(())
    }

    /// Frequency increment of subcarrier (n, l): delta_f ln(|n|+1) ln(l+1).
    /// Symmetric in n.
    pub fn frequency_increment(&self, n: i64, l: u32) -> Result<f64> {
        self.check_indices(n, l)?;
        Ok(self.delta_f * ((n.unsigned_abs() + 1) as f64).ln() * ((l + 1) as f64).ln())
    }

    /// Radiated frequency of subcarrier (n, l): f0 + delta_f ln(|n|+1) ln(l+1).
    pub fn subcarrier_frequency(&self, n: i64, l: u32) -> Result<f64> {
        Ok(self.f0 + self.frequency_increment(n, l)?)
    }

    /// Normalized steering vector toward `pos`, evaluated at time `t`.
    ///
    /// Entry (n, l) at flat index (n+N) L + l is
    ///
    ///   exp{ i 2 pi [ delta_f_{n,l} (t - r/c) + f0 n d sin(theta) cos(psi) / c ] }
    ///   / sqrt((2N+1) L)
    ///
    /// The precoder and every receiver evaluation must share the same `t`
    /// for the orthogonality design to hold; sweeps use t = 0 throughout.
    pub fn steering_vector(&self, pos: &Position, t: f64) -> SteeringVector {
        let dim = self.dim();
        let norm = 1.0 / (dim as f64).sqrt();
        let time_lag = t - pos.r / self.c;
        let angle_term = self.f0 * self.spacing * pos.theta.sin() * pos.psi.cos() / self.c;
        let nmax = self.n_half as i64;
        let mut entries = Vec::with_capacity(dim);
        for n in -nmax..=nmax {
            let ln_n = ((n.unsigned_abs() + 1) as f64).ln();
            for l in 0..self.subcarriers {
                let inc = self.delta_f * ln_n * ((l + 1) as f64).ln();
                let phase = TAU * (inc * time_lag + angle_term * n as f64);
                entries.push(Complex64::from_polar(norm, phase));
            }
        }
        SteeringVector { entries }
    }
}

/// Receiver location in range / azimuth / elevation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    /// Range r, meters.
    pub r: f64,
    /// Azimuth theta, radians in [-pi/2, pi/2].
    pub theta: f64,
    /// Elevation psi, radians in [-pi/2, pi/2].
    pub psi: f64,
}

impl Position {
    pub fn new(r: f64, theta: f64, psi: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "range must be > 0 (far field), got {r}"
            )));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(theta.abs() <= half_pi) || !(psi.abs() <= half_pi) {
            return Err(Error::InvalidArgument(format!(
                "angles must lie in [-pi/2, pi/2], got theta={theta}, psi={psi}"
            )));
        }
        Ok(Self { r, theta, psi })
    }

    /// Angles in degrees, range in meters.
    pub fn from_degrees(r: f64, theta_deg: f64, psi_deg: f64) -> Result<Self> {
        Self::new(r, theta_deg.to_radians(), psi_deg.to_radians())
    }
}

/// Normalized steering vector; unit Euclidean norm, entries of equal modulus
/// 1/sqrt((2N+1) L), ordered element-major (n = -N..N slowest, l fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
}

impl SteeringVector {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian inner product self^H other.
    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        debug_assert_eq!(self.entries.len(), other.len());
        self.entries
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Hermitian inner product a^H b over raw slices.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex slice.
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}
