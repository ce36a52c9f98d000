//! Transmit/receive signal assembly and the SNR/SINR laws at the legitimate
//! receiver and the eavesdropper.
//!
//! The transmitted vector is x = beta1 sqrt(Ps) p1 s + (AN part). At the
//! design position the AN lies in the null space of h_B and cancels exactly;
//! elsewhere it adds interference. Bob sees gamma_B = beta1^2 lambda_B; Eve
//! sees gamma_E = eta lambda_E / (mu lambda_E + 1), capped at tau = eta/mu.

use num_complex::Complex64;

use crate::array_geometry::{inner, norm, ArrayConfig, Position, SteeringVector};
use crate::error::{Error, Result};
use crate::ftr_channel::{FtrDistribution, FtrParams, SeriesOptions};
use crate::precoder::{AnMethod, PowerSplit, PrecoderSet};

/// mu below this is treated as "no effective AN" and the NoAN law applies.
pub const MU_DEGENERATE: f64 = 1e-12;

/// Total power and noise levels of one link setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub ps: f64,
    pub noise_var_b: f64,
    pub noise_var_e: f64,
    pub split: PowerSplit,
}

impl LinkBudget {
    pub fn new(ps: f64, noise_var_b: f64, noise_var_e: f64, split: PowerSplit) -> Result<Self> {
        if !(ps > 0.0) || !(noise_var_b > 0.0) || !(noise_var_e > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ps and noise variances must be > 0, got ({ps}, {noise_var_b}, {noise_var_e})"
            )));
        }
        Ok(Self {
            ps,
            noise_var_b,
            noise_var_e,
            split,
        })
    }
}

/// AN input for one transmit slot; its shape must match the precoder.
#[derive(Debug, Clone, Copy)]
pub enum AnDraw<'a> {
    /// NoAN method.
    None,
    /// Scalar draw for the SP method.
    Scalar(Complex64),
    /// Vector draw for ZF / null-space methods; normalized per draw so the
    /// instantaneous AN power is exactly beta2^2 Ps.
    Vector(&'a [Complex64]),
}

/// x = beta1 sqrt(Ps) p1 s + AN. Scalar AN is scaled by alpha; vector AN is
/// normalized per draw.
pub fn transmit_vector(
    pre: &PrecoderSet,
    split: &PowerSplit,
    ps: f64,
    s: Complex64,
    an: AnDraw,
) -> Result<Vec<Complex64>> {
    let signal_gain = split.beta1 * ps.sqrt();
    let mut x: Vec<Complex64> = pre.p1.iter().map(|p| p * signal_gain * s).collect();
    let an_gain = split.beta2 * ps.sqrt();
    match (pre.method, an) {
        (AnMethod::NoAn, AnDraw::None) => {}
        (AnMethod::Sp, AnDraw::Scalar(z)) => {
            let p2 = pre.an_basis.col(0);
            let c = pre.alpha * an_gain * z;
            for (xi, p) in x.iter_mut().zip(p2) {
                *xi += c * p;
            }
        }
        (AnMethod::Zf | AnMethod::Svd, AnDraw::Vector(z)) => {
            if z.len() != pre.an_width() {
                return Err(Error::InvalidArgument(format!(
                    "AN draw width {} does not match basis width {}",
                    z.len(),
                    pre.an_width()
                )));
            }
            let bz = pre.an_basis.matvec(z);
            let nb = norm(&bz);
            if nb > 0.0 {
                let c = an_gain / nb;
                for (xi, b) in x.iter_mut().zip(&bz) {
                    *xi += c * b;
                }
            }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "AN draw shape does not match method {}",
                pre.method.label()
            )));
        }
    }
    Ok(x)
}

/// y = eps h(pos)^H x + xi, with the steering vector rebuilt from the same
/// array config and time as the precoder design.
pub fn receive(
    cfg: &ArrayConfig,
    pos: &Position,
    t: f64,
    x: &[Complex64],
    epsilon: Complex64,
    noise: Complex64,
) -> Complex64 {
    let h = cfg.steering_vector(pos, t);
    receive_with_steering(&h, x, epsilon, noise)
}

/// As [`receive`] with a precomputed steering vector.
pub fn receive_with_steering(
    h: &SteeringVector,
    x: &[Complex64],
    epsilon: Complex64,
    noise: Complex64,
) -> Complex64 {
    epsilon * h.inner(x) + noise
}

/// Eve-side gains of the scalar SINR law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveGains {
    /// h_E^H p1.
    pub rho1: Complex64,
    /// h_E^H p2 for SP; for vector-AN methods the effective unit-power
    /// leakage amplitude sqrt(||h_E^H B||^2 / ||B||_F^2) as a real value.
    pub rho2: Complex64,
    /// beta1^2 |rho1|^2.
    pub eta: f64,
    /// Expected AN gain: alpha^2 beta2^2 |rho2|^2 for SP, and the
    /// basis-averaged leakage beta2^2 ||h_E^H B||_F^2 / ||B||_F^2 otherwise.
    pub mu: f64,
    /// SINR ceiling eta / mu; infinite when mu = 0.
    pub tau: f64,
}

/// Gains of the eavesdropper SINR law for any method. For vector-AN methods
/// mu is the leakage averaged over the AN basis (exact for orthonormal
/// columns by isotropy of the Gaussian draw; the Monte Carlo path applies
/// the per-draw value instead).
pub fn eve_gains(h_e: &SteeringVector, pre: &PrecoderSet, split: &PowerSplit) -> EveGains {
    let rho1 = inner(h_e.as_slice(), &pre.p1);
    let eta = split.beta1 * split.beta1 * rho1.norm_sqr();
    let width = pre.an_width();
    if width == 0 || split.beta2 == 0.0 {
        return EveGains {
            rho1,
            rho2: Complex64::ZERO,
            eta,
            mu: 0.0,
            tau: f64::INFINITY,
        };
    }
    let leak_row = pre.an_basis.conj_row(h_e.as_slice());
    let leak_sq: f64 = leak_row.iter().map(|c| c.norm_sqr()).sum();
    let fro_sq = pre.an_basis.frobenius_sq();
    let mu = split.beta2 * split.beta2 * leak_sq / fro_sq;
    let rho2 = if pre.method == AnMethod::Sp {
        leak_row[0]
    } else {
        Complex64::new((leak_sq / fro_sq).sqrt(), 0.0)
    };
    // rounding residue below the degeneracy threshold means no AN ceiling
    let tau = if mu >= MU_DEGENERATE {
        eta / mu
    } else {
        f64::INFINITY
    };
    EveGains {
        rho1,
        rho2,
        eta,
        mu,
        tau,
    }
}

/// CDF of gamma_B = beta1^2 lambda_B: F_lambda(x / beta1^2).
/// `ftr_b` must already carry the lambda scale (see FtrParams::scaled).
pub fn gamma_b_cdf(x: f64, ftr_b: &FtrParams, beta1: f64, opts: &SeriesOptions) -> Result<f64> {
    let dist = FtrDistribution::new(ftr_b, opts)?;
    gamma_b_cdf_with(&dist, x, beta1)
}

pub fn gamma_b_pdf(x: f64, ftr_b: &FtrParams, beta1: f64, opts: &SeriesOptions) -> Result<f64> {
    let dist = FtrDistribution::new(ftr_b, opts)?;
    gamma_b_pdf_with(&dist, x, beta1)
}

pub(crate) fn check_beta1(beta1: f64) -> Result<f64> {
    if !(beta1 > 0.0) {
        return Err(Error::Degenerate(format!(
            "beta1 = {beta1} allocates no signal power"
        )));
    }
    Ok(beta1)
}

pub fn gamma_b_cdf_with(dist: &FtrDistribution, x: f64, beta1: f64) -> Result<f64> {
    check_beta1(beta1)?;
    Ok(dist.cdf(x / (beta1 * beta1)))
}

pub fn gamma_b_pdf_with(dist: &FtrDistribution, x: f64, beta1: f64) -> Result<f64> {
    check_beta1(beta1)?;
    let b2 = beta1 * beta1;
    Ok(dist.pdf(x / b2) / b2)
}

/// CDF of gamma_E = eta lambda_E / (mu lambda_E + 1):
/// F_lambda(x / (eta - mu x)) below tau, 1 from tau on. With mu at zero the
/// NoAN law F_lambda(x / eta) applies.
pub fn gamma_e_cdf(x: f64, ftr_e: &FtrParams, gains: &EveGains, opts: &SeriesOptions) -> Result<f64> {
    let dist = FtrDistribution::new(ftr_e, opts)?;
    gamma_e_cdf_with(&dist, x, gains)
}

pub fn gamma_e_pdf(x: f64, ftr_e: &FtrParams, gains: &EveGains, opts: &SeriesOptions) -> Result<f64> {
    let dist = FtrDistribution::new(ftr_e, opts)?;
    gamma_e_pdf_with(&dist, x, gains)
}

pub fn gamma_e_cdf_with(dist: &FtrDistribution, x: f64, gains: &EveGains) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if gains.mu < MU_DEGENERATE {
        if !(gains.eta > 0.0) {
            return Err(Error::Degenerate(
                "eta = 0 with no AN leaves gamma_E identically zero".into(),
            ));
        }
        return Ok(dist.cdf(x / gains.eta));
    }
    if x >= gains.tau {
        return Ok(1.0);
    }
    Ok(dist.cdf(x / (gains.eta - gains.mu * x)))
}

pub fn gamma_e_pdf_with(dist: &FtrDistribution, x: f64, gains: &EveGains) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if gains.mu < MU_DEGENERATE {
        if !(gains.eta > 0.0) {
            return Err(Error::Degenerate(
                "eta = 0 with no AN leaves gamma_E identically zero".into(),
            ));
        }
        return Ok(dist.pdf(x / gains.eta) / gains.eta);
    }
    if x >= gains.tau {
        return Ok(0.0);
    }
    let denom = gains.eta - gains.mu * x;
    Ok(gains.eta / (denom * denom) * dist.pdf(x / denom))
}
