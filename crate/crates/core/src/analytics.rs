//! Closed-form and quadrature evaluation of BER, the parametric log-weighted
//! exponential integrals Psi and S, the average secrecy rate and its lower
//! bound, and the secrecy outage probability with its upper bound.
//!
//! The secrecy expressions are nested truncated series over the FTR mixture
//! weights of Bob and Eve. Individual factors span hundreds of orders of
//! magnitude while their products stay small, so every Psi / S / chi value
//! is carried as a logarithm and each series term is assembled as
//! exp(sum of logs); the bracketed differences are all positive and use
//! log-sub-exp. Psi evaluations are memoized per (power, singularity) pair.

use std::collections::HashMap;
use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{Error, Result};
use crate::ftr_channel::{FtrDistribution, FtrParams, SeriesOptions};
use crate::link_model::{check_beta1, EveGains, MU_DEGENERATE};
use crate::special::gamma::{exp_integral_e1, ln_gamma};
use crate::special::quad::{integrate, integrate_to_inf};

pub use crate::special::quad::QuadratureOptions;

/// Series and quadrature controls for the secrecy evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SecrecyOptions {
    pub series: SeriesOptions,
    pub quad: QuadratureOptions,
}

/// Value of a secrecy metric with its partial terms and a truncation proxy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyResult {
    /// bits/s/Hz for the average secrecy rate, probability for the SOP.
    pub value: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// Magnitude of the last series shell plus the weight-truncation bounds.
    pub truncation_error_bound: f64,
}

/// Gaussian tail Q(u) = erfc(u / sqrt(2)) / 2.
pub fn q_function(u: f64) -> f64 {
    0.5 * libm::erfc(u / SQRT_2)
}

/// M-PSK bit error rate approximation
/// (2 / log2 M) Q(sqrt(2 gamma) sin(pi / M)).
///
/// Applied verbatim for every power-of-two M, including M = 2 where it is
/// known to sit a factor two above the exact BPSK rate Q(sqrt(2 gamma)).
pub fn ber_mpsk(gamma_b: f64, m_order: u32) -> Result<f64> {
    if m_order < 2 || !m_order.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "constellation size must be a power of two >= 2, got {m_order}"
        )));
    }
    if !(gamma_b >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be >= 0, got {gamma_b}"
        )));
    }
    let bits = (m_order as f64).log2();
    let arg = (2.0 * gamma_b).sqrt() * (std::f64::consts::PI / m_order as f64).sin();
    Ok(2.0 / bits * q_function(arg))
}

/// ln(exp(a) - exp(b)) for a >= b; returns -inf when the difference is at
/// or below rounding level (the analytic value is non-negative).
fn ln_sub(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-libm::expm1(b - a)).ln()
}

/// ln(sum exp(v)) over a slice.
fn ln_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

/// ln(exp(a) + exp(b)).
fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn validate_psi_args(v1: u32, v2: f64, v3: f64, v4: f64, v5: f64, tau: f64) -> Result<()> {
    if v1 > 1 {
        return Err(Error::InvalidArgument(format!("v1 must be 0 or 1, got {v1}")));
    }
    if !(v2 >= 0.0) || !(v3 >= 0.0) || !(v4 >= 0.0) || !(v5 >= 0.0) {
        return Err(Error::InvalidArgument(
            "v2..v5 must all be non-negative".into(),
        ));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be > 0, got {tau}")));
    }
    if tau.is_infinite() {
        if v3 != 0.0 || v5 != 0.0 {
            return Err(Error::Domain(
                "infinite tau requires v3 = 0 and v5 = 0".into(),
            ));
        }
        if !(v4 > 0.0) {
            return Err(Error::Domain(
                "infinite tau with v4 = 0 does not converge".into(),
            ));
        }
    } else if v5 == 0.0 && v3 >= 1.0 {
        return Err(Error::Domain(format!(
            "(tau - t)^-{v3} is not integrable without the v5 damping"
        )));
    }
    Ok(())
}

/// ln Psi(v1, v2, v3, v4, v5, tau), where
///
///   Psi = integral_0^tau ln^v1(1+t) t^v2 / (tau-t)^v3
///         exp{-v4 t - v5 t/(tau-t)} dt.
///
/// Finite tau with a boundary factor is handled by the substitution
/// u = t/(tau-t), mapping to a smooth integrand on [0, inf) whose tail
/// decays like e^{-v5 u}. The integrand is rescaled by its probed maximum
/// so that arbitrarily large or small magnitudes integrate safely.
pub fn psi_integral_ln(
    v1: u32,
    v2: f64,
    v3: f64,
    v4: f64,
    v5: f64,
    tau: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    validate_psi_args(v1, v2, v3, v4, v5, tau)?;

    // ln of ln^v1(1+t); t is the original integration variable
    let ln_log_factor = move |t: f64| -> f64 {
        if v1 == 0 {
            0.0
        } else {
            let l = t.ln_1p();
            if l <= 0.0 {
                f64::NEG_INFINITY
            } else {
                l.ln()
            }
        }
    };

    if tau.is_finite() && (v3 > 0.0 || v5 > 0.0) {
        // u = t/(tau - t):
        // Psi = tau^{v2-v3+1} integral_0^inf ln^v1(1 + tau u/(1+u))
        //       u^{v2} (1+u)^{v3-v2-2} e^{-v4 tau u/(1+u) - v5 u} du
        let ln_g = move |u: f64| -> f64 {
            if u <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let t = tau * u / (1.0 + u);
            ln_log_factor(t) + v2 * u.ln() + (v3 - v2 - 2.0) * u.ln_1p()
                - v4 * t
                - v5 * u
        };
        // probe for the scale; the maximum sits near u = v2 / (v5 + small).
        // M only has to land within a few e-folds of the true peak.
        let hint = if v5 > 0.0 { (v2 + 1.0) / v5 } else { v2 + 1.0 };
        let mut m = f64::NEG_INFINITY;
        for i in 0..=64 {
            let u = hint.max(1.0) * 10f64.powf(-6.0 + 8.0 * i as f64 / 64.0);
            m = m.max(ln_g(u));
        }
        if m == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let f = move |u: f64| {
            let v = ln_g(u) - m;
            if v < -745.0 {
                0.0
            } else {
                v.exp()
            }
        };
        let raw = integrate_to_inf(&f, 0.0, opts)?;
        if raw <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        return Ok((v2 - v3 + 1.0) * tau.ln() + m + raw.ln());
    }

    // no boundary layer: plain integrand on [0, tau] or [0, inf)
    let ln_f = move |t: f64| -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ln_log_factor(t) + v2 * t.ln() - v4 * t
    };
    let hint = if v4 > 0.0 { (v2 + 1.0) / v4 } else { v2 + 1.0 };
    let top = if tau.is_finite() { tau } else { hint.max(1.0) * 1e4 };
    let mut m = f64::NEG_INFINITY;
    for i in 0..=64 {
        let t = top * 10f64.powf(-10.0 + 10.0 * i as f64 / 64.0);
        m = m.max(ln_f(t.min(top)));
    }
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let f = move |t: f64| {
        let v = ln_f(t) - m;
        if v < -745.0 {
            0.0
        } else {
            v.exp()
        }
    };
    let raw = if tau.is_finite() {
        integrate(&f, 0.0, tau, opts)?
    } else {
        integrate_to_inf(&f, 0.0, opts)?
    };
    if raw <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(m + raw.ln())
}

/// Psi in linear scale; errors if the value overflows f64.
pub fn psi_integral(
    v1: u32,
    v2: f64,
    v3: f64,
    v4: f64,
    v5: f64,
    tau: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    let ln = psi_integral_ln(v1, v2, v3, v4, v5, tau, opts)?;
    if ln == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let v = ln.exp();
    if !v.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "Psi({v1}, {v2}, {v3}, {v4}, {v5}, {tau}) = exp({ln}) overflows f64"
        )));
    }
    Ok(v)
}

/// ln S(u, v) where S(u, v) = integral_0^inf ln(1+t) t^{u-1} e^{-v t} dt
/// = (u-1)! e^v sum_{k=1}^{u} Gamma(k-u, v) / v^k.
///
/// With h_a = Gamma(a, v) v^{-a} e^{v}, the downward recurrence
/// Gamma(a, v) = (Gamma(a+1, v) - v^a e^{-v})/a becomes
/// h_a = (v h_{a+1} - 1)/a, every summand collapses to v^{-u} e^{-v} h_{k-u},
/// and the h_a stay bounded, so the evaluation cannot overflow.
pub fn s_closed_ln(u: u32, v: f64) -> Result<f64> {
    if u < 1 {
        return Err(Error::InvalidArgument(format!("u must be >= 1, got {u}")));
    }
    if !(v > 0.0) {
        return Err(Error::InvalidArgument(format!("v must be > 0, got {v}")));
    }
    let mut h = exp_integral_e1(v)? * v.exp(); // h_0
    let mut sum = h; // k = u term
    for k in (1..u).rev() {
        let a = k as i64 - u as i64;
        h = (v * h - 1.0) / a as f64;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "scaled incomplete-gamma recurrence failed at a={a}, v={v}"
            )));
        }
        sum += h;
    }
    Ok(ln_gamma(u as f64) - u as f64 * v.ln() + sum.ln())
}

/// S(u, v) in linear scale; errors if it overflows f64.
pub fn s_closed(u: u32, v: f64) -> Result<f64> {
    let ln = s_closed_ln(u, v)?;
    let val = ln.exp();
    if !val.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "S({u}, {v}) = exp({ln}) overflows f64"
        )));
    }
    Ok(val)
}

/// chi = Psi(1, j_B, 0, 1/(2 beta1^2 sigma_B^2), 0, tau); the tau = inf
/// fallback is the closed form S(j_B + 1, v).
pub fn chi(
    j_b: u32,
    beta1: f64,
    sigma2_b: f64,
    tau: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    check_beta1(beta1)?;
    if !(sigma2_b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma_B^2 must be > 0, got {sigma2_b}"
        )));
    }
    let v = 1.0 / (2.0 * beta1 * beta1 * sigma2_b);
    if tau.is_infinite() {
        return s_closed(j_b + 1, v);
    }
    psi_integral(1, j_b as f64, 0.0, v, 0.0, tau, opts)
}

/// Memoized ln-Psi evaluations sharing (v1, v4, v5, tau); keys are the
/// integer (v2, v3) pair plus a flag selecting the v4 = 0 family.
struct PsiMemo<'a> {
    v1: u32,
    v4: f64,
    v5: f64,
    tau: f64,
    quad: &'a QuadratureOptions,
    map: HashMap<(u32, u32, bool), f64>,
}

impl<'a> PsiMemo<'a> {
    fn new(v1: u32, v4: f64, v5: f64, tau: f64, quad: &'a QuadratureOptions) -> Self {
        Self {
            v1,
            v4,
            v5,
            tau,
            quad,
            map: HashMap::new(),
        }
    }

    fn get_ln(&mut self, v2: u32, v3: u32, with_v4: bool) -> Result<f64> {
        if let Some(&v) = self.map.get(&(v2, v3, with_v4)) {
            return Ok(v);
        }
        let v4 = if with_v4 { self.v4 } else { 0.0 };
        let value = psi_integral_ln(
            self.v1, v2 as f64, v3 as f64, v4, self.v5, self.tau, self.quad,
        )?;
        self.map.insert((v2, v3, with_v4), value);
        Ok(value)
    }
}

struct SecrecyContext {
    dist_b: FtrDistribution,
    dist_e: FtrDistribution,
    /// ln(2 beta1^2 sigma_B^2), and v_B = 1/(2 beta1^2 sigma_B^2).
    ln_sb: f64,
    vb: f64,
    /// ln(2 mu sigma_E^2), and v_E.
    ln_se: f64,
    ve: f64,
    tau: f64,
    /// Outer-shell stop: consecutive-quiet threshold.
    rel_tol: f64,
    /// ln(j!) for j up to the combined series depth.
    ln_fact: Vec<f64>,
}

impl SecrecyContext {
    fn new(
        ftr_b: &FtrParams,
        ftr_e: &FtrParams,
        beta1: f64,
        gains: &EveGains,
        opts: &SecrecyOptions,
    ) -> Result<Self> {
        check_beta1(beta1)?;
        if gains.mu < MU_DEGENERATE || !gains.tau.is_finite() {
            return Err(Error::Degenerate(format!(
                "mu = {:e} provides no AN ceiling (tau = {}); the AN-free law applies",
                gains.mu, gains.tau
            )));
        }
        let dist_b = FtrDistribution::new(ftr_b, &opts.series)?;
        let dist_e = FtrDistribution::new(ftr_e, &opts.series)?;
        let sb = 2.0 * beta1 * beta1 * ftr_b.sigma2;
        let se = 2.0 * gains.mu * ftr_e.sigma2;
        let depth = dist_b.num_terms() + dist_e.num_terms() + 2;
        let mut ln_fact = Vec::with_capacity(depth);
        let mut acc = 0.0;
        ln_fact.push(0.0);
        for j in 1..depth {
            acc += (j as f64).ln();
            ln_fact.push(acc);
        }
        Ok(Self {
            dist_b,
            dist_e,
            ln_sb: sb.ln(),
            vb: 1.0 / sb,
            ln_se: se.ln(),
            ve: 1.0 / se,
            tau: gains.tau,
            rel_tol: opts.series.rel_tol,
            ln_fact,
        })
    }

    /// ln of mixture weight a_j (they are positive for every valid FTR
    /// parameter set; -inf marks an exactly-zero weight).
    fn ln_weight(dist: &FtrDistribution, j: usize) -> f64 {
        let (ln_a, sign) = dist.ln_mixture_weight(j);
        if sign < 0.0 {
            // never reached for valid parameters; degrade gracefully
            f64::NEG_INFINITY
        } else {
            ln_a
        }
    }

    /// Index of the largest mixture weight (shell stopping starts after it).
    fn peak(dist: &FtrDistribution) -> usize {
        (0..dist.num_terms())
            .max_by(|&a, &b| {
                Self::ln_weight(dist, a)
                    .partial_cmp(&Self::ln_weight(dist, b))
                    .unwrap()
            })
            .unwrap_or(0)
    }
}

/// Average secrecy rate: the three-part series of the clipped-rate
/// expectation with the partial terms reported individually.
pub fn avg_secrecy_rate(
    ftr_b: &FtrParams,
    ftr_e: &FtrParams,
    beta1: f64,
    gains: &EveGains,
    opts: &SecrecyOptions,
) -> Result<SecrecyResult> {
    let ctx = SecrecyContext::new(ftr_b, ftr_e, beta1, gains, opts)?;
    let jb_count = ctx.dist_b.num_terms();
    let je_count = ctx.dist_e.num_terms();
    let ln_tau = ctx.tau.ln();

    let mut memo = PsiMemo::new(1, ctx.vb, ctx.ve, ctx.tau, &opts.quad);

    // I3: single series over Eve's weights
    let mut i3 = 0.0;
    let mut shell_i3 = 0.0;
    {
        let peak_e = SecrecyContext::peak(&ctx.dist_e);
        let mut quiet = 0;
        for je in 0..je_count {
            let ln_ae = SecrecyContext::ln_weight(&ctx.dist_e, je);
            if ln_ae == f64::NEG_INFINITY {
                continue;
            }
            let ln_ce = ln_ae - ctx.ln_fact[je] - (je as f64 + 1.0) * ctx.ln_se;
            let ln_psi0 = memo.get_ln(je as u32, je as u32 + 2, false)?;
            let contrib = (ln_ce + ln_tau + ln_psi0).exp();
            i3 += contrib;
            shell_i3 = contrib.abs();
            if je > peak_e && contrib.abs() <= ctx.rel_tol * i3.abs().max(1e-300) {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    i3 /= LN_2;

    let peak_b = SecrecyContext::peak(&ctx.dist_b);
    let mut i1 = 0.0;
    let mut i2 = 0.0;
    let mut shell_outer = 0.0;
    let mut quiet = 0;
    let mut inner1_terms: Vec<f64> = Vec::with_capacity(je_count + 1);
    let mut inner2_terms: Vec<f64> = Vec::with_capacity(jb_count + 1);
    for jb in 0..jb_count {
        let ln_ab = SecrecyContext::ln_weight(&ctx.dist_b, jb);
        if ln_ab == f64::NEG_INFINITY {
            continue;
        }
        let ln_cb = ln_ab - ctx.ln_fact[jb] - (jb as f64 + 1.0) * ctx.ln_sb;
        let ln_s = s_closed_ln(jb as u32 + 1, ctx.vb)?;
        let ln_chi = psi_integral_ln(1, jb as f64, 0.0, ctx.vb, 0.0, ctx.tau, &opts.quad)?;

        // single-sum part of I1: c_B (S - chi)
        let single = (ln_cb + ln_sub(ln_s, ln_chi)).exp();
        i1 += single;
        let mut shell = single;

        for je in 0..je_count {
            let ln_ae = SecrecyContext::ln_weight(&ctx.dist_e, je);
            if ln_ae == f64::NEG_INFINITY {
                continue;
            }
            let ln_ce = ln_ae - ctx.ln_fact[je] - (je as f64 + 1.0) * ctx.ln_se;

            // I1 bracket: chi - sum_n Psi(1, jb+n, n) / (n! s_E^n)
            inner1_terms.clear();
            for n in 0..=je {
                let w = -ctx.ln_fact[n] - n as f64 * ctx.ln_se;
                inner1_terms.push(w + memo.get_ln((jb + n) as u32, n as u32, true)?);
            }
            let ln_inner1 = ln_sum_exp(&inner1_terms);
            let t1 = (ln_cb + ln_ae + ln_sub(ln_chi, ln_inner1)).exp();

            // I2 bracket: Psi(1, je, je+2 | v4=0) - sum_n Psi(...) / (n! s_B^n)
            let ln_psi0 = memo.get_ln(je as u32, je as u32 + 2, false)?;
            inner2_terms.clear();
            for n in 0..=jb {
                let w = -ctx.ln_fact[n] - n as f64 * ctx.ln_sb;
                inner2_terms.push(w + memo.get_ln((je + n) as u32, je as u32 + 2, true)?);
            }
            let ln_inner2 = ln_sum_exp(&inner2_terms);
            let t2 = (ln_ab + ln_ce + ln_tau + ln_sub(ln_psi0, ln_inner2)).exp();

            i1 += t1;
            i2 += t2;
            shell += t1 + t2;
        }
        shell_outer = shell.abs();
        let scale = (i1.abs() + i2.abs()).max(1e-300);
        if jb > peak_b && shell_outer <= ctx.rel_tol * scale {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    i1 /= LN_2;
    i2 /= LN_2;

    let value = i1 + i2 - i3;
    if !value.is_finite() {
        return Err(Error::NumericalFailure(
            "secrecy-rate series produced a non-finite value".into(),
        ));
    }
    let bound = (shell_outer + shell_i3) / LN_2
        + ctx.dist_b.truncation_bound()
        + ctx.dist_e.truncation_bound();
    if value < -1e-4 {
        return Err(Error::NumericalFailure(format!(
            "average secrecy rate {value} is negative beyond tolerance"
        )));
    }
    Ok(SecrecyResult {
        value,
        i1,
        i2,
        i3,
        truncation_error_bound: bound,
    })
}

/// Closed-form lower bound of the average secrecy rate in the strong-Eve
/// limit. Reported raw, without a clip at zero.
pub fn sr_lower_bound(
    ftr_b: &FtrParams,
    beta1: f64,
    tau: f64,
    opts: &SecrecyOptions,
) -> Result<f64> {
    check_beta1(beta1)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tau must be finite and > 0, got {tau}"
        )));
    }
    let dist_b = FtrDistribution::new(ftr_b, &opts.series)?;
    let sb = 2.0 * beta1 * beta1 * ftr_b.sigma2;
    let vb = 1.0 / sb;
    let ln_sb = sb.ln();
    let peak_b = SecrecyContext::peak(&dist_b);
    let mut sum = 0.0;
    let mut quiet = 0;
    for jb in 0..dist_b.num_terms() {
        let ln_ab = SecrecyContext::ln_weight(&dist_b, jb);
        if ln_ab == f64::NEG_INFINITY {
            continue;
        }
        let ln_cb = ln_ab - ln_gamma(jb as f64 + 1.0) - (jb as f64 + 1.0) * ln_sb;
        let ln_s = s_closed_ln(jb as u32 + 1, vb)?;
        let ln_chi = psi_integral_ln(1, jb as f64, 0.0, vb, 0.0, tau, &opts.quad)?;
        let term = (ln_cb + ln_sub(ln_s, ln_chi)).exp();
        sum += term;
        if jb > peak_b && term <= opts.series.rel_tol * sum.max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let f_tau = dist_b.cdf(tau / (beta1 * beta1));
    Ok(sum / LN_2 - tau.ln_1p() / LN_2 * (1.0 - f_tau))
}

/// Secrecy outage probability P(log2((1+gamma_B)/(1+gamma_E)) < r0) as the
/// nested series with the binomial-expanded incomplete-gamma terms.
pub fn sop(
    ftr_b: &FtrParams,
    ftr_e: &FtrParams,
    beta1: f64,
    gains: &EveGains,
    r0: f64,
    opts: &SecrecyOptions,
) -> Result<SecrecyResult> {
    if !(r0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target rate must be >= 0, got {r0}"
        )));
    }
    let ctx = SecrecyContext::new(ftr_b, ftr_e, beta1, gains, opts)?;
    let jb_count = ctx.dist_b.num_terms();
    let je_count = ctx.dist_e.num_terms();
    let ln_tau = ctx.tau.ln();
    let ln_vb = ctx.vb.ln();

    let pow_r0 = 2f64.powf(r0);
    let gap = pow_r0 - 1.0;
    // e^{-(2^{r0}-1) v_B} applied to every expanded term
    let ln_exp_factor = -gap * ctx.vb;

    // the double expansion sum_{n<=jb} sum_{k<=n} C(n,k) 2^{k r0}
    // gap^{n-k} v_B^n / n! Psi_k collapses, after swapping the order, to
    // sum_k Psi_k 2^{k r0} (v_B^k / k!) E_{jb-k} with the partial
    // exponential sums E_M = sum_{i<=M} (v_B gap)^i / i!, kept as logs
    let ln_x = if gap > 0.0 {
        (ctx.vb * gap).ln()
    } else {
        f64::NEG_INFINITY
    };
    let mut ln_partial_exp = Vec::with_capacity(jb_count + 1);
    let mut acc = 0.0f64; // ln E_0 = ln 1
    ln_partial_exp.push(acc);
    for i in 1..=jb_count {
        if ln_x == f64::NEG_INFINITY {
            ln_partial_exp.push(acc);
            continue;
        }
        acc = ln_add(acc, i as f64 * ln_x - ctx.ln_fact[i]);
        ln_partial_exp.push(acc);
    }

    let mut memo = PsiMemo::new(0, pow_r0 * ctx.vb, ctx.ve, ctx.tau, &opts.quad);

    let peak_b = SecrecyContext::peak(&ctx.dist_b);
    let mut total = 0.0;
    let mut shell = 0.0;
    let mut quiet = 0;
    let mut inner_terms: Vec<f64> = Vec::new();
    for jb in 0..jb_count {
        let ln_ab = SecrecyContext::ln_weight(&ctx.dist_b, jb);
        if ln_ab == f64::NEG_INFINITY {
            continue;
        }
        let mut jb_shell = 0.0;
        for je in 0..je_count {
            let ln_ae = SecrecyContext::ln_weight(&ctx.dist_e, je);
            if ln_ae == f64::NEG_INFINITY {
                continue;
            }
            let ln_ce = ln_ae - ctx.ln_fact[je] - (je as f64 + 1.0) * ctx.ln_se;
            let ln_psi0 = memo.get_ln(je as u32, je as u32 + 2, false)?;
            inner_terms.clear();
            for k in 0..=jb {
                let ln_c = ln_exp_factor + k as f64 * (r0 * LN_2 + ln_vb)
                    - ctx.ln_fact[k]
                    + ln_partial_exp[jb - k];
                inner_terms
                    .push(ln_c + memo.get_ln((je + k) as u32, je as u32 + 2, true)?);
            }
            let ln_inner = ln_sum_exp(&inner_terms);
            let contrib = (ln_ab + ln_ce + ln_tau + ln_sub(ln_psi0, ln_inner)).exp();
            total += contrib;
            jb_shell += contrib;
        }
        shell = jb_shell.abs();
        if jb > peak_b && shell <= ctx.rel_tol * total.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }

    let bound = shell + ctx.dist_b.truncation_bound() + ctx.dist_e.truncation_bound();
    if !total.is_finite() || !(-1e-6..=1.0 + 1e-6).contains(&total) {
        return Err(Error::NumericalFailure(format!(
            "SOP series value {total} outside [0, 1]"
        )));
    }
    Ok(SecrecyResult {
        value: total.clamp(0.0, 1.0),
        i1: 0.0,
        i2: 0.0,
        i3: 0.0,
        truncation_error_bound: bound,
    })
}

/// SOP upper bound F_gamma_B(2^{r0} (1 + tau) - 1), reached as Eve's average
/// SNR grows without limit.
pub fn sop_upper_bound(
    ftr_b: &FtrParams,
    beta1: f64,
    tau: f64,
    r0: f64,
    opts: &SecrecyOptions,
) -> Result<f64> {
    check_beta1(beta1)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tau must be finite and > 0, got {tau}"
        )));
    }
    if !(r0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target rate must be >= 0, got {r0}"
        )));
    }
    let dist_b = FtrDistribution::new(ftr_b, &opts.series)?;
    let threshold = 2f64.powf(r0) * (1.0 + tau) - 1.0;
    Ok(dist_b.cdf(threshold / (beta1 * beta1)))
}
