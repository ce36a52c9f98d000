//! Gamma-family helpers: log-gamma, the exponential integral E1, the upper
//! incomplete gamma at non-positive integer order, and the regularized lower
//! incomplete gamma at positive integer order.

use crate::error::{Error, Result};

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Gamma(x).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln of the binomial coefficient C(n, k). Evaluated with k and n-k in a
/// fixed order so that C(n, k) and C(n, n-k) are bit-identical.
pub fn ln_binom(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    let lo = k.min(n - k) as f64;
    let hi = (n - k).max(k) as f64;
    ln_gamma(n as f64 + 1.0) - ln_gamma(lo + 1.0) - ln_gamma(hi + 1.0)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral E1(x) = Gamma(0, x) for x > 0.
///
/// Power series below x = 1.6, modified-Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("E1 requires x > 0, got {x}")));
    }
    if x <= 1.6 {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < f64::EPSILON * sum.abs().max(1.0) {
                return Ok(-EULER_GAMMA - x.ln() + sum);
            }
        }
        Err(Error::NumericalFailure(format!("E1 series stalled at x = {x}")))
    } else {
        // E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
        let tiny = 1e-300;
        let mut f = x + 1.0;
        if f == 0.0 {
            f = tiny;
        }
        let mut c = f;
        let mut d = 0.0;
        for n in 1..300 {
            let an = -((n * n) as f64);
            let bn = x + (2 * n + 1) as f64;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            d = 1.0 / d;
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                return Ok((-x).exp() / f);
            }
        }
        Err(Error::NumericalFailure(format!(
            "E1 continued fraction stalled at x = {x}"
        )))
    }
}

/// Upper incomplete gamma Gamma(a, x) for a a non-positive integer and x > 0,
/// by downward recurrence Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a
/// starting from Gamma(0, x) = E1(x).
pub fn upper_gamma_nonpos_int(a: i64, x: f64) -> Result<f64> {
    if a > 0 {
        return Err(Error::InvalidArgument(format!(
            "upper_gamma_nonpos_int requires a <= 0, got {a}"
        )));
    }
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "upper incomplete gamma at non-positive order requires x > 0, got {x}"
        )));
    }
    let mut g = exp_integral_e1(x)?;
    let ln_x = x.ln();
    let mut order = 0i64;
    while order > a {
        // x^{order-1} e^{-x}, assembled in log space
        let pow = ((order - 1) as f64 * ln_x - x).exp();
        g = (g - pow) / (order - 1) as f64;
        order -= 1;
        if !g.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "Gamma({order}, {x}) overflowed during recurrence"
            )));
        }
    }
    Ok(g)
}

/// Regularized lower incomplete gamma P(j + 1, u) for integer j >= 0 and
/// u >= 0, via the Poisson-tail identity
/// P(j+1, u) = 1 - e^{-u} sum_{i=0}^{j} u^i / i!.
pub fn reg_lower_gamma_int(j: usize, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let ln_u = u.ln();
    let mut q = 0.0;
    for i in 0..=j {
        let ln_p = -u + i as f64 * ln_u - ln_gamma(i as f64 + 1.0);
        if ln_p > -745.0 {
            q += ln_p.exp();
        }
    }
    (1.0 - q).clamp(0.0, 1.0)
}
