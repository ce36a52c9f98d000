//! Associated Legendre function of the first kind on the real axis z >= 1,
//! real degree, non-positive integer order.
//!
//! The hypergeometric representation
//!
//!   P_nu^{-q}(z) = [(z-1)/(z+1)]^{q/2} F(-nu, nu+1; 1+q; (1-z)/2) / Gamma(1+q)
//!
//! is evaluated after a Pfaff transformation to the argument
//! w = (z-1)/(z+1) in [0, 1):
//!
//!   P_nu^{-q}(z) = w^{q/2} ((1+z)/2)^{-(nu+1)}
//!                  F(nu+1+q, nu+1; 1+q; w) / Gamma(1+q)
//!
//! where every series term is positive, so the sum has no cancellation and
//! the function value is returned as a logarithm. Positive orders are
//! handled by the caller through the integer-order reflection
//! Gamma(nu-mu+1) P_nu^mu = Gamma(nu+mu+1) P_nu^{-mu}.

use crate::error::{Error, Result};
use crate::special::gamma::ln_gamma;

const MAX_TERMS: usize = 20_000;

/// ln P_nu^{-q}(z) for z >= 1, q >= 0. Returns -inf at z = 1 with q > 0.
pub fn ln_legendre_p_neg_order(nu: f64, q: u32, z: f64) -> Result<f64> {
    if !(z >= 1.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Legendre argument must satisfy z >= 1, got {z}"
        )));
    }
    if nu <= -1.0 {
        return Err(Error::InvalidArgument(format!(
            "degree must exceed -1, got {nu}"
        )));
    }
    if z == 1.0 {
        // P_nu^0(1) = 1, P_nu^{-q}(1) = 0 for q > 0
        return Ok(if q == 0 { 0.0 } else { f64::NEG_INFINITY });
    }

    let w = (z - 1.0) / (z + 1.0);
    let qf = q as f64;

    // F(nu+1+q, nu+1; 1+q; w), all terms positive
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut converged = false;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (nu + 1.0 + qf + nf) * (nu + 1.0 + nf) / ((1.0 + qf + nf) * (1.0 + nf)) * w;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "hypergeometric sum overflow at nu={nu}, q={q}, z={z}"
            )));
        }
        if term < f64::EPSILON * sum {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "hypergeometric series stalled at nu={nu}, q={q}, z={z}"
        )));
    }

    Ok(0.5 * qf * w.ln() - (nu + 1.0) * (0.5 * (1.0 + z)).ln() - ln_gamma(1.0 + qf) + sum.ln())
}
