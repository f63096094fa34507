//! Continued fractions and Diophantine-exponent estimation.
//!
//! The exponent estimator works on convergent denominators only (they
//! realize the worst cases of `||q x||`) and normalizes by the Hurwitz
//! constant `sqrt(5)`, so that badly approximable numbers report an exponent
//! near 1 already at desk-scale `q`.

use crate::error::{Error, Result};
use crate::lattice::ScalingExponents;

/// Why a continued-fraction expansion stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStop {
    /// Requested depth reached.
    Depth,
    /// A partial quotient exceeded `2^60`; the input is treated as rational.
    RationalDetected,
    /// Expanding further would read digits below the input's precision.
    PrecisionExhausted,
}

#[derive(Debug, Clone)]
pub struct ContinuedFraction {
    pub x: f64,
    pub quotients: Vec<i64>,
    /// Convergents `(p_i, q_i)`, aligned with `quotients`.
    pub convergents: Vec<(i128, i128)>,
    pub stop: CfStop,
}

impl ContinuedFraction {
    pub fn is_rational(&self) -> bool {
        self.stop == CfStop::RationalDetected
    }
}

const QUOTIENT_LIMIT: i64 = 1 << 60;

/// Partial quotients of `x` by the Gauss map, with convergents.
///
/// Stops early once a quotient exceeds `2^60` (rational input) or once the
/// convergent denominators outgrow the input's float precision.
pub fn continued_fraction(x: f64, depth: usize) -> Result<ContinuedFraction> {
    if depth < 1 {
        return Err(Error::invalid("continued_fraction requires depth >= 1"));
    }
    if !x.is_finite() {
        return Err(Error::invalid("continued_fraction requires finite x"));
    }
    // q beyond this bound would resolve digits the f64 input does not carry
    let precision_q = (0.5 / (x.abs().max(1.0) * f64::EPSILON)).sqrt() as i128;

    let mut quotients = Vec::new();
    let mut convergents: Vec<(i128, i128)> = Vec::new();
    let (mut p_prev, mut p_prev2) = (1i128, 0i128);
    let (mut q_prev, mut q_prev2) = (0i128, 1i128);
    let mut y = x;
    let mut stop = CfStop::Depth;
    for step in 0..depth {
        // a tail within relative rounding noise of an integer terminates the
        // expansion (e.g. small rationals like 3/7 stored as f64)
        let near = y.round();
        let is_terminal = (y - near).abs() <= y.abs().max(1.0) * 1e-12;
        let a_f = if is_terminal { near } else { y.floor() };
        if a_f.abs() >= QUOTIENT_LIMIT as f64 {
            stop = CfStop::RationalDetected;
            break;
        }
        let a = a_f as i64;
        let p = a as i128 * p_prev + p_prev2;
        let q = a as i128 * q_prev + q_prev2;
        quotients.push(a);
        convergents.push((p, q));
        p_prev2 = p_prev;
        p_prev = p;
        q_prev2 = q_prev;
        q_prev = q;
        let frac = y - a_f;
        if is_terminal || frac == 0.0 {
            stop = CfStop::RationalDetected;
            break;
        }
        if step + 1 < depth && q_prev > precision_q {
            stop = CfStop::PrecisionExhausted;
            break;
        }
        y = 1.0 / frac;
    }
    Ok(ContinuedFraction { x, quotients, convergents, stop })
}

/// Distance from `v` to the nearest integer.
pub fn dist_to_int(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Estimate of the Diophantine exponent of `x` from convergents up to
/// `q <= qmax`:
///
/// `nu_hat = max over convergent q in [2, qmax] of
///     log(1 / (sqrt(5) ||q x||)) / log q`.
///
/// The Hurwitz factor `sqrt(5)` removes the constant-level offset that
/// otherwise dominates at small `q`; with it the golden ratio reports
/// `nu_hat ~ 1.02` at `qmax = 10^6`. Rational inputs report `f64::INFINITY`.
pub fn diophantine_exponent_estimate(x: f64, qmax: u64) -> Result<f64> {
    if qmax < 10 {
        return Err(Error::invalid("diophantine_exponent_estimate requires qmax >= 10"));
    }
    let cf = continued_fraction(x, 128)?;
    if cf.is_rational() {
        return Ok(f64::INFINITY);
    }
    let sqrt5 = 5f64.sqrt();
    let mut best = f64::NEG_INFINITY;
    for &(_, q) in &cf.convergents {
        if q < 2 || q as u128 > qmax as u128 {
            continue;
        }
        let qf = q as f64;
        let d = dist_to_int(qf * x);
        if d <= qf * x.abs().max(1.0) * f64::EPSILON * 4.0 {
            // ||q x|| at the noise floor: rational for all practical purposes
            return Ok(f64::INFINITY);
        }
        let nu = (1.0 / (sqrt5 * d)).ln() / qf.ln();
        if nu > best {
            best = nu;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::NumericalFailure("no convergent denominators in [2, qmax]".into()))
    }
}

/// Exact count of `n` in `[-N, N] \ {0}` with `||n x|| <= delta`, by direct
/// scan. `N` is capped at `10^7`.
pub fn count_small_denominators(x: f64, n: u64, delta: f64) -> Result<u64> {
    if n < 1 {
        return Err(Error::invalid("count_small_denominators requires N >= 1"));
    }
    if n > 10_000_000 {
        return Err(Error::ResourceExceeded {
            msg: format!("count_small_denominators scan capped at 10^7, got {n}"),
            best: None,
        });
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::invalid("count_small_denominators requires delta in (0, 1/2]"));
    }
    let mut count = 0u64;
    for m in 1..=n {
        if dist_to_int(m as f64 * x) <= delta {
            count += 1;
        }
    }
    // ||(-n) x|| = ||n x||
    Ok(2 * count)
}

/// Critical standard Diophantine exponent attached to the first scaling
/// exponent: `nu_crit = 1 / rho_1`.
pub fn nu_rho_dictionary(k: usize, rho_1: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("nu_rho_dictionary requires k >= 2"));
    }
    if rho_1 <= 0.0 {
        return Err(Error::invalid("nu_rho_dictionary requires rho_1 > 0"));
    }
    Ok(1.0 / rho_1)
}

/// Exponents of the pigeonhole construction transferring a failure of the
/// standard Diophantine condition into a decay of the lattice injectivity
/// radius.
#[derive(Debug, Clone)]
pub struct JarnikExponents {
    /// Total auxiliary exponent `b = b_2 + ... + b_k`.
    pub b: f64,
    /// Per-coordinate exponents `b_2..b_k`.
    pub b_i: Vec<f64>,
    /// The common exponent `(1 + b) rho_1 + b - nu = (1 - nu rho_1) /
    /// (k rho_1 + k - 1)`; negative exactly when `nu rho_1 > 1`.
    pub common_exponent: f64,
}

/// Closed-form exponents `b`, `b_i` and the common exponent for given
/// scaling exponents and a standard Diophantine exponent `nu`.
///
/// The `b_i` depend on every `rho_i`, so the full vector is required.
pub fn jarnik_exponents(rho: &ScalingExponents, nu: f64) -> Result<JarnikExponents> {
    let k = rho.k() as f64;
    let rho_1 = rho.rho()[0];
    if rho_1 <= 0.0 {
        return Err(Error::invalid("jarnik_exponents requires rho_1 > 0"));
    }
    if nu < 1.0 {
        return Err(Error::invalid("jarnik_exponents requires nu >= 1"));
    }
    let denom = k * rho_1 + k - 1.0;
    let b = ((k - 1.0) * nu - k * rho_1 + 1.0) / denom;
    let b_i: Vec<f64> = rho.rho()[1..]
        .iter()
        .map(|&rho_i| (nu * rho_1 + ((k - 1.0) * nu + k) * rho_i - 1.0) / denom)
        .collect();
    let common_exponent = (1.0 - nu * rho_1) / denom;
    if nu * rho_1 > 1.0 {
        if let Some(bad) = b_i.iter().find(|v| **v <= 0.0) {
            return Err(Error::NumericalFailure(format!(
                "jarnik_exponents: b_i = {bad} not positive although nu rho_1 > 1"
            )));
        }
    }
    Ok(JarnikExponents { b, b_i, common_exponent })
}
