//! Skew-shift dynamics on the toral section and Weyl sums.
//!
//! The section return map of the filiform nilflow with frequencies
//! `alpha = (alpha_1..alpha_k)` is the affine unipotent map
//!
//! `Phi(s) = (s_1 + alpha_1, s_2 + s_1 + alpha_2, ..., s_k + s_{k-1} + alpha_k)  (mod 1)`
//!
//! whose `N`-th iterate has the binomial closed form, per coordinate `m`,
//!
//! `Phi^N(s)_m = s_m + sum_{i=1}^{m-1} binom(N,i) (s_{m-i} + alpha_{m-i+1}) + binom(N,m) alpha_1`.
//!
//! (`binom(N, i) = 0` for `i > N`, which settles the summation range for
//! small `N`; the iteration oracle in the tests pins this down.) Weyl sums
//! are ergodic sums of `e(l s_k)` along the orbit.
//!
//! Two arithmetic modes:
//!
//! - `Fixed64`: circle coordinates are 64-bit fractions of a turn;
//!   wrap-around addition is exact, so orbits and closed forms agree
//!   bit-for-bit for the once-rounded frequencies.
//! - `Float64`: `f64` coordinates; orbit state is carried in compensated
//!   double-double form so that trajectory drift stays near the closed form
//!   (naive iteration drifts like `binom(N, k-1) * ulp`). The accumulated
//!   sum obeys `|dW| <= C N ulp`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arithmetic backend for orbits and sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticMode {
    Float64,
    Fixed64,
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance on the circle `R/Z`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// `e(s) = exp(2 pi i s)`.
pub fn e(phase_mod1: f64) -> Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * phase_mod1).sin_cos();
    Complex64::new(c, s)
}

// ---------------------------------------------------------------- fixed64

/// Round a circle coordinate once into a 64-bit fraction of a turn.
pub fn to_fixed(x: f64) -> u64 {
    let f = frac(x) * 18446744073709551616.0; // 2^64
    (f.round() as u128) as u64
}

/// The `f64` value of a 64-bit fraction.
pub fn from_fixed(u: u64) -> f64 {
    u as f64 / 18446744073709551616.0
}

use crate::twofloat::Dd;

// ---------------------------------------------------------------- system

/// Skew-shift system on `T^k` with frequency vector `alpha`.
#[derive(Debug, Clone)]
pub struct SkewShiftSystem {
    /// Frequencies as supplied, before reduction mod 1.
    alpha_raw: Vec<f64>,
    /// Frequencies reduced into `[0, 1)`.
    alpha: Vec<f64>,
    /// Frequencies rounded once into 64-bit fractions.
    alpha_fixed: Vec<u64>,
    mode: ArithmeticMode,
}

impl SkewShiftSystem {
    pub fn new(alpha: Vec<f64>, mode: ArithmeticMode) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid("skew-shift system needs at least one frequency"));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("frequencies must be finite"));
        }
        let reduced: Vec<f64> = alpha.iter().map(|&a| frac(a)).collect();
        let fixed: Vec<u64> = reduced.iter().map(|&a| to_fixed(a)).collect();
        Ok(SkewShiftSystem { alpha_raw: alpha, alpha: reduced, alpha_fixed: fixed, mode })
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn mode(&self) -> ArithmeticMode {
        self.mode
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_raw(&self) -> &[f64] {
        &self.alpha_raw
    }

    pub fn alpha_fixed(&self) -> &[u64] {
        &self.alpha_fixed
    }

    fn check_point(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.k() {
            return Err(Error::invalid(format!(
                "point dimension {} does not match k = {}",
                s.len(),
                self.k()
            )));
        }
        Ok(())
    }

    /// One application of the return map (plain `f64`).
    pub fn step(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_point(s)?;
        let k = self.k();
        let mut out = s.to_vec();
        for i in (1..k).rev() {
            out[i] = frac(out[i] + out[i - 1] + self.alpha[i]);
        }
        out[0] = frac(out[0] + self.alpha[0]);
        Ok(out)
    }

    /// Inverse of [`step`](Self::step); `step` then `step_inverse` is the
    /// identity within mode precision.
    pub fn step_inverse(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_point(s)?;
        let k = self.k();
        let mut out = s.to_vec();
        out[0] = frac(out[0] - self.alpha[0]);
        for i in 1..k {
            out[i] = frac(out[i] - out[i - 1] - self.alpha[i]);
        }
        Ok(out)
    }

    /// Orbit iterator starting at `s`, carried in the system's arithmetic
    /// mode.
    pub fn orbit(&self, s: &[f64]) -> Result<Orbit> {
        self.check_point(s)?;
        let engine = match self.mode {
            ArithmeticMode::Float64 => OrbitEngine::Float {
                s: s.iter().map(|&x| Dd::new(frac(x))).collect(),
                alpha: self.alpha.clone(),
            },
            ArithmeticMode::Fixed64 => OrbitEngine::Fixed {
                s: s.iter().map(|&x| to_fixed(x)).collect(),
                alpha: self.alpha_fixed.clone(),
            },
        };
        Ok(Orbit { engine })
    }

    /// `Phi^N(s)` by the binomial closed form.
    pub fn iterate_closed_form(&self, s: &[f64], n: u64) -> Result<Vec<f64>> {
        self.check_point(s)?;
        match self.mode {
            ArithmeticMode::Float64 => {
                let s: Vec<f64> = s.iter().map(|&x| frac(x)).collect();
                Ok(closed_form_float(&self.alpha, &s, n))
            }
            ArithmeticMode::Fixed64 => {
                let sf: Vec<u64> = s.iter().map(|&x| to_fixed(x)).collect();
                Ok(closed_form_fixed(&self.alpha_fixed, &sf, n).iter().map(|&u| from_fixed(u)).collect())
            }
        }
    }

    /// Exact closed form over 64-bit fractions (fixed64 semantics regardless
    /// of the system mode).
    pub fn iterate_closed_form_fixed(&self, s_fixed: &[u64], n: u64) -> Result<Vec<u64>> {
        if s_fixed.len() != self.k() {
            return Err(Error::invalid("point dimension mismatch"));
        }
        Ok(closed_form_fixed(&self.alpha_fixed, s_fixed, n))
    }

    /// The degree-`k` polynomial `P(X) = binom(X,k) alpha_1 +
    /// sum_{i=1}^{k-1} binom(X,i) (s_{k-i} + alpha_{k-i+1}) + s_k` whose
    /// values mod 1 are the last section coordinate along the orbit of `s`.
    pub fn section_polynomial(&self, s: &[f64]) -> Result<SectionPolynomial> {
        self.check_point(s)?;
        let k = self.k();
        let mut c = vec![0.0; k + 1];
        c[k] = self.alpha[0];
        c[0] = frac(s[k - 1]);
        for i in 1..k {
            // c_i = s_{k-i} + alpha_{k-i+1}, 1-based
            c[i] = frac(s[k - i - 1] + self.alpha[k - i]);
        }
        Ok(SectionPolynomial {
            k,
            coeffs: c.clone(),
            coeffs_fixed: c.iter().map(|&x| to_fixed(x)).collect(),
            mode: self.mode,
            alpha1_raw: self.alpha_raw[0],
        })
    }

    /// Weyl sum `sum_{n<N} e(l s_k(n))` along the skew-shift orbit.
    pub fn weyl_sum_skew(&self, s: &[f64], ell: i64, n: u64) -> Result<WeylSumResult> {
        let mut acc = WeylAccumulator::new(self, s, ell)?;
        acc.advance_to(n);
        Ok(acc.result())
    }

    /// Ergodic sum of a finite Fourier observable
    /// `f(s) = sum_m coeff_m e(m . s)` along the orbit.
    pub fn ergodic_sum(
        &self,
        s: &[f64],
        observable: &[(Vec<i64>, Complex64)],
        n: u64,
    ) -> Result<Complex64> {
        self.check_point(s)?;
        for (m, _) in observable {
            if m.len() != self.k() {
                return Err(Error::invalid("observable frequency dimension mismatch"));
            }
        }
        let mut orbit = self.orbit(s)?;
        let mut sum = Complex64::zero();
        for _ in 0..n {
            let point = orbit.current();
            for (m, coeff) in observable {
                let mut phase = 0.0;
                for (mi, si) in m.iter().zip(&point) {
                    phase = frac(phase + frac(*mi as f64 * si));
                }
                sum += coeff * e(phase);
            }
            orbit.advance(1);
        }
        Ok(sum)
    }
}

// ---------------------------------------------------------------- orbits

enum OrbitEngine {
    Float { s: Vec<Dd>, alpha: Vec<f64> },
    Fixed { s: Vec<u64>, alpha: Vec<u64> },
}

impl OrbitEngine {
    #[inline]
    fn step(&mut self) {
        match self {
            OrbitEngine::Float { s, alpha } => {
                let k = s.len();
                for i in (1..k).rev() {
                    s[i] = s[i].add(s[i - 1]).add_f64(alpha[i]).mod1();
                }
                s[0] = s[0].add_f64(alpha[0]).mod1();
            }
            OrbitEngine::Fixed { s, alpha } => {
                let k = s.len();
                for i in (1..k).rev() {
                    s[i] = s[i].wrapping_add(s[i - 1]).wrapping_add(alpha[i]);
                }
                s[0] = s[0].wrapping_add(alpha[0]);
            }
        }
    }

    #[inline]
    fn last_phase(&self, ell: i64) -> f64 {
        match self {
            OrbitEngine::Float { s, .. } => {
                let last = s[s.len() - 1];
                frac((ell as f64 * last.hi).rem_euclid(1.0) + ell as f64 * last.lo)
            }
            OrbitEngine::Fixed { s, .. } => {
                from_fixed((ell as u64).wrapping_mul(s[s.len() - 1]))
            }
        }
    }
}

/// Orbit of the skew shift; `current` reads the point, `advance` steps it.
pub struct Orbit {
    engine: OrbitEngine,
}

impl Orbit {
    pub fn advance(&mut self, steps: u64) {
        for _ in 0..steps {
            self.engine.step();
        }
    }

    pub fn current(&self) -> Vec<f64> {
        match &self.engine {
            OrbitEngine::Float { s, .. } => s.iter().map(|d| frac(d.value())).collect(),
            OrbitEngine::Fixed { s, .. } => s.iter().map(|&u| from_fixed(u)).collect(),
        }
    }

    /// Raw 64-bit state, only in fixed64 mode.
    pub fn current_fixed(&self) -> Option<&[u64]> {
        match &self.engine {
            OrbitEngine::Fixed { s, .. } => Some(s),
            OrbitEngine::Float { .. } => None,
        }
    }
}

// ------------------------------------------------------- closed forms

/// `binom(n, i)` as an exact big integer.
pub fn binom_big(n: u64, i: u64) -> BigUint {
    if i > n {
        return BigUint::zero();
    }
    let i = i.min(n - i);
    let mut b = BigUint::one();
    for j in 0..i {
        b = b * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    b
}

fn integer_decode(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = if exponent == 0 {
        bits & 0x000f_ffff_ffff_ffff
    } else {
        (bits & 0x000f_ffff_ffff_ffff) | (1 << 52)
    };
    (mantissa, exponent.max(1) - 1075)
}

/// `(c * m) mod 1` for nonnegative finite `c`, exact up to the final
/// rounding: the product is formed over the integers on the exact binary
/// mantissa of `c`, and only the low bits survive the reduction.
pub fn frac_mul_big(c: f64, m: &BigUint) -> f64 {
    if c == 0.0 || m.is_zero() {
        return 0.0;
    }
    debug_assert!(c > 0.0 && c.is_finite());
    let (mant, exp) = integer_decode(c);
    if exp >= 0 {
        // c is an integer, so c * m is too
        return 0.0;
    }
    let shift = (-exp) as u64;
    let prod = m * BigUint::from(mant);
    let rem = prod % (BigUint::one() << shift);
    let r = rem.to_f64().unwrap_or(0.0) * 2f64.powi(exp);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn closed_form_float(alpha: &[f64], s: &[f64], n: u64) -> Vec<f64> {
    let k = alpha.len();
    let binoms: Vec<BigUint> = (0..=k as u64).map(|i| binom_big(n, i)).collect();
    let mut out = vec![0.0; k];
    for m0 in 0..k {
        let mut acc = s[m0];
        for i in 1..=m0 {
            // binom (s + alpha) reduced factor by factor: rounding the sum
            // first would be amplified by the binomial
            acc = frac(acc + frac_mul_big(s[m0 - i], &binoms[i]));
            acc = frac(acc + frac_mul_big(alpha[m0 + 1 - i], &binoms[i]));
        }
        acc = frac(acc + frac_mul_big(alpha[0], &binoms[m0 + 1]));
        out[m0] = acc;
    }
    out
}

fn closed_form_fixed(alpha: &[u64], s: &[u64], n: u64) -> Vec<u64> {
    let k = alpha.len();
    let mask = BigUint::from(u64::MAX);
    let binoms: Vec<u64> = (0..=k as u64)
        .map(|i| (binom_big(n, i) & mask.clone()).to_u64().unwrap_or(0))
        .collect();
    let mut out = vec![0u64; k];
    for m0 in 0..k {
        let mut acc = s[m0];
        for i in 1..=m0 {
            let c = s[m0 - i].wrapping_add(alpha[m0 + 1 - i]);
            acc = acc.wrapping_add(binoms[i].wrapping_mul(c));
        }
        acc = acc.wrapping_add(binoms[m0 + 1].wrapping_mul(alpha[0]));
        out[m0] = acc;
    }
    out
}

// ----------------------------------------------------- section polynomial

/// The orbit polynomial in the binomial basis: coefficients `c_0..c_k`
/// taken mod 1, with `P(n) = sum_i c_i binom(n, i) (mod 1)`.
#[derive(Debug, Clone)]
pub struct SectionPolynomial {
    k: usize,
    coeffs: Vec<f64>,
    coeffs_fixed: Vec<u64>,
    mode: ArithmeticMode,
    alpha1_raw: f64,
}

impl SectionPolynomial {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Binomial-basis coefficients `c_0..c_k`, each in `[0, 1)`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `P(n) mod 1` in the polynomial's arithmetic mode.
    pub fn eval(&self, n: u64) -> f64 {
        match self.mode {
            ArithmeticMode::Float64 => {
                let mut acc = self.coeffs[0];
                for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
                    acc = frac(acc + frac_mul_big(c, &binom_big(n, i as u64)));
                }
                acc
            }
            ArithmeticMode::Fixed64 => {
                let mask = BigUint::from(u64::MAX);
                let mut acc = self.coeffs_fixed[0];
                for (i, &c) in self.coeffs_fixed.iter().enumerate().skip(1) {
                    let b = (binom_big(n, i as u64) & mask.clone()).to_u64().unwrap_or(0);
                    acc = acc.wrapping_add(b.wrapping_mul(c));
                }
                from_fixed(acc)
            }
        }
    }

    /// Coefficient of `X^k` in the monomial expansion: `alpha_1 / k!`.
    pub fn leading_monomial_coeff(&self) -> f64 {
        let mut fact = 1.0;
        for j in 2..=self.k {
            fact *= j as f64;
        }
        self.alpha1_raw / fact
    }
}

/// Binomial-basis coefficients `c_i = delta^i P(0)` of the monomial
/// polynomial `P(X) = a_1 X^k + ... + a_k X` (descending-degree
/// coefficients, no constant term), by finite differences. Not reduced
/// mod 1.
pub fn monomial_to_binomial(a: &[f64]) -> Result<Vec<f64>> {
    let k = a.len();
    if k < 1 {
        return Err(Error::invalid("need at least one monomial coefficient"));
    }
    let eval = |x: f64| -> f64 {
        let mut acc = 0.0;
        for &ai in a {
            acc = acc * x + ai;
        }
        acc * x // no constant term
    };
    let mut diffs: Vec<f64> = (0..=k).map(|n| eval(n as f64)).collect();
    let mut c = vec![0.0; k + 1];
    c[0] = diffs[0];
    for i in 1..=k {
        for j in (i..=k).rev() {
            diffs[j] -= diffs[j - 1];
        }
        c[i] = diffs[i];
    }
    Ok(c)
}

/// Converts a monomial polynomial into canonical section data, reducing the
/// binomial coefficients mod 1: `alpha = (c_k, 0, ..., 0)`,
/// `s_{k-i} = c_i` for `1 <= i <= k-1`, `s_k = c_0`.
pub fn monomial_to_section(a: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = a.len();
    let c = monomial_to_binomial(a)?;
    let mut alpha = vec![0.0; k];
    alpha[0] = frac(c[k]);
    let mut s = vec![0.0; k];
    s[k - 1] = frac(c[0]);
    for i in 1..k {
        s[k - i - 1] = frac(c[i]);
    }
    Ok((alpha, s))
}

// ------------------------------------------------------------- Weyl sums

/// A Weyl sum value together with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct WeylSumResult {
    pub n_terms: u64,
    pub ell: i64,
    pub value: Complex64,
    pub mode: ArithmeticMode,
}

impl WeylSumResult {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

/// Direct per-term Weyl sum `sum_{n=0}^{N-1} e(l P(n))` for a monomial
/// polynomial `P(X) = a_1 X^k + ... + a_k X`. Each phase `l a_i n^j` is
/// reduced mod 1 in exact integer arithmetic before the exponential; this is
/// the reference evaluator the skew-shift route is checked against.
pub fn weyl_sum_direct(a: &[f64], ell: i64, n: u64) -> Result<WeylSumResult> {
    if ell == 0 {
        return Err(Error::invalid("weyl sum multiplier ell must be nonzero"));
    }
    if a.is_empty() {
        return Err(Error::invalid("polynomial needs at least one coefficient"));
    }
    let k = a.len();
    let ell_abs = BigUint::from(ell.unsigned_abs());
    let mut sum = KahanComplex::new();
    for m in 0..n {
        let mut phase = 0.0;
        let mut pow = BigUint::one(); // m^j, ascending in j
        for j in 1..=k {
            pow *= BigUint::from(m);
            let coeff = a[k - j]; // coefficient of X^j
            if coeff == 0.0 || pow.is_zero() {
                continue;
            }
            let mut term = frac_mul_big(coeff.abs(), &(&pow * &ell_abs));
            if (coeff < 0.0) != (ell < 0) && term != 0.0 {
                term = 1.0 - term;
            }
            phase = frac(phase + term);
        }
        sum.add(e(phase));
    }
    Ok(WeylSumResult { n_terms: n, ell, value: sum.value(), mode: ArithmeticMode::Float64 })
}

/// Kahan-compensated complex accumulator.
struct KahanComplex {
    sum: Complex64,
    c: Complex64,
}

impl KahanComplex {
    fn new() -> Self {
        KahanComplex { sum: Complex64::zero(), c: Complex64::zero() }
    }

    #[inline]
    fn add(&mut self, x: Complex64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Incremental Weyl-sum state: one pass over the orbit, extendable to
/// larger `N` without recomputation.
pub struct WeylAccumulator {
    engine: OrbitEngine,
    ell: i64,
    n: u64,
    sum: KahanComplex,
    mode: ArithmeticMode,
}

impl WeylAccumulator {
    pub fn new(sys: &SkewShiftSystem, s: &[f64], ell: i64) -> Result<Self> {
        if ell == 0 {
            return Err(Error::invalid("weyl sum multiplier ell must be nonzero"));
        }
        let orbit = sys.orbit(s)?;
        Ok(WeylAccumulator {
            engine: orbit.engine,
            ell,
            n: 0,
            sum: KahanComplex::new(),
            mode: sys.mode(),
        })
    }

    /// Extends the sum to `n` terms; `n` must not decrease.
    pub fn advance_to(&mut self, n: u64) {
        while self.n < n {
            self.sum.add(e(self.engine.last_phase(self.ell)));
            self.engine.step();
            self.n += 1;
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn result(&self) -> WeylSumResult {
        WeylSumResult { n_terms: self.n, ell: self.ell, value: self.sum.value(), mode: self.mode }
    }
}
