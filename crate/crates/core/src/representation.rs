//! Irreducible representation models on `L^2(R)`.
//!
//! A linear form `lambda = (lambda_1..lambda_k)` on the Abelian ideal (with
//! `lambda_k != 0`) induces the model in which the ideal acts by
//! multiplication by the polynomials `P_i(x) = sum_j lambda_{i+j} x^j / j!`
//! and the flow generator by `d/dx`. The transverse Laplacian becomes
//! multiplication by `P(x) = sum_i P_i(x)^2`; the invariant-distribution
//! norm is `(int dx / (1+P)^sigma)^(1/2)` and the Green operator is the
//! antiderivative. Rescaling the basis by `e^{-rho_i t}` rescales each
//! component, which drives the exponential growth of the distribution norm.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{least_squares, ScalingExponents};
use crate::quadrature;

/// Linear form on the Abelian ideal in the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RepForm {
    k: usize,
    lambda: Vec<f64>,
}

impl RepForm {
    pub fn new(k: usize, lambda: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("representation forms need k >= 2"));
        }
        if lambda.len() != k {
            return Err(Error::invalid(format!(
                "lambda must have {} entries, got {}",
                k,
                lambda.len()
            )));
        }
        if lambda[k - 1] == 0.0 {
            // a vanishing top coefficient factors through a lower step;
            // construct the smaller-step form instead
            return Err(Error::invalid("lambda_k must be nonzero"));
        }
        Ok(RepForm { k, lambda })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn is_integral(&self) -> bool {
        self.lambda.iter().all(|l| l.fract() == 0.0)
    }
}

/// Polynomial in normalized coefficients: `P(x) = sum_j a_j x^j / j!`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPoly {
    a: Vec<f64>,
    monomial: Vec<f64>,
}

impl NormalizedPoly {
    pub fn new(a: Vec<f64>) -> Self {
        let mut fact = 1.0;
        let monomial = a
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if j > 0 {
                    fact *= j as f64;
                }
                c / fact
            })
            .collect();
        NormalizedPoly { a, monomial }
    }

    /// Coefficients of `x^j / j!`, ascending.
    pub fn normalized_coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn degree(&self) -> usize {
        self.a.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.monomial.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    fn scaled(&self, factor: f64) -> NormalizedPoly {
        NormalizedPoly::new(self.a.iter().map(|c| factor * c).collect())
    }
}

/// `P_i(x) = sum_{j=0}^{k-i} lambda_{i+j} x^j / j!`, the multiplication
/// polynomial of the `i`-th ideal generator, `1 <= i <= k`.
pub fn rep_poly(form: &RepForm, i: usize) -> Result<NormalizedPoly> {
    let k = form.k();
    if i < 1 || i > k {
        return Err(Error::invalid(format!("rep_poly index {i} out of range 1..={k}")));
    }
    Ok(NormalizedPoly::new(form.lambda()[i - 1..].to_vec()))
}

/// The Laplacian polynomial `sum_i (e^{-rho_i t} P_i(x))^2`, nonnegative of
/// degree `2(k-1)`.
#[derive(Debug, Clone)]
pub struct LaplacianPolynomial {
    k: usize,
    components: Vec<NormalizedPoly>,
}

impl LaplacianPolynomial {
    pub fn k(&self) -> usize {
        self.k
    }

    /// The scaled component polynomials `P_1..P_k`.
    pub fn components(&self) -> &[NormalizedPoly] {
        &self.components
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|p| {
                let v = p.eval(x);
                v * v
            })
            .sum()
    }

    pub fn degree(&self) -> usize {
        2 * (self.k - 1)
    }

    /// Leading monomial coefficient, `(lambda_k^{(t)}/(k-1)!)^2`.
    pub fn leading_coeff(&self) -> f64 {
        let d = self.k - 1;
        let mut fact = 1.0;
        for j in 2..=d {
            fact *= j as f64;
        }
        let top = self.components[0].normalized_coeffs()[d] / fact;
        top * top
    }
}

/// Builds the (optionally rescaled) Laplacian polynomial of a form.
pub fn laplacian_poly(
    form: &RepForm,
    t: f64,
    rho: Option<&ScalingExponents>,
) -> Result<LaplacianPolynomial> {
    let k = form.k();
    if t != 0.0 && rho.is_none() {
        return Err(Error::invalid("a nonzero scaling time requires scaling exponents"));
    }
    if let Some(r) = rho {
        if r.k() != k {
            return Err(Error::invalid("scaling exponents dimension mismatch"));
        }
    }
    let mut components = Vec::with_capacity(k);
    for i in 1..=k {
        let base = rep_poly(form, i)?;
        let factor = match rho {
            Some(r) => (-r.rho()[i - 1] * t).exp(),
            None => 1.0,
        };
        components.push(base.scaled(factor));
    }
    Ok(LaplacianPolynomial { k, components })
}

fn dist_norm_of_weight<P: Fn(f64) -> f64>(weight: P, sigma: f64) -> Result<f64> {
    let r = quadrature::integrate_real_line(
        move |x| (1.0 + weight(x)).powf(-sigma),
        1e-12,
        1e-10,
        quadrature::DEFAULT_MAX_SEGMENTS,
    )?;
    Ok(r.value.sqrt())
}

/// Transverse Sobolev norm of the invariant distribution at exponent
/// `-sigma`: `(int dx / (1 + P(x))^sigma)^(1/2)` for the (rescaled)
/// Laplacian polynomial `P`.
pub fn dist_norm(
    form: &RepForm,
    sigma: f64,
    t: f64,
    rho: Option<&ScalingExponents>,
) -> Result<f64> {
    let k = form.k();
    if sigma <= 1.0 / (2.0 * (k as f64 - 1.0)) {
        return Err(Error::invalid(format!(
            "dist_norm requires sigma > 1/(2(k-1)) = {}",
            1.0 / (2.0 * (k as f64 - 1.0))
        )));
    }
    let poly = laplacian_poly(form, t, rho)?;
    dist_norm_of_weight(move |x| poly.eval(x), sigma)
}

/// Raw-polynomial entry point for oracles: the weight is an arbitrary
/// nonnegative polynomial given by descending-degree monomial coefficients.
/// The integral `int (1+P)^{-sigma}` converges only for
/// `sigma > 1/deg P`, which is validated up front (the quadrature cannot be
/// trusted to detect power-type divergence on its own).
pub fn dist_norm_raw(monomial_desc: &[f64], sigma: f64) -> Result<f64> {
    let lead = monomial_desc
        .iter()
        .position(|c| *c != 0.0)
        .ok_or_else(|| Error::invalid("zero polynomial"))?;
    let degree = monomial_desc.len() - 1 - lead;
    if degree == 0 || sigma <= 1.0 / degree as f64 {
        return Err(Error::invalid(format!(
            "dist_norm_raw requires sigma > 1/deg = {}",
            if degree == 0 { f64::INFINITY } else { 1.0 / degree as f64 }
        )));
    }
    let coeffs = monomial_desc.to_vec();
    dist_norm_of_weight(
        move |x| coeffs.iter().fold(0.0, |acc, &c| acc * x + c),
        sigma,
    )
}

/// The size parameter of a square family `P = P_0^2 + ... + P_d^2`:
///
/// `||P|| = max( |a_dd|^{-1/d}, |a_ij / a_dd|^{1/(d-j)} )` over `0 <= i <= d`,
/// `0 <= j <= min(i, d-1)`, with `a_ij` the normalized coefficients.
pub fn p_norm(components: &[NormalizedPoly]) -> Result<f64> {
    let d = components.len().checked_sub(1).filter(|d| *d >= 1).ok_or_else(|| {
        Error::invalid("p_norm needs components P_0..P_d with d >= 1")
    })?;
    for (i, p) in components.iter().enumerate() {
        if p.normalized_coeffs().len() < i + 1 {
            return Err(Error::invalid(format!("component {i} must have degree {i}")));
        }
    }
    let a_dd = components[d].normalized_coeffs()[d];
    if a_dd == 0.0 {
        return Err(Error::invalid("leading normalized coefficient a_dd must be nonzero"));
    }
    let mut best = a_dd.abs().powf(-1.0 / d as f64);
    for (i, p) in components.iter().enumerate() {
        let coeffs = p.normalized_coeffs();
        for j in 0..=i.min(d - 1) {
            let a_ij = coeffs.get(j).copied().unwrap_or(0.0);
            if a_ij == 0.0 {
                continue;
            }
            let v = (a_ij / a_dd).abs().powf(1.0 / (d - j) as f64);
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// Laplacian components reindexed by degree: `p_norm` expects `P_0..P_d`
/// with `deg P_i = i`, which for a form is `rep_poly(k - i)`.
pub fn components_by_degree(poly: &LaplacianPolynomial) -> Vec<NormalizedPoly> {
    poly.components().iter().rev().cloned().collect()
}

/// The coefficients `(omega, upsilon)` controlling the norm bounds, for the
/// (rescaled) canonical basis:
///
/// `omega = max( |1/L|^{1/(k-1)}, |lambda^{(t)}_{k-i+j} / L|^{1/(k-1-j)} )`
/// over `0 <= i <= k-1`, `0 <= j <= min(i, k-2)`, with `lambda^{(t)}_m =
/// e^{-rho_m t} lambda_m` and `L = lambda^{(t)}_k`;
/// `upsilon = omega^{k-1} |L| >= 1`.
pub fn omega_upsilon(
    form: &RepForm,
    t: f64,
    rho: Option<&ScalingExponents>,
) -> Result<(f64, f64)> {
    let k = form.k();
    if t != 0.0 && rho.is_none() {
        return Err(Error::invalid("a nonzero scaling time requires scaling exponents"));
    }
    let scale = |m: usize| -> f64 {
        // lambda(ad^j Y_{m}) scales with the factor of Y_m
        match rho {
            Some(r) => (-r.rho()[m - 1] * t).exp(),
            None => 1.0,
        }
    };
    let top = scale(1) * form.lambda()[k - 1]; // lambda(ad^{k-1} Y_1(t)) = e^{-rho_1 t} lambda_k
    let mut omega = (1.0 / top.abs()).powf(1.0 / (k as f64 - 1.0));
    for i in 0..k {
        for j in 0..=i.min(k - 2) {
            // lambda(ad^j Y_{k-i}(t)) = e^{-rho_{k-i} t} lambda_{k-i+j}
            let num = scale(k - i) * form.lambda()[k - i + j - 1];
            if num == 0.0 {
                continue;
            }
            let v = (num / top).abs().powf(1.0 / (k - 1 - j) as f64);
            if v > omega {
                omega = v;
            }
        }
    }
    let upsilon = omega.powi(k as i32 - 1) * top.abs();
    Ok((omega, upsilon))
}

/// Fit of the distribution-norm growth rate along a scaling grid.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub t: Vec<f64>,
    pub norms: Vec<f64>,
    /// Least-squares slope of `log norm` against `t`.
    pub rate: f64,
}

/// Computes `dist_norm` over a `t` grid and fits the log-linear growth
/// rate. For a form supported on `lambda_k` alone and the optimal
/// exponents, the rate is exactly `rho_1 / (2(k-1))`.
pub fn scaling_check(
    form: &RepForm,
    sigma: f64,
    rho: &ScalingExponents,
    t_grid: &[f64],
) -> Result<ScalingFit> {
    if !rho.is_admissible() {
        return Err(Error::invalid("scaling exponents must be admissible"));
    }
    if t_grid.len() < 2 {
        return Err(Error::invalid("scaling grid needs at least two points"));
    }
    let mut norms = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        norms.push(dist_norm(form, sigma, t, Some(rho))?);
    }
    let logs: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let (rate, _) = least_squares(t_grid, &logs)?;
    Ok(ScalingFit { t: t_grid.to_vec(), norms, rate })
}

/// A function sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl SampledFunction {
    /// Samples `f` on `n+1` uniform points over `[-l, l]`.
    pub fn sample<F: Fn(f64) -> f64>(f: F, l: f64, n: usize) -> Result<Self> {
        if n < 2 || l <= 0.0 {
            return Err(Error::invalid("need l > 0 and at least 3 sample points"));
        }
        let dx = 2.0 * l / n as f64;
        let values = (0..=n).map(|i| f(-l + i as f64 * dx)).collect();
        Ok(SampledFunction { x0: -l, dx, values })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        let inner: f64 = self.values[1..self.values.len() - 1].iter().sum();
        self.dx * (inner + 0.5 * (self.values[0] + self.values[self.values.len() - 1]))
    }

    pub fn l2_norm(&self) -> f64 {
        let sq = SampledFunction {
            x0: self.x0,
            dx: self.dx,
            values: self.values.iter().map(|v| v * v).collect(),
        };
        sq.integral().sqrt()
    }
}

/// Green operator `u(x) = int_{-inf}^x f` by cumulative quadrature, defined
/// on the kernel of the invariant distribution. Inputs with
/// `|int f| > 1e-8 ||f||` are rejected with the obstruction value; for valid
/// inputs the left and right one-sided primitives agree within tolerance.
pub fn green_apply(f: &SampledFunction) -> Result<SampledFunction> {
    let total = f.integral();
    let norm = f.l2_norm();
    if total.abs() > 1e-8 * norm {
        return Err(Error::Obstruction { obstruction: total });
    }
    let n = f.values.len();
    let mut u = vec![0.0; n];
    for i in 1..n {
        u[i] = u[i - 1] + 0.5 * f.dx * (f.values[i - 1] + f.values[i]);
    }
    // right-sided primitive differs by the (near-zero) total mass
    let right_discrepancy = u[n - 1].abs();
    if right_discrepancy > 1e-6 * (1.0 + norm) {
        return Err(Error::NumericalFailure(format!(
            "one-sided primitives disagree by {right_discrepancy:e}"
        )));
    }
    Ok(SampledFunction { x0: f.x0, dx: f.dx, values: u })
}

/// Norm bound for the Green operator between Sobolev exponents `tau` and
/// `sigma`:
///
/// `( iint_{|y| >= |x|} (1+P(x))^tau / (1+P(y))^sigma dx dy )^(1/2)`,
///
/// multiplied by `e^{-t}` when evaluated for the rescaled generator. The
/// stated precondition is `sigma > tau + 1/(2(k-1))`; the double integral
/// actually converges for `sigma > tau + 1/(k-1)`, and the quadrature
/// reports a numerical failure in between.
pub fn green_norm_bound(
    form: &RepForm,
    sigma: f64,
    tau: f64,
    t: f64,
    rho: Option<&ScalingExponents>,
) -> Result<f64> {
    let k = form.k();
    if tau < 0.0 {
        return Err(Error::invalid("tau must be nonnegative"));
    }
    if sigma <= tau + 1.0 / (2.0 * (k as f64 - 1.0)) {
        return Err(Error::invalid(format!(
            "green_norm_bound requires sigma > tau + 1/(2(k-1)) = {}",
            tau + 1.0 / (2.0 * (k as f64 - 1.0))
        )));
    }
    let poly = laplacian_poly(form, t, rho)?;
    // the double integral only converges once sigma - tau clears 2/deg P
    check_green_convergence(2 * (k - 1), sigma, tau)?;
    let weight = move |x: f64| poly.eval(x);
    let value = green_bound_integral(&weight, sigma, tau)?;
    Ok(value.sqrt() * (-t).exp())
}

/// Raw-polynomial variant of the Green bound integrand, for oracles.
pub fn green_norm_bound_raw(monomial_desc: &[f64], sigma: f64, tau: f64) -> Result<f64> {
    let lead = monomial_desc
        .iter()
        .position(|c| *c != 0.0)
        .ok_or_else(|| Error::invalid("zero polynomial"))?;
    let degree = monomial_desc.len() - 1 - lead;
    check_green_convergence(degree, sigma, tau)?;
    let coeffs = monomial_desc.to_vec();
    let weight = move |x: f64| coeffs.iter().fold(0.0, |acc, &c| acc * x + c);
    green_bound_integral(&weight, sigma, tau).map(|v| v.sqrt())
}

fn check_green_convergence(degree: usize, sigma: f64, tau: f64) -> Result<()> {
    if degree == 0 || sigma - tau <= 2.0 / degree as f64 {
        return Err(Error::NumericalFailure(format!(
            "green bound integral diverges: needs sigma - tau > 2/deg = {}",
            if degree == 0 { f64::INFINITY } else { 2.0 / degree as f64 }
        )));
    }
    Ok(())
}

fn green_bound_integral<P: Fn(f64) -> f64>(weight: &P, sigma: f64, tau: f64) -> Result<f64> {
    // inner tail integral over {|y| >= u}
    let tail = |u: f64| -> Result<f64> {
        let pos = quadrature::integrate_tail(
            |y| (1.0 + weight(y)).powf(-sigma),
            u,
            1e-13,
            1e-9,
            1 << 14,
        )?;
        let neg = quadrature::integrate_tail(
            |y| (1.0 + weight(-y)).powf(-sigma),
            u,
            1e-13,
            1e-9,
            1 << 14,
        )?;
        Ok(pos.value + neg.value)
    };
    let outer = quadrature::integrate_real_line(
        |x| match tail(x.abs()) {
            Ok(v) => (1.0 + weight(x)).powf(tau) * v,
            Err(_) => f64::NAN,
        },
        1e-10,
        1e-7,
        1 << 10,
    )?;
    if !outer.value.is_finite() {
        return Err(Error::NumericalFailure("green bound inner integral failed".into()));
    }
    Ok(outer.value)
}

/// Canonical representative of a co-adjoint orbit: applies the integer
/// time shift of `lambda . Ad(e^{tX})` which lands `lambda_{k-1}` in
/// `[0, |lambda_k|)`. Exact rational arithmetic; input must be integral.
pub fn normalize_orbit_form(form: &RepForm) -> Result<RepForm> {
    if !form.is_integral() {
        return Err(Error::invalid("normalize_orbit_form requires an integral form"));
    }
    let k = form.k();
    let lam: Vec<i64> = form.lambda().iter().map(|l| *l as i64).collect();
    let top = lam[k - 1];
    let target = lam[k - 2].rem_euclid(top.abs());
    let t = (target - lam[k - 2]) / top;
    // lambda'_i = sum_j t^j / j! lambda_{i+j}
    let t_rat = BigRational::from_integer(BigInt::from(t));
    let mut out = vec![0.0; k];
    for i in 1..=k {
        let mut acc = BigRational::zero();
        let mut pow = BigRational::one();
        let mut fact = BigRational::one();
        for j in 0..=(k - i) {
            if j > 0 {
                pow *= &t_rat;
                fact *= BigRational::from_integer(BigInt::from(j as i64));
            }
            let term = &pow / &fact * BigRational::from_i64(lam[i + j - 1]).unwrap();
            acc += term;
        }
        out[i - 1] = acc.to_f64().ok_or_else(|| {
            Error::NumericalFailure("normalized coefficient out of f64 range".into())
        })?;
    }
    debug_assert_eq!(out[k - 1], top as f64);
    debug_assert!((0.0..top.abs() as f64).contains(&out[k - 2]));
    RepForm::new(k, out)
}

/// Multiplicity bracket `(1, |lambda_k|)` of the representation in the
/// quasi-regular decomposition.
pub fn multiplicity_bound(form: &RepForm) -> Result<(u64, u64)> {
    if !form.is_integral() {
        return Err(Error::invalid("multiplicity_bound requires an integral form"));
    }
    let top = form.lambda()[form.k() - 1].abs();
    Ok((1, top as u64))
}
