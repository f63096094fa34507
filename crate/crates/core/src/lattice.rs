//! The renormalization diagonal flow on lattices.
//!
//! A scaling-exponent vector `rho` (nonnegative, summing to 1) drives the
//! one-parameter diagonal subgroup `diag(e^t, e^{-rho_1 t}, ...,
//! e^{-rho_k t})` of `SL(k+1, R)`. Applied to the lattice attached to a
//! frequency vector `alpha`, the flow's injectivity radius (half the
//! shortest nonzero vector) encodes the weighted Diophantine quality of
//! `alpha`. Shortest vectors are exact: LLL preprocessing followed by
//! Fincke-Pohst enumeration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::twofloat::Dd;

/// Scaling exponents `rho = (rho_1..rho_k)`, nonnegative with sum 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingExponents {
    rho: Vec<f64>,
}

impl ScalingExponents {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if rho.len() < 2 {
            return Err(Error::invalid("scaling exponents need k >= 2 entries"));
        }
        if rho.iter().any(|r| *r < 0.0 || !r.is_finite()) {
            return Err(Error::invalid("scaling exponents must be nonnegative"));
        }
        let sum: f64 = rho.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("scaling exponents must sum to 1, got {sum}")));
        }
        Ok(ScalingExponents { rho })
    }

    pub fn k(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Admissibility for the scaling estimates: `rho_1 > 0` and, for each
    /// `i` in `[0, k-1]`, either `(i/(k-1)) rho_1 <= rho_{k-i} <= rho_1` or
    /// `rho_1 <= rho_{k-i}`.
    pub fn is_admissible(&self) -> bool {
        let k = self.k();
        let rho_1 = self.rho[0];
        if rho_1 <= 0.0 {
            return false;
        }
        let tol = 1e-12;
        (0..k).all(|i| {
            let r = self.rho[k - i - 1]; // rho_{k-i}, 1-based
            let lower = i as f64 / (k as f64 - 1.0) * rho_1;
            (lower - tol <= r && r <= rho_1 + tol) || rho_1 <= r + tol
        })
    }
}

/// How a basis came to be; the unit-determinant invariant is only promised
/// for bases produced by the alpha-orbit construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    AlphaOrbit,
    User,
}

/// A full-rank lattice basis; `cols[i]` is the `i`-th generator.
///
/// Entries are carried in double-double precision internally: the
/// renormalization flow produces bases whose entries are of size `e^t`
/// while their short integer combinations are of size 1, a cancellation
/// plain `f64` columns cannot express once `t` is a few dozen.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    cols_dd: Vec<Vec<Dd>>,
    cols: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl LatticeBasis {
    pub fn new(cols: Vec<Vec<f64>>) -> Result<Self> {
        let dd = cols
            .iter()
            .map(|c| c.iter().map(|&x| Dd::new(x)).collect())
            .collect();
        Self::from_dd(dd, Provenance::User)
    }

    fn from_dd(cols_dd: Vec<Vec<Dd>>, provenance: Provenance) -> Result<Self> {
        let n = cols_dd.len();
        if n == 0 || cols_dd.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("lattice basis must be square and nonempty"));
        }
        if cols_dd.iter().flatten().any(|d| !d.value().is_finite()) {
            return Err(Error::invalid("lattice basis entries must be finite"));
        }
        let cols: Vec<Vec<f64>> =
            cols_dd.iter().map(|c| c.iter().map(|d| d.value()).collect()).collect();
        let b = LatticeBasis { cols_dd, cols, provenance };
        if b.det().abs() < 1e-300 {
            return Err(Error::invalid("lattice basis is singular"));
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Generator columns rounded to `f64`.
    pub fn cols(&self) -> &[Vec<f64>] {
        &self.cols
    }

    fn cols_dd(&self) -> &[Vec<Dd>] {
        &self.cols_dd
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn det(&self) -> f64 {
        det(&self.cols)
    }

    /// Lattice vector with integer coordinates `x` (full precision
    /// accumulation, rounded on output).
    pub fn vector(&self, x: &[i64]) -> Vec<f64> {
        let n = self.dim();
        let mut v = vec![Dd::new(0.0); n];
        for (c, &xi) in self.cols_dd.iter().zip(x) {
            if xi != 0 {
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi = vi.add(ci.mul_f64(xi as f64));
                }
            }
        }
        v.into_iter().map(|d| d.value()).collect()
    }
}

fn det(cols: &[Vec<f64>]) -> f64 {
    // column-major Gaussian elimination with partial pivoting
    let n = cols.len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
    let mut d = 1.0;
    for p in 0..n {
        let (piv, _) = (p..n)
            .map(|r| (r, m[r][p].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if m[piv][p] == 0.0 {
            return 0.0;
        }
        if piv != p {
            m.swap(piv, p);
            d = -d;
        }
        d *= m[p][p];
        for r in p + 1..n {
            let f = m[r][p] / m[p][p];
            for c in p..n {
                m[r][c] -= f * m[p][c];
            }
        }
    }
    d
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// The diagonal flow matrix `diag(e^t, e^{-rho_1 t}, ..., e^{-rho_k t})`.
pub fn diagonal_flow_matrix(rho: &ScalingExponents, t: f64) -> Vec<Vec<f64>> {
    let n = rho.k() + 1;
    let mut m = vec![vec![0.0; n]; n];
    m[0][0] = t.exp();
    for (i, r) in rho.rho().iter().enumerate() {
        m[i + 1][i + 1] = (-r * t).exp();
    }
    m
}

/// Basis of the time-`t` image of the `alpha` lattice under the diagonal
/// flow. Generator columns, for `(n_0, ..., n_k)` the unit integer vectors:
///
/// - `n_0 = 1`: `(e^{-t}, alpha_1 (e^{rho_1 t} - e^{-t}), ...,
///    alpha_k (e^{rho_k t} - e^{-t}))`
/// - `n_i = 1`: `e^{rho_i t} e_i`
pub fn alpha_lattice_basis(alpha: &[f64], rho: &ScalingExponents, t: f64) -> Result<LatticeBasis> {
    let k = rho.k();
    if alpha.len() != k {
        return Err(Error::invalid("alpha must have k entries"));
    }
    let n = k + 1;
    let emt = (-t).exp();
    let mut cols = vec![vec![Dd::new(0.0); n]; n];
    cols[0][0] = Dd::new(emt);
    for i in 0..k {
        let grow = (rho.rho()[i] * t).exp();
        // alpha_i (e^{rho_i t} - e^{-t}) as an exact two-float difference of
        // products; the short-vector cancellations live in the low word
        cols[0][i + 1] = Dd::from_prod(alpha[i], grow).sub(Dd::from_prod(alpha[i], emt));
        cols[i + 1][i + 1] = Dd::new(grow);
    }
    LatticeBasis::from_dd(cols, Provenance::AlphaOrbit)
}

/// LLL output: the reduced basis together with the unimodular column
/// transform `U` with `B_reduced = B U`.
#[derive(Debug, Clone)]
pub struct LllResult {
    pub basis: LatticeBasis,
    pub transform: Vec<Vec<i64>>,
}

fn dot_dd(a: &[Dd], b: &[Dd]) -> Dd {
    let mut acc = Dd::new(0.0);
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(x.mul(*y));
    }
    acc
}

/// Gram-Schmidt data in two-float precision: `mu[i][j]` for `j < i` and
/// squared lengths of the orthogonalized vectors.
fn gso_dd(cols: &[Vec<Dd>]) -> (Vec<Vec<Dd>>, Vec<Dd>) {
    let n = cols.len();
    let mut mu = vec![vec![Dd::new(0.0); n]; n];
    let mut star: Vec<Vec<Dd>> = Vec::with_capacity(n);
    let mut star_norm2 = vec![Dd::new(0.0); n];
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = if star_norm2[j].value() == 0.0 {
                Dd::new(0.0)
            } else {
                dot_dd(&cols[i], &star[j]).div(star_norm2[j])
            };
            for (vc, sc) in v.iter_mut().zip(&star[j]) {
                *vc = vc.sub(mu[i][j].mul(*sc));
            }
        }
        star_norm2[i] = dot_dd(&v, &v);
        star.push(v);
    }
    (mu, star_norm2)
}

/// Lovasz-reduces the basis with parameter `delta`.
pub fn lll_reduce(basis: &LatticeBasis, delta: f64) -> Result<LllResult> {
    if !(0.25 < delta && delta < 1.0) {
        return Err(Error::invalid("LLL delta must lie in (1/4, 1)"));
    }
    let n = basis.dim();
    if n > 12 {
        return Err(Error::invalid("LLL limited to dimension <= 12"));
    }
    let mut b: Vec<Vec<Dd>> = basis.cols_dd().to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();

    let scale: f64 = b.iter().map(|c| dot_dd(c, c).value()).fold(0.0, f64::max);
    let (mut mu, mut star2) = gso_dd(&b);
    // two-float GSO carries ~32 digits; beyond that the basis is outside
    // the representable dynamic range
    let degenerate = |s2: &[Dd]| {
        s2.iter().any(|v| !v.value().is_finite() || v.value() <= scale * 1e-58)
    };
    if degenerate(&star2) {
        return Err(Error::NumericalFailure("LLL: basis exceeds two-float dynamic range".into()));
    }

    let mut k = 1usize;
    let mut rounds = 0usize;
    while k < n {
        rounds += 1;
        if rounds > 200_000 {
            return Err(Error::NumericalFailure("LLL failed to terminate".into()));
        }
        // size-reduce column k against j < k
        for j in (0..k).rev() {
            let r = mu[k][j].value().round();
            if r != 0.0 {
                let ri = r as i64;
                for t in 0..n {
                    b[k][t] = b[k][t].sub(b[j][t].mul_f64(r));
                    u[k][t] = u[k][t].wrapping_sub(ri.wrapping_mul(u[j][t]));
                }
                let (m2, s2) = gso_dd(&b);
                mu = m2;
                star2 = s2;
            }
        }
        let lhs = star2[k].value();
        let m = mu[k][k - 1].value();
        if lhs >= (delta - m * m) * star2[k - 1].value() {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            let (m2, s2) = gso_dd(&b);
            mu = m2;
            star2 = s2;
            if degenerate(&star2) {
                return Err(Error::NumericalFailure(
                    "LLL: basis exceeds two-float dynamic range".into(),
                ));
            }
            k = k.max(2) - 1;
        }
    }
    Ok(LllResult {
        basis: LatticeBasis::from_dd(b, basis.provenance())?,
        transform: u,
    })
}

const ENUM_NODE_BUDGET: u64 = 50_000_000;

/// Exact shortest nonzero lattice vector: LLL preprocessing, then
/// Fincke-Pohst enumeration over the reduced basis. Returns a minimizer and
/// its Euclidean length.
pub fn shortest_vector(basis: &LatticeBasis) -> Result<(Vec<f64>, f64)> {
    let n = basis.dim();
    if n > 8 {
        return Err(Error::invalid("exact SVP limited to dimension <= 8"));
    }
    let reduced = lll_reduce(basis, 0.99)?.basis;
    // the reduced basis is well-conditioned; f64 Gram-Schmidt suffices for
    // the enumeration bounds
    let (mu, star2) = {
        let (mu_dd, star2_dd) = gso_dd(reduced.cols_dd());
        let mu: Vec<Vec<f64>> =
            mu_dd.iter().map(|row| row.iter().map(|d| d.value()).collect()).collect();
        let star2: Vec<f64> = star2_dd.iter().map(|d| d.value()).collect();
        (mu, star2)
    };

    // initial radius: the shortest reduced column
    let (best_x, best_n2) = {
        let (i, n2) = reduced
            .cols()
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm2(c)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let mut x = vec![0i64; n];
        x[i] = 1;
        (x, n2)
    };

    let mut state = Enumeration {
        mu: &mu,
        star2: &star2,
        best_x,
        best_n2,
        nodes: 0,
        exhausted: true,
    };
    let mut x = vec![0i64; n];
    state.descend(n - 1, 0.0, &mut x);

    let v = reduced.vector(&state.best_x);
    let len = norm2(&v).sqrt();
    if !state.exhausted {
        return Err(Error::ResourceExceeded {
            msg: format!("SVP enumeration budget of {ENUM_NODE_BUDGET} nodes exceeded"),
            best: Some((v, len)),
        });
    }
    Ok((v, len))
}

/// Depth-first Fincke-Pohst enumeration state over a reduced basis.
struct Enumeration<'a> {
    mu: &'a [Vec<f64>],
    star2: &'a [f64],
    best_x: Vec<i64>,
    best_n2: f64,
    nodes: u64,
    exhausted: bool,
}

impl Enumeration<'_> {
    /// Levels run n-1 .. 0; the top level is restricted to nonnegative
    /// coordinates by central symmetry.
    fn descend(&mut self, level: usize, partial: f64, x: &mut [i64]) {
        let n = self.star2.len();
        self.nodes += 1;
        if self.nodes > ENUM_NODE_BUDGET {
            self.exhausted = false;
            return;
        }
        // center of the level coordinate given the choices above
        let c: f64 = -(level + 1..n).map(|j| self.mu[j][level] * x[j] as f64).sum::<f64>();
        let room = self.best_n2 * (1.0 + 1e-12) - partial;
        if room <= 0.0 {
            return;
        }
        let spread = (room / self.star2[level]).sqrt();
        let lo = (c - spread).ceil() as i64;
        let hi = (c + spread).floor() as i64;
        let lo = if level == n - 1 { lo.max(0) } else { lo };
        for xi in lo..=hi {
            let d = xi as f64 - c;
            let contrib = partial + d * d * self.star2[level];
            if contrib > self.best_n2 * (1.0 + 1e-12) {
                continue;
            }
            x[level] = xi;
            if level == 0 {
                if x.iter().any(|&v| v != 0) && contrib < self.best_n2 {
                    self.best_n2 = contrib;
                    self.best_x = x.to_vec();
                }
            } else {
                self.descend(level - 1, contrib, x);
                if !self.exhausted {
                    x[level] = 0;
                    return;
                }
            }
        }
        x[level] = 0;
    }
}

/// Half the systole.
pub fn injectivity_radius(basis: &LatticeBasis) -> Result<f64> {
    shortest_vector(basis).map(|(_, len)| len / 2.0)
}

/// Injectivity radius along a diagonal-flow orbit, with the decay exponent
/// fitted on the lower envelope of `log Inj`.
#[derive(Debug, Clone, Serialize)]
pub struct InjTrajectory {
    pub t: Vec<f64>,
    pub inj: Vec<f64>,
    /// `max(0, -slope)` of the least-squares line through
    /// `(t, log running-min Inj)`.
    pub delta_hat: f64,
    /// Intercept constant of the same fit.
    pub c_hat: f64,
}

impl InjTrajectory {
    pub fn min_inj(&self) -> f64 {
        self.inj.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Running minimum of the injectivity radius.
    pub fn lower_envelope(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.inj.len());
        let mut m = f64::INFINITY;
        for &v in &self.inj {
            m = m.min(v);
            out.push(m);
        }
        out
    }
}

/// Computes the injectivity radius along the diagonal-flow orbit of the
/// `alpha` lattice and fits the decay exponent on the envelope.
///
/// For almost every frequency vector the orbit's excursions into the thin
/// part are only logarithmic in `t`, so the fitted exponent is near zero on
/// generic inputs; a genuinely positive exponent signals an approximation
/// obstruction in `alpha` (a rational or near-rational direction).
pub fn inj_trajectory(alpha: &[f64], rho: &ScalingExponents, t_grid: &[f64]) -> Result<InjTrajectory> {
    if t_grid.len() < 2 {
        return Err(Error::invalid("inj_trajectory needs at least two grid points"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < 0.0 {
        return Err(Error::invalid("t grid must be increasing and nonnegative"));
    }
    let mut inj = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        inj.push(injectivity_radius(&alpha_lattice_basis(alpha, rho, t)?)?);
    }
    let traj = InjTrajectory { t: t_grid.to_vec(), inj, delta_hat: 0.0, c_hat: 0.0 };
    let env = traj.lower_envelope();
    let ys: Vec<f64> = env.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = least_squares(t_grid, &ys)?;
    Ok(InjTrajectory { delta_hat: (-slope).max(0.0), c_hat: intercept.exp(), ..traj })
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("least_squares needs at least two points"));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("least_squares: degenerate abscissa"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Value of the crossing transform of a decreasing positive function at `t`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IStarValue {
    /// `I(t + s*)` at the first crossing `I(t+s) = 2 e^{-s}`, or 0 when the
    /// crossing does not exist in the sampled range.
    pub value: f64,
    /// The crossing offset, `None` when no crossing was found.
    pub s_star: Option<f64>,
}

/// Evaluates `I*(t) = I(t + s*)`, `s* = inf { s > 0 : I(t+s) = 2 e^{-s} }`
/// on a sampled decreasing function (linear interpolation between samples).
/// Returns value 0, flagged by `s_star = None`, when no crossing exists in
/// the sample range.
pub fn i_star(samples: &[(f64, f64)], t: f64) -> Result<IStarValue> {
    if samples.len() < 2 {
        return Err(Error::invalid("i_star needs at least two samples"));
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::invalid("i_star samples must have increasing abscissae"));
        }
        if w[1].1 > w[0].1 + 1e-12 {
            return Err(Error::invalid("i_star requires a non-increasing sampled function"));
        }
    }
    if samples.iter().any(|&(_, v)| v <= 0.0) {
        return Err(Error::invalid("i_star requires positive samples"));
    }
    let (t_min, t_max) = (samples[0].0, samples[samples.len() - 1].0);
    if t < t_min || t > t_max {
        return Err(Error::invalid("i_star query outside the sampled range"));
    }
    let interp = |u: f64| -> f64 {
        match samples.binary_search_by(|&(s, _)| s.total_cmp(&u)) {
            Ok(i) => samples[i].1,
            Err(i) => {
                let (x0, y0) = samples[i - 1];
                let (x1, y1) = samples[i];
                y0 + (y1 - y0) * (u - x0) / (x1 - x0)
            }
        }
    };
    let diff = |s: f64| interp(t + s) - 2.0 * (-s).exp();
    if diff(0.0) >= 0.0 {
        return Ok(IStarValue { value: interp(t), s_star: Some(0.0) });
    }
    // first sign change over the sampled offsets
    let s_max = t_max - t;
    let steps = 4096usize;
    let mut s_lo = 0.0;
    let mut bracket = None;
    for i in 1..=steps {
        let s = s_max * i as f64 / steps as f64;
        if diff(s) >= 0.0 {
            bracket = Some((s_lo, s));
            break;
        }
        s_lo = s;
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(IStarValue { value: 0.0, s_star: None });
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s_star = 0.5 * (lo + hi);
    Ok(IStarValue { value: interp(t + s_star), s_star: Some(s_star) })
}

/// Lower-bound mode for the width of unit orbit segments.
#[derive(Debug, Clone, Copy)]
pub enum WidthMode {
    /// Exponential-decay regime with decay exponent `delta in [0, 1)`.
    Exponent(f64),
    /// Degeneration-function regime; pass `I*(t)` evaluated at the same `t`.
    IStarValue(f64),
}

/// Width lower bound with the empirical constant fixed to 1:
/// `exp(-(k+1) delta t / (1 - delta))` in exponent mode,
/// `(I*(t))^(k+1)` in degeneration mode.
pub fn width_lower_bound(mode: WidthMode, k: usize, t: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("width_lower_bound requires k >= 2"));
    }
    match mode {
        WidthMode::Exponent(delta) => {
            if !(0.0..1.0).contains(&delta) {
                return Err(Error::invalid("width exponent delta must lie in [0, 1)"));
            }
            Ok((-((k as f64 + 1.0) * delta * t) / (1.0 - delta)).exp())
        }
        WidthMode::IStarValue(v) => {
            if v < 0.0 {
                return Err(Error::invalid("I* value must be nonnegative"));
            }
            Ok(v.powi(k as i32 + 1))
        }
    }
}

/// Aggregates a per-scale width series into the scale-summed bound
/// `sum_{j=0}^{[log T]} e^{(1 - rho_1/(2(k-1))) j h} B_j` with
/// `h = log T / [log T]`.
pub fn b_hat_bound(b_series: &[f64], rho: &ScalingExponents, t_cap: f64) -> Result<f64> {
    if t_cap < std::f64::consts::E {
        return Err(Error::invalid("b_hat_bound requires T >= e"));
    }
    let k = rho.k() as f64;
    let log_t = t_cap.ln();
    let j_max = log_t.floor() as usize;
    let h = log_t / j_max as f64;
    if b_series.len() < j_max + 1 {
        return Err(Error::invalid(format!(
            "b_hat_bound needs {} width terms, got {}",
            j_max + 1,
            b_series.len()
        )));
    }
    let rate = 1.0 - rho.rho()[0] / (2.0 * (k - 1.0));
    Ok((0..=j_max).map(|j| (rate * j as f64 * h).exp() * b_series[j]).sum())
}

/// Theoretical envelope for the aggregated width bound:
/// `T^{1 - rho_1/(2(k-1))} * T^{(k+1) delta / (2(1-delta))}`.
pub fn b_hat_envelope(k: usize, rho_1: f64, delta: f64, t_cap: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid("envelope delta must lie in [0, 1)"));
    }
    let kf = k as f64;
    let p = 1.0 - rho_1 / (2.0 * (kf - 1.0)) + (kf + 1.0) * delta / (2.0 * (1.0 - delta));
    Ok(t_cap.powf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rho2() -> ScalingExponents {
        ScalingExponents::new(vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn scaling_exponents_validation() {
        assert!(ScalingExponents::new(vec![0.5, 0.5]).is_ok());
        assert!(ScalingExponents::new(vec![0.5, 0.4]).is_err());
        assert!(ScalingExponents::new(vec![1.5, -0.5]).is_err());
        assert!(ScalingExponents::new(vec![1.0]).is_err());
    }

    #[test]
    fn admissibility() {
        // rho_i = 2(k-i)/(k(k-1)) meets the lower branch with equality
        let k = 4usize;
        let rho: Vec<f64> =
            (1..=k).map(|i| 2.0 * (k - i) as f64 / (k as f64 * (k as f64 - 1.0))).collect();
        assert!(ScalingExponents::new(rho).unwrap().is_admissible());
        assert!(rho2().is_admissible());
        // rho_1 = 0 never admissible
        assert!(!ScalingExponents::new(vec![0.0, 1.0]).unwrap().is_admissible());
        // a dip below the interpolation line breaks it
        assert!(!ScalingExponents::new(vec![0.6, 0.0, 0.4]).unwrap().is_admissible());
    }

    #[test]
    fn flow_matrix_basics() {
        let rho = rho2();
        let m = diagonal_flow_matrix(&rho, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i][j], f64::from(u8::from(i == j)));
            }
        }
        let m = diagonal_flow_matrix(&rho, 1.0);
        assert!((m[0][0] - 1f64.exp()).abs() < 1e-15);
        assert!((m[1][1] - (-1f64).exp()).abs() < 1e-15);
        assert!((m[2][2] - 1.0).abs() < 1e-15);
        // unimodular for random admissible exponents
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let a: f64 = rng.gen_range(0.05..0.95);
            let rho = ScalingExponents::new(vec![a, 1.0 - a]).unwrap();
            let t: f64 = rng.gen_range(-3.0..3.0);
            let m = diagonal_flow_matrix(&rho, t);
            let d: f64 = (0..3).map(|i| m[i][i]).product();
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_basis_at_zero_is_integers() {
        let rho = rho2();
        let b = alpha_lattice_basis(&[0.7548, 0.1312], &rho, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.cols()[i][j], f64::from(u8::from(i == j)));
            }
        }
        assert_eq!(b.provenance(), Provenance::AlphaOrbit);
    }

    #[test]
    fn alpha_basis_determinant_one() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let a: f64 = rng.gen_range(0.05..0.95);
            let rho = ScalingExponents::new(vec![a * 0.5, a * 0.5, 1.0 - a]).unwrap();
            let alpha = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            let t: f64 = rng.gen_range(0.0..4.0);
            let b = alpha_lattice_basis(&alpha, &rho, t).unwrap();
            assert!((b.det().abs() - 1.0).abs() < 1e-10, "det = {}", b.det());
            // first entry of the n_0 generator
            assert!((b.cols()[0][0] - (-t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn lll_orthogonal_unchanged() {
        let b = LatticeBasis::new(vec![vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let r = lll_reduce(&b, 0.99).unwrap();
        let mut lens: Vec<f64> = r.basis.cols().iter().map(|c| norm2(c).sqrt()).collect();
        lens.sort_by(f64::total_cmp);
        assert!((lens[0] - 2.0).abs() < 1e-12 && (lens[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lll_shears_large_multiple() {
        let m = 100_000.0;
        let b = LatticeBasis::new(vec![vec![1.0, m], vec![0.0, 1.0]]).unwrap();
        let r = lll_reduce(&b, 0.99).unwrap();
        for c in r.basis.cols() {
            assert!(norm2(c).sqrt() <= (m * m + 1.0).sqrt());
        }
        let shortest = r.basis.cols().iter().map(|c| norm2(c).sqrt()).fold(f64::INFINITY, f64::min);
        assert!((shortest - 1.0).abs() < 1e-9, "2d reduction finds the unit vector");
        // Gram determinant preserved
        assert!(((r.basis.det().abs() - b.det().abs()) / b.det().abs()).abs() < 1e-9);
        // transform consistency: B_reduced = B U
        for (j, col) in r.transform.iter().enumerate() {
            let xi: Vec<i64> = col.clone();
            let v = b.vector(&xi);
            for (a, c) in v.iter().zip(&r.basis.cols()[j]) {
                assert!((a - c).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn svp_simple_cases() {
        let z3 = LatticeBasis::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!((shortest_vector(&z3).unwrap().1 - 1.0).abs() < 1e-12);
        let skew = LatticeBasis::new(vec![vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((shortest_vector(&skew).unwrap().1 - 0.5).abs() < 1e-12);
        assert!((injectivity_radius(&z3).unwrap() - 0.5).abs() < 1e-12);
    }

    fn brute_force_min(b: &LatticeBasis, span: i64) -> f64 {
        let n = b.dim();
        let mut best = f64::INFINITY;
        let mut x = vec![-span; n];
        loop {
            if x.iter().any(|&v| v != 0) {
                best = best.min(norm2(&b.vector(&x)).sqrt());
            }
            let mut i = 0;
            loop {
                x[i] += 1;
                if x[i] <= span {
                    break;
                }
                x[i] = -span;
                i += 1;
                if i == n {
                    return best;
                }
            }
        }
    }

    #[test]
    fn svp_matches_brute_force_small() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.gen_range(2..=4);
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-5i64..=5) as f64).collect())
                .collect();
            let Ok(b) = LatticeBasis::new(cols) else { continue };
            if b.det().abs() < 0.5 {
                continue;
            }
            let (_, len) = shortest_vector(&b).unwrap();
            let brute = brute_force_min(&b, 4);
            assert!((len - brute).abs() < 1e-9, "svp {len} vs brute {brute}");
        }
    }

    #[test]
    fn svp_invariant_under_unimodular_transform() {
        let mut rng = StdRng::seed_from_u64(29);
        let b = LatticeBasis::new(vec![
            vec![3.0, 1.0, 0.0],
            vec![1.0, 4.0, 1.0],
            vec![0.0, 2.0, 5.0],
        ])
        .unwrap();
        let (_, base_len) = shortest_vector(&b).unwrap();
        for _ in 0..20 {
            // random product of elementary column operations
            let mut cols = b.cols().to_vec();
            for _ in 0..6 {
                let i = rng.gen_range(0..3);
                let mut j = rng.gen_range(0..3);
                if i == j {
                    j = (j + 1) % 3;
                }
                let c = rng.gen_range(-3i64..=3) as f64;
                let cj = cols[j].clone();
                for (a, v) in cols[i].iter_mut().zip(cj) {
                    *a += c * v;
                }
            }
            let tb = LatticeBasis::new(cols).unwrap();
            let (_, len) = shortest_vector(&tb).unwrap();
            assert!((len - base_len).abs() / base_len < 1e-9);
        }
    }

    #[test]
    fn svp_scaling_homogeneity() {
        let b = LatticeBasis::new(vec![vec![1.5, 0.3], vec![0.2, 2.0]]).unwrap();
        let r0 = injectivity_radius(&b).unwrap();
        let scaled =
            LatticeBasis::new(b.cols().iter().map(|c| c.iter().map(|v| 3.0 * v).collect()).collect())
                .unwrap();
        let r1 = injectivity_radius(&scaled).unwrap();
        assert!((r1 - 3.0 * r0).abs() < 1e-12);
    }

    #[test]
    fn trajectory_pure_contraction() {
        // alpha = 0, rho = (1, 0): Inj(t) = e^{-t}/2, slope exactly -1
        let grid: Vec<f64> = (0..13).map(|i| i as f64 * 0.25).collect();
        let traj = inj_trajectory(&[0.0, 0.0], &rho2(), &grid).unwrap();
        for (&t, &v) in traj.t.iter().zip(&traj.inj) {
            assert!((v - 0.5 * (-t).exp()).abs() < 1e-9, "t={t} inj={v}");
        }
        assert!((traj.delta_hat - 1.0).abs() < 1e-6);
        // Inj(0) = 1/2 for every alpha
        let traj2 = inj_trajectory(&[0.739, 0.111], &rho2(), &[0.0, 0.5]).unwrap();
        assert!((traj2.inj[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn i_star_examples() {
        // constant 2: crossing at s = 0
        let samples: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1, 2.0)).collect();
        let v = i_star(&samples, 1.0).unwrap();
        assert_eq!(v.s_star, Some(0.0));
        assert!((v.value - 2.0).abs() < 1e-12);
        // constant c in (0,2): s* = ln(2/c), I* = c
        let c = 0.7;
        let samples: Vec<(f64, f64)> = (0..200).map(|i| (i as f64 * 0.05, c)).collect();
        let v = i_star(&samples, 2.0).unwrap();
        assert!((v.value - c).abs() < 1e-9);
        assert!((v.s_star.unwrap() - (2.0 / c).ln()).abs() < 1e-6);
        // I(t) = 2 e^{-t}: no crossing for t > 0
        let samples: Vec<(f64, f64)> =
            (0..300).map(|i| (i as f64 * 0.05, 2.0 * (-(i as f64) * 0.05).exp())).collect();
        let v = i_star(&samples, 1.0).unwrap();
        assert_eq!(v.s_star, None);
        assert_eq!(v.value, 0.0);
        // non-monotone input rejected
        assert!(i_star(&[(0.0, 1.0), (1.0, 2.0)], 0.0).is_err());
    }

    #[test]
    fn i_star_monotone_in_i() {
        let mk = |scale: f64| -> Vec<(f64, f64)> {
            (0..400).map(|i| (i as f64 * 0.02, scale / (1.0 + i as f64 * 0.02))).collect()
        };
        let small = mk(0.8);
        let large = mk(1.2);
        for &t in &[0.5, 1.0, 2.0, 4.0] {
            let a = i_star(&small, t).unwrap().value;
            let b = i_star(&large, t).unwrap().value;
            assert!(a <= b + 1e-12, "t={t}: {a} > {b}");
        }
    }

    #[test]
    fn width_bounds() {
        assert_eq!(width_lower_bound(WidthMode::Exponent(0.0), 3, 5.0).unwrap(), 1.0);
        let w = width_lower_bound(WidthMode::Exponent(0.5), 2, 1.0).unwrap();
        assert!((w - (-3.0f64).exp()).abs() < 1e-15);
        let w = width_lower_bound(WidthMode::IStarValue(0.25), 2, 0.0).unwrap();
        assert!((w - 0.25f64.powi(3)).abs() < 1e-15);
        assert!(width_lower_bound(WidthMode::Exponent(1.0), 2, 1.0).is_err());
    }

    #[test]
    fn b_hat_geometric_sum() {
        let rho = rho2();
        // B_j = 1: closed-form geometric series in e^{rate * h}
        let t_cap = 40.0f64;
        let j_max = t_cap.ln().floor() as usize;
        let h = t_cap.ln() / j_max as f64;
        let rate = 1.0 - 1.0 / 2.0;
        let series = vec![1.0; j_max + 1];
        let got = b_hat_bound(&series, &rho, t_cap).unwrap();
        let q = (rate * h).exp();
        let expect = (q.powi(j_max as i32 + 1) - 1.0) / (q - 1.0);
        assert!((got - expect).abs() / expect < 1e-12);
        // T = e: [log T] = 1, so terms j = 0 and j = 1
        let got = b_hat_bound(&[1.0, 1.0], &rho, std::f64::consts::E).unwrap();
        assert!((got - (1.0 + (0.5f64).exp())).abs() < 1e-12);
        assert!(b_hat_bound(&[1.0], &rho, std::f64::consts::E).is_err());
        assert!(b_hat_bound(&[1.0], &rho, 1.0).is_err());
    }

    #[test]
    fn b_hat_envelope_shape() {
        let e = b_hat_envelope(2, 1.0, 0.0, 100.0).unwrap();
        assert!((e - 100.0f64.powf(0.5)).abs() < 1e-9);
        assert!(b_hat_envelope(2, 1.0, 1.0, 100.0).is_err());
    }
}
