//! Filiform and quasi-Abelian nilpotent Lie algebras.
//!
//! A step-`k` filiform algebra has dimension `k + 1`, with basis
//! `(X, Y_1, ..., Y_k)` satisfying `[X, Y_i] = Y_{i+1}` for `i < k`,
//! `[X, Y_k] = 0`, and all `Y` brackets zero. The semidirect-product model
//! carries a second basis `(xi, eta_1, ..., eta_k)` whose `ad_X` matrix has
//! the alternating-harmonic coefficients `theta(m) = (-1)^(m-1)/m`; the
//! unipotent matrix `S` relating the two bases obeys a convolution
//! recurrence in `theta` and is computed here in exact rational arithmetic.
//!
//! Basis ordering throughout: `X` first, then `Y_1..Y_k`. Vectors over the
//! Abelian ideal are dense length-`k` coefficient slices over `(Y_1..Y_k)`.
//! For the quasi-Abelian cover, the `Y_{i,j}` are ordered lexicographically
//! by `(j, i)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// `theta(m) = (-1)^(m-1) / m`, the `m`-th off-diagonal coefficient of the
/// adjoint map in the semidirect-product basis.
pub fn theta_coeff(m: i64) -> Result<BigRational> {
    if m < 1 {
        return Err(Error::invalid(format!("theta_coeff requires m >= 1, got {m}")));
    }
    let sign = if (m - 1) % 2 == 0 { 1 } else { -1 };
    Ok(BigRational::new(BigInt::from(sign), BigInt::from(m)))
}

/// Step-`k` filiform quasi-Abelian Lie algebra with its canonical basis.
#[derive(Debug, Clone)]
pub struct FiliformAlgebra {
    k: usize,
}

impl FiliformAlgebra {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("filiform step must be >= 2, got {k}")));
        }
        Ok(FiliformAlgebra { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension of the algebra, `k + 1`.
    pub fn dim(&self) -> usize {
        self.k + 1
    }

    /// Matrix of `ad_X` on the ideal: `[X, Y_i] = sum_m A[i][m] Y_m`
    /// (0-indexed rows/columns over `Y_1..Y_k`).
    pub fn ad_matrix(&self) -> Vec<Vec<BigRational>> {
        let mut a = vec![vec![BigRational::zero(); self.k]; self.k];
        for i in 0..self.k - 1 {
            a[i][i + 1] = BigRational::one();
        }
        a
    }

    /// Bracket of two full-dimension vectors `(c_X, c_1..c_k)`.
    ///
    /// Only the mixed `X`-ideal terms survive:
    /// `[u, v] = sum_i (u_X v_i - v_X u_i) [X, Y_i]`.
    pub fn bracket(&self, u: &[BigRational], v: &[BigRational]) -> Result<Vec<BigRational>> {
        bracket_with_ad(&self.ad_matrix(), self.k, u, v)
    }

    /// Bracket of basis elements, indices `0 = X`, `1..=k = Y_i`.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Result<Vec<BigRational>> {
        let mut u = vec![BigRational::zero(); self.dim()];
        let mut v = vec![BigRational::zero(); self.dim()];
        u[i] = BigRational::one();
        v[j] = BigRational::one();
        self.bracket(&u, &v)
    }

    /// Maximal Jacobi residual over all basis triples; zero for a Lie algebra.
    pub fn jacobi_residual(&self) -> BigRational {
        jacobi_residual_with_ad(&self.ad_matrix(), self.k)
    }

    /// `Ad(e^{tX})` applied to an ideal vector `v` over `(Y_1..Y_k)`:
    /// `Ad(e^{tX}) Y_i = sum_{j=0}^{k-i} t^j/j! Y_{i+j}`.
    pub fn ad_exp(&self, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.k {
            return Err(Error::invalid(format!(
                "ad_exp expects an ideal vector of length {}, got {}",
                self.k,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.k];
        for (m, slot) in out.iter_mut().enumerate() {
            // result_m = sum_{i <= m} v_i t^(m-i) / (m-i)!
            let mut acc = 0.0;
            let mut pow = 1.0;
            let mut fact = 1.0;
            for j in 0..=m {
                let i = m - j;
                acc += v[i] * pow / fact;
                pow *= t;
                fact *= (j + 1) as f64;
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// `ad_X` applied to an ideal vector: shifts coefficients up one slot.
    pub fn ad_x(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.k {
            return Err(Error::invalid("ad_x: ideal vector length mismatch"));
        }
        let mut out = vec![0.0; self.k];
        out[1..self.k].copy_from_slice(&v[..self.k - 1]);
        Ok(out)
    }

    /// Solves the conjugation problem between the flow generators
    /// `X_alpha = -X + sum alpha_i Y_i` and `X_beta` with `alpha_1 = beta_1`:
    /// returns the ideal vector `Y` with `ad_X(Y) = X_beta - X_alpha`, the
    /// center component normalized to zero.
    ///
    /// The sign convention (`X_beta - X_alpha`, not its negative) is the one
    /// under which `exp(-Y) exp(t X_beta) exp(Y) = exp(t X_alpha)`; it is
    /// pinned by the discrete conjugation test in the dynamics module.
    pub fn conjugating_element(&self, alpha: &[f64], beta: &[f64]) -> Result<Vec<f64>> {
        if alpha.len() != self.k || beta.len() != self.k {
            return Err(Error::invalid("conjugating_element: expected length-k frequency vectors"));
        }
        if alpha[0] != beta[0] {
            return Err(Error::NoSolution(format!(
                "conjugating_element requires alpha_1 = beta_1 (got {} vs {})",
                alpha[0], beta[0]
            )));
        }
        // [X, sum y_i Y_i] = sum_{i<k} y_i Y_{i+1} matches the Y_{i+1}
        // component of X_beta - X_alpha; the Y_1 component of the difference
        // vanishes by the precondition and the center component is free.
        let mut y = vec![0.0; self.k];
        for i in 0..self.k - 1 {
            y[i] = beta[i + 1] - alpha[i + 1];
        }
        Ok(y)
    }

    /// Bracket table in the canonical basis as JSON.
    pub fn bracket_table_json(&self) -> Value {
        let mut brackets = Vec::new();
        for i in 1..=self.k {
            let out = self.bracket_basis(0, i).expect("basis index in range");
            brackets.push(json!({
                "lhs": "X",
                "rhs": format!("Y{i}"),
                "out": rational_vec_json(&out, &|m| basis_name(m)),
            }));
        }
        json!({ "k": self.k, "basis": "canonical", "brackets": brackets })
    }
}

/// Matrix of `ad_xi` in the semidirect-product basis `(eta_1..eta_k)`:
/// `[xi, eta_i] = sum_{m>i} theta(m-i) eta_m`.
pub fn eta_ad_matrix(k: usize) -> Result<Vec<Vec<BigRational>>> {
    if k < 2 {
        return Err(Error::invalid("eta_ad_matrix requires k >= 2"));
    }
    let mut a = vec![vec![BigRational::zero(); k]; k];
    for i in 0..k {
        for m in i + 1..k {
            a[i][m] = theta_coeff((m - i) as i64)?;
        }
    }
    Ok(a)
}

/// Bracket table of the `eta` basis as JSON (non-integer coefficients are
/// emitted as exact `"p/q"` strings).
pub fn eta_bracket_table_json(k: usize) -> Result<Value> {
    let ad = eta_ad_matrix(k)?;
    let mut brackets = Vec::new();
    for (i, row) in ad.iter().enumerate() {
        brackets.push(json!({
            "lhs": "X",
            "rhs": format!("Y{}", i + 1),
            "out": rational_vec_json(
                &std::iter::once(BigRational::zero()).chain(row.iter().cloned()).collect::<Vec<_>>(),
                &|m| basis_name(m),
            ),
        }));
    }
    Ok(json!({ "k": k, "basis": "eta", "brackets": brackets }))
}

fn basis_name(idx: usize) -> String {
    if idx == 0 {
        "X".to_string()
    } else {
        format!("Y{idx}")
    }
}

fn rational_json(r: &BigRational) -> Value {
    if r.denom().is_one() {
        // i64 range is ample for every table we emit
        json!(r.numer().to_string().parse::<i64>().expect("small integer"))
    } else {
        json!(format!("{}/{}", r.numer(), r.denom()))
    }
}

fn rational_vec_json(coeffs: &[BigRational], name: &dyn Fn(usize) -> String) -> Value {
    let mut map = serde_json::Map::new();
    for (idx, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            map.insert(name(idx), rational_json(c));
        }
    }
    Value::Object(map)
}

fn bracket_with_ad(
    ad: &[Vec<BigRational>],
    k: usize,
    u: &[BigRational],
    v: &[BigRational],
) -> Result<Vec<BigRational>> {
    if u.len() != k + 1 || v.len() != k + 1 {
        return Err(Error::invalid("bracket: expected full-dimension vectors"));
    }
    let mut out = vec![BigRational::zero(); k + 1];
    for i in 0..k {
        let c = &u[0] * &v[i + 1] - &v[0] * &u[i + 1];
        if c.is_zero() {
            continue;
        }
        for m in 0..k {
            if !ad[i][m].is_zero() {
                out[m + 1] += &c * &ad[i][m];
            }
        }
    }
    Ok(out)
}

fn jacobi_residual_with_ad(ad: &[Vec<BigRational>], k: usize) -> BigRational {
    let dim = k + 1;
    let basis = |i: usize| -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); dim];
        v[i] = BigRational::one();
        v
    };
    let br = |u: &[BigRational], v: &[BigRational]| bracket_with_ad(ad, k, u, v).unwrap();
    let mut worst = BigRational::zero();
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let (ea, eb, ec) = (basis(a), basis(b), basis(c));
                let t1 = br(&ea, &br(&eb, &ec));
                let t2 = br(&eb, &br(&ec, &ea));
                let t3 = br(&ec, &br(&ea, &eb));
                for m in 0..dim {
                    let r = (&t1[m] + &t2[m] + &t3[m]).abs();
                    if r > worst {
                        worst = r;
                    }
                }
            }
        }
    }
    worst
}

/// Unipotent change of basis `Y_i = sum_j S[i][j] eta_j` from the canonical
/// filiform basis to the semidirect-product basis.
#[derive(Debug, Clone)]
pub struct BasisChangeMatrix {
    k: usize,
    s: Vec<Vec<BigRational>>,
}

impl BasisChangeMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Entry `S[i][j]` with 1-based basis indices.
    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.s[i - 1][j - 1]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.s
    }

    pub fn is_unipotent_upper(&self) -> bool {
        for i in 0..self.k {
            if !self.s[i][i].is_one() {
                return false;
            }
            for j in 0..i {
                if !self.s[i][j].is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// Builds `S` row by row from the convolution recurrence
/// `S[i+1][j] = sum_{l=i}^{j-1} S[i][l] theta(j-l)`, starting from
/// `S[1] = e_1`. Exact rational arithmetic throughout.
pub fn vergne_from_eta(k: usize) -> Result<BasisChangeMatrix> {
    if k < 2 {
        return Err(Error::invalid("vergne_from_eta requires k >= 2"));
    }
    let mut s = vec![vec![BigRational::zero(); k]; k];
    s[0][0] = BigRational::one();
    for i in 0..k - 1 {
        // row i+1 from row i (0-indexed)
        for j in i + 1..k {
            let mut acc = BigRational::zero();
            for l in i..j {
                if !s[i][l].is_zero() {
                    acc += &s[i][l] * theta_coeff((j - l) as i64)?;
                }
            }
            s[i + 1][j] = acc;
        }
    }
    Ok(BasisChangeMatrix { k, s })
}

/// Generalized binomial `binom(t, l) = t(t-1)...(t-l+1)/l!`.
pub fn gen_binom(t: f64, l: usize) -> f64 {
    let mut num = 1.0;
    let mut den = 1.0;
    for m in 0..l {
        num *= t - m as f64;
        den *= (m + 1) as f64;
    }
    num / den
}

/// The one-parameter automorphism group `h_t` of `R^k`:
/// `(h_t s)_i = sum_{l=0}^{i-1} binom(t, l) s_{i-l}`.
pub fn h_auto(t: f64, s: &[f64]) -> Vec<f64> {
    let k = s.len();
    let mut out = vec![0.0; k];
    for i in 0..k {
        let mut acc = 0.0;
        for l in 0..=i {
            acc += gen_binom(t, l) * s[i - l];
        }
        out[i] = acc;
    }
    out
}

/// Quasi-Abelian cover algebra on the index set
/// `J = {(i, j) : 1 <= i, j <= k, i + j <= k + 1}`.
#[derive(Debug, Clone)]
pub struct QuasiAbelianAlgebra {
    k: usize,
    index_set: Vec<(usize, usize)>,
}

impl QuasiAbelianAlgebra {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("quasi-Abelian step must be >= 2, got {k}")));
        }
        let mut index_set = Vec::new();
        for j in 1..=k {
            for i in 1..=k {
                if i + j <= k + 1 {
                    index_set.push((i, j));
                }
            }
        }
        Ok(QuasiAbelianAlgebra { k, index_set })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The index set `J` in lexicographic `(j, i)` order.
    pub fn index_set(&self) -> &[(usize, usize)] {
        &self.index_set
    }

    /// `1 + |J|`.
    pub fn dim(&self) -> usize {
        1 + self.index_set.len()
    }

    /// `[X, Y_{i,j}]` as an optional target index: `Some((i+1, j))` below the
    /// top diagonal, `None` when the bracket vanishes.
    pub fn bracket_x(&self, i: usize, j: usize) -> Result<Option<(usize, usize)>> {
        if !self.index_set.contains(&(i, j)) {
            return Err(Error::invalid(format!("({i},{j}) not in the index set J")));
        }
        if i + j < self.k + 1 {
            Ok(Some((i + 1, j)))
        } else {
            Ok(None)
        }
    }

    /// Basis of the ideal whose quotient is the step-`k` filiform algebra:
    /// the differences `Y_{i+1, j-1} - Y_{i, j}`.
    pub fn ideal_basis(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for &(i, j) in &self.index_set {
            if j >= 2 && self.index_set.contains(&(i + 1, j - 1)) {
                out.push(((i + 1, j - 1), (i, j)));
            }
        }
        out
    }

    /// Index of `Y_{i,j}` in the filiform quotient: `Y_{i,j} -> Y_{i+j-1}`.
    pub fn quotient_index(&self, i: usize, j: usize) -> usize {
        i + j - 1
    }

    /// Bracket table as JSON, with `Yi_j` entry names.
    pub fn bracket_table_json(&self) -> Value {
        let mut brackets = Vec::new();
        for &(i, j) in &self.index_set {
            let out = match self.bracket_x(i, j).expect("index in J") {
                Some((a, b)) => json!({ format!("Y{a}_{b}"): 1 }),
                None => json!({}),
            };
            brackets.push(json!({ "lhs": "X", "rhs": format!("Y{i}_{j}"), "out": out }));
        }
        json!({ "k": self.k, "basis": "cover", "brackets": brackets })
    }
}
