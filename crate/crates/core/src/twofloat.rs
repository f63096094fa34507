//! Minimal double-double ("two-float") arithmetic.
//!
//! A value is an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 106 bits of significand. Used where cancellation across a large
//! dynamic range exceeds what `f64` carries: renormalized lattice bases
//! (entries of size `e^t` whose combinations are of size 1) and long
//! skew-shift orbits.

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// The exact product of two `f64`s.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, x);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, x);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * x);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    /// Reduction of a circle coordinate into `[0, 1)` at the `hi` level;
    /// exact because subtracting a small integer from a float in `[1, 4)`
    /// loses no bits. Intended for values that stay within a few turns.
    #[inline]
    pub fn mod1(mut self) -> Dd {
        while self.hi >= 1.0 {
            self.hi -= 1.0;
        }
        while self.hi < 0.0 {
            self.hi += 1.0;
        }
        let (hi, lo) = two_sum(self.hi, self.lo);
        Dd { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_product_and_cancellation() {
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60: the f64 square drops the tail
        let a = 1.0 + 2f64.powi(-30);
        let sq = Dd::from_prod(a, a);
        let tail = sq.sub(Dd::new(1.0 + 2f64.powi(-29)));
        assert_eq!(tail.value(), 2f64.powi(-60));
    }

    #[test]
    fn large_scale_cancellation() {
        // alpha*q - p with q ~ 2^40: f64 alone loses the difference
        let alpha = 0.6180339887498949f64;
        let q = (1u64 << 40) as f64;
        let prod = Dd::from_prod(alpha, q);
        let p = prod.value().round();
        let diff = prod.add_f64(-p);
        // reference via exact integer arithmetic on the mantissa
        let (m, e) = {
            let bits = alpha.to_bits();
            let exp = ((bits >> 52) & 0x7ff) as i32 - 1075;
            let mant = (bits & 0x000f_ffff_ffff_ffff) | (1 << 52);
            (mant as i128, exp)
        };
        let exact_num = m * (1i128 << 40) - (p as i128) * (1i128 << (-e));
        let exact = exact_num as f64 * 2f64.powi(e);
        assert!((diff.value() - exact).abs() < 1e-25);
    }

    #[test]
    fn division_roundtrip() {
        let a = Dd::from_prod(std::f64::consts::PI, 1e8).add_f64(1e-9);
        let b = Dd::from_prod(std::f64::consts::E, 37.0);
        let q = a.div(b);
        let back = q.mul(b);
        assert!((back.sub(a)).value().abs() < 1e-15 * a.value().abs());
    }
}
