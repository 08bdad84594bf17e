//! Double-double arithmetic: unevaluated sums `hi + lo` of two `f64`s giving
//! roughly 31 significant decimal digits.
//!
//! The kernel R(τ′) vanishes at cone roots while its individual terms stay
//! O(M); plain `f64` evaluation leaves O(1e-16·M) jitter that the R^{−λ}
//! weights of the regularized integrands amplify without bound as τ′
//! approaches a root.  Evaluating R, Ṙ and the subtracted finite-part
//! bracket in double-double pushes that jitter to O(1e-32·M), far below the
//! quadrature tolerances.
//!
//! The error-free transformations (`two_sum`, `two_prod`) and the add / mul /
//! div compositions are the classical Dekker–Knuth constructions; `two_prod`
//! uses a fused multiply-add.  Only the operations needed by the kernel and
//! integrand evaluation are provided — this is not a general multiprecision
//! library.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// ln 2 to double-double precision (hi + lo).
pub const LN2: Dd = Dd {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};

/// A number represented as the exact sum `hi + lo` with |lo| ≤ ½ ulp(hi).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns (s, e) with s = fl(a+b) and a + b = s + e exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Error-free sum assuming |a| ≥ |b| (one branchless step cheaper).
#[inline]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

/// Error-free product via FMA: a·b = p + e exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Renormalizing constructor; `hi`, `lo` need not be ordered in magnitude
    /// but must not both be non-finite.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    /// Exact product of two `f64`s as a Dd.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Dd {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    /// Rounds to the nearest `f64`.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, self.hi);
        p2 += 2.0 * self.hi * self.lo;
        p2 += self.lo * self.lo;
        let (s, e) = quick_two_sum(p1, p2);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    /// Multiplies by 2^k.  Exact while 2^k and the scaled parts stay normal.
    #[inline]
    pub fn scale2(self, k: i32) -> Dd {
        let f = 2.0f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    /// e^a in double-double precision.
    ///
    /// Argument reduction a = k·ln2 + r, |r| ≤ ln2/2, then r is scaled by
    /// 2^{−9}, a short Taylor sum is evaluated, and the result is squared 9
    /// times and rescaled by 2^k.  Accurate to ~5e-30 relative over the
    /// non-overflowing range; saturates to 0 / ∞ outside ±709.
    pub fn exp(a: Dd) -> Dd {
        if a.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if a.hi < -709.0 {
            return Dd::ZERO;
        }
        let k = (a.hi / LN2.hi).round();
        let r = a - LN2 * k;
        // r / 32; |s| ≤ 0.011, so |s|^14/14! ≈ 6e-35 ≪ 1e-32.  The squaring
        // chain amplifies every error in e^s by 2^5, which keeps the exact
        // divisions below (not rounded 1/n factors!) mandatory.
        let s = r.scale2(-5);
        let mut p = Dd::ONE;
        for n in (1..=13).rev() {
            p = p * s / (n as f64) + Dd::ONE;
        }
        // p ≈ e^s; square back up to e^r.
        for _ in 0..5 {
            p = p.sqr();
        }
        p.scale2(k as i32)
    }

    /// (cosh a, sinh a) from a single exponential.
    pub fn cosh_sinh(a: Dd) -> (Dd, Dd) {
        let e = Dd::exp(a);
        let ei = e.recip();
        ((e + ei).scale2(-1), (e - ei).scale2(-1))
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(a: f64) -> Dd {
        Dd::from_f64(a)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (s1, s2) = quick_two_sum(s1, s2 + t2);
        Dd { hi: s1, lo: s2 }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, o);
        let (s1, s2) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi: s1, lo: s2 }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: f64) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, o.hi);
        p2 += self.hi * o.lo + self.lo * o.hi;
        let (s, e) = quick_two_sum(p1, p2);
        Dd { hi: s, lo: e }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, o);
        let (s, e) = quick_two_sum(p1, p2 + self.lo * o);
        Dd { hi: s, lo: e }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, o: Dd) -> Dd {
        // Long division with two correction steps (accurate variant).
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        Dd::new(q1, q2) + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, o: f64) -> Dd {
        self / Dd::from_f64(o)
    }
}
