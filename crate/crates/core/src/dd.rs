//! Double-double arithmetic.
//!
//! A [`Dd`] carries an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of significand. Eighth derivatives taken by
//! finite differences amplify sample noise by `~h^-8`, so plain `f64`
//! samples lose every significant digit on the grids used for verification;
//! this type keeps that noise near `1e-32`.
//!
//! Arithmetic follows the classical error-free transformations (Knuth
//! two-sum, FMA-based two-product). Transcendentals use argument reduction
//! followed by Taylor series evaluated in full double-double precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
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
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: 3.141_592_653_589_793_116e0,
        lo: 1.224_646_799_147_353_207e-16,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: 1.570_796_326_794_896_558e0,
        lo: 6.123_233_995_736_766_036e-17,
    };
    pub const LN_2: Dd = Dd {
        hi: 6.931_471_805_599_452_862e-1,
        lo: 2.319_046_813_846_299_558e-17,
    };
    /// Smallest relative spacing, `2^-104`.
    pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

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

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (p, e) = quick_two_sum(p, e + self.lo * b);
        Dd { hi: p, lo: e }
    }

    fn sqr(self) -> Dd {
        self * self
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            if self.hi == 0.0 {
                return Dd::ZERO;
            }
            return Dd::from_f64(f64::NAN);
        }
        // One Newton correction on the f64 root doubles the precision.
        let q = self.hi.sqrt();
        let qd = Dd::from_f64(q);
        let r = self - qd.sqr();
        qd + Dd::from_f64(r.hi / (2.0 * q))
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            e >>= 1;
        }
        if n < 0 {
            Dd::ONE / acc
        } else {
            acc
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        // x = k ln2 + r, then r is scaled by 2^-10 and squared back.
        let k = (self.hi / Dd::LN_2.hi).round();
        let r = (self - Dd::LN_2.mul_f64(k)).mul_f64(1.0 / 1024.0);
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = term * r / Dd::from_f64(n);
            sum += term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        // sum = e^r - 1; square ten times using (1+s)^2 - 1 = s(2+s).
        for _ in 0..10 {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        let e = sum + Dd::ONE;
        let scale = 2f64.powi(k as i32);
        Dd {
            hi: e.hi * scale,
            lo: e.lo * scale,
        }
    }

    /// Returns `(sin(r), cos(r))` for `|r| <= pi/4`.
    fn sin_cos_reduced(r: Dd) -> (Dd, Dd) {
        let r2 = r.sqr();
        let mut term = r;
        let mut sin = r;
        let mut n = 1.0;
        loop {
            term = -(term * r2) / Dd::from_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            sin += term;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        let mut term = Dd::ONE;
        let mut cos = Dd::ONE;
        let mut n = 0.0;
        loop {
            term = -(term * r2) / Dd::from_f64((n + 1.0) * (n + 2.0));
            n += 2.0;
            cos += term;
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        (sin, cos)
    }

    pub fn sin_cos(self) -> (Dd, Dd) {
        if !self.is_finite() {
            return (Dd::from_f64(f64::NAN), Dd::from_f64(f64::NAN));
        }
        let k = (self.hi / Dd::FRAC_PI_2.hi).round();
        let r = self - Dd::FRAC_PI_2.mul_f64(k);
        let (s, c) = Dd::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }

    pub fn sinh(self) -> Dd {
        if self.hi.abs() < 0.25 {
            let x2 = self.sqr();
            let mut term = self;
            let mut sum = self;
            let mut n = 1.0;
            loop {
                term = term * x2 / Dd::from_f64((n + 1.0) * (n + 2.0));
                n += 2.0;
                sum += term;
                if term.hi.abs() < 1e-35 * sum.hi.abs().max(1e-300) {
                    break;
                }
            }
            return sum;
        }
        let e = self.exp();
        (e - Dd::ONE / e).mul_f64(0.5)
    }

    pub fn cosh(self) -> Dd {
        let e = self.exp();
        (e + Dd::ONE / e).mul_f64(0.5)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
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

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::from_f64(q3)
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Dd {
            #[inline]
            fn $m(&mut self, rhs: Dd) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 34-digit reference values.
    const SIN_1: (f64, f64) = (8.414_709_848_078_965e-1, 1.776_845_092_935_536e-18);

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol
    }

    #[test]
    fn arithmetic_recovers_dropped_bits() {
        let a = Dd::from_f64(1.0) + Dd::from_f64(1e-20);
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        let b = a - Dd::ONE;
        assert_eq!(b.to_f64(), 1e-20);
    }

    #[test]
    fn division_and_sqrt() {
        let three = Dd::from_f64(3.0);
        let third = Dd::ONE / three;
        assert!(close(third * three, Dd::ONE, 1e-31));
        let two = Dd::from_f64(2.0);
        let r = two.sqrt();
        assert!(close(r * r, two, 1e-31));
    }

    #[test]
    fn sin_of_one_matches_reference() {
        let s = Dd::ONE.sin();
        let reference = Dd::new(SIN_1.0, SIN_1.1);
        assert!(close(s, reference, 1e-31), "{s:?}");
    }

    #[test]
    fn pythagorean_identity_over_wide_range() {
        for i in -200..200 {
            let x = Dd::from_f64(i as f64 * 0.37) + Dd::from_f64(1e-19);
            let (s, c) = x.sin_cos();
            assert!(close(s * s + c * c, Dd::ONE, 1e-30), "x = {x:?}");
        }
    }

    #[test]
    fn pi_is_a_zero_of_sine() {
        assert!(Dd::PI.sin().abs().to_f64() < 1e-31);
        assert!(close(Dd::PI.cos(), -Dd::ONE, 1e-31));
    }

    #[test]
    fn exp_inverse_and_hyperbolic_identity() {
        for &x in &[-3.0, -0.5, 1e-3, 0.2, 1.0, 2.5, 10.0] {
            let x = Dd::from_f64(x);
            let e = x.exp() * (-x).exp();
            assert!(close(e, Dd::ONE, 1e-30), "{x:?}");
            let c = x.cosh();
            let s = x.sinh();
            let id = c * c - s * s;
            assert!(close(id, Dd::ONE, 1e-29 * c.to_f64() * c.to_f64()), "{x:?}");
        }
        let e = Dd::ONE.exp();
        let reference = Dd::new(2.718_281_828_459_045, 1.445_646_891_729_250_2e-16);
        assert!(close(e, reference, 1e-31));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Dd::from_f64(1.1);
        let mut p = Dd::ONE;
        for _ in 0..7 {
            p *= x;
        }
        assert!(close(x.powi(7), p, 1e-30));
        assert!(close(x.powi(-2) * x * x, Dd::ONE, 1e-30));
    }
}
