//! Scalar arithmetic layer: a real-number abstraction with two backends
//! (native `f64` and an arbitrary-precision float) and a complex type built
//! on top of it.
//!
//! Everything downstream (series, operators, the solver) is generic over
//! [`Real`], so the whole pipeline runs either in fast double precision or
//! at a configurable number of decimal digits.

use std::cell::{Cell, RefCell};
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static BIG_PREC_BITS: Cell<usize> = const { Cell::new(192) };
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Sets the mantissa size (in bits) used for all [`BigReal`] values created
/// afterwards on this thread.
pub fn set_big_precision_bits(bits: usize) {
    BIG_PREC_BITS.with(|p| p.set(bits.max(64)));
}

/// Current [`BigReal`] mantissa size in bits for this thread.
pub fn big_precision_bits() -> usize {
    BIG_PREC_BITS.with(|p| p.get())
}

/// Real scalar the engine is generic over.
///
/// Implementations must be exact value types: no interior mutability, safe
/// to move across threads.
pub trait Real: Clone + PartialEq + PartialOrd + fmt::Debug + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn zero() -> Self;
    fn one() -> Self;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn pi() -> Self;

    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;

    /// Number of reliable decimal digits carried by this backend.
    fn decimal_digits() -> u32;

    /// Parses a plain decimal literal (`123`, `0.5`, `1.25e-3`).
    fn from_decimal_str(s: &str) -> Option<Self>;

    /// Renders with enough digits for a faithful re-parse.
    fn to_decimal_string(&self) -> String;

    fn powi(&self, n: i64) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mut base = if n < 0 { Self::one().div(self) } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Four-quadrant arctangent, `atan2(self, x)`.
    fn atan2(&self, x: &Self) -> Self {
        let y = self;
        let pi = Self::pi();
        if x.is_zero() {
            if y.is_zero() {
                return Self::zero();
            }
            let half = pi.div(&Self::from_i64(2));
            return if *y > Self::zero() { half } else { half.neg() };
        }
        let base = y.div(x).atan();
        if *x > Self::zero() {
            base
        } else if *y >= Self::zero() {
            base.add(&pi)
        } else {
            base.sub(&pi)
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn decimal_digits() -> u32 {
        15
    }
    fn from_decimal_str(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn to_decimal_string(&self) -> String {
        format!("{self}")
    }
    fn powi(&self, n: i64) -> Self {
        f64::powi(*self, n as i32)
    }
}

/// Arbitrary-precision real backed by `astro-float`.
///
/// The mantissa size is taken from the thread-local setting at construction
/// time (see [`set_big_precision_bits`]); binary operations use the larger
/// of the operand precisions.
#[derive(Clone, Debug)]
pub struct BigReal(BigFloat);

impl BigReal {
    fn prec(&self) -> usize {
        // zero values report mantissa length 0; never run operations at
        // precision 0
        match self.0.precision() {
            Some(p) if p > 0 => p,
            _ => big_precision_bits(),
        }
    }

    fn join(&self, o: &BigReal) -> usize {
        self.prec().max(o.prec())
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }
}

impl PartialEq for BigReal {
    fn eq(&self, o: &Self) -> bool {
        self.0.cmp(&o.0) == Some(0)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        self.0.cmp(&o.0).map(|s| s.cmp(&0))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Real for BigReal {
    fn from_f64(x: f64) -> Self {
        BigReal(BigFloat::from_f64(x, big_precision_bits()))
    }
    fn from_i64(x: i64) -> Self {
        BigReal(BigFloat::from_i64(x, big_precision_bits()))
    }
    fn zero() -> Self {
        Self::from_i64(0)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn add(&self, o: &Self) -> Self {
        BigReal(self.0.add(&o.0, self.join(o), RM))
    }
    fn sub(&self, o: &Self) -> Self {
        BigReal(self.0.sub(&o.0, self.join(o), RM))
    }
    fn mul(&self, o: &Self) -> Self {
        BigReal(self.0.mul(&o.0, self.join(o), RM))
    }
    fn div(&self, o: &Self) -> Self {
        BigReal(self.0.div(&o.0, self.join(o), RM))
    }
    fn neg(&self) -> Self {
        BigReal(self.0.neg())
    }
    fn abs(&self) -> Self {
        BigReal(self.0.abs())
    }
    fn sqrt(&self) -> Self {
        BigReal(self.0.sqrt(self.prec(), RM))
    }
    fn exp(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.exp(self.prec(), RM, &mut cc.borrow_mut())))
    }
    fn ln(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.ln(self.prec(), RM, &mut cc.borrow_mut())))
    }
    fn sin(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.sin(self.prec(), RM, &mut cc.borrow_mut())))
    }
    fn cos(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.cos(self.prec(), RM, &mut cc.borrow_mut())))
    }
    fn atan(&self) -> Self {
        CONSTS.with(|cc| BigReal(self.0.atan(self.prec(), RM, &mut cc.borrow_mut())))
    }
    fn pi() -> Self {
        CONSTS.with(|cc| BigReal(cc.borrow_mut().pi(big_precision_bits(), RM)))
    }
    fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        // mantissa words are little-endian; value = sign * 0.m * 2^e
        let mut v = 0.0f64;
        let mut scale = 1.0f64 / 18446744073709551616.0; // 2^-64
        for w in words.iter().rev().take(2) {
            v += (*w as f64) * scale;
            scale /= 18446744073709551616.0;
        }
        let r = v * 2f64.powi(e);
        if sign == astro_float::Sign::Neg {
            -r
        } else {
            r
        }
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn decimal_digits() -> u32 {
        (big_precision_bits() as f64 / std::f64::consts::LOG2_10) as u32
    }
    fn from_decimal_str(s: &str) -> Option<Self> {
        let v = CONSTS.with(|cc| {
            BigFloat::parse(s, Radix::Dec, big_precision_bits(), RM, &mut cc.borrow_mut())
        });
        if v.is_nan() {
            None
        } else {
            Some(BigReal(v))
        }
    }
    fn to_decimal_string(&self) -> String {
        CONSTS
            .with(|cc| self.0.format(Radix::Dec, RM, &mut cc.borrow_mut()))
            .unwrap_or_else(|_| "nan".into())
    }
}

/// Complex number over a [`Real`] backend, principal branches throughout.
#[derive(Clone, PartialEq)]
pub struct Complex<T: Real> {
    pub re: T,
    pub im: T,
}

impl<T: Real> fmt::Debug for Complex<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl<T: Real> Complex<T> {
    pub fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }

    pub fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Complex::new(T::one(), T::zero())
    }

    pub fn i() -> Self {
        Complex::new(T::zero(), T::one())
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Complex::new(T::from_f64(re), T::from_f64(im))
    }

    pub fn from_i64(x: i64) -> Self {
        Complex::new(T::from_i64(x), T::zero())
    }

    pub fn from_real(re: T) -> Self {
        Complex::new(re, T::zero())
    }

    pub fn is_exact_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), self.im.neg())
    }

    pub fn add(&self, o: &Self) -> Self {
        Complex::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Complex::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> Self {
        Complex::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Complex::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn scale(&self, s: &T) -> Self {
        Complex::new(self.re.mul(s), self.im.mul(s))
    }

    pub fn div(&self, o: &Self) -> Self {
        let d = o.re.mul(&o.re).add(&o.im.mul(&o.im));
        Complex::new(
            self.re.mul(&o.re).add(&self.im.mul(&o.im)).div(&d),
            self.im.mul(&o.re).sub(&self.re.mul(&o.im)).div(&d),
        )
    }

    pub fn inv(&self) -> Self {
        Complex::one().div(self)
    }

    pub fn norm_sqr(&self) -> T {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    /// Modulus |z|, scaled to survive squaring of huge components.
    pub fn abs(&self) -> T {
        let (ra, ia) = (self.re.abs(), self.im.abs());
        if ia.is_zero() {
            return ra;
        }
        if ra.is_zero() {
            return ia;
        }
        let (big, small) = if ra >= ia { (ra, ia) } else { (ia, ra) };
        let t = small.div(&big);
        big.mul(&T::one().add(&t.mul(&t)).sqrt())
    }

    /// Principal argument in (-pi, pi].
    pub fn arg(&self) -> T {
        self.im.atan2(&self.re)
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        Complex::new(m.mul(&self.im.cos()), m.mul(&self.im.sin()))
    }

    /// Principal logarithm, ln|z| + i arg z. Caller must exclude z = 0.
    pub fn ln(&self) -> Self {
        Complex::new(self.abs().ln(), self.arg())
    }

    pub fn powi(&self, n: i64) -> Self {
        if n == 0 {
            return Complex::one();
        }
        let mut base = if n < 0 { self.inv() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Complex::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Principal power z^(n/d) = exp((n/d) ln z); z = 0 maps to 0 for
    /// positive exponents and to 1 for n = 0.
    pub fn pow_rational(&self, num: i64, den: i64) -> Self {
        if num == 0 {
            return Complex::one();
        }
        if self.is_exact_zero() {
            return Complex::zero();
        }
        if den == 1 || den == -1 {
            return self.powi(num * den.signum());
        }
        let e = T::from_i64(num).div(&T::from_i64(den));
        self.ln().scale(&e).exp()
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        self.pow_rational(1, 2)
    }

    /// |self - o| <= eps, cheap half-plane metric (max of component diffs).
    pub fn approx_eq(&self, o: &Self, eps: &T) -> bool {
        self.sub(o).abs() <= *eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_complex_basics() {
        let a: Complex<f64> = Complex::from_f64(1.0, 2.0);
        let b = Complex::from_f64(3.0, -1.0);
        let p = a.mul(&b);
        assert_eq!((p.re, p.im), (5.0, 5.0));
        let q = p.div(&b);
        assert!(q.sub(&a).abs() < 1e-14);
        let r = a.powi(3);
        // (1+2i)^3 = 1 + 6i - 12 - 8i = -11 - 2i
        assert!((r.re + 11.0).abs() < 1e-12 && (r.im + 2.0).abs() < 1e-12);
    }

    #[test]
    fn principal_roots_f64() {
        let four: Complex<f64> = Complex::from_f64(4.0, 0.0);
        let s = four.pow_rational(1, 2);
        assert!((s.re - 2.0).abs() < 1e-14 && s.im.abs() < 1e-14);
        let m1: Complex<f64> = Complex::from_f64(-1.0, 0.0);
        let s = m1.sqrt();
        assert!(s.re.abs() < 1e-14 && (s.im - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bigreal_sqrt2_digits() {
        set_big_precision_bits(192);
        let two = BigReal::from_i64(2);
        let s = two.sqrt();
        let expected = BigReal::from_decimal_str(
            "1.41421356237309504880168872420969807856967187537694",
        )
        .unwrap();
        let err = s.sub(&expected).abs();
        assert!(err < BigReal::from_decimal_str("1e-50").unwrap(), "err {err:?}");
    }

    #[test]
    fn bigreal_complex_exp_ln_roundtrip() {
        set_big_precision_bits(192);
        let z: Complex<BigReal> = Complex::from_f64(0.7, -1.3);
        let w = z.ln().exp();
        let err = w.sub(&z).abs();
        assert!(err < BigReal::from_decimal_str("1e-52").unwrap());
    }

    #[test]
    fn bigreal_to_f64() {
        set_big_precision_bits(192);
        let x = BigReal::from_decimal_str("-123.456789").unwrap();
        assert!((x.to_f64() + 123.456789).abs() < 1e-12);
        assert_eq!(BigReal::zero().to_f64(), 0.0);
    }

    #[test]
    fn atan2_quadrants() {
        set_big_precision_bits(192);
        for (y, x) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (1.0, 0.0), (-1.0, 0.0)] {
            let b = BigReal::from_f64(y).atan2(&BigReal::from_f64(x));
            assert!(
                (b.to_f64() - y.atan2(x)).abs() < 1e-15,
                "atan2({y},{x}): {} vs {}",
                b.to_f64(),
                y.atan2(x)
            );
        }
    }

    #[test]
    fn decimal_string_roundtrip() {
        set_big_precision_bits(192);
        let x = BigReal::from_f64(0.1).div(&BigReal::from_f64(0.3));
        let s = x.to_decimal_string();
        let y = BigReal::from_decimal_str(&s).unwrap();
        assert!(x.sub(&y).abs() < BigReal::from_decimal_str("1e-50").unwrap());
    }
}
