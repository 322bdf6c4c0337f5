//! Numeric context: exact rationals for exponents and slopes, the fixed
//! parameter q with |q| > 1, tolerances, and principal-branch powers of q.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{set_big_precision_bits, BigReal, Complex, Real};

/// Exact rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::Ratio<i64>;

/// Builds `n/d`, normalizing sign and reducing. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Exact rational arithmetic and comparison; division by zero is an error.
pub fn rational_div(a: Rational, b: Rational) -> Result<Rational> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(a / b)
}

/// The numeric field every computation runs in: the parameter q (|q| > 1),
/// the working precision, the comparison tolerance, and the default series
/// truncation order. Immutable after construction.
#[derive(Clone, Debug)]
pub struct NumericContext<T: Real> {
    q: Complex<T>,
    precision: u32,
    tol: T,
    series_truncation: i64,
}

impl<T: Real> NumericContext<T> {
    /// Builds a context; rejects |q| <= 1, non-positive tolerances and
    /// truncation orders.
    pub fn new(q: Complex<T>, precision: u32, tol: T, series_truncation: i64) -> Result<Self> {
        if !(q.abs() > T::one()) {
            return Err(Error::InvalidContext("|q| must exceed 1".into()));
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidContext("tolerance must be positive".into()));
        }
        if series_truncation < 1 {
            return Err(Error::InvalidContext(
                "series truncation must be positive".into(),
            ));
        }
        Ok(NumericContext {
            q,
            precision,
            tol,
            series_truncation,
        })
    }

    pub fn q(&self) -> &Complex<T> {
        &self.q
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn tol(&self) -> &T {
        &self.tol
    }

    pub fn series_truncation(&self) -> i64 {
        self.series_truncation
    }

    pub fn with_truncation(&self, n: i64) -> Self {
        let mut c = self.clone();
        c.series_truncation = n.max(1);
        c
    }

    /// Derived context with q replaced by q^(1/s) (principal branch), used
    /// when an equation is rewritten in the variable z^(1/s).
    pub fn with_root_of_q(&self, s: i64) -> Result<Self> {
        NumericContext::new(
            self.q.pow_rational(1, s),
            self.precision,
            self.tol.clone(),
            self.series_truncation,
        )
    }

    /// Principal-branch power q^e for a rational exponent. Powers combine
    /// exactly: q^a * q^b = q^(a+b) up to rounding, because the value is
    /// exp(e * Log q) with a single principal logarithm.
    pub fn q_power(&self, e: Rational) -> Complex<T> {
        self.q.pow_rational(*e.numer(), *e.denom())
    }

    /// Integer power of q.
    pub fn q_powi(&self, k: i64) -> Complex<T> {
        self.q.powi(k)
    }

    /// |q| as a real.
    pub fn q_abs(&self) -> T {
        self.q.abs()
    }

    /// True when x is within tol of zero in modulus.
    pub fn is_small(&self, x: &Complex<T>) -> bool {
        x.abs() <= self.tol
    }
}

impl NumericContext<f64> {
    /// Double-precision context with the default tolerance 1e-10.
    pub fn double(q: Complex<f64>, series_truncation: i64) -> Result<Self> {
        NumericContext::new(q, 15, 1e-10, series_truncation)
    }
}

impl NumericContext<BigReal> {
    /// High-precision context carrying `digits` significant decimal digits
    /// (at least 50 by default elsewhere); tolerance defaults to 1e-30.
    pub fn high(q: Complex<BigReal>, digits: u32, series_truncation: i64) -> Result<Self> {
        set_big_precision_bits(((digits as f64) * std::f64::consts::LOG2_10) as usize + 32);
        let tol = BigReal::from_decimal_str("1e-30").expect("tol literal");
        NumericContext::new(q, digits, tol, series_truncation)
    }
}

/// Common denominator helper: lcm of the two denominators.
pub fn common_denominator(a: Rational, b: Rational) -> i64 {
    num_integer::lcm(*a.denom(), *b.denom())
}

/// Formats a rational as `t/s` (or plain integer when s = 1).
pub fn rational_str(r: Rational) -> String {
    if *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/r`, or a decimal-free signed integer as a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(rat(n, d))
    } else {
        let n: i64 = s.parse().ok()?;
        Some(Rational::from_integer(n))
    }
}

/// True when r is a negative rational.
pub fn is_negative(r: Rational) -> bool {
    r.is_negative()
}
