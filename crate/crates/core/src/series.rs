//! Truncated Puiseux series in z with complex coefficients: arithmetic, the
//! sigma_q action, z-adic valuation, and ramification changes.
//!
//! A series stores coefficients of z^((offset+i)/ram) for i = 0..len. The
//! truncation is tracked per value: `Trunc::At(t)` means exponents with
//! numerator >= t are unknown, `Trunc::Exact` means all unstored
//! coefficients are exactly zero (polynomials). Arithmetic never reports a
//! coefficient it cannot guarantee.

use num_integer::Integer;

use crate::numctx::{rat, NumericContext, Rational};
use crate::scalar::{Complex, Real};

/// Where knowledge of the coefficients ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trunc {
    /// Polynomial: every unstored coefficient is exactly zero.
    Exact,
    /// Exponent numerators >= this value are unknown.
    At(i64),
}

impl Trunc {
    pub fn min_with(self, o: Trunc) -> Trunc {
        match (self, o) {
            (Trunc::Exact, t) | (t, Trunc::Exact) => t,
            (Trunc::At(a), Trunc::At(b)) => Trunc::At(a.min(b)),
        }
    }

    pub fn shifted(self, k: i64) -> Trunc {
        match self {
            Trunc::Exact => Trunc::Exact,
            Trunc::At(t) => Trunc::At(t + k),
        }
    }

    pub fn scaled(self, m: i64) -> Trunc {
        match self {
            Trunc::Exact => Trunc::Exact,
            Trunc::At(t) => Trunc::At(t * m),
        }
    }
}

/// Truncated series sum_i c_i z^((offset+i)/ram).
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries<T: Real> {
    ram: i64,
    offset: i64,
    coeffs: Vec<Complex<T>>,
    trunc: Trunc,
}

impl<T: Real> PuiseuxSeries<T> {
    fn normalized(mut self) -> Self {
        // trim exactly-zero leading coefficients; tiny floats stay put
        let lead = self.coeffs.iter().take_while(|c| c.is_exact_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.offset += lead as i64;
        }
        if self.trunc == Trunc::Exact {
            while self.coeffs.last().is_some_and(|c| c.is_exact_zero()) {
                self.coeffs.pop();
            }
        }
        if self.coeffs.is_empty() {
            self.offset = match self.trunc {
                Trunc::Exact => 0,
                Trunc::At(t) => t,
            };
        }
        debug_assert!(self.ram >= 1);
        if let Trunc::At(t) = self.trunc {
            debug_assert_eq!(self.offset + self.coeffs.len() as i64, t.max(self.offset));
        }
        self
    }

    pub fn new(ram: i64, offset: i64, coeffs: Vec<Complex<T>>, trunc: Trunc) -> Self {
        assert!(ram >= 1, "ramification must be positive");
        let mut s = PuiseuxSeries {
            ram,
            offset,
            coeffs,
            trunc,
        };
        if let Trunc::At(t) = trunc {
            // pad or cut so the stored range is exactly [offset, t)
            let want = (t - s.offset).max(0) as usize;
            s.coeffs.resize(want, Complex::zero());
        }
        s.normalized()
    }

    /// Exact zero polynomial.
    pub fn zero(ram: i64) -> Self {
        PuiseuxSeries::new(ram, 0, vec![], Trunc::Exact)
    }

    /// Zero up to the given truncation.
    pub fn zero_truncated(ram: i64, trunc: i64) -> Self {
        PuiseuxSeries::new(ram, trunc, vec![], Trunc::At(trunc))
    }

    /// The constant 1 as an exact polynomial.
    pub fn one(ram: i64) -> Self {
        PuiseuxSeries::monomial(Complex::one(), 0, ram)
    }

    /// c * z^(num/ram), exact.
    pub fn monomial(c: Complex<T>, num: i64, ram: i64) -> Self {
        PuiseuxSeries::new(ram, num, vec![c], Trunc::Exact)
    }

    /// Exact polynomial in integer powers of z from dense coefficients
    /// (constant term first).
    pub fn from_int_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        PuiseuxSeries::new(1, 0, coeffs, Trunc::Exact)
    }

    pub fn ram(&self) -> i64 {
        self.ram
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterates (exponent numerator, coefficient) over stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &Complex<T>)> {
        let off = self.offset;
        self.coeffs.iter().enumerate().map(move |(i, c)| (off + i as i64, c))
    }

    /// Coefficient of z^(num/ram) if it is known; `None` past truncation.
    pub fn coeff(&self, num: i64) -> Option<Complex<T>> {
        if let Trunc::At(t) = self.trunc {
            if num >= t {
                return None;
            }
        }
        if num < self.offset || num >= self.offset + self.coeffs.len() as i64 {
            Some(Complex::zero())
        } else {
            Some(self.coeffs[(num - self.offset) as usize].clone())
        }
    }

    /// Coefficient of z^e for rational e; zero when e is off-grid.
    pub fn coeff_rational(&self, e: Rational) -> Option<Complex<T>> {
        let num = e * Rational::from_integer(self.ram);
        if !num.is_integer() {
            return Some(Complex::zero());
        }
        self.coeff(*num.numer())
    }

    /// Re-grids onto a ramification that is a multiple of the current one.
    pub fn with_ram(&self, new_ram: i64) -> Self {
        assert!(new_ram % self.ram == 0, "ramification must refine");
        let k = new_ram / self.ram;
        if k == 1 {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() * k as usize);
        for c in &self.coeffs {
            coeffs.push(c.clone());
            for _ in 1..k {
                coeffs.push(Complex::zero());
            }
        }
        PuiseuxSeries::new(new_ram, self.offset * k, coeffs, self.trunc.scaled(k))
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let r = a.ram.lcm(&b.ram);
        (a.with_ram(r), b.with_ram(r))
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in &mut s.coeffs {
            *c = c.neg();
        }
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = Self::common(self, o);
        let trunc = a.trunc.min_with(b.trunc);
        let offset = a.offset.min(b.offset);
        let end = match trunc {
            Trunc::At(t) => t,
            Trunc::Exact => (a.offset + a.coeffs.len() as i64).max(b.offset + b.coeffs.len() as i64),
        };
        let mut coeffs = Vec::with_capacity((end - offset).max(0) as usize);
        for num in offset..end {
            let x = a.coeff(num).unwrap_or_else(Complex::zero);
            let y = b.coeff(num).unwrap_or_else(Complex::zero);
            coeffs.push(x.add(&y));
        }
        PuiseuxSeries::new(a.ram, offset, coeffs, trunc)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Complex<T>) -> Self {
        let mut s = self.clone();
        for x in &mut s.coeffs {
            *x = x.mul(c);
        }
        s.normalized()
    }

    /// Multiplies by the monomial c * z^(num/ram).
    pub fn mul_monomial(&self, c: &Complex<T>, num: i64) -> Self {
        let mut s = self.scale(c);
        s.offset += num;
        s.trunc = s.trunc.shifted(num);
        s
    }

    /// Multiplies by z^(num/ram).
    pub fn shift_exponent(&self, num: i64) -> Self {
        let mut s = self.clone();
        s.offset += num;
        s.trunc = s.trunc.shifted(num);
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = Self::common(self, o);
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            // zero (exactly, or up to the product truncation rule)
            let trunc = match (a.trunc, b.trunc) {
                (Trunc::Exact, Trunc::Exact) => Trunc::Exact,
                _ => a.trunc.shifted(b.offset).min_with(b.trunc.shifted(a.offset)),
            };
            return match trunc {
                Trunc::Exact => PuiseuxSeries::zero(a.ram),
                Trunc::At(t) => PuiseuxSeries::zero_truncated(a.ram, t),
            };
        }
        let offset = a.offset + b.offset;
        // unknown tail of a hits b's leading term at a.trunc + b.offset
        let trunc = a.trunc.shifted(b.offset).min_with(b.trunc.shifted(a.offset));
        let full_end = offset + (a.coeffs.len() + b.coeffs.len()) as i64 - 1;
        let end = match trunc {
            Trunc::At(t) => t,
            Trunc::Exact => full_end,
        };
        let n = (end - offset).max(0) as usize;
        let mut coeffs = vec![Complex::<T>::zero(); n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_exact_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                let k = i + j;
                if k >= n {
                    break;
                }
                if y.is_exact_zero() {
                    continue;
                }
                coeffs[k] = coeffs[k].add(&x.mul(y));
            }
        }
        PuiseuxSeries::new(a.ram, offset, coeffs, trunc)
    }

    /// Drops knowledge at and beyond exponent numerator t.
    pub fn truncate_at(&self, t: i64) -> Self {
        let trunc = self.trunc.min_with(Trunc::At(t));
        let keep = ((t - self.offset).max(0) as usize).min(self.coeffs.len());
        PuiseuxSeries::new(self.ram, self.offset, self.coeffs[..keep].to_vec(), trunc)
    }

    /// Applies sigma_q^k: the coefficient of z^(m/ram) picks up q^(k m/ram).
    pub fn sigma_pow(&self, ctx: &NumericContext<T>, k: i64) -> Self {
        if k == 0 {
            return self.clone();
        }
        let step = ctx.q_power(rat(k, self.ram));
        let mut w = ctx.q_power(rat(k * self.offset, self.ram));
        let mut s = self.clone();
        for c in &mut s.coeffs {
            *c = c.mul(&w);
            w = w.mul(&step);
        }
        s.normalized()
    }

    /// z-adic valuation: exponent of the first coefficient above the noise
    /// threshold tol * max(1, largest coefficient magnitude); `None` when
    /// nothing below the truncation qualifies.
    pub fn valuation(&self, tol: &T) -> Option<Rational> {
        let mut maxabs = T::one();
        for c in &self.coeffs {
            let a = c.abs();
            if a > maxabs {
                maxabs = a;
            }
        }
        let thr = tol.mul(&maxabs);
        for (num, c) in self.iter() {
            if c.abs() > thr {
                return Some(rat(num, self.ram));
            }
        }
        None
    }

    /// Largest coefficient magnitude (zero for an empty series).
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for c in &self.coeffs {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Reinterprets an unramified series a(z) as a(Q^s) in Q = z^(1/s).
    pub fn substitute_root(&self, s_new: i64) -> Self {
        assert_eq!(self.ram, 1, "substitute_root expects an unramified series");
        assert!(s_new >= 1);
        if s_new == 1 {
            return self.clone();
        }
        self.with_ram(s_new).reinterpret_ram(1)
    }

    /// Relabels the grid: same coefficients, new ramification. Exponent
    /// numerators keep their values (z^(k/old) becomes z^(k/new)).
    pub fn reinterpret_ram(&self, new_ram: i64) -> Self {
        assert!(new_ram >= 1);
        let mut s = self.clone();
        s.ram = new_ram;
        s
    }

    /// Evaluates at a point given w = z^(1/ram) (principal root chosen by
    /// the caller).
    pub fn eval(&self, w: &Complex<T>) -> Complex<T> {
        let mut acc = Complex::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(w).add(c);
        }
        acc.mul(&w.powi(self.offset))
    }

    /// True when every known coefficient is below tol * max(1, scale).
    pub fn vanishes(&self, tol: &T, scale: &T) -> bool {
        let s = if *scale > T::one() { scale.clone() } else { T::one() };
        let thr = tol.mul(&s);
        self.coeffs.iter().all(|c| c.abs() <= thr)
    }
}
