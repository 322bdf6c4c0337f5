//! Special functions: Jacobi theta, q-Pochhammer products, q-characters,
//! and the q-logarithm, with identity-based self-checks in the tests.
//!
//! Conventions (for |q| > 1):
//!
//! - theta(z) = sum_{d in Z} q^(-d(d+1)/2) z^d, satisfying
//!   theta(qz) = z theta(z);
//! - triple product: theta(z) = (q^-1; q^-1)_inf (-z/q; q^-1)_inf
//!   (-1/z; q^-1)_inf, with zeros exactly at z = -q^k, k in Z;
//! - q-character e_lambda(z) = theta(lambda z)/theta(z), an eigenfunction
//!   of the shift with eigenvalue lambda and e_{q^m}(z) = q^(m(m-1)/2) z^m;
//! - q-logarithm ell(z) = z theta'(z)/theta(z), satisfying
//!   ell(qz) = ell(z) + 1.

use crate::error::{Error, Result};
use crate::numctx::{rat, NumericContext, Rational};
use crate::scalar::{Complex, Real};

/// Number of terms kept on each side of the bilateral theta sum before
/// giving up (ample for any |q| > 1 + 1e-3 at sane tolerances).
const MAX_THETA_TERMS: i64 = 20_000;

/// Evaluator for the theta-based special functions over one context.
#[derive(Clone, Debug)]
pub struct ThetaEvaluator<'a, T: Real> {
    ctx: &'a NumericContext<T>,
    term_bound: i64,
}

/// Finite or infinite product order for [`ThetaEvaluator::q_pochhammer`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PochhammerOrder {
    Finite(u32),
    Infinite,
}

impl<'a, T: Real> ThetaEvaluator<'a, T> {
    pub fn new(ctx: &'a NumericContext<T>) -> Self {
        ThetaEvaluator {
            ctx,
            term_bound: MAX_THETA_TERMS,
        }
    }

    /// Caps the summation cutoff (mostly for tests poking at convergence).
    pub fn with_term_bound(mut self, bound: i64) -> Self {
        self.term_bound = bound.max(1);
        self
    }

    pub fn ctx(&self) -> &NumericContext<T> {
        self.ctx
    }

    /// q-Pochhammer (a; base)_k = prod_{i=1..k} (1 - a base^(i-1)) with the
    /// base supplied by the caller (q or 1/q). The infinite product needs
    /// |base| < 1 and stops once factors settle within tol of 1.
    pub fn q_pochhammer(
        &self,
        a: &Complex<T>,
        k: PochhammerOrder,
        base: &Complex<T>,
    ) -> Result<Complex<T>> {
        let one = Complex::one();
        match k {
            PochhammerOrder::Finite(k) => {
                let mut acc = one.clone();
                let mut t = a.clone();
                for _ in 0..k {
                    acc = acc.mul(&one.sub(&t));
                    t = t.mul(base);
                }
                Ok(acc)
            }
            PochhammerOrder::Infinite => {
                let bm = base.abs();
                if !(bm < T::one()) {
                    return Err(Error::DivergentProduct {
                        modulus: bm.to_f64(),
                    });
                }
                let mut acc = one.clone();
                let mut t = a.clone();
                // stop three orders below tol so the neglected tail cannot
                // surface in tol-level identity checks
                let thr = self.ctx.tol().mul(&T::from_f64(1e-3));
                for _ in 0..self.term_bound {
                    if t.abs() <= thr {
                        return Ok(acc);
                    }
                    acc = acc.mul(&one.sub(&t));
                    t = t.mul(base);
                }
                Err(Error::Eval("infinite product failed to settle".into()))
            }
        }
    }

    /// Cutoff D: smallest D with |q|^(-D(D-1)/2) max(|z|, 1/|z|)^D below
    /// tol * 1e-2, so the first omitted bilateral term is negligible.
    fn cutoff(&self, zabs: &T) -> Result<i64> {
        let lq = self.ctx.q_abs().ln();
        let m = if *zabs > T::one() {
            zabs.clone()
        } else {
            T::one().div(zabs)
        };
        let lm = m.ln();
        let bound = self.ctx.tol().ln().add(&T::from_f64(-100f64.ln()));
        let mut d = 2i64;
        loop {
            // log of the omitted-term magnitude at index d
            let val = T::from_i64(-d * (d - 1) / 2)
                .mul(&lq)
                .add(&T::from_i64(d).mul(&lm));
            if val < bound {
                return Ok(d);
            }
            d += 1;
            if d > self.term_bound {
                return Err(Error::Eval("theta cutoff exceeds term bound".into()));
            }
        }
    }

    /// Index k with z close to the theta zero -q^k, if any.
    pub fn near_theta_zero(&self, z: &Complex<T>) -> Option<i64> {
        let d = self.cutoff(&z.abs()).ok()?;
        let tol = self.ctx.tol();
        for k in -d..=d {
            let qk = self.ctx.q_powi(k);
            let dist = z.add(&qk).abs();
            if dist <= tol.mul(&qk.abs()) {
                return Some(k);
            }
        }
        None
    }

    fn check_not_zero(&self, z: &Complex<T>) -> Result<()> {
        if z.is_exact_zero() {
            return Err(Error::Eval("theta is undefined at z = 0".into()));
        }
        Ok(())
    }

    /// Bilateral series sum_{|d| <= D} q^(-d(d+1)/2) z^d.
    pub fn theta(&self, z: &Complex<T>) -> Result<Complex<T>> {
        self.check_not_zero(z)?;
        let d = self.cutoff(&z.abs())?;
        let zinv = z.inv();
        let mut acc = Complex::one(); // d = 0 term
        // positive side: factor ratio q^{-d} z
        let mut term = Complex::one();
        let qinv = self.ctx.q().inv();
        let mut ratio = z.mul(&qinv);
        for _ in 1..=d {
            term = term.mul(&ratio);
            acc = acc.add(&term);
            ratio = ratio.mul(&qinv);
        }
        // negative side: d = -m, exponent -m(m-1)/2
        let mut term = Complex::one();
        let mut ratio = zinv.clone();
        for _ in 1..=d {
            term = term.mul(&ratio);
            acc = acc.add(&term);
            ratio = ratio.mul(&qinv);
        }
        Ok(acc)
    }

    /// Termwise derivative of the bilateral series,
    /// theta'(z) = sum d q^(-d(d+1)/2) z^(d-1).
    pub fn theta_prime(&self, z: &Complex<T>) -> Result<Complex<T>> {
        self.check_not_zero(z)?;
        let d = self.cutoff(&z.abs())?;
        let mut acc = Complex::zero();
        for k in -d..=d {
            if k == 0 {
                continue;
            }
            let coeff = self.ctx.q_power(rat(-k * (k + 1) / 2, 1));
            acc = acc.add(&coeff.mul(&z.powi(k - 1)).scale(&T::from_i64(k)));
        }
        Ok(acc)
    }

    /// Triple-product form of theta; agrees with the bilateral sum.
    pub fn theta_triple_product(&self, z: &Complex<T>) -> Result<Complex<T>> {
        self.check_not_zero(z)?;
        let qinv = self.ctx.q().inv();
        let a = self.q_pochhammer(&qinv, PochhammerOrder::Infinite, &qinv)?;
        let b = self.q_pochhammer(&z.mul(&qinv).neg(), PochhammerOrder::Infinite, &qinv)?;
        let c = self.q_pochhammer(&z.inv().neg(), PochhammerOrder::Infinite, &qinv)?;
        Ok(a.mul(&b).mul(&c))
    }

    /// q-logarithm ell(z) = z theta'(z)/theta(z); errors on theta zeros.
    pub fn ell_q(&self, z: &Complex<T>) -> Result<Complex<T>> {
        if let Some(k) = self.near_theta_zero(z) {
            return Err(Error::ThetaZero {
                z: format!("{:?}", z.re.to_f64()),
                k,
            });
        }
        let th = self.theta(z)?;
        let tp = self.theta_prime(z)?;
        Ok(z.mul(&tp).div(&th))
    }

    /// q-character e_lambda(z) = theta(lambda z)/theta(z): the shift
    /// eigenfunction with eigenvalue lambda, normalized so that
    /// e_{q^m}(z) = q^(m(m-1)/2) z^m.
    pub fn q_character(&self, z: &Complex<T>, lambda: &Complex<T>) -> Result<Complex<T>> {
        if lambda.is_exact_zero() {
            return Err(Error::Eval("character parameter must be nonzero".into()));
        }
        let lz = lambda.mul(z);
        for (point, label) in [(z, "z"), (&lz, "lambda*z")] {
            if let Some(k) = self.near_theta_zero(point) {
                return Err(Error::ThetaZero {
                    z: format!("{label}"),
                    k,
                });
            }
        }
        Ok(self.theta(&lz)?.div(&self.theta(z)?))
    }

    /// theta(z) raised to a rational power, principal branch.
    pub fn theta_pow(&self, z: &Complex<T>, e: Rational) -> Result<Complex<T>> {
        let th = self.theta(z)?;
        Ok(th.pow_rational(*e.numer(), *e.denom()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigReal;

    fn ctx2() -> NumericContext<f64> {
        NumericContext::double(Complex::from_f64(2.0, 0.0), 32).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::from_f64(re, im)
    }

    #[test]
    fn pochhammer_values() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let q = ctx.q().clone();
        // empty product
        let p0 = ev
            .q_pochhammer(&c(0.3, 0.1), PochhammerOrder::Finite(0), &q)
            .unwrap();
        assert!(p0.sub(&Complex::one()).abs() < 1e-15);
        // (q; q)_2 = (1-2)(1-4) = 3
        let p2 = ev.q_pochhammer(&q, PochhammerOrder::Finite(2), &q).unwrap();
        assert!((p2.re - 3.0).abs() < 1e-14);
        // definition check against an explicit product, k = 5
        let x = c(0.4, -0.2);
        let pk = ev.q_pochhammer(&x, PochhammerOrder::Finite(5), &q).unwrap();
        let mut byhand = Complex::one();
        for i in 1..=5i64 {
            byhand = byhand.mul(&Complex::one().sub(&x.mul(&q.powi(i - 1))));
        }
        assert!(pk.sub(&byhand).abs() < 1e-12);
        // infinite product requires |base| < 1
        assert!(ev
            .q_pochhammer(&x, PochhammerOrder::Infinite, &q)
            .is_err());
        assert!(ev
            .q_pochhammer(&x, PochhammerOrder::Infinite, &q.inv())
            .is_ok());
    }

    #[test]
    fn theta_functional_equation() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let z = c(0.7, 0.0);
        let lhs = ev.theta(&z.scale(&2.0)).unwrap();
        let rhs = z.mul(&ev.theta(&z).unwrap());
        assert!(lhs.sub(&rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn theta_zero_at_minus_one() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let v = ev.theta(&c(-1.0, 0.0)).unwrap();
        assert!(v.abs() < 1e-12);
        assert_eq!(ev.near_theta_zero(&c(-1.0, 0.0)), Some(0));
        assert_eq!(ev.near_theta_zero(&c(-2.0, 0.0)), Some(1));
        assert_eq!(ev.near_theta_zero(&c(0.9, 0.0)), None);
    }

    #[test]
    fn bilateral_matches_triple_product() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let z = c(0.3, 0.1);
        let a = ev.theta(&z).unwrap();
        let b = ev.theta_triple_product(&z).unwrap();
        assert!(a.sub(&b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn ell_q_shift_by_one() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let z = c(0.5, 0.0);
        let l1 = ev.ell_q(&z.scale(&2.0)).unwrap();
        let l0 = ev.ell_q(&z).unwrap();
        assert!(l1.sub(&l0).sub(&Complex::one()).abs() < 1e-11);
        // finite at z = 1
        assert!(ev.ell_q(&c(1.0, 0.0)).unwrap().abs().is_finite());
        // theta zero rejected
        assert!(matches!(
            ev.ell_q(&c(-1.0, 0.0)),
            Err(Error::ThetaZero { .. })
        ));
    }

    #[test]
    fn character_eigenvalue() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let z = c(0.4, 0.0);
        let lam = c(3.0, 0.0);
        let e1 = ev.q_character(&z.scale(&2.0), &lam).unwrap();
        let e0 = ev.q_character(&z, &lam).unwrap();
        let ratio = e1.div(&e0);
        assert!(ratio.sub(&lam).abs() < 1e-11);
        // lambda = 1 gives the constant 1
        let e = ev.q_character(&c(0.23, 0.71), &Complex::one()).unwrap();
        assert!(e.sub(&Complex::one()).abs() < 1e-13);
    }

    #[test]
    fn character_at_q_powers() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let z = c(0.5, 0.0);
        for m in -3i64..=3 {
            let lam = ctx.q_powi(m);
            let e = ev.q_character(&z, &lam).unwrap();
            let expect = ctx.q_power(rat(m * (m - 1) / 2, 1)).mul(&z.powi(m));
            assert!(
                e.sub(&expect).abs() < 1e-11 * expect.abs().max(1e-30),
                "m = {m}: {e:?} vs {expect:?}"
            );
        }
        // spec pin: m = 2, q = 2, z = 0.5 -> q * z^2 = 0.5
        let e = ev.q_character(&z, &c(4.0, 0.0)).unwrap();
        assert!((e.re - 0.5).abs() < 1e-12 && e.im.abs() < 1e-12);
    }

    #[test]
    fn doubling_cutoff_is_stable() {
        let ctx = ctx2();
        let ev = ThetaEvaluator::new(&ctx);
        let z = c(1.7, -0.4);
        let d = ev.cutoff(&z.abs()).unwrap();
        // recompute with a manually extended cutoff: same value within tol
        let mut acc = Complex::zero();
        for k in -2 * d..=2 * d {
            acc = acc.add(&ctx.q_power(rat(-k * (k + 1) / 2, 1)).mul(&z.powi(k)));
        }
        let v = ev.theta(&z).unwrap();
        assert!(v.sub(&acc).abs() < 1e-10);
    }

    #[test]
    fn high_precision_identities() {
        let q: Complex<BigReal> = Complex::from_f64(2.0, 0.0);
        let ctx = NumericContext::high(q, 50, 32).unwrap();
        let ev = ThetaEvaluator::new(&ctx);
        let z: Complex<BigReal> = Complex::from_f64(0.37, 0.21);
        let qz = z.mul(ctx.q());
        let lhs = ev.theta(&qz).unwrap();
        let rhs = z.mul(&ev.theta(&z).unwrap());
        let tol = BigReal::from_decimal_str("1e-31").unwrap();
        assert!(lhs.sub(&rhs).abs() < tol.mul(&rhs.abs()));
        let tp = ev.theta_triple_product(&z).unwrap();
        let bi = ev.theta(&z).unwrap();
        assert!(tp.sub(&bi).abs() < tol.mul(&bi.abs()));
    }
}
