//! Independent checking of solver output: exact residual substitution of a
//! solution form into an operator, growth classification of coefficient
//! series, and numeric evaluation of solutions.
//!
//! The residual computation is purely mechanical: the shift acts on
//! prefactors through their functional equations (e_c picks up c^j, the
//! q-logarithm symbol shifts to ell + j and expands binomially, theta^r
//! contributes q^(r j(j-1)/2) z^(rj)), and series arithmetic collects each
//! (ell power, character) stratum, which must vanish separately. The
//! q-logarithm stays a formal symbol throughout, so the only approximation
//! anywhere is series truncation and root error.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::frobenius::{q_shift_between, SolutionForm};
use crate::numctx::{rat, NumericContext, Rational};
use crate::operator::DifferenceOperator;
use crate::scalar::{Complex, Real};
use crate::series::{PuiseuxSeries, Trunc};
use crate::special::ThetaEvaluator;

/// One (ell power, character class) stratum of a residual.
#[derive(Clone, Debug)]
pub struct ResidualStratum<T: Real> {
    pub log_power: usize,
    pub character: Complex<T>,
    pub series: PuiseuxSeries<T>,
    /// largest term magnitude that entered the stratum; cancellation is
    /// judged against this
    pub scale: T,
}

#[derive(Clone, Debug)]
pub struct Residual<T: Real> {
    pub strata: Vec<ResidualStratum<T>>,
    /// exponent up to which vanishing is proven by this computation
    pub guaranteed_order: Option<Rational>,
    pub max_abs: T,
    /// max_abs relative to the stratum scales
    pub max_rel: T,
}

impl<T: Real> Residual<T> {
    /// Every stratum vanishes to the given relative tolerance.
    pub fn vanishes(&self, rel_tol: &T) -> bool {
        self.max_rel <= *rel_tol
    }
}

/// Applies the operator to a solution form and collects the residual
/// strata. Truncations propagate honestly through the series arithmetic.
pub fn apply_operator<T: Real>(
    op: &DifferenceOperator<T>,
    sol: &SolutionForm<T>,
) -> Result<Residual<T>> {
    let ctx = op.ctx();
    let s = sol.ramification();
    // theta exponent as a numerator over the s-grid
    let tn_rat = sol.theta_exp * rat(s, 1);
    if !tn_rat.is_integer() {
        return Err(Error::Eval(
            "theta exponent does not live on the series grid".into(),
        ));
    }
    let tn = *tn_rat.numer();
    let flat = sol.strata();
    let top = sol.log_power;

    // accumulate per (log power, character index) with characters collected
    // as encountered
    let mut chars: Vec<Complex<T>> = Vec::new();
    let mut acc: Vec<Vec<Option<PuiseuxSeries<T>>>> = vec![Vec::new(); top + 1];
    let mut scales: Vec<Vec<T>> = vec![Vec::new(); top + 1];
    let char_index = |c: &Complex<T>,
                          chars: &mut Vec<Complex<T>>,
                          acc: &mut Vec<Vec<Option<PuiseuxSeries<T>>>>,
                          scales: &mut Vec<Vec<T>>|
     -> usize {
        for (i, k) in chars.iter().enumerate() {
            if k.sub(c).abs() <= ctx.tol().mul(&k.abs()) {
                return i;
            }
        }
        chars.push(c.clone());
        for row in acc.iter_mut() {
            row.push(None);
        }
        for row in scales.iter_mut() {
            row.push(T::zero());
        }
        chars.len() - 1
    };

    for (u, character, series) in &flat {
        let ci = char_index(character, &mut chars, &mut acc, &mut scales);
        let f = series.with_ram(s);
        for (j, a) in op.coeffs().iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            let j64 = j as i64;
            // sigma^j of theta^r and e_c prefactors
            let theta_const = ctx.q_power(sol.theta_exp * rat(j64 * (j64 - 1) / 2, 1));
            let c_pow = character.powi(j64);
            let factor = theta_const.mul(&c_pow);
            let term = a
                .with_ram(s)
                .mul(&f.sigma_pow(ctx, j64))
                .mul_monomial(&factor, tn * j64);
            let tmax = term.max_abs();
            // ell expansion: (ell + j)^u = sum_v C(u,v) j^(u-v) ell^v
            for v in 0..=*u {
                let coeff = binomial(*u, v) * j64.pow((*u - v) as u32);
                if coeff == 0 {
                    continue;
                }
                let contrib = term.scale(&Complex::from_i64(coeff));
                let mag = tmax.mul(&T::from_i64(coeff.abs()));
                if mag > scales[v][ci] {
                    scales[v][ci] = mag;
                }
                acc[v][ci] = Some(match acc[v][ci].take() {
                    Some(prev) => prev.add(&contrib),
                    None => contrib,
                });
            }
        }
    }

    // merge characters whose ratio is an integer power of the shift base
    // on the s-grid (q^(1/s)) using e_{c p^m} = p^(m(m-1)/2) c^m Q^m e_c
    let p_ctx = ctx.with_root_of_q(s)?;
    let mut merged: Vec<ResidualStratum<T>> = Vec::new();
    for v in 0..=top {
        let mut used = vec![false; chars.len()];
        for i in 0..chars.len() {
            if used[i] || acc[v][i].is_none() {
                continue;
            }
            used[i] = true;
            let mut series_acc = acc[v][i].clone().unwrap();
            let mut scale = scales[v][i].clone();
            // fold later equivalent characters onto this base; pick the
            // smaller-shift side as base
            let base = chars[i].clone();
            let mut parts: Vec<(Complex<T>, PuiseuxSeries<T>, T)> = Vec::new();
            for k in i + 1..chars.len() {
                if used[k] || acc[v][k].is_none() {
                    continue;
                }
                if let Some(_m) = q_shift_between(&chars[k], &base, &p_ctx, 4 * 64)? {
                    used[k] = true;
                    parts.push((
                        chars[k].clone(),
                        acc[v][k].clone().unwrap(),
                        scales[v][k].clone(),
                    ));
                }
            }
            for (c_other, g, sc) in parts {
                // express the other stratum over `base`
                let m = q_shift_between(&c_other, &base, &p_ctx, 4 * 64)?
                    .expect("relation already established");
                let const_factor = p_ctx
                    .q_power(rat(m * (m - 1) / 2, 1))
                    .mul(&base.powi(m));
                series_acc = series_acc.add(&g.mul_monomial(&const_factor, m));
                scale = scale.add(&sc);
            }
            merged.push(ResidualStratum {
                log_power: v,
                character: base,
                series: series_acc,
                scale,
            });
        }
    }

    let mut guaranteed: Option<Rational> = None;
    let mut max_abs = T::zero();
    let mut max_rel = T::zero();
    for st in &merged {
        if let Trunc::At(t) = st.series.trunc() {
            let g = rat(t, s);
            guaranteed = Some(match guaranteed {
                Some(cur) if cur < g => cur,
                _ => g,
            });
        }
        let a = st.series.max_abs();
        if a > max_abs {
            max_abs = a.clone();
        }
        let denom = if st.scale > T::one() {
            st.scale.clone()
        } else {
            T::one()
        };
        let rel = a.div(&denom);
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(Residual {
        strata: merged,
        guaranteed_order: guaranteed,
        max_abs,
        max_rel,
    })
}

fn binomial(n: usize, k: usize) -> i64 {
    let mut r = 1i64;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

/// Growth classification of a coefficient series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthClass {
    Convergent { radius_estimate: f64 },
    QGevrey { order_estimate: f64 },
    Undetermined,
}

/// Fits log |f_e| against e and e^2 over the tail of the available
/// coefficients. A dominant positive quadratic weight w (in units of
/// log |q|) means |f| ~ |q|^(w e^2), the q-Gevrey signature; near-linear
/// data is convergent with the radius read off the linear slope.
pub fn growth_classify<T: Real>(
    series: &PuiseuxSeries<T>,
    ctx: &NumericContext<T>,
) -> Result<GrowthClass> {
    let maxabs = series.max_abs().to_f64();
    if maxabs == 0.0 {
        return Err(Error::TooFewCoefficients(0));
    }
    let floor = maxabs * 1e-280;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter_map(|(num, c)| {
            let a = c.abs().to_f64();
            (a > floor).then(|| (num as f64 / series.ram() as f64, a.ln()))
        })
        .collect();
    if pts.len() < 8 {
        return Err(Error::TooFewCoefficients(pts.len()));
    }
    let tail = &pts[pts.len() / 2..];
    // least squares for y = a + b x + c x^2
    let n = tail.len() as f64;
    let (mut sx, mut sx2, mut sx3, mut sx4) = (0.0, 0.0, 0.0, 0.0);
    let (mut sy, mut sxy, mut sx2y) = (0.0, 0.0, 0.0);
    for &(x, y) in tail {
        let x2 = x * x;
        sx += x;
        sx2 += x2;
        sx3 += x2 * x;
        sx4 += x2 * x2;
        sy += y;
        sxy += x * y;
        sx2y += x2 * y;
    }
    let m = [[n, sx, sx2], [sx, sx2, sx3], [sx2, sx3, sx4]];
    let rhs = [sy, sxy, sx2y];
    let sol = solve3(m, rhs).ok_or_else(|| Error::Eval("degenerate growth fit".into()))?;
    let (b, c) = (sol[1], sol[2]);
    let lq = ctx.q_abs().to_f64().ln();
    let w = c / lq;
    if w > 0.2 {
        Ok(GrowthClass::QGevrey { order_estimate: w })
    } else if w < 0.05 {
        // |f_e| ~ R^-e gives b = -ln R
        Ok(GrowthClass::Convergent {
            radius_estimate: (-b).exp(),
        })
    } else {
        Ok(GrowthClass::Undetermined)
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in 0..3 {
            if r == col {
                continue;
            }
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    Some([b[0] / m[0][0], b[1] / m[1][1], b[2] / m[2][2]])
}

/// Outcome of a numeric evaluation.
#[derive(Clone, Debug)]
pub struct EvalOutcome<T: Real> {
    pub value: Complex<T>,
    /// set when the partial sums failed the Cauchy tail criterion
    pub truncation_dominated: bool,
}

/// Evaluates a solution form at z0: theta(z0)^(t/s) * sum_v ell^v
/// e_{c_v}(z0) F_v(z0^(1/s)), principal branches throughout. `ellq_value`
/// overrides the q-logarithm value (mostly for tests).
pub fn eval_solution<T: Real>(
    ctx: &NumericContext<T>,
    sol: &SolutionForm<T>,
    z0: &Complex<T>,
    ellq_value: Option<Complex<T>>,
) -> Result<EvalOutcome<T>> {
    if z0.is_exact_zero() {
        return Err(Error::Eval("evaluation point must be nonzero".into()));
    }
    let ev = ThetaEvaluator::new(ctx);
    let s = sol.ramification();
    let w = z0.pow_rational(1, s);
    let theta_factor = if sol.theta_exp.is_zero() {
        Complex::one()
    } else {
        if let Some(k) = ev.near_theta_zero(z0) {
            return Err(Error::ThetaZero {
                z: format!("{:?}", z0.re.to_f64()),
                k,
            });
        }
        ev.theta_pow(z0, sol.theta_exp)?
    };
    let ell = if sol.log_power > 0 || ellq_value.is_some() {
        match ellq_value {
            Some(v) => v,
            None => ev.ell_q(z0)?,
        }
    } else {
        Complex::zero()
    };

    let mut value = Complex::zero();
    let mut truncated = false;
    for (v, character, series) in sol.strata() {
        let e_val = close_to_one(character, ctx)
            .then(Complex::one)
            .map_or_else(|| ev.q_character(z0, character), Ok)?;
        let (sum, flag) = eval_series_checked(series, &w, ctx)?;
        let term = e_val.mul(&sum).mul(&ell.powi(v as i64));
        truncated |= flag;
        value = value.add(&term);
    }
    Ok(EvalOutcome {
        value: value.mul(&theta_factor),
        truncation_dominated: truncated,
    })
}

fn close_to_one<T: Real>(c: &Complex<T>, ctx: &NumericContext<T>) -> bool {
    c.sub(&Complex::one()).abs() <= *ctx.tol()
}

/// Horner evaluation with a tail check: strongly growing tail terms are an
/// error, a tail that has not settled under tol sets the truncation flag.
fn eval_series_checked<T: Real>(
    series: &PuiseuxSeries<T>,
    w: &Complex<T>,
    ctx: &NumericContext<T>,
) -> Result<(Complex<T>, bool)> {
    if series.is_empty() {
        return Ok((Complex::zero(), false));
    }
    // polynomials are exact: no tail to worry about
    let exact = matches!(series.trunc(), Trunc::Exact);
    let mut sum = Complex::zero();
    let mut tail: Vec<f64> = Vec::new();
    let mut wp = w.powi(series.offset());
    for (_, c) in series.iter() {
        let term = c.mul(&wp);
        sum = sum.add(&term);
        tail.push(term.abs().to_f64());
        wp = wp.mul(w);
    }
    if exact {
        return Ok((sum, false));
    }
    let keep = tail.len().min(5);
    let tailw = &tail[tail.len() - keep..];
    let scale = sum.abs().to_f64().max(1e-300);
    let settle = ctx.tol().to_f64() * scale.max(1.0);
    let last = *tailw.last().unwrap();
    let growing = keep >= 3 && tailw.windows(2).all(|p| p[1] >= p[0]) && last > settle;
    if growing && last > 1e3 * settle {
        return Err(Error::Eval(
            "series tail grows at the evaluation point (divergent or outside the disk)".into(),
        ));
    }
    Ok((sum, last > settle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{solve, SolveOptions};
    use crate::numctx::NumericContext;

    fn ctx2() -> NumericContext<f64> {
        NumericContext::double(Complex::from_f64(2.0, 0.0), 32).unwrap()
    }

    #[test]
    fn residual_of_hand_built_solution() {
        // F1(z) = sum (q^(n(n-1)/2))^4 / (q^2;q^2)_n (-1)^n z^(2n) solves
        // z^2 S^2 - S + 1
        let ctx = ctx2();
        let op = DifferenceOperator::parse("z^2*S^2 - S + 1", &ctx).unwrap();
        let q: f64 = 2.0;
        let n_max = 9i32;
        let mut coeffs = vec![Complex::<f64>::zero(); 2 * n_max as usize];
        let mut poch = 1.0f64;
        for n in 0..n_max {
            if n > 0 {
                poch *= 1.0 - q.powi(2 * n);
            }
            let v = q.powi(2 * n * (n - 1)) / poch * if n % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[2 * n as usize] = Complex::from_f64(v, 0.0);
        }
        let form = SolutionForm {
            theta_exp: Rational::zero(),
            character: Complex::one(),
            log_power: 0,
            series: PuiseuxSeries::new(1, 0, coeffs, Trunc::At(2 * n_max as i64)),
            tail: vec![],
        };
        let r = apply_operator(&op, &form).unwrap();
        assert!(r.vanishes(&1e-10), "max_rel = {}", r.max_rel);
        assert!(r.guaranteed_order.is_some());
    }

    #[test]
    fn residual_detects_perturbation() {
        let ctx = ctx2();
        let op = DifferenceOperator::parse("(1-S)*(1-q^1/2*S) - z*(1-q^1/3*S)*(1-q^1/5*S)", &ctx)
            .unwrap();
        let basis = solve(&op, SolveOptions::default()).unwrap();
        let sol = &basis.solutions[0];
        let clean = apply_operator(&op, sol).unwrap();
        assert!(clean.vanishes(&1e-10));
        // corrupt one coefficient by 1e-3
        let mut bad = sol.clone();
        let bump = PuiseuxSeries::monomial(Complex::from_f64(1e-3, 0.0), 5, bad.series.ram());
        bad.series = bad.series.add(&bump);
        let dirty = apply_operator(&op, &bad).unwrap();
        assert!(!dirty.vanishes(&1e-10));
        // the residual equals the operator applied to the bump monomial:
        // a coefficient of magnitude ~ 1e-3 * |characteristic factor|
        let expected = op.apply(&bump.sigma_pow(&ctx, 0));
        let got_max = dirty.max_abs;
        let exp_max = expected.max_abs();
        assert!(
            (got_max - exp_max).abs() <= 1e-6 * exp_max,
            "{got_max} vs {exp_max}"
        );
    }

    #[test]
    fn growth_classes() {
        let ctx = ctx2();
        // convergent: f_n = 2^-n
        let conv = PuiseuxSeries::new(
            1,
            0,
            (0..24).map(|n| Complex::from_f64(0.5f64.powi(n), 0.0)).collect(),
            Trunc::At(24),
        );
        match growth_classify(&conv, &ctx).unwrap() {
            GrowthClass::Convergent { radius_estimate } => {
                assert!((radius_estimate - 2.0).abs() < 0.2)
            }
            other => panic!("{other:?}"),
        }
        // q-Gevrey: f_n = q^(n(n-1)/2)
        let gev = PuiseuxSeries::new(
            1,
            0,
            (0..24i32)
                .map(|n| Complex::from_f64(2f64.powi(n * (n - 1) / 2), 0.0))
                .collect(),
            Trunc::At(24),
        );
        match growth_classify(&gev, &ctx).unwrap() {
            GrowthClass::QGevrey { order_estimate } => {
                assert!((order_estimate - 0.5).abs() < 0.1)
            }
            other => panic!("{other:?}"),
        }
        // super-convergent decay is convergent, not q-Gevrey
        let sup = PuiseuxSeries::new(
            1,
            0,
            (0..24i32)
                .map(|n| Complex::from_f64(2f64.powi(-n * n), 0.0))
                .collect(),
            Trunc::At(24),
        );
        assert!(matches!(
            growth_classify(&sup, &ctx).unwrap(),
            GrowthClass::Convergent { .. }
        ));
        // too few coefficients
        let short = PuiseuxSeries::one(1);
        assert!(matches!(
            growth_classify(&short, &ctx),
            Err(Error::TooFewCoefficients(_))
        ));
    }

    #[test]
    fn eval_constant_and_character() {
        let ctx = ctx2();
        let one = SolutionForm {
            theta_exp: Rational::zero(),
            character: Complex::one(),
            log_power: 0,
            series: PuiseuxSeries::one(1),
            tail: vec![],
        };
        let z0 = Complex::from_f64(0.31, 0.17);
        let v = eval_solution(&ctx, &one, &z0, None).unwrap();
        assert!(v.value.sub(&Complex::one()).abs() < 1e-12);
        assert!(!v.truncation_dominated);

        // e_{q,q} solves (S - q) f = 0 and e_{q,q}(z) = z
        let eq = SolutionForm {
            theta_exp: Rational::zero(),
            character: ctx.q().clone(),
            log_power: 0,
            series: PuiseuxSeries::one(1),
            tail: vec![],
        };
        let z0 = Complex::from_f64(0.5, 0.0);
        let v = eval_solution(&ctx, &eq, &z0, None).unwrap();
        assert!(v.value.sub(&z0).abs() < 1e-11, "{:?}", v.value);
    }

    #[test]
    fn eval_log_chain_with_override() {
        // second solution of (1-S)^2: ell * F1 + F2; with the q-logarithm
        // value pinned, the evaluation is the plain strata sum
        let ctx = ctx2();
        let op = DifferenceOperator::parse("(1-S)^2 - z*S^2", &ctx).unwrap();
        let basis = solve(&op, SolveOptions::default()).unwrap();
        let chain = basis.solutions.iter().find(|s| s.log_power == 1).unwrap();
        let z0 = Complex::from_f64(0.03, 0.01);
        let ell = Complex::from_f64(3.7, -0.2);
        let got = eval_solution(&ctx, chain, &z0, Some(ell.clone())).unwrap();
        let mut want = Complex::zero();
        for (v, _, series) in chain.strata() {
            want = want.add(&series.eval(&z0).mul(&ell.powi(v as i64)));
        }
        assert!(got.value.sub(&want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn eval_is_shift_equivariant_for_characters() {
        let ctx = ctx2();
        let lam = Complex::from_f64(3.0, 0.0);
        let form = SolutionForm {
            theta_exp: Rational::zero(),
            character: lam.clone(),
            log_power: 0,
            series: PuiseuxSeries::one(1),
            tail: vec![],
        };
        let z0 = Complex::from_f64(0.4, 0.1);
        let a = eval_solution(&ctx, &form, &z0.mul(ctx.q()), None).unwrap();
        let b = eval_solution(&ctx, &form, &z0, None).unwrap();
        assert!(a.value.sub(&lam.mul(&b.value)).abs() < 1e-10 * a.value.abs());
    }
}
