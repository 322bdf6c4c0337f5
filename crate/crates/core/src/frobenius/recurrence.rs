//! Stratified coefficient recurrences for one resonance class.
//!
//! A class with base character c and shift multiset 0 = m_0 <= ... <= m_k
//! contributes k+1 solutions. The J-th one is built as
//!
//! ```text
//! S_J = sum_{v=0..J} ell^v * e_c * H_v(z)
//! ```
//!
//! ell the q-logarithm symbol (sigma ell = ell + 1, powers expanding
//! binomially) and e_c the character symbol (sigma e_c = c e_c). Writing
//! L^(r)[j, d] = sum_k k^r c^k q^(kd) a_{k,j}, the stratum-v equation at
//! index m reads
//!
//! ```text
//! sum_{u >= v} C(u, v) sum_{j+d=m} L^(u-v)[j, d] h_{u,d} = 0.
//! ```
//!
//! The pivot multiplying h_{v,m} is the characteristic value
//! L^(0)[0, m] = pi(c q^m); it vanishes exactly at the class shifts, where
//! a coefficient either becomes a free parameter or forces a consistency
//! constraint. Coefficients are carried as affine combinations of the
//! pending free parameters; each constraint eliminates one parameter, and
//! the survivors are fixed at the end (top stratum scale 1, middle strata
//! 0, first free coefficient of the newest series 1, later ones 0).

use crate::error::{Error, Result};
use crate::numctx::NumericContext;
use crate::scalar::{Complex, Real};
use crate::series::{PuiseuxSeries, Trunc};

fn cheap_mag<T: Real>(c: &Complex<T>) -> T {
    c.re.abs().add(&c.im.abs())
}

/// Coefficient value as base + sum coeff_i * param_i.
#[derive(Clone, Debug)]
struct Affine<T: Real> {
    base: Complex<T>,
    deps: Vec<(u32, Complex<T>)>,
}

impl<T: Real> Affine<T> {
    fn zero() -> Self {
        Affine {
            base: Complex::zero(),
            deps: vec![],
        }
    }

    fn param(id: u32) -> Self {
        Affine {
            base: Complex::zero(),
            deps: vec![(id, Complex::one())],
        }
    }

    fn add_scaled(&mut self, o: &Affine<T>, f: &Complex<T>) {
        self.base = self.base.add(&o.base.mul(f));
        for (id, c) in &o.deps {
            let add = c.mul(f);
            match self.deps.iter_mut().find(|(i, _)| i == id) {
                Some((_, existing)) => *existing = existing.add(&add),
                None => self.deps.push((*id, add)),
            }
        }
    }

    fn scale(&self, f: &Complex<T>) -> Self {
        Affine {
            base: self.base.mul(f),
            deps: self.deps.iter().map(|(i, c)| (*i, c.mul(f))).collect(),
        }
    }

    /// Replaces one parameter by an affine expression over the others.
    fn substitute(&mut self, id: u32, repl: &Affine<T>) {
        if let Some(pos) = self.deps.iter().position(|(i, _)| *i == id) {
            let (_, c) = self.deps.remove(pos);
            self.add_scaled(repl, &c);
        }
    }

    fn magnitude(&self) -> T {
        let mut m = cheap_mag(&self.base);
        for (_, c) in &self.deps {
            m = m.add(&cheap_mag(c));
        }
        m
    }

    fn resolve(&self, values: &[Complex<T>]) -> Complex<T> {
        let mut v = self.base.clone();
        for (id, c) in &self.deps {
            v = v.add(&c.mul(&values[*id as usize]));
        }
        v
    }
}

/// Dense height-normalized operator table a_{k,j}.
pub struct OperatorTable<T: Real> {
    /// rows[k][j] = coefficient of z^j in a_k (after the height shift)
    rows: Vec<Vec<Complex<T>>>,
    /// column indices j >= 1 with any nonzero entry, ascending
    nonzero_js: Vec<usize>,
    /// number of orders the recurrence may trust (truncation horizon)
    known_to: i64,
}

impl<T: Real> OperatorTable<T> {
    pub fn new(coeffs: &[PuiseuxSeries<T>], height: i64, want: i64) -> Self {
        let mut known_to = want;
        for a in coeffs {
            if let Trunc::At(t) = a.trunc() {
                known_to = known_to.min(t - height);
            }
        }
        known_to = known_to.max(0);
        let cols = known_to as usize;
        let mut rows = Vec::with_capacity(coeffs.len());
        let mut nonzero = vec![false; cols];
        for a in coeffs {
            let mut row = vec![Complex::<T>::zero(); cols];
            for (num, c) in a.iter() {
                let j = num - height;
                if j >= 0 && (j as usize) < cols && !c.is_exact_zero() {
                    row[j as usize] = c.clone();
                    nonzero[j as usize] = true;
                }
            }
            rows.push(row);
        }
        let nonzero_js = nonzero
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(j, nz)| nz.then_some(j))
            .collect();
        OperatorTable {
            rows,
            nonzero_js,
            known_to,
        }
    }

    pub fn known_to(&self) -> i64 {
        self.known_to
    }

    fn order(&self) -> usize {
        self.rows.len() - 1
    }
}

/// Strata series of the J-th solution of a class: strata[v] is H_v, the
/// ell^v series over the base character, unramified, truncated at the
/// working order.
pub struct StratifiedSolution<T: Real> {
    pub strata: Vec<PuiseuxSeries<T>>,
}

pub struct ClassSpec<'a, T: Real> {
    pub base: &'a Complex<T>,
    /// sorted shift multiset, starting at 0
    pub shifts: &'a [i64],
}

/// Runs the stratified recurrence for solution index J (0-based) of the
/// class, producing coefficients for indices 0..n_trunc.
pub fn solve_stratified<T: Real>(
    table: &OperatorTable<T>,
    ctx: &NumericContext<T>,
    class: &ClassSpec<T>,
    j_solution: usize,
    n_trunc: i64,
) -> Result<StratifiedSolution<T>> {
    let strata_count = j_solution + 1;
    let n = table.known_to().min(n_trunc);
    if n <= 0 {
        return Err(Error::Solve("empty working range for recurrence".into()));
    }
    let order = table.order();

    // weights[k][d] = c^k q^(kd), built incrementally
    let qk: Vec<Complex<T>> = (0..=order).map(|k| ctx.q_powi(k as i64)).collect();
    let mut weights: Vec<Vec<Complex<T>>> = Vec::with_capacity(order + 1);
    let mut ck = Complex::one();
    for k in 0..=order {
        if k > 0 {
            ck = ck.mul(class.base);
        }
        let mut row = Vec::with_capacity(n as usize);
        let mut w = ck.clone();
        for _ in 0..n {
            row.push(w.clone());
            w = w.mul(&qk[k]);
        }
        weights.push(row);
    }
    // k^r factors
    let kpow = |k: usize, r: u32| -> i64 { (k as i64).pow(r) };
    let l_value = |r: u32, j: usize, d: i64| -> Complex<T> {
        let mut acc = Complex::zero();
        for (k, row) in table.rows.iter().enumerate() {
            let a = &row[j];
            if a.is_exact_zero() {
                continue;
            }
            let mut term = weights[k][d as usize].mul(a);
            if r > 0 {
                term = term.scale(&T::from_i64(kpow(k, r)));
            }
            acc = acc.add(&term);
        }
        acc
    };

    let ztol = ctx.tol().mul(&T::from_f64(1e-2));
    let mut h: Vec<Vec<Affine<T>>> = vec![Vec::with_capacity(n as usize); strata_count];
    // (stratum, index, eliminated)
    let mut params: Vec<(usize, i64, bool)> = Vec::new();

    for m in 0..n {
        let pivot = l_value(0, 0, m);
        let mut pivot_scale = T::one();
        for (k, row) in table.rows.iter().enumerate() {
            if !row[0].is_exact_zero() {
                pivot_scale = pivot_scale.add(&cheap_mag(&weights[k][m as usize].mul(&row[0])));
            }
        }
        let pivot_small = pivot.abs() <= ztol.mul(&pivot_scale);

        for v in (0..strata_count).rev() {
            // everything in the stratum-v equation except pivot * h_{v,m}
            let mut rest = Affine::<T>::zero();
            let mut scale = T::one();
            for &j in &table.nonzero_js {
                if j as i64 > m {
                    break;
                }
                let d = m - j as i64;
                let lval = l_value(0, j, d);
                if lval.is_exact_zero() {
                    continue;
                }
                let hv = &h[v][d as usize];
                scale = scale.add(&cheap_mag(&lval).mul(&hv.magnitude()));
                rest.add_scaled(hv, &lval);
            }
            for u in v + 1..strata_count {
                let r = (u - v) as u32;
                let bin = Complex::from_i64(binomial(u, v));
                for j in std::iter::once(0usize).chain(table.nonzero_js.iter().copied()) {
                    if j as i64 > m {
                        break;
                    }
                    let d = m - j as i64;
                    // at j = 0 this touches h_{u,m}, already computed this
                    // round because strata are processed top-down
                    let hu = &h[u][d as usize];
                    let lval = l_value(r, j, d).mul(&bin);
                    if lval.is_exact_zero() {
                        continue;
                    }
                    scale = scale.add(&cheap_mag(&lval).mul(&hu.magnitude()));
                    rest.add_scaled(hu, &lval);
                }
            }

            if pivot_small {
                if !class.shifts.contains(&m) {
                    return Err(Error::UnexpectedResonance { index: m });
                }
                let thr = ztol.mul(&scale);
                if rest.magnitude() > thr {
                    // consistency constraint: eliminate the parameter with
                    // the strongest highest-stratum footprint
                    let mut best: Option<(u32, Complex<T>)> = None;
                    let mut best_key = (0usize, i64::MAX);
                    for (id, c) in &rest.deps {
                        if cheap_mag(c) <= thr {
                            continue;
                        }
                        let (ps, pi, _) = params[*id as usize];
                        let key = (ps, pi);
                        let better = match &best {
                            None => true,
                            Some(_) => {
                                key.0 > best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1)
                            }
                        };
                        if better {
                            best = Some((*id, c.clone()));
                            best_key = key;
                        }
                    }
                    let Some((id, coeff)) = best else {
                        return Err(Error::Solve(format!(
                            "inconsistent stratified recurrence at index {m}"
                        )));
                    };
                    let mut repl = rest.clone();
                    repl.deps.retain(|(i, _)| *i != id);
                    let repl = repl.scale(&coeff.inv().neg());
                    params[id as usize].2 = true;
                    for column in h.iter_mut() {
                        for entry in column.iter_mut() {
                            entry.substitute(id, &repl);
                        }
                    }
                }
                let id = params.len() as u32;
                params.push((v, m, false));
                h[v].push(Affine::param(id));
            } else {
                h[v].push(rest.scale(&pivot.inv().neg()));
            }
        }
    }

    // fix the surviving free parameters
    let mut values = vec![Complex::<T>::zero(); params.len()];
    let top = strata_count - 1;
    let mut top_assigned = false;
    let mut lead_assigned = false;
    for (idx, (stratum, _index, eliminated)) in params.iter().enumerate() {
        if *eliminated {
            continue;
        }
        if *stratum == top && !top_assigned {
            values[idx] = Complex::one();
            top_assigned = true;
            if top == 0 {
                lead_assigned = true;
            }
        } else if *stratum == 0 && !lead_assigned {
            values[idx] = Complex::one();
            lead_assigned = true;
        }
    }

    let strata = h
        .into_iter()
        .map(|column| {
            let coeffs: Vec<Complex<T>> = column.iter().map(|a| a.resolve(&values)).collect();
            PuiseuxSeries::new(1, 0, coeffs, Trunc::At(n))
        })
        .collect();
    Ok(StratifiedSolution { strata })
}

fn binomial(n: usize, k: usize) -> i64 {
    let mut r = 1i64;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}
