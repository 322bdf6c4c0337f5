//! The q-difference operator datatype: parsing to normal form, canonical
//! printing, companion-matrix vectorialisation, and Wronskian matrices.

mod expr;

pub use expr::{apply_expr, expand, parse_expr, Expr};

use crate::error::{Error, Result};
use crate::numctx::NumericContext;
use crate::scalar::{Complex, Real};
use crate::series::PuiseuxSeries;

/// Normal-form operator sum_{i=0}^n a_i(z) S^i with unramified series
/// coefficients. Both a_0 and a_n are required to be nonzero.
#[derive(Clone, Debug)]
pub struct DifferenceOperator<T: Real> {
    coeffs: Vec<PuiseuxSeries<T>>,
    ctx: NumericContext<T>,
}

impl<T: Real> DifferenceOperator<T> {
    /// Builds from explicit coefficients (index = shift power), trimming
    /// zero leading shifts and validating the standing assumptions.
    pub fn new(mut coeffs: Vec<PuiseuxSeries<T>>, ctx: &NumericContext<T>) -> Result<Self> {
        while coeffs.last().is_some_and(|s| s.is_empty()) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.iter().all(|s| s.is_empty()) {
            return Err(Error::Parse {
                pos: 0,
                msg: "zero operator".into(),
            });
        }
        if coeffs.len() < 2 {
            return Err(Error::Parse {
                pos: 0,
                msg: "order-0 operator: no shift term".into(),
            });
        }
        if coeffs[0].is_empty() {
            return Err(Error::Parse {
                pos: 0,
                msg: "lowest coefficient a_0 vanishes identically; divide the operator by a power of S first".into(),
            });
        }
        debug_assert!(coeffs.iter().all(|s| s.ram() == 1));
        Ok(DifferenceOperator {
            coeffs,
            ctx: ctx.clone(),
        })
    }

    /// Parses the expression grammar into normal form.
    pub fn parse(text: &str, ctx: &NumericContext<T>) -> Result<Self> {
        let tree = parse_expr(text, ctx)?;
        let coeffs = expand(&tree, ctx)?;
        DifferenceOperator::new(coeffs, ctx)
    }

    pub fn ctx(&self) -> &NumericContext<T> {
        &self.ctx
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &PuiseuxSeries<T> {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[PuiseuxSeries<T>] {
        &self.coeffs
    }

    /// Applies the operator to a series: sum_i a_i(z) (sigma^i f).
    pub fn apply(&self, f: &PuiseuxSeries<T>) -> PuiseuxSeries<T> {
        let mut acc = PuiseuxSeries::zero(f.ram());
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            acc = acc.add(&a.mul(&f.sigma_pow(&self.ctx, i as i64)));
        }
        acc
    }

    /// Canonical rendering; reparsing yields the same coefficients.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut first = true;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            let (body, lead_neg) = fmt_coeff_series(a, i);
            if first {
                if lead_neg {
                    out.push('-');
                }
                out.push_str(&body);
                first = false;
            } else if lead_neg {
                out.push_str(" - ");
                out.push_str(&body);
            } else {
                out.push_str(" + ");
                out.push_str(&body);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Rescales every coefficient by a nonzero constant (solutions are
    /// unchanged).
    pub fn scaled(&self, c: &Complex<T>) -> Self {
        DifferenceOperator {
            coeffs: self.coeffs.iter().map(|s| s.scale(c)).collect(),
            ctx: self.ctx.clone(),
        }
    }

    /// Companion form of the vectorialised first-order system.
    pub fn companion(&self) -> CompanionSystem<T> {
        let n = self.order();
        let a_n = self.coeffs[n].clone();
        let last_row = (0..n)
            .map(|k| (self.coeffs[k].neg(), a_n.clone()))
            .collect();
        CompanionSystem {
            dim: n,
            last_row,
            ctx: self.ctx.clone(),
        }
    }
}

fn fmt_real_mag<T: Real>(x: &T) -> String {
    x.to_decimal_string()
}

/// Renders one complex coefficient; returns (text, needs_star, was_negated)
/// where `was_negated` signals the sign has been absorbed by the caller.
fn fmt_complex_coeff<T: Real>(c: &Complex<T>) -> (String, bool) {
    let zero = T::zero();
    if c.im.is_zero() {
        let neg = c.re < zero;
        let mag = if neg { c.re.neg() } else { c.re.clone() };
        (fmt_real_mag(&mag), neg)
    } else if c.re.is_zero() {
        let neg = c.im < zero;
        let mag = if neg { c.im.neg() } else { c.im.clone() };
        (format!("{}i", fmt_real_mag(&mag)), neg)
    } else {
        let re = fmt_real_mag(&c.re.abs());
        let im = fmt_real_mag(&c.im.abs());
        let rs = if c.re < zero { "-" } else { "" };
        let is = if c.im < zero { "-" } else { "+" };
        (format!("({rs}{re}{is}{im}i)"), false)
    }
}

/// Renders a_i(z) * S^i; returns (text, leading_sign_negative).
fn fmt_coeff_series<T: Real>(a: &PuiseuxSeries<T>, shift: usize) -> (String, bool) {
    let shift_txt = match shift {
        0 => String::new(),
        1 => "S".to_string(),
        k => format!("S^{k}"),
    };
    let terms: Vec<(i64, &Complex<T>)> = a.iter().filter(|(_, c)| !c.is_exact_zero()).collect();
    debug_assert!(!terms.is_empty());
    let one_term = terms.len() == 1;
    let mut body = String::new();
    let mut lead_neg = false;
    for (idx, (e, c)) in terms.iter().enumerate() {
        debug_assert!(*e >= 0, "operator coefficients must be polynomial in z");
        let (txt, neg) = fmt_complex_coeff(c);
        let is_one = txt == "1";
        let mono = match (*e, is_one) {
            (0, _) => txt.clone(),
            (1, true) => "z".to_string(),
            (1, false) => format!("{txt}*z"),
            (k, true) => format!("z^{k}"),
            (k, false) => format!("{txt}*z^{k}"),
        };
        if idx == 0 {
            lead_neg = neg;
            body.push_str(&mono);
        } else if neg {
            body.push_str(" - ");
            body.push_str(&mono);
        } else {
            body.push_str(" + ");
            body.push_str(&mono);
        }
    }
    if shift_txt.is_empty() {
        return (body, lead_neg);
    }
    if one_term {
        if body == "1" {
            (shift_txt, lead_neg)
        } else {
            (format!("{body}*{shift_txt}"), lead_neg)
        }
    } else {
        // leading sign stays inside the parentheses
        let inner = if lead_neg { format!("-{body}") } else { body };
        (format!("({inner})*{shift_txt}"), false)
    }
}

/// Companion matrix A_P of the vectorialised system sigma X = A_P X: ones
/// on the superdiagonal, last row -a_k/a_n kept as (numerator, denominator)
/// pairs so no series division ever happens.
#[derive(Clone, Debug)]
pub struct CompanionSystem<T: Real> {
    dim: usize,
    last_row: Vec<(PuiseuxSeries<T>, PuiseuxSeries<T>)>,
    ctx: NumericContext<T>,
}

impl<T: Real> CompanionSystem<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// (numerator, denominator) of the last-row entry in column k.
    pub fn last_row_entry(&self, k: usize) -> &(PuiseuxSeries<T>, PuiseuxSeries<T>) {
        &self.last_row[k]
    }

    /// Dense numeric matrix at a point (principal value of each entry).
    pub fn eval(&self, z0: &Complex<T>) -> Vec<Vec<Complex<T>>> {
        let n = self.dim;
        let mut m = vec![vec![Complex::<T>::zero(); n]; n];
        for (r, row) in m.iter_mut().enumerate().take(n.saturating_sub(1)) {
            row[r + 1] = Complex::one();
        }
        for k in 0..n {
            let (num, den) = &self.last_row[k];
            m[n - 1][k] = num.eval(z0).div(&den.eval(z0));
        }
        m
    }

    pub fn ctx(&self) -> &NumericContext<T> {
        &self.ctx
    }
}

/// Wronskian (Casoratian) matrix of candidate solutions at z0: row k holds
/// the functions evaluated at q^k z0. Returns the matrix and determinant.
pub fn wronskian_matrix<T, F>(
    ctx: &NumericContext<T>,
    fs: &[F],
    z0: &Complex<T>,
) -> Result<(Vec<Vec<Complex<T>>>, Complex<T>)>
where
    T: Real,
    F: Fn(&Complex<T>) -> Result<Complex<T>>,
{
    let n = fs.len();
    let mut m = vec![vec![Complex::<T>::zero(); n]; n];
    let mut point = z0.clone();
    for row in m.iter_mut() {
        for (j, f) in fs.iter().enumerate() {
            row[j] = f(&point)?;
        }
        point = point.mul(ctx.q());
    }
    let det = determinant(&m);
    Ok((m, det))
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Real>(m: &[Vec<Complex<T>>]) -> Complex<T> {
    let n = m.len();
    let mut a: Vec<Vec<Complex<T>>> = m.to_vec();
    let mut det = Complex::<T>::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].abs();
        for r in col + 1..n {
            let v = a[r][col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if a[piv][col].is_exact_zero() {
            return Complex::zero();
        }
        if piv != col {
            a.swap(piv, col);
            det = det.neg();
        }
        det = det.mul(&a[col][col].clone());
        let inv = a[col][col].inv();
        for r in col + 1..n {
            let factor = a[r][col].mul(&inv);
            if factor.is_exact_zero() {
                continue;
            }
            for c in col..n {
                let sub = factor.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&sub);
            }
        }
    }
    det
}
