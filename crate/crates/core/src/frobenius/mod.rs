//! The solver: characteristic equations per Newton-polygon segment, root
//! finding and resonance partitioning, stratified coefficient recurrences,
//! theta-prefactor transforms for non-horizontal segments, and assembly of
//! the local solution basis at z = 0.

mod recurrence;
mod roots;

pub use recurrence::{ClassSpec, OperatorTable, StratifiedSolution};
pub use roots::polynomial_roots;

use num_traits::Zero;

use crate::classify::{newton_polygon, Segment};
use crate::error::{Error, Result};
use crate::numctx::{rat, rational_str, NumericContext, Rational};
use crate::operator::DifferenceOperator;
use crate::scalar::{Complex, Real};
use crate::series::PuiseuxSeries;

/// Characteristic polynomial of a horizontal segment: the z^h coefficients
/// of the supporting indices, divided by the lowest power of x (each
/// removed power is a zero root that seeds no solution).
#[derive(Clone, Debug)]
pub struct CharacteristicData<T: Real> {
    pub segment: Segment,
    /// dense coefficients, constant term first, after the x-power division
    pub polynomial: Vec<Complex<T>>,
    pub zero_roots_removed: usize,
    pub roots: Vec<(Complex<T>, usize)>,
}

/// Roots whose pairwise ratios are integer powers of the shift base,
/// grouped: base is the member with the smallest shift.
#[derive(Clone, Debug)]
pub struct ResonanceClass<T: Real> {
    pub base: Complex<T>,
    /// sorted shift multiset, first entry 0; repeated entries record
    /// multiple roots
    pub shifts: Vec<i64>,
}

/// One basis solution: theta^(t/s) * (e_character * series + ell * tail),
/// the series living in z^(1/ramification). `tail` is empty for log_power
/// 0 and holds the next lower chain element otherwise.
#[derive(Clone, Debug)]
pub struct SolutionForm<T: Real> {
    pub theta_exp: Rational,
    pub character: Complex<T>,
    pub log_power: usize,
    pub series: PuiseuxSeries<T>,
    pub tail: Vec<SolutionForm<T>>,
}

impl<T: Real> SolutionForm<T> {
    /// Flattens the chain into (ell power, character, series) strata.
    pub fn strata(&self) -> Vec<(usize, &Complex<T>, &PuiseuxSeries<T>)> {
        let mut out = Vec::with_capacity(self.log_power + 1);
        let mut cur = Some(self);
        let mut depth = 0usize;
        while let Some(f) = cur {
            out.push((depth, &f.character, &f.series));
            depth += 1;
            cur = f.tail.first();
        }
        out
    }

    /// Ramification of the underlying Puiseux series.
    pub fn ramification(&self) -> i64 {
        self.series.ram()
    }

    /// Short human-readable prefactor description.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.theta_exp.is_zero() {
            parts.push(format!("theta^({})", rational_str(self.theta_exp)));
        }
        if self.log_power > 0 {
            parts.push(format!("lq^{}", self.log_power));
        }
        parts.push(format!(
            "e[{:.6}{:+.6}i]",
            self.character.re.to_f64(),
            self.character.im.to_f64()
        ));
        parts.join(" * ")
    }
}

/// Per-segment record of what the solver did.
#[derive(Clone, Debug)]
pub struct SegmentReport {
    pub slope: Rational,
    pub length: i64,
    pub horizontal: bool,
    pub characteristic_degree: usize,
    pub zero_roots_removed: usize,
    pub solutions_found: usize,
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub order: usize,
    pub segments: Vec<SegmentReport>,
    pub total_found: usize,
}

#[derive(Clone, Debug)]
pub struct SolutionBasis<T: Real> {
    pub solutions: Vec<SolutionForm<T>>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// series order in the original variable z; the working order is
    /// scaled by the ramification of each segment
    pub truncation: Option<i64>,
    /// resonance search bound for integer q-power detection
    pub max_shift: i64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            truncation: None,
            max_shift: 64,
        }
    }
}

/// Characteristic data of a horizontal segment. Errors on non-horizontal
/// segments: the caller must apply [`theta_transform`] first.
pub fn characteristic<T: Real>(
    op: &DifferenceOperator<T>,
    segment: &Segment,
) -> Result<CharacteristicData<T>> {
    if !segment.is_horizontal() {
        return Err(Error::NonHorizontalSegment {
            slope: rational_str(segment.slope),
        });
    }
    let h = *segment.y_start.numer();
    debug_assert_eq!(*segment.y_start.denom(), 1);
    let i_max = *segment.supporting_indices.iter().max().unwrap();
    let i_min = *segment.supporting_indices.iter().min().unwrap();
    let mut poly = vec![Complex::<T>::zero(); i_max + 1];
    for &i in &segment.supporting_indices {
        poly[i] = op.coeff(i).coeff(h).unwrap_or_else(Complex::zero);
    }
    let poly: Vec<Complex<T>> = poly.split_off(i_min);
    let roots = polynomial_roots(&poly)?;
    Ok(CharacteristicData {
        segment: segment.clone(),
        polynomial: poly,
        zero_roots_removed: i_min,
        roots,
    })
}

/// Integer m with u = q^m v within tolerance, if one exists; two candidate
/// matches are an error, not a guess.
pub fn q_shift_between<T: Real>(
    u: &Complex<T>,
    v: &Complex<T>,
    ctx: &NumericContext<T>,
    max_shift: i64,
) -> Result<Option<i64>> {
    let ratio = u.div(v);
    let est = ratio.abs().ln().div(&ctx.q_abs().ln()).to_f64();
    if !est.is_finite() {
        return Ok(None);
    }
    let center = est.round() as i64;
    let mut found: Option<i64> = None;
    for m in [center - 1, center, center + 1] {
        if m.abs() > max_shift {
            continue;
        }
        let qm = ctx.q_powi(m);
        if ratio.sub(&qm).abs() <= ctx.tol().mul(&qm.abs()) {
            if let Some(m1) = found {
                return Err(Error::ResonanceAmbiguous {
                    a: format!("{:?}", u.re.to_f64()),
                    b: format!("{:?}", v.re.to_f64()),
                    m1,
                    m2: m,
                });
            }
            found = Some(m);
        }
    }
    Ok(found)
}

/// Greedy grouping of characteristic roots into resonance classes: u and v
/// share a class iff u/v is an integer power of q (within tolerance, |m|
/// bounded by max_shift).
pub fn resonance_partition<T: Real>(
    roots: &[(Complex<T>, usize)],
    ctx: &NumericContext<T>,
    max_shift: i64,
) -> Result<Vec<ResonanceClass<T>>> {
    for (r, _) in roots {
        if ctx.is_small(r) {
            return Err(Error::Solve("zero characteristic root in partition".into()));
        }
    }
    let n = roots.len();
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        // members as (index, shift relative to roots[i])
        let mut members = vec![(i, 0i64)];
        assigned[i] = true;
        for (j, root) in roots.iter().enumerate().skip(i + 1) {
            if assigned[j] {
                continue;
            }
            if let Some(m) = q_shift_between(&root.0, &roots[i].0, ctx, max_shift)? {
                members.push((j, m));
                assigned[j] = true;
            }
        }
        let min_shift = members.iter().map(|&(_, m)| m).min().unwrap();
        let base_idx = members.iter().find(|&&(_, m)| m == min_shift).unwrap().0;
        let mut shifts = Vec::new();
        for &(idx, m) in &members {
            for _ in 0..roots[idx].1 {
                shifts.push(m - min_shift);
            }
        }
        shifts.sort_unstable();
        classes.push(ResonanceClass {
            base: roots[base_idx].0.clone(),
            shifts,
        });
    }
    Ok(classes)
}

/// Raw output of the horizontal-segment solver: strata over the class base
/// character, in the working variable.
#[derive(Clone, Debug)]
pub struct RawSolution<T: Real> {
    pub class_base: Complex<T>,
    pub shifts: Vec<i64>,
    pub solution_index: usize,
    pub strata: Vec<PuiseuxSeries<T>>,
}

/// Solves along one horizontal segment: every resonance class of the
/// characteristic roots contributes (multiplicity-many) solutions via the
/// stratified recurrence.
pub fn solve_horizontal<T: Real>(
    op: &DifferenceOperator<T>,
    char_data: &CharacteristicData<T>,
    trunc: i64,
    max_shift: i64,
) -> Result<Vec<RawSolution<T>>> {
    let h = *char_data.segment.y_start.numer();
    let table = OperatorTable::new(op.coeffs(), h, trunc);
    let classes = resonance_partition(&char_data.roots, op.ctx(), max_shift)?;
    let mut out = Vec::new();
    for class in &classes {
        let spec = ClassSpec {
            base: &class.base,
            shifts: &class.shifts,
        };
        for j in 0..class.shifts.len() {
            let sol = recurrence::solve_stratified(&table, op.ctx(), &spec, j, trunc)?;
            out.push(RawSolution {
                class_base: class.base.clone(),
                shifts: class.shifts.clone(),
                solution_index: j,
                strata: sol.strata,
            });
        }
    }
    Ok(out)
}

/// Result of conjugating an operator by theta^(t/s): a new operator in
/// Q = z^(1/s) with shift base p = q^(1/s), the chosen segment now
/// horizontal at height 0.
#[derive(Clone, Debug)]
pub struct ThetaTransform<T: Real> {
    pub op: DifferenceOperator<T>,
    pub slope: Rational,
    /// ramification s of the new variable
    pub ram: i64,
    /// power of Q removed to normalize the minimum valuation to 0
    pub cleared_power: i64,
}

/// Conjugation by theta^(t/s) for slope t/s: the S^k coefficient a_k(z)
/// becomes q^((t/s) k(k-1)/2) z^(tk/s) a_k(z), re-expressed in Q with
/// shift base p = q^(1/s) and cleared of the overall Q power.
pub fn theta_transform<T: Real>(
    op: &DifferenceOperator<T>,
    slope: Rational,
) -> Result<ThetaTransform<T>> {
    let t = *slope.numer();
    let s = *slope.denom();
    debug_assert!(s >= 1);
    let ctx = op.ctx();
    let p_ctx = ctx.with_root_of_q(s)?;
    let mut coeffs = Vec::with_capacity(op.order() + 1);
    for (k, a) in op.coeffs().iter().enumerate() {
        if a.is_empty() {
            coeffs.push(PuiseuxSeries::zero(1));
            continue;
        }
        let k = k as i64;
        let factor = ctx.q_power(rat(t * k * (k - 1) / 2, s) + rat(t * k * (k - 1) % 2, 2 * s));
        let b = a.substitute_root(s).mul_monomial(&factor, t * k);
        coeffs.push(b);
    }
    let v = coeffs
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| b.offset())
        .min()
        .unwrap();
    let coeffs = coeffs
        .into_iter()
        .map(|b| if b.is_empty() { b } else { b.shift_exponent(-v) })
        .collect();
    let new_op = DifferenceOperator::new(coeffs, &p_ctx)?;
    Ok(ThetaTransform {
        op: new_op,
        slope,
        ram: s,
        cleared_power: v,
    })
}

/// Builds the full local solution basis: horizontal segments are solved
/// directly, non-horizontal rational slopes via the theta-prefactor
/// transform; zero characteristic roots are counted, not solved.
pub fn solve<T: Real>(op: &DifferenceOperator<T>, opts: SolveOptions) -> Result<SolutionBasis<T>> {
    let n_z = opts.truncation.unwrap_or_else(|| op.ctx().series_truncation());
    let polygon = newton_polygon(op);
    let mut solutions = Vec::new();
    let mut segments = Vec::new();
    for seg in &polygon.segments {
        if seg.is_horizontal() {
            let cd = characteristic(op, seg)?;
            let raws = solve_horizontal(op, &cd, n_z, opts.max_shift)?;
            let found = raws.len();
            for raw in raws {
                solutions.push(wrap_solution(raw, op.ctx(), Rational::zero(), 1));
            }
            segments.push(SegmentReport {
                slope: seg.slope,
                length: seg.length(),
                horizontal: true,
                characteristic_degree: cd.polynomial.len() - 1,
                zero_roots_removed: cd.zero_roots_removed,
                solutions_found: found,
            });
        } else {
            let tt = theta_transform(op, seg.slope)?;
            let new_poly = newton_polygon(&tt.op);
            let hseg = new_poly
                .horizontal_segment()
                .ok_or_else(|| Error::Solve("transformed operator lost its horizontal segment".into()))?;
            debug_assert_eq!(hseg.y_start, Rational::zero());
            let cd = characteristic(&tt.op, hseg)?;
            let raws = solve_horizontal(&tt.op, &cd, n_z.saturating_mul(tt.ram), opts.max_shift)?;
            let found = raws.len();
            for raw in raws {
                solutions.push(wrap_solution(raw, tt.op.ctx(), seg.slope, tt.ram));
            }
            segments.push(SegmentReport {
                slope: seg.slope,
                length: seg.length(),
                horizontal: false,
                characteristic_degree: cd.polynomial.len() - 1,
                zero_roots_removed: cd.zero_roots_removed,
                solutions_found: found,
            });
        }
    }
    let total = solutions.len();
    Ok(SolutionBasis {
        solutions,
        diagnostics: Diagnostics {
            order: op.order(),
            segments,
            total_found: total,
        },
    })
}

/// Converts raw strata over the base character into the reported chain:
/// each stratum series is re-anchored at its own character c q^lead via
/// e_c z^m = q^(-m(m-1)/2) c^(-m) e_{c q^m} z^0 ... , then the whole
/// solution is scaled so the newest stratum's leading coefficient is 1.
fn wrap_solution<T: Real>(
    raw: RawSolution<T>,
    w_ctx: &NumericContext<T>,
    theta_exp: Rational,
    ram: i64,
) -> SolutionForm<T> {
    struct Stratum<T: Real> {
        character: Complex<T>,
        series: PuiseuxSeries<T>,
    }
    let mut strata: Vec<Stratum<T>> = Vec::with_capacity(raw.strata.len());
    for series in &raw.strata {
        if series.is_empty() {
            strata.push(Stratum {
                character: raw.class_base.clone(),
                series: series.clone(),
            });
            continue;
        }
        // the structural leading index: exactly-zero coefficients below it
        // were trimmed when the series was built
        let lead = series.offset();
        let kappa = w_ctx
            .q_power(rat(-lead * (lead - 1) / 2, 1))
            .mul(&raw.class_base.powi(-lead));
        let shifted = series.shift_exponent(-lead).scale(&kappa);
        let character = raw.class_base.mul(&w_ctx.q_powi(lead));
        strata.push(Stratum {
            character,
            series: shifted,
        });
    }
    // overall scale: newest stratum leads with coefficient 1
    let scale = strata
        .first()
        .and_then(|s| s.series.coeff(s.series.offset()))
        .filter(|c| !w_ctx.is_small(c))
        .map(|c| c.inv());
    if let Some(scale) = scale {
        for s in &mut strata {
            s.series = s.series.scale(&scale);
        }
    }
    // nest the chain: value = e_c0 F0 + ell (e_c1 F1 + ell (...))
    let mut form: Option<SolutionForm<T>> = None;
    for (v, st) in strata.into_iter().enumerate().rev() {
        form = Some(SolutionForm {
            theta_exp,
            character: st.character,
            log_power: raw.strata.len() - 1 - v,
            series: st.series.reinterpret_ram(ram),
            tail: form.map(|f| vec![f]).unwrap_or_default(),
        });
    }
    form.expect("at least one stratum")
}

#[cfg(test)]
mod tests;
