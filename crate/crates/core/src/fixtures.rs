//! Built-in fixture library: named operators with expected polygons,
//! classification verdicts, solution counts, and closed-form coefficient
//! oracles. The oracles are computed from explicit products and
//! recurrences, never through the solver they check.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::classify::{is_regular_singular, newton_polygon};
use crate::error::{Error, Result};
use crate::frobenius::{solve, SolutionForm, SolveOptions};
use crate::numctx::{rat, rational_str, NumericContext, Rational};
use crate::operator::DifferenceOperator;
use crate::scalar::{Complex, Real};
use crate::verify::apply_operator;

/// Closed-form coefficient families used as oracles. Indices are exponents
/// of the working variable (z^(1/s)); every family is normalized with
/// leading coefficient 1 to match the solver's output convention.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ClosedForm {
    /// (q^a;q)_d (q^b;q)_d / ((q;q)_d (q^(r+1);q)_d)
    Hypergeometric1 { alpha: Rational, beta: Rational, r: Rational },
    /// the q^(-r)-shifted analogue
    Hypergeometric2 { alpha: Rational, beta: Rational, r: Rational },
    /// q^(l d(d-1)/2) / prod_{k<=d} (1-q^k)^2
    LevelFirst { l: i64 },
    /// f_0 = 1; f_d = q^(l(d-1))/(1-q^d)^2 f_{d-1}
    ///         + LevelFirst(d) (2 q^d/(1-q^d) + l)
    LevelSecond { l: i64 },
    /// (-1)^d (q^(d(d-1)/2))^2 q^d / (q;q)_d
    RamanujanHorizontal,
    /// q^(-d(d+1)/2) / (q;q)_d
    RamanujanTheta,
    /// even exponents only: f_{2n} = (-1)^n (q^(n(n-1)/2))^4 / (q^2;q^2)_n
    SlopeMinus2Horizontal,
    /// even exponents only: f_{2n} = prod_{k<=n} 1/(q^(2k+2)(1-q^(2k)))
    SlopeMinus2Theta,
    /// the constant series 1
    ConstOne,
}

impl ClosedForm {
    /// First `count` coefficients (index = working-variable exponent).
    pub fn coefficients<T: Real>(&self, ctx: &NumericContext<T>, count: usize) -> Vec<Complex<T>> {
        let one = Complex::<T>::one();
        let mut out = vec![Complex::<T>::zero(); count];
        match self {
            ClosedForm::ConstOne => {
                if count > 0 {
                    out[0] = one;
                }
            }
            ClosedForm::Hypergeometric1 { alpha, beta, r } => {
                hypergeometric_into(ctx, *alpha, *beta, *r, &mut out);
            }
            ClosedForm::Hypergeometric2 { alpha, beta, r } => {
                hypergeometric_into(ctx, *alpha - *r, *beta - *r, -(*r), &mut out);
            }
            ClosedForm::LevelFirst { l } => {
                level_first_into(ctx, *l, &mut out);
            }
            ClosedForm::LevelSecond { l } => {
                let mut first = vec![Complex::<T>::zero(); count];
                level_first_into(ctx, *l, &mut first);
                if count > 0 {
                    out[0] = one;
                }
                for d in 1..count as i64 {
                    let qd = ctx.q_powi(d);
                    let one_minus = Complex::one().sub(&qd);
                    let carry = ctx
                        .q_powi(*l * (d - 1))
                        .div(&one_minus.mul(&one_minus))
                        .mul(&out[(d - 1) as usize]);
                    let extra = qd
                        .scale(&T::from_i64(2))
                        .div(&one_minus)
                        .add(&Complex::from_i64(*l));
                    out[d as usize] = carry.add(&first[d as usize].mul(&extra));
                }
            }
            ClosedForm::RamanujanHorizontal => {
                // ratio f_d/f_{d-1} = -q^(2d-1)/(1-q^d)
                let mut v = one.clone();
                for d in 0..count as i64 {
                    if d > 0 {
                        let num = ctx.q_powi(2 * d - 1).neg();
                        let den = Complex::one().sub(&ctx.q_powi(d));
                        v = v.mul(&num).div(&den);
                    }
                    out[d as usize] = v.clone();
                }
            }
            ClosedForm::RamanujanTheta => {
                // ratio f_d/f_{d-1} = 1/(q^d (1-q^d))
                let mut v = one.clone();
                for d in 0..count as i64 {
                    if d > 0 {
                        let den = ctx.q_powi(d).mul(&Complex::one().sub(&ctx.q_powi(d)));
                        v = v.div(&den);
                    }
                    out[d as usize] = v.clone();
                }
            }
            ClosedForm::SlopeMinus2Horizontal => {
                // f_{2n}/f_{2(n-1)} = -q^(4(n-1))/(1-q^(2n))
                let mut v = one.clone();
                let mut n = 0i64;
                while (2 * n) < count as i64 {
                    if n > 0 {
                        let num = ctx.q_powi(4 * (n - 1)).neg();
                        let den = Complex::one().sub(&ctx.q_powi(2 * n));
                        v = v.mul(&num).div(&den);
                    }
                    out[(2 * n) as usize] = v.clone();
                    n += 1;
                }
            }
            ClosedForm::SlopeMinus2Theta => {
                // f_{2n}/f_{2(n-1)} = 1/(q^(2n+2)(1-q^(2n)))
                let mut v = one.clone();
                let mut n = 0i64;
                while (2 * n) < count as i64 {
                    if n > 0 {
                        let den = ctx
                            .q_powi(2 * n + 2)
                            .mul(&Complex::one().sub(&ctx.q_powi(2 * n)));
                        v = v.div(&den);
                    }
                    out[(2 * n) as usize] = v.clone();
                    n += 1;
                }
            }
        }
        out
    }
}

fn hypergeometric_into<T: Real>(
    ctx: &NumericContext<T>,
    alpha: Rational,
    beta: Rational,
    r: Rational,
    out: &mut [Complex<T>],
) {
    // f_d/f_{d-1} = (1-q^(a+d-1))(1-q^(b+d-1)) / ((1-q^d)(1-q^(r+d)))
    let one = Complex::<T>::one();
    let mut v = one.clone();
    for d in 0..out.len() as i64 {
        if d > 0 {
            let na = one.sub(&ctx.q_power(alpha + rat(d - 1, 1)));
            let nb = one.sub(&ctx.q_power(beta + rat(d - 1, 1)));
            let da = one.sub(&ctx.q_powi(d));
            let db = one.sub(&ctx.q_power(r + rat(d, 1)));
            v = v.mul(&na).mul(&nb).div(&da).div(&db);
        }
        out[d as usize] = v.clone();
    }
}

fn level_first_into<T: Real>(ctx: &NumericContext<T>, l: i64, out: &mut [Complex<T>]) {
    // f_d/f_{d-1} = q^(l(d-1)) / (1-q^d)^2
    let one = Complex::<T>::one();
    let mut v = one.clone();
    for d in 0..out.len() as i64 {
        if d > 0 {
            let den = one.sub(&ctx.q_powi(d));
            v = v.mul(&ctx.q_powi(l * (d - 1))).div(&den).div(&den);
        }
        out[d as usize] = v.clone();
    }
}

/// How a solution's character is pinned by the oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum CharSpec {
    /// character = q^(num/den)
    QPow(Rational),
    /// character = -q^(num/den)
    NegQPow(Rational),
    /// any character (count, shape, and residuals still checked)
    Any,
}

impl CharSpec {
    fn matches<T: Real>(&self, c: &Complex<T>, ctx: &NumericContext<T>, rel: &T) -> bool {
        match self {
            CharSpec::Any => true,
            CharSpec::QPow(r) => {
                let want = ctx.q_power(*r);
                c.sub(&want).abs() <= rel.mul(&want.abs())
            }
            CharSpec::NegQPow(r) => {
                let want = ctx.q_power(*r).neg();
                c.sub(&want).abs() <= rel.mul(&want.abs())
            }
        }
    }
}

/// Expected shape (and optionally coefficients) of one basis solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionExpectation {
    pub theta_exp: Rational,
    pub log_power: usize,
    pub character: CharSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedForm>,
    /// oracle for the ell-carrying stratum below this one, when resonant
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_form: Option<ClosedForm>,
}

/// Everything a fixture promises.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Oracle {
    /// (slope, horizontal length) of every polygon segment, left to right
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<(Rational, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regular_singular: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solutions: Vec<SolutionExpectation>,
    /// verify each solution by residual substitution
    #[serde(default)]
    pub residual_check: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub operator: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<(String, String)>,
    /// where the expected data comes from (description, not citation)
    pub provenance: String,
    pub oracle: Oracle,
    /// working-variable series order this fixture wants (None: context
    /// default)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<i64>,
}

/// Outcome of running one fixture.
#[derive(Clone, Debug)]
pub struct FixtureReport {
    pub name: String,
    pub passed: bool,
    pub max_coeff_deviation: f64,
    pub max_residual_rel: f64,
    pub details: Vec<String>,
}

/// The built-in fixture set, sorted by name.
pub fn builtin_fixtures() -> Vec<Fixture> {
    let mut v = vec![
        hypergeometric_fixture(),
        ramanujan_fixture(),
        slope_minus_1_fixture(),
        slope_minus_2_fixture(),
        slope_minus_half_fixture(),
        quintic_fixture(),
    ];
    for l in [0, 1, 2, 3, 5] {
        v.push(level_fixture(l));
    }
    v.sort_by(|a, b| a.name.cmp(&b.name));
    v
}

pub fn find_fixture(name: &str) -> Option<Fixture> {
    builtin_fixtures().into_iter().find(|f| f.name == name)
}

fn hypergeometric_fixture() -> Fixture {
    let (alpha, beta, r) = (rat(1, 3), rat(1, 5), rat(1, 2));
    Fixture {
        name: "q-hypergeometric".into(),
        operator: "(1-S)*(1-q^1/2*S) - z*(1-q^1/3*S)*(1-q^1/5*S)".into(),
        params: vec![
            ("alpha".into(), "1/3".into()),
            ("beta".into(), "1/5".into()),
            ("r".into(), "1/2".into()),
        ],
        provenance: "basic hypergeometric equation; both solutions have classical product coefficients".into(),
        oracle: Oracle {
            polygon: Some(vec![(rat(0, 1), 2)]),
            regular_singular: Some(true),
            solution_count: Some(2),
            solutions: vec![
                SolutionExpectation {
                    theta_exp: Rational::zero(),
                    log_power: 0,
                    character: CharSpec::QPow(rat(0, 1)),
                    closed_form: Some(ClosedForm::Hypergeometric1 { alpha, beta, r }),
                    tail_form: None,
                },
                SolutionExpectation {
                    theta_exp: Rational::zero(),
                    log_power: 0,
                    character: CharSpec::QPow(rat(-1, 2)),
                    closed_form: Some(ClosedForm::Hypergeometric2 { alpha, beta, r }),
                    tail_form: None,
                },
            ],
            residual_check: true,
        },
        truncation: None,
    }
}

fn level_fixture(l: i64) -> Fixture {
    let regular = l <= 2;
    let mut solutions = vec![
        SolutionExpectation {
            theta_exp: Rational::zero(),
            log_power: 0,
            character: CharSpec::QPow(rat(0, 1)),
            closed_form: Some(ClosedForm::LevelFirst { l }),
            tail_form: None,
        },
        SolutionExpectation {
            theta_exp: Rational::zero(),
            log_power: 1,
            character: CharSpec::QPow(rat(0, 1)),
            closed_form: Some(ClosedForm::LevelSecond { l }),
            tail_form: Some(ClosedForm::LevelFirst { l }),
        },
    ];
    let polygon = if regular {
        vec![(rat(0, 1), 2)]
    } else {
        for _ in 0..(l - 2) {
            solutions.push(SolutionExpectation {
                theta_exp: rat(-1, l - 2),
                log_power: 0,
                character: CharSpec::Any,
                closed_form: None,
                tail_form: None,
            });
        }
        vec![(rat(-1, l - 2), l - 2), (rat(0, 1), 2)]
    };
    Fixture {
        name: format!("p1-level-{l}"),
        operator: format!("(1-S)^2 - z*S^{l}"),
        params: vec![("l".into(), l.to_string())],
        provenance: "projective-line I-function equation with level weight; first series is the I-function at P = 1".into(),
        oracle: Oracle {
            polygon: Some(polygon),
            regular_singular: Some(regular),
            solution_count: Some(if regular { 2 } else { l as usize }),
            solutions,
            residual_check: true,
        },
        truncation: None,
    }
}

fn ramanujan_fixture() -> Fixture {
    Fixture {
        name: "ramanujan".into(),
        operator: "q*z*S^2 - S + 1".into(),
        params: vec![],
        provenance: "Ramanujan partial-theta equation; divergent series branch plus a theta-prefactored convergent branch".into(),
        oracle: Oracle {
            polygon: Some(vec![(rat(-1, 1), 1), (rat(0, 1), 1)]),
            regular_singular: Some(false),
            solution_count: Some(2),
            solutions: vec![
                SolutionExpectation {
                    theta_exp: Rational::zero(),
                    log_power: 0,
                    character: CharSpec::QPow(rat(0, 1)),
                    closed_form: Some(ClosedForm::RamanujanHorizontal),
                    tail_form: None,
                },
                SolutionExpectation {
                    theta_exp: rat(-1, 1),
                    log_power: 0,
                    character: CharSpec::QPow(rat(0, 1)),
                    closed_form: Some(ClosedForm::RamanujanTheta),
                    tail_form: None,
                },
            ],
            residual_check: true,
        },
        truncation: None,
    }
}

fn slope_minus_1_fixture() -> Fixture {
    Fixture {
        name: "slope-minus-1".into(),
        operator: "z^2*S^2 + z*S + 1".into(),
        params: vec![],
        provenance: "single slope -1 segment; both solutions are pure theta-character products".into(),
        oracle: Oracle {
            polygon: Some(vec![(rat(-1, 1), 2)]),
            regular_singular: Some(false),
            solution_count: Some(2),
            solutions: vec![
                SolutionExpectation {
                    theta_exp: rat(-1, 1),
                    log_power: 0,
                    character: CharSpec::Any,
                    closed_form: Some(ClosedForm::ConstOne),
                    tail_form: None,
                },
                SolutionExpectation {
                    theta_exp: rat(-1, 1),
                    log_power: 0,
                    character: CharSpec::Any,
                    closed_form: Some(ClosedForm::ConstOne),
                    tail_form: None,
                },
            ],
            residual_check: true,
        },
        truncation: None,
    }
}

fn slope_minus_2_fixture() -> Fixture {
    Fixture {
        name: "slope-minus-2".into(),
        operator: "z^2*S^2 - S + 1".into(),
        params: vec![],
        provenance: "slope -2 segment plus horizontal segment; theta^(-2) branch seeded by the shifted character q^2".into(),
        oracle: Oracle {
            polygon: Some(vec![(rat(-2, 1), 1), (rat(0, 1), 1)]),
            regular_singular: Some(false),
            solution_count: Some(2),
            solutions: vec![
                SolutionExpectation {
                    theta_exp: Rational::zero(),
                    log_power: 0,
                    character: CharSpec::QPow(rat(0, 1)),
                    closed_form: Some(ClosedForm::SlopeMinus2Horizontal),
                    tail_form: None,
                },
                SolutionExpectation {
                    theta_exp: rat(-2, 1),
                    log_power: 0,
                    character: CharSpec::QPow(rat(2, 1)),
                    closed_form: Some(ClosedForm::SlopeMinus2Theta),
                    tail_form: None,
                },
            ],
            residual_check: true,
        },
        truncation: None,
    }
}

fn slope_minus_half_fixture() -> Fixture {
    Fixture {
        name: "slope-minus-half".into(),
        operator: "z*S^2 - 1".into(),
        params: vec![],
        provenance: "single slope -1/2 segment; two ramified character solutions with trivial series".into(),
        oracle: Oracle {
            polygon: Some(vec![(rat(-1, 2), 2)]),
            regular_singular: Some(false),
            solution_count: Some(2),
            solutions: vec![
                SolutionExpectation {
                    theta_exp: rat(-1, 2),
                    log_power: 0,
                    character: CharSpec::QPow(rat(1, 4)),
                    closed_form: Some(ClosedForm::ConstOne),
                    tail_form: None,
                },
                SolutionExpectation {
                    theta_exp: rat(-1, 2),
                    log_power: 0,
                    character: CharSpec::NegQPow(rat(1, 4)),
                    closed_form: Some(ClosedForm::ConstOne),
                    tail_form: None,
                },
            ],
            residual_check: true,
        },
        truncation: None,
    }
}

fn quintic_fixture() -> Fixture {
    Fixture {
        name: "quintic".into(),
        operator: "(1-S)^5 - z*(1-q*S^5)*(1-q^2*S^5)*(1-q^3*S^5)*(1-q^4*S^5)*(1-q^5*S^5)".into(),
        params: vec![],
        provenance: "degree-25 hypersurface I-function equation; slope -1/20 segment carries 20 ramified characters, horizontal segment a quintuple resonance".into(),
        oracle: Oracle {
            polygon: Some(vec![(rat(-1, 20), 20), (rat(0, 1), 5)]),
            regular_singular: Some(false),
            solution_count: Some(25),
            solutions: vec![],
            residual_check: true,
        },
        truncation: Some(14),
    }
}

/// Runs a fixture against a context, comparing the solver's basis with the
/// oracle. `rel_tol` bounds coefficient deviations; residuals are checked
/// at `residual_tol`.
pub fn run_fixture<T: Real>(
    fixture: &Fixture,
    ctx: &NumericContext<T>,
    rel_tol: &T,
    residual_tol: &T,
) -> Result<FixtureReport> {
    let mut details = Vec::new();
    let mut passed = true;
    let op = DifferenceOperator::parse(&fixture.operator, ctx)?;

    if let Some(expected) = &fixture.oracle.polygon {
        let p = newton_polygon(&op);
        let got: Vec<(Rational, i64)> = p.segments.iter().map(|s| (s.slope, s.length())).collect();
        if &got != expected {
            passed = false;
            details.push(format!(
                "polygon mismatch: got {:?}, expected {:?}",
                got.iter().map(|(s, l)| (rational_str(*s), *l)).collect::<Vec<_>>(),
                expected.iter().map(|(s, l)| (rational_str(*s), *l)).collect::<Vec<_>>(),
            ));
        } else {
            details.push("polygon: ok".into());
        }
    }

    if let Some(expected) = fixture.oracle.regular_singular {
        let rep = is_regular_singular(&op);
        if rep.regular_singular != expected {
            passed = false;
            details.push(format!(
                "classification mismatch: got {}, expected {}",
                rep.regular_singular, expected
            ));
        } else {
            details.push(format!("classification: ok ({})", rep.summary));
        }
    }

    let opts = SolveOptions {
        truncation: fixture.truncation,
        max_shift: 64,
    };
    let basis = solve(&op, opts)?;

    if let Some(count) = fixture.oracle.solution_count {
        if basis.solutions.len() != count {
            passed = false;
            details.push(format!(
                "solution count mismatch: got {}, expected {count}",
                basis.solutions.len()
            ));
        } else {
            details.push(format!("solution count: ok ({count})"));
        }
    }

    // oracle-to-solution matching (greedy bijection)
    let mut max_dev = 0.0f64;
    let mut matched = vec![false; basis.solutions.len()];
    for (ei, exp) in fixture.oracle.solutions.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (si, sol) in basis.solutions.iter().enumerate() {
            if matched[si] {
                continue;
            }
            if sol.theta_exp != exp.theta_exp || sol.log_power != exp.log_power {
                continue;
            }
            if !exp.character.matches(&sol.character, ctx, rel_tol) {
                continue;
            }
            let dev = match deviation(exp, sol, ctx, rel_tol) {
                Some(d) => d,
                None => continue,
            };
            if best.is_none() || dev < best.unwrap().1 {
                best = Some((si, dev));
            }
        }
        match best {
            Some((si, dev)) => {
                matched[si] = true;
                max_dev = max_dev.max(dev);
                details.push(format!(
                    "expectation {ei}: matched solution {si} (max coeff deviation {dev:.3e})"
                ));
            }
            None => {
                passed = false;
                details.push(format!("expectation {ei}: no matching solution"));
            }
        }
    }

    // residuals
    let mut max_res = 0.0f64;
    if fixture.oracle.residual_check {
        for (si, sol) in basis.solutions.iter().enumerate() {
            let r = apply_operator(&op, sol)?;
            let rel = r.max_rel.to_f64();
            max_res = max_res.max(rel);
            if !r.vanishes(residual_tol) {
                passed = false;
                details.push(format!("solution {si}: residual max_rel {rel:.3e}"));
            }
        }
        details.push(format!("residuals: max relative {max_res:.3e}"));
    }

    Ok(FixtureReport {
        name: fixture.name.clone(),
        passed,
        max_coeff_deviation: max_dev,
        max_residual_rel: max_res,
        details,
    })
}

/// Max relative coefficient deviation between a solution and its oracle;
/// `None` when some coefficient disagrees beyond the tolerance.
fn deviation<T: Real>(
    exp: &SolutionExpectation,
    sol: &SolutionForm<T>,
    ctx: &NumericContext<T>,
    rel_tol: &T,
) -> Option<f64> {
    let mut dev = 0.0f64;
    if let Some(cf) = &exp.closed_form {
        dev = dev.max(series_deviation(cf, &sol.series, ctx, rel_tol)?);
    }
    if let Some(tf) = &exp.tail_form {
        let tail = sol.tail.first()?;
        dev = dev.max(series_deviation(tf, &tail.series, ctx, rel_tol)?);
    }
    Some(dev)
}

fn series_deviation<T: Real>(
    cf: &ClosedForm,
    series: &crate::series::PuiseuxSeries<T>,
    ctx: &NumericContext<T>,
    rel_tol: &T,
) -> Option<f64> {
    let count = match series.trunc() {
        crate::series::Trunc::At(t) => (t - series.offset()).max(0) as usize,
        crate::series::Trunc::Exact => series.len().max(1),
    };
    let want = cf.coefficients(ctx, count);
    // below this magnitude double-precision coefficients drift into the
    // subnormal range; judge them absolutely
    let floor = T::from_f64(1e-240);
    let mut dev = 0.0f64;
    for (d, w) in want.iter().enumerate() {
        let got = series.coeff(series.offset() + d as i64)?;
        let diff = got.sub(w).abs();
        let scale = w.abs();
        let rel = if scale > floor { diff.div(&scale) } else { diff };
        if rel > *rel_tol {
            return None;
        }
        dev = dev.max(rel.to_f64());
    }
    Some(dev)
}

/// Convenience: run every built-in fixture; error text lists failures.
pub fn run_all<T: Real>(
    ctx: &NumericContext<T>,
    rel_tol: &T,
    residual_tol: &T,
) -> Result<Vec<FixtureReport>> {
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for f in builtin_fixtures() {
        let rep = run_fixture(&f, ctx, rel_tol, residual_tol)?;
        if !rep.passed {
            failures.push(rep.name.clone());
        }
        reports.push(rep);
    }
    if failures.is_empty() {
        Ok(reports)
    } else {
        Err(Error::Solve(format!("fixtures failed: {}", failures.join(", "))))
    }
}
