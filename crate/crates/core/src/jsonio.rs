//! Machine-readable output schemas: the solution JSON (round-trippable
//! into [`SolutionForm`]) and the Newton-polygon JSON.

use serde::{Deserialize, Serialize};

use crate::classify::NewtonPolygon;
use crate::error::{Error, Result};
use crate::frobenius::SolutionForm;
use crate::numctx::{parse_rational, rat, rational_str, NumericContext, Rational};
use crate::scalar::{Complex, Real};
use crate::series::{PuiseuxSeries, Trunc};

/// Character rendering: an exact q-power when one is recognized, a numeric
/// value otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CharacterJson {
    QPow(String),
    Value { re: f64, im: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionJson {
    pub theta_exp: String,
    pub character: CharacterJson,
    pub log_power: usize,
    pub ramification: i64,
    /// [re, im] pairs for exponents 0/s, 1/s, ... of z
    pub coefficients: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail: Vec<SolutionJson>,
}

/// Tries to express c as q^(m/d) for small denominators.
fn detect_q_power<T: Real>(
    c: &Complex<T>,
    ctx: &NumericContext<T>,
    ram: i64,
) -> Option<Rational> {
    let lq = ctx.q_abs().ln().to_f64();
    for d in [1, 2, ram, 2 * ram, 4 * ram] {
        if d < 1 {
            continue;
        }
        let est = c.abs().ln().to_f64() / lq * d as f64;
        let m = est.round();
        if (est - m).abs() > 1e-6 || m.abs() > 4096.0 {
            continue;
        }
        let r = rat(m as i64, d);
        let want = ctx.q_power(r);
        let tol = ctx.tol().mul(&T::from_f64(10.0));
        if c.sub(&want).abs() <= tol.mul(&want.abs()) {
            return Some(r);
        }
    }
    None
}

pub fn solution_to_json<T: Real>(
    sol: &SolutionForm<T>,
    ctx: &NumericContext<T>,
) -> SolutionJson {
    let ram = sol.ramification();
    let character = match detect_q_power(&sol.character, ctx, ram) {
        Some(r) => CharacterJson::QPow(format!("q^{}", rational_str(r))),
        None => CharacterJson::Value {
            re: sol.character.re.to_f64(),
            im: sol.character.im.to_f64(),
        },
    };
    let end = match sol.series.trunc() {
        Trunc::At(t) => t,
        Trunc::Exact => sol.series.offset() + sol.series.len() as i64,
    };
    let coefficients = (0..end.max(0))
        .map(|d| {
            let c = sol.series.coeff(d).unwrap_or_else(Complex::zero);
            [c.re.to_f64(), c.im.to_f64()]
        })
        .collect();
    SolutionJson {
        theta_exp: rational_str(sol.theta_exp),
        character,
        log_power: sol.log_power,
        ramification: ram,
        coefficients,
        tail: sol
            .tail
            .iter()
            .map(|t| solution_to_json(t, ctx))
            .collect(),
    }
}

pub fn solution_from_json<T: Real>(
    json: &SolutionJson,
    ctx: &NumericContext<T>,
) -> Result<SolutionForm<T>> {
    let theta_exp = parse_rational(&json.theta_exp)
        .ok_or_else(|| Error::Eval(format!("bad theta exponent '{}'", json.theta_exp)))?;
    let character = match &json.character {
        CharacterJson::QPow(s) => {
            let body = s
                .strip_prefix("q^")
                .ok_or_else(|| Error::Eval(format!("bad character '{s}'")))?;
            let body = body.trim_start_matches('(').trim_end_matches(')');
            let r = parse_rational(body)
                .ok_or_else(|| Error::Eval(format!("bad character exponent '{body}'")))?;
            ctx.q_power(r)
        }
        CharacterJson::Value { re, im } => Complex::from_f64(*re, *im),
    };
    let coeffs: Vec<Complex<T>> = json
        .coefficients
        .iter()
        .map(|[re, im]| Complex::from_f64(*re, *im))
        .collect();
    let n = coeffs.len() as i64;
    let series = PuiseuxSeries::new(json.ramification, 0, coeffs, Trunc::At(n));
    let tail = json
        .tail
        .iter()
        .map(|t| solution_from_json(t, ctx))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionForm {
        theta_exp,
        character,
        log_power: json.log_power,
        series,
        tail,
    })
}

/// Wire form of the Newton polygon.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolygonJson {
    /// plotted points as [x, "y"] with the operator index
    pub points: Vec<(i64, String, usize)>,
    pub vertices: Vec<(i64, String)>,
    pub segments: Vec<SegmentJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentJson {
    pub slope: String,
    pub length: i64,
}

pub fn polygon_to_json(p: &NewtonPolygon) -> PolygonJson {
    PolygonJson {
        points: p
            .points
            .iter()
            .map(|(x, y, i)| (*x, rational_str(*y), *i))
            .collect(),
        vertices: p.vertices.iter().map(|(x, y)| (*x, rational_str(*y))).collect(),
        segments: p
            .segments
            .iter()
            .map(|s| SegmentJson {
                slope: rational_str(s.slope),
                length: s.length(),
            })
            .collect(),
    }
}
