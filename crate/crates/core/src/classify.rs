//! Regular/irregular classification: coefficient valuations, the Newton
//! polygon (lower convex hull of (n-i, val a_i)), and the equivalence
//! between "single horizontal segment" and the valuation criterion.

use serde::{Deserialize, Serialize};

use crate::numctx::{rat, rational_str, Rational};
use crate::operator::DifferenceOperator;
use crate::scalar::Real;

/// One polygon segment between consecutive hull vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Slope t/s in lowest terms.
    pub slope: Rational,
    pub x_start: i64,
    pub x_end: i64,
    /// y at x_start.
    pub y_start: Rational,
    /// Operator indices i whose point (n-i, val a_i) lies on the segment,
    /// interior collinear points included.
    pub supporting_indices: Vec<usize>,
}

impl Segment {
    pub fn length(&self) -> i64 {
        self.x_end - self.x_start
    }

    pub fn is_horizontal(&self) -> bool {
        self.slope == Rational::from_integer(0)
    }

    /// y-value of the segment line at integer x.
    pub fn y_at(&self, x: i64) -> Rational {
        self.y_start + self.slope * rat(x - self.x_start, 1)
    }
}

/// Lower convex hull of the plotted points (n-i, val a_i); coefficients
/// with infinite valuation are omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    /// Plotted points (x, y) with the operator index they came from.
    pub points: Vec<(i64, Rational, usize)>,
    /// Hull corner points, x strictly increasing.
    pub vertices: Vec<(i64, Rational)>,
    /// Hull segments, slopes strictly increasing left to right.
    pub segments: Vec<Segment>,
}

impl NewtonPolygon {
    pub fn slopes(&self) -> Vec<Rational> {
        self.segments.iter().map(|s| s.slope).collect()
    }

    pub fn horizontal_segment(&self) -> Option<&Segment> {
        self.segments.iter().find(|s| s.is_horizontal())
    }
}

/// Builds the Newton polygon of an operator. Valuations use the context
/// tolerance to ignore numerical noise.
pub fn newton_polygon<T: Real>(op: &DifferenceOperator<T>) -> NewtonPolygon {
    let n = op.order() as i64;
    let tol = op.ctx().tol();
    let mut points: Vec<(i64, Rational, usize)> = Vec::new();
    for (i, a) in op.coeffs().iter().enumerate() {
        if let Some(v) = a.valuation(tol) {
            points.push((n - i as i64, v, i));
        }
    }
    points.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    // monotone chain, lower hull only; ties on x keep the lowest y
    let mut hull: Vec<(i64, Rational)> = Vec::new();
    for &(x, y, _) in &points {
        if hull.last().is_some_and(|&(hx, _)| hx == x) {
            continue; // sorted so the first occurrence has the lower y
        }
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // keep the turn convex downward: cross((p2-p1), (p3-p1)) <= 0
            let cross = (y2 - y1) * rat(x - x1, 1) - (y - y1) * rat(x2 - x1, 1);
            if cross >= Rational::from_integer(0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }

    let mut segments = Vec::new();
    for w in hull.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        let slope = (y2 - y1) / rat(x2 - x1, 1);
        let supporting = points
            .iter()
            .filter(|&&(x, y, _)| {
                x >= x1 && x <= x2 && (y - y1) == slope * rat(x - x1, 1)
            })
            .map(|&(_, _, i)| i)
            .collect();
        segments.push(Segment {
            slope,
            x_start: x1,
            x_end: x2,
            y_start: y1,
            supporting_indices: supporting,
        });
    }

    NewtonPolygon {
        points,
        vertices: hull,
        segments,
    }
}

/// Verdict and per-coefficient evidence for the regular-singular test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityReport {
    pub regular_singular: bool,
    /// (index i, valuation as string, offending) for finite valuations.
    pub valuations: Vec<(usize, String, bool)>,
    pub summary: String,
}

/// val(a_0) = val(a_n) and val(a_k) >= val(a_n) for all k; the report
/// lists every valuation and flags the offenders.
pub fn is_regular_singular<T: Real>(op: &DifferenceOperator<T>) -> RegularityReport {
    let tol = op.ctx().tol();
    let n = op.order();
    let vn = op.coeff(n).valuation(tol);
    let v0 = op.coeff(0).valuation(tol);
    let mut valuations = Vec::new();
    let mut regular = true;
    let (Some(vn), Some(v0)) = (vn, v0) else {
        // a_0 or a_n below noise: treat as irregular data
        return RegularityReport {
            regular_singular: false,
            valuations,
            summary: "leading or trailing coefficient vanishes to working precision".into(),
        };
    };
    if v0 != vn {
        regular = false;
    }
    for (i, a) in op.coeffs().iter().enumerate() {
        match a.valuation(tol) {
            Some(v) => {
                let offending = v < vn || (i == 0 && v != vn);
                if v < vn {
                    regular = false;
                }
                valuations.push((i, rational_str(v), offending));
            }
            None => valuations.push((i, "inf".into(), false)),
        }
    }
    let summary = if regular {
        format!("regular singular: val(a_0) = val(a_{n}) = {}", rational_str(vn))
    } else {
        format!(
            "irregular singular: val(a_0) = {}, val(a_{n}) = {}, min val = {}",
            rational_str(v0),
            rational_str(vn),
            valuations
                .iter()
                .filter(|(_, v, _)| v != "inf")
                .map(|(_, v, _)| v.clone())
                .min_by(|a, b| {
                    let pa: f64 = parse_val(a);
                    let pb: f64 = parse_val(b);
                    pa.partial_cmp(&pb).unwrap()
                })
                .unwrap_or_else(|| "inf".into())
        )
    };
    RegularityReport {
        regular_singular: regular,
        valuations,
        summary,
    }
}

fn parse_val(s: &str) -> f64 {
    if let Some((n, d)) = s.split_once('/') {
        n.parse::<f64>().unwrap_or(0.0) / d.parse::<f64>().unwrap_or(1.0)
    } else {
        s.parse().unwrap_or(0.0)
    }
}
