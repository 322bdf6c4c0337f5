//! Human-facing renderings: ASCII and SVG Newton polygons and a compact
//! solution pretty-printer.

use qfrob_core::classify::NewtonPolygon;
use qfrob_core::frobenius::SolutionForm;
use qfrob_core::jsonio::{solution_to_json, CharacterJson};
use qfrob_core::numctx::{rational_str, NumericContext};
use qfrob_core::{Rational, Real};

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Plain-text plot: `o` hull vertices, `*` other plotted points, with the
/// segment summary underneath.
pub fn polygon_ascii(p: &NewtonPolygon) -> String {
    let mut out = String::new();
    if p.points.is_empty() {
        return "empty polygon\n".into();
    }
    let xs: Vec<i64> = p.points.iter().map(|&(x, _, _)| x).collect();
    let (x_min, x_max) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let ys: Vec<f64> = p.points.iter().map(|&(_, y, _)| to_f64(y)).collect();
    let y_max = ys.iter().cloned().fold(f64::MIN, f64::max);
    let rows = (y_max.ceil() as i64).max(0);
    for row in (0..=rows).rev() {
        let mut line = format!("{row:3} |");
        for x in x_min..=x_max {
            let here = p
                .points
                .iter()
                .find(|&&(px, py, _)| px == x && (to_f64(py) - row as f64).abs() < 0.25);
            let vertex = p
                .vertices
                .iter()
                .any(|&(vx, vy)| vx == x && (to_f64(vy) - row as f64).abs() < 0.25);
            line.push_str(match (here, vertex) {
                (_, true) => "  o",
                (Some(_), _) => "  *",
                (None, false) => "  .",
            });
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("    +");
    for _ in x_min..=x_max {
        out.push_str("---");
    }
    out.push('\n');
    out.push_str("     ");
    for x in x_min..=x_max {
        out.push_str(&format!("{x:3}"));
    }
    out.push('\n');
    for s in &p.segments {
        out.push_str(&format!(
            "segment: slope {:>6}, length {}\n",
            rational_str(s.slope),
            s.length()
        ));
    }
    out
}

/// Minimal SVG: grid dots, hull polyline, labelled slopes.
pub fn polygon_svg(p: &NewtonPolygon) -> String {
    let scale = 40.0;
    let pad = 30.0;
    let xs: Vec<i64> = p.points.iter().map(|&(x, _, _)| x).collect();
    let x_max = xs.iter().max().copied().unwrap_or(1);
    let y_max = p
        .points
        .iter()
        .map(|&(_, y, _)| to_f64(y))
        .fold(1.0f64, f64::max);
    let w = pad * 2.0 + scale * x_max as f64;
    let h = pad * 2.0 + scale * y_max;
    let map = |x: i64, y: f64| -> (f64, f64) { (pad + x as f64 * scale, h - pad - y * scale) };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w:.0} {h:.0}\">\n"
    );
    svg.push_str(&format!(
        "  <line x1=\"{pad}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        h - pad,
        w - pad / 2.0,
        h - pad
    ));
    svg.push_str(&format!(
        "  <line x1=\"{pad}\" y1=\"{:.1}\" x2=\"{pad}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        h - pad,
        pad / 2.0
    ));
    let pts: Vec<String> = p
        .vertices
        .iter()
        .map(|&(x, y)| {
            let (px, py) = map(x, to_f64(y));
            format!("{px:.1},{py:.1}")
        })
        .collect();
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n",
        pts.join(" ")
    ));
    for &(x, y, i) in &p.points {
        let (px, py) = map(x, to_f64(y));
        svg.push_str(&format!(
            "  <circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"3\" fill=\"blue\"><title>a_{i}</title></circle>\n"
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// One-line rendering like `theta^(-1/2) * e[q^(1/4)] * (1 + ...)`.
pub fn solution_human<T: Real>(sol: &SolutionForm<T>, ctx: &NumericContext<T>) -> String {
    let json = solution_to_json(sol, ctx);
    let mut parts = Vec::new();
    if json.theta_exp != "0" {
        parts.push(format!("theta^({})", json.theta_exp));
    }
    let char_txt = match &json.character {
        CharacterJson::QPow(s) => s.clone(),
        CharacterJson::Value { re, im } => format!("{re:.6}{im:+.6}i"),
    };
    if char_txt != "q^0" {
        parts.push(format!("e[{char_txt}]"));
    }
    let series = series_head(&json.coefficients, sol.ramification(), 4);
    parts.push(format!("({series})"));
    let mut text = parts.join(" * ");
    if sol.log_power > 0 {
        if let Some(tail) = sol.tail.first() {
            text.push_str(&format!("  +  lq * [{}]", solution_human(tail, ctx)));
        }
    }
    text
}

fn series_head(coeffs: &[[f64; 2]], ram: i64, terms: usize) -> String {
    let mut shown = 0;
    let mut out = String::new();
    for (d, [re, im]) in coeffs.iter().enumerate() {
        if re.abs() < 1e-14 && im.abs() < 1e-14 {
            continue;
        }
        if shown == terms {
            out.push_str(" + ...");
            return out;
        }
        let coeff = if im.abs() < 1e-14 {
            format!("{re:.6}")
        } else {
            format!("({re:.6}{im:+.6}i)")
        };
        let mono = if d == 0 {
            coeff
        } else if ram == 1 {
            format!("{coeff}*z^{d}")
        } else {
            format!("{coeff}*z^({d}/{ram})")
        };
        if shown > 0 {
            out.push_str(" + ");
        }
        out.push_str(&mono);
        shown += 1;
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
