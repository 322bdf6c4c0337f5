//! Polynomial root finding for characteristic equations: Aberth-Ehrlich
//! simultaneous iteration in double precision seeds the roots, clusters of
//! nearby seeds are merged into multiple roots, and every root is polished
//! by Newton steps at the target precision (on the (mu-1)-th derivative for
//! a root of multiplicity mu, where it is simple).

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

type C64 = Complex<f64>;

/// Relative clustering radius for merging seeds into a multiple root. A
/// root of multiplicity mu computed in double precision scatters over a
/// radius of roughly eps^(1/mu) (about 1e-3 for mu = 5), so the threshold
/// must sit above that; fixture root separations are all > 0.05.
const CLUSTER_RADIUS: f64 = 6e-3;

fn horner<T: Real>(coeffs: &[Complex<T>], x: &Complex<T>) -> Complex<T> {
    let mut acc = Complex::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(c);
    }
    acc
}

fn derivative<T: Real>(coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale(&T::from_i64(k as i64)))
        .collect()
}

fn aberth(coeffs: &[C64]) -> Result<Vec<C64>> {
    let d = coeffs.len() - 1;
    let deriv = derivative(coeffs);
    let lead = coeffs[d].abs();
    // seed circle: Cauchy-style radius, deterministic angular offset to
    // break symmetric stalls
    let radius = 1.0
        + coeffs[..d]
            .iter()
            .enumerate()
            .map(|(k, c)| (c.abs() / lead).powf(1.0 / (d - k) as f64))
            .fold(0.0, f64::max);
    let mut xs: Vec<C64> = (0..d)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.372) / d as f64 + 0.1;
            let r = radius * (1.0 + 0.05 * ((k as f64) * 0.7).sin());
            Complex::from_f64(r * ang.cos(), r * ang.sin())
        })
        .collect();

    for _ in 0..400 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let p = horner(coeffs, &xs[i]);
            let dp = horner(&deriv, &xs[i]);
            if dp.is_exact_zero() {
                continue;
            }
            let newton = p.div(&dp);
            let mut s = Complex::<f64>::zero();
            for (j, xj) in xs.iter().enumerate() {
                if j != i {
                    s = s.add(&xs[i].sub(xj).inv());
                }
            }
            let denom = Complex::one().sub(&newton.mul(&s));
            let w = if denom.abs() < 1e-30 { newton } else { newton.div(&denom) };
            xs[i] = xs[i].sub(&w);
            let rel = w.abs() / (1.0 + xs[i].abs());
            if rel > moved {
                moved = rel;
            }
        }
        if moved < 1e-14 {
            return Ok(xs);
        }
    }
    // convergence to the cluster radius is all the polish step needs
    Ok(xs)
}

fn cluster(xs: &[C64]) -> Vec<(C64, usize)> {
    let n = xs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
            r
        } else {
            i
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0 + xs[i].abs().max(xs[j].abs());
            if xs[i].sub(&xs[j]).abs() <= CLUSTER_RADIUS * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<(C64, usize)> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if let Some(pos) = reps.iter().position(|&x| x == r) {
            let (sum, cnt) = &mut groups[pos];
            *sum = sum.add(&xs[i]);
            *cnt += 1;
        } else {
            reps.push(r);
            groups.push((xs[i].clone(), 1));
        }
    }
    groups
        .into_iter()
        .map(|(sum, cnt)| (sum.scale(&(1.0 / cnt as f64)), cnt))
        .collect()
}

fn polish<T: Real>(coeffs: &[Complex<T>], seed: &Complex<T>, mult: usize) -> Complex<T> {
    // a multiplicity-mu root is a simple root of the (mu-1)-th derivative
    let mut p = coeffs.to_vec();
    for _ in 1..mult {
        p = derivative(&p);
    }
    let dp = derivative(&p);
    let mut x = seed.clone();
    for _ in 0..6 {
        let fv = horner(&p, &x);
        let dv = horner(&dp, &x);
        if dv.is_exact_zero() {
            break;
        }
        let step = fv.div(&dv);
        x = x.sub(&step);
        if step.abs().to_f64() < 1e-60 * (1.0 + x.abs().to_f64()) {
            break;
        }
    }
    x
}

/// All roots of the polynomial with the given dense coefficients (constant
/// term first), as (value, multiplicity) pairs. Deterministic ordering:
/// descending real part, then descending imaginary part.
pub fn polynomial_roots<T: Real>(coeffs: &[Complex<T>]) -> Result<Vec<(Complex<T>, usize)>> {
    let mut cs = coeffs.to_vec();
    while cs.last().is_some_and(|c| c.is_exact_zero()) {
        cs.pop();
    }
    if cs.len() <= 1 {
        return if cs.is_empty() {
            Err(Error::Solve("root finding on the zero polynomial".into()))
        } else {
            Ok(vec![])
        };
    }
    // scale to unit max magnitude before downcasting to f64
    let maxmag = cs
        .iter()
        .map(|c| c.abs().to_f64())
        .fold(0.0f64, f64::max);
    if !maxmag.is_finite() || maxmag == 0.0 {
        return Err(Error::Solve("characteristic coefficients out of range".into()));
    }
    let seeds64: Vec<C64> = cs
        .iter()
        .map(|c| Complex::from_f64(c.re.to_f64() / maxmag, c.im.to_f64() / maxmag))
        .collect();
    let raw = aberth(&seeds64)?;
    let clustered = cluster(&raw);
    let mut out: Vec<(Complex<T>, usize)> = clustered
        .into_iter()
        .map(|(center, mult)| {
            let seed = Complex::new(T::from_f64(center.re), T::from_f64(center.im));
            (polish(&cs, &seed, mult), mult)
        })
        .collect();
    out.sort_by(|a, b| {
        let (ar, ai) = (a.0.re.to_f64(), a.0.im.to_f64());
        let (br, bi) = (b.0.re.to_f64(), b.0.im.to_f64());
        br.partial_cmp(&ar)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(bi.partial_cmp(&ai).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(out)
}
