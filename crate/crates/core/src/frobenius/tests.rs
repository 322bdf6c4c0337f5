use super::*;
use crate::fixtures::ClosedForm;
use crate::scalar::BigReal;
use crate::verify::apply_operator;

fn ctx2() -> NumericContext<f64> {
    NumericContext::double(Complex::from_f64(2.0, 0.0), 32).unwrap()
}

fn parse(text: &str, ctx: &NumericContext<f64>) -> DifferenceOperator<f64> {
    DifferenceOperator::parse(text, ctx).unwrap()
}

fn horizontal_char(op: &DifferenceOperator<f64>) -> CharacteristicData<f64> {
    let p = newton_polygon(op);
    characteristic(op, p.horizontal_segment().expect("horizontal segment")).unwrap()
}

#[test]
fn characteristic_ramanujan() {
    let ctx = ctx2();
    let cd = horizontal_char(&parse("q*z*S^2 - S + 1", &ctx));
    // -x + 1, root 1, no zero roots removed
    assert_eq!(cd.polynomial.len(), 2);
    assert_eq!(cd.zero_roots_removed, 0);
    assert_eq!(cd.roots.len(), 1);
    assert!(cd.roots[0].0.sub(&Complex::one()).abs() < 1e-12);
}

#[test]
fn characteristic_hypergeometric() {
    let ctx = ctx2();
    let cd = horizontal_char(&parse(
        "(1-S)*(1-q^1/2*S) - z*(1-q^1/3*S)*(1-q^1/5*S)",
        &ctx,
    ));
    // (1-x)(1-q^(1/2) x): roots 1 and q^(-1/2)
    assert_eq!(cd.roots.len(), 2);
    let want = ctx.q_power(rat(-1, 2));
    let found: Vec<f64> = cd.roots.iter().map(|(r, _)| r.re).collect();
    assert!(cd.roots.iter().any(|(r, _)| r.sub(&Complex::one()).abs() < 1e-12), "{found:?}");
    assert!(cd.roots.iter().any(|(r, _)| r.sub(&want).abs() < 1e-12));
}

#[test]
fn characteristic_level_double_root() {
    let ctx = ctx2();
    for l in [0i64, 1, 2, 3, 5] {
        let cd = horizontal_char(&parse(&format!("(1-S)^2 - z*S^{l}"), &ctx));
        assert_eq!(cd.roots.len(), 1, "l = {l}");
        assert_eq!(cd.roots[0].1, 2);
        assert!(cd.roots[0].0.sub(&Complex::one()).abs() < 1e-10);
    }
}

#[test]
fn characteristic_rejects_sloped_segment() {
    let ctx = ctx2();
    let op = parse("z^2*S^2 + z*S + 1", &ctx);
    let p = newton_polygon(&op);
    assert!(matches!(
        characteristic(&op, &p.segments[0]),
        Err(Error::NonHorizontalSegment { .. })
    ));
}

#[test]
fn resonance_partition_examples() {
    let ctx = ctx2();
    let one = Complex::<f64>::one();
    // {1, q^3}: one class, shifts {0, 3}
    let roots = vec![(one.clone(), 1), (ctx.q_powi(3), 1)];
    let classes = resonance_partition(&roots, &ctx, 64).unwrap();
    assert_eq!(classes.len(), 1);
    assert_eq!(classes[0].shifts, vec![0, 3]);
    assert!(classes[0].base.sub(&one).abs() < 1e-14);

    // {1, q^(1/2)}: two singleton classes
    let roots = vec![(one.clone(), 1), (ctx.q_power(rat(1, 2)), 1)];
    let classes = resonance_partition(&roots, &ctx, 64).unwrap();
    assert_eq!(classes.len(), 2);
    assert_eq!(classes[0].shifts, vec![0]);

    // double root: one class, shifts {0, 0}
    let roots = vec![(one, 2)];
    let classes = resonance_partition(&roots, &ctx, 64).unwrap();
    assert_eq!(classes.len(), 1);
    assert_eq!(classes[0].shifts, vec![0, 0]);
}

#[test]
fn solve_first_order_constant() {
    let ctx = ctx2();
    let basis = solve(&parse("1 - S", &ctx), SolveOptions::default()).unwrap();
    assert_eq!(basis.solutions.len(), 1);
    let sol = &basis.solutions[0];
    assert_eq!(sol.log_power, 0);
    assert!(sol.character.sub(&Complex::one()).abs() < 1e-13);
    assert!(sol.series.coeff(0).unwrap().sub(&Complex::one()).abs() < 1e-14);
    for d in 1..10 {
        assert!(sol.series.coeff(d).unwrap().abs() < 1e-14);
    }
}

#[test]
fn hypergeometric_coefficients_match_products() {
    let ctx = ctx2();
    let op = parse("(1-S)*(1-q^1/2*S) - z*(1-q^1/3*S)*(1-q^1/5*S)", &ctx);
    let basis = solve(&op, SolveOptions::default()).unwrap();
    assert_eq!(basis.solutions.len(), 2);
    let (alpha, beta, r) = (rat(1, 3), rat(1, 5), rat(1, 2));
    for (cf, char_exp) in [
        (ClosedForm::Hypergeometric1 { alpha, beta, r }, rat(0, 1)),
        (ClosedForm::Hypergeometric2 { alpha, beta, r }, rat(-1, 2)),
    ] {
        let want_char = ctx.q_power(char_exp);
        let sol = basis
            .solutions
            .iter()
            .find(|s| s.character.sub(&want_char).abs() < 1e-10)
            .unwrap_or_else(|| panic!("no solution with character q^{char_exp}"));
        let want = cf.coefficients(&ctx, 30);
        for (d, w) in want.iter().enumerate() {
            let got = sol.series.coeff(d as i64).unwrap();
            assert!(
                got.sub(w).abs() <= 1e-10 * w.abs().max(1e-10),
                "d = {d}: {got:?} vs {w:?}"
            );
        }
    }
}

#[test]
fn level_fixture_resonant_chain() {
    let ctx = ctx2();
    for l in [0i64, 1, 2] {
        let op = parse(&format!("(1-S)^2 - z*S^{l}"), &ctx);
        let basis = solve(&op, SolveOptions::default()).unwrap();
        assert_eq!(basis.solutions.len(), 2, "l = {l}");
        let pure = basis.solutions.iter().find(|s| s.log_power == 0).unwrap();
        let chain = basis.solutions.iter().find(|s| s.log_power == 1).unwrap();
        let first = ClosedForm::LevelFirst { l }.coefficients(&ctx, 30);
        let second = ClosedForm::LevelSecond { l }.coefficients(&ctx, 30);
        for d in 0..30usize {
            let got = pure.series.coeff(d as i64).unwrap();
            assert!(
                got.sub(&first[d]).abs() <= 1e-9 * first[d].abs(),
                "l = {l}, F1 d = {d}"
            );
            let got2 = chain.series.coeff(d as i64).unwrap();
            assert!(
                got2.sub(&second[d]).abs() <= 1e-9 * second[d].abs().max(1.0),
                "l = {l}, F2 d = {d}: {got2:?} vs {:?}",
                second[d]
            );
        }
        // the ell-stratum of the chain is the first solution
        let tail = chain.tail.first().unwrap();
        for d in 0..30usize {
            let got = tail.series.coeff(d as i64).unwrap();
            assert!(got.sub(&first[d]).abs() <= 1e-9 * first[d].abs());
        }
    }
}

#[test]
fn theta_transform_slope_minus_2() {
    // z^2 S^2 - S + 1 at slope -2 becomes q^(-2) sigma^2 - sigma + Q^2
    let ctx = ctx2();
    let op = parse("z^2*S^2 - S + 1", &ctx);
    let tt = theta_transform(&op, rat(-2, 1)).unwrap();
    assert_eq!(tt.ram, 1);
    let b = &tt.op;
    assert_eq!(b.order(), 2);
    assert!(b.coeff(0).coeff(2).unwrap().sub(&Complex::one()).abs() < 1e-14);
    assert!(b.coeff(1).coeff(0).unwrap().add(&Complex::one()).abs() < 1e-14);
    let qm2 = ctx.q_powi(-2);
    assert!(b.coeff(2).coeff(0).unwrap().sub(&qm2).abs() < 1e-14);
}

#[test]
fn theta_transform_slope_minus_1() {
    // z^2 S^2 + z S + 1 at slope -1 becomes q^(-1) sigma^2 + sigma + 1
    let ctx = ctx2();
    let op = parse("z^2*S^2 + z*S + 1", &ctx);
    let tt = theta_transform(&op, rat(-1, 1)).unwrap();
    let b = &tt.op;
    assert!(b.coeff(0).coeff(0).unwrap().sub(&Complex::one()).abs() < 1e-14);
    assert!(b.coeff(1).coeff(0).unwrap().sub(&Complex::one()).abs() < 1e-14);
    assert!(b.coeff(2).coeff(0).unwrap().sub(&ctx.q_powi(-1)).abs() < 1e-14);
}

#[test]
fn theta_transform_level_l() {
    // (1-S)^2 - z S^l at slope -1/(l-2): the conjugation gives
    // Q^2 - 2 Q sigma_p + p^(-1) sigma_p^2 - p^(-l(l-1)/2) sigma_p^l,
    // whose characteristic roots are the (l-2) values zeta p^((l+1)/2)
    for l in [3i64, 4, 5] {
        let ctx = ctx2();
        let op = parse(&format!("(1-S)^2 - z*S^{l}"), &ctx);
        let tt = theta_transform(&op, rat(-1, l - 2)).unwrap();
        assert_eq!(tt.ram, l - 2);
        let p_ctx = tt.op.ctx();
        let b = &tt.op;
        assert_eq!(b.order() as i64, l);
        assert!(b.coeff(0).coeff(2).unwrap().sub(&Complex::one()).abs() < 1e-12, "l={l}");
        assert!(
            b.coeff(1).coeff(1).unwrap().add(&Complex::from_i64(2)).abs() < 1e-12,
            "l={l}"
        );
        assert!(
            b.coeff(2).coeff(0).unwrap().sub(&p_ctx.q_powi(-1)).abs() < 1e-12,
            "l={l}"
        );
        assert!(
            b.coeff(l as usize)
                .coeff(0)
                .unwrap()
                .add(&p_ctx.q_powi(-l * (l - 1) / 2))
                .abs()
                < 1e-9,
            "l={l}"
        );
        // characteristic of the now-horizontal segment
        let poly = newton_polygon(b);
        let hseg = poly.horizontal_segment().unwrap();
        assert_eq!(hseg.y_start, Rational::zero());
        let cd = characteristic(b, hseg).unwrap();
        assert_eq!(cd.zero_roots_removed, 2);
        assert_eq!(cd.roots.len() as i64, l - 2);
        let scale = p_ctx.q_power(rat(l + 1, 2));
        for (root, mult) in &cd.roots {
            assert_eq!(*mult, 1);
            let unit = root.div(&scale);
            assert!((unit.abs() - 1.0).abs() < 1e-10, "l={l}: |zeta| = {}", unit.abs());
            let zl = unit.powi(l - 2);
            assert!(zl.sub(&Complex::one()).abs() < 1e-9, "l={l}");
        }
    }
}

#[test]
fn solve_slope_minus_1_characters() {
    let ctx = ctx2();
    let op = parse("z^2*S^2 + z*S + 1", &ctx);
    let basis = solve(&op, SolveOptions::default()).unwrap();
    assert_eq!(basis.solutions.len(), 2);
    // characters are the roots of q^(-1) x^2 + x + 1 = 0; at q = 2 these
    // are -1 +- i
    for sol in &basis.solutions {
        assert_eq!(sol.theta_exp, rat(-1, 1));
        assert_eq!(sol.log_power, 0);
        let c = &sol.character;
        let val = c
            .mul(c)
            .scale(&0.5)
            .add(c)
            .add(&Complex::one());
        assert!(val.abs() < 1e-12, "character {c:?} not a characteristic root");
        assert!((c.re + 1.0).abs() < 1e-10 && (c.im.abs() - 1.0).abs() < 1e-10);
        // series identically 1
        assert!(sol.series.coeff(0).unwrap().sub(&Complex::one()).abs() < 1e-13);
        for d in 1..8 {
            assert!(sol.series.coeff(d).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn solve_slope_minus_half() {
    let ctx = ctx2();
    let op = parse("z*S^2 - 1", &ctx);
    let basis = solve(&op, SolveOptions::default()).unwrap();
    assert_eq!(basis.solutions.len(), 2);
    let want = ctx.q_power(rat(1, 4));
    for sol in &basis.solutions {
        assert_eq!(sol.theta_exp, rat(-1, 2));
        assert_eq!(sol.ramification(), 2);
        let c = &sol.character;
        assert!(
            c.sub(&want).abs() < 1e-12 || c.add(&want).abs() < 1e-12,
            "character {c:?}"
        );
    }
}

#[test]
fn solve_ramanujan_both_branches() {
    let ctx = ctx2();
    let op = parse("q*z*S^2 - S + 1", &ctx);
    let basis = solve(&op, SolveOptions::default()).unwrap();
    assert_eq!(basis.solutions.len(), 2);
    let horizontal = basis
        .solutions
        .iter()
        .find(|s| s.theta_exp.is_zero())
        .unwrap();
    let theta = basis
        .solutions
        .iter()
        .find(|s| s.theta_exp == rat(-1, 1))
        .unwrap();
    let want_h = ClosedForm::RamanujanHorizontal.coefficients(&ctx, 24);
    let want_t = ClosedForm::RamanujanTheta.coefficients(&ctx, 24);
    for d in 0..24usize {
        let gh = horizontal.series.coeff(d as i64).unwrap();
        assert!(
            gh.sub(&want_h[d]).abs() <= 1e-8 * want_h[d].abs(),
            "horizontal d = {d}"
        );
        let gt = theta.series.coeff(d as i64).unwrap();
        assert!(gt.sub(&want_t[d]).abs() <= 1e-10 * want_t[d].abs(), "theta d = {d}");
    }
    // the zero root of the transformed characteristic was skipped
    let seg = basis
        .diagnostics
        .segments
        .iter()
        .find(|s| !s.horizontal)
        .unwrap();
    assert_eq!(seg.zero_roots_removed, 1);
}

#[test]
fn solve_slope_minus_2_shifted_character() {
    let ctx = ctx2();
    let op = parse("z^2*S^2 - S + 1", &ctx);
    let basis = solve(&op, SolveOptions::default()).unwrap();
    assert_eq!(basis.solutions.len(), 2);
    let theta = basis
        .solutions
        .iter()
        .find(|s| s.theta_exp == rat(-2, 1))
        .unwrap();
    // seeded by the characteristic root q^2 after one zero root is skipped
    assert!(theta.character.sub(&ctx.q_powi(2)).abs() < 1e-10);
    let want = ClosedForm::SlopeMinus2Theta.coefficients(&ctx, 20);
    for (d, w) in want.iter().enumerate() {
        let got = theta.series.coeff(d as i64).unwrap();
        assert!(got.sub(w).abs() <= 1e-10 * w.abs().max(1e-12), "d = {d}");
    }
}

#[test]
fn quintic_transform_characteristic_roots() {
    let ctx = ctx2();
    let text = "(1-S)^5 - z*(1-q*S^5)*(1-q^2*S^5)*(1-q^3*S^5)*(1-q^4*S^5)*(1-q^5*S^5)";
    let op = parse(text, &ctx);
    let tt = theta_transform(&op, rat(-1, 20)).unwrap();
    assert_eq!(tt.ram, 20);
    let poly = newton_polygon(&tt.op);
    let hseg = poly.horizontal_segment().unwrap();
    let cd = characteristic(&tt.op, hseg).unwrap();
    assert_eq!(cd.zero_roots_removed, 5);
    assert_eq!(cd.roots.len(), 20);
    // roots are xi p^(-1/2), xi^20 = 1, p = q^(1/20)
    let p_ctx = tt.op.ctx();
    let scale = p_ctx.q_power(rat(-1, 2));
    for (root, _) in &cd.roots {
        let unit = root.div(&scale);
        assert!((unit.abs() - 1.0).abs() < 1e-9);
        assert!(unit.powi(20).sub(&Complex::one()).abs() < 1e-8);
    }
}

#[test]
fn solve_scaling_invariance() {
    let ctx = ctx2();
    let op = parse("(1-S)*(1-q^1/2*S) - z*(1-q^1/3*S)*(1-q^1/5*S)", &ctx);
    let scaled = op.scaled(&Complex::from_f64(-2.5, 1.25));
    let a = solve(&op, SolveOptions::default()).unwrap();
    let b = solve(&scaled, SolveOptions::default()).unwrap();
    assert_eq!(a.solutions.len(), b.solutions.len());
    for (x, y) in a.solutions.iter().zip(b.solutions.iter()) {
        assert!(x.character.sub(&y.character).abs() < 1e-9);
        let d = x.series.sub(&y.series);
        assert!(d.max_abs() < 1e-9);
    }
}

#[test]
fn truncation_extension_is_consistent() {
    let ctx = ctx2();
    let op = parse("(1-S)^2 - z*S^2", &ctx);
    let short = solve(
        &op,
        SolveOptions {
            truncation: Some(12),
            max_shift: 64,
        },
    )
    .unwrap();
    let long = solve(
        &op,
        SolveOptions {
            truncation: Some(25),
            max_shift: 64,
        },
    )
    .unwrap();
    for (a, b) in short.solutions.iter().zip(long.solutions.iter()) {
        for d in 0..12i64 {
            let x = a.series.coeff(d).unwrap();
            let y = b.series.coeff(d).unwrap();
            assert_eq!(x.re, y.re, "forward recurrence must agree exactly");
            assert_eq!(x.im, y.im);
        }
    }
}

#[test]
fn residuals_vanish_for_all_fixture_operators() {
    let ctx = ctx2();
    for text in [
        "(1-S)*(1-q^1/2*S) - z*(1-q^1/3*S)*(1-q^1/5*S)",
        "(1-S)^2 - z*S^2",
        "(1-S)^2 - z*S^5",
        "q*z*S^2 - S + 1",
        "z^2*S^2 + z*S + 1",
        "z^2*S^2 - S + 1",
        "z*S^2 - 1",
    ] {
        let op = parse(text, &ctx);
        let basis = solve(&op, SolveOptions::default()).unwrap();
        for (i, sol) in basis.solutions.iter().enumerate() {
            let r = apply_operator(&op, sol).unwrap();
            assert!(
                r.vanishes(&1e-8),
                "{text} solution {i}: max_rel = {}",
                r.max_rel
            );
        }
    }
}

#[test]
fn high_precision_hypergeometric() {
    let q: Complex<BigReal> = Complex::from_f64(2.0, 0.0);
    let ctx = NumericContext::high(q, 50, 32).unwrap();
    let op = DifferenceOperator::parse("(1-S)*(1-q^1/2*S) - z*(1-q^1/3*S)*(1-q^1/5*S)", &ctx)
        .unwrap();
    let basis = solve(&op, SolveOptions::default()).unwrap();
    let (alpha, beta, r) = (rat(1, 3), rat(1, 5), rat(1, 2));
    let want = ClosedForm::Hypergeometric1 { alpha, beta, r }.coefficients(&ctx, 30);
    let sol = basis
        .solutions
        .iter()
        .find(|s| s.character.sub(&Complex::one()).abs().to_f64() < 1e-20)
        .unwrap();
    let tol = BigReal::from_decimal_str("1e-28").unwrap();
    for (d, w) in want.iter().enumerate() {
        let got = sol.series.coeff(d as i64).unwrap();
        assert!(got.sub(w).abs() < tol.mul(&w.abs()), "d = {d}");
    }
}

#[test]
fn unexpected_resonance_is_reported() {
    // characteristic roots {1, q^100} exceed a tiny max_shift bound, so
    // the classes are treated as separate and the recurrence pivot dies
    let ctx = ctx2();
    let op = parse("(1-S)*(1-q^-3*S)", &ctx);
    let res = solve(
        &op,
        SolveOptions {
            truncation: Some(16),
            max_shift: 1,
        },
    );
    assert!(matches!(res, Err(Error::UnexpectedResonance { .. })), "{res:?}");
}
