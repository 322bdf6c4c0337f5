//! Expression language for q-difference operators.
//!
//! Grammar:
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' integer)?
//! atom   := 'z' | 'S' | 'i' | 'q' ('^' rational)? | number | '(' expr ')'
//! number := digits ['.' digits] [('e'|'E') ['+'|'-'] digits] ['i']
//!         | digits '/' digits ['i']
//! ```
//!
//! `S` is the shift f(z) -> f(qz); multiplication is operator composition,
//! so `S*z` normalizes to `q*z*S`. Exponents on `q` may be rational
//! (`q^-3/2`, `q^(1/2)`); exponents elsewhere must be nonnegative integers
//! unless the base expands to a scalar.

use crate::error::{Error, Result};
use crate::numctx::{rat, NumericContext, Rational};
use crate::scalar::{Complex, Real};
use crate::series::PuiseuxSeries;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr<T: Real> {
    Z,
    Shift,
    Const(Complex<T>),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Pow(Box<Expr<T>>, i64),
    Neg(Box<Expr<T>>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok<T: Real> {
    Z,
    Shift,
    Q,
    Imag,
    Num(Complex<T>),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Int(i64),
    Slash,
}

struct Lexer<T: Real> {
    toks: Vec<(usize, Tok<T>)>,
    pos: usize,
    end: usize,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        pos,
        msg: msg.into(),
    }
}

fn lex<T: Real>(text: &str) -> Result<Vec<(usize, Tok<T>)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            'z' => {
                toks.push((i, Tok::Z));
                i += 1;
            }
            'S' | 'Q' => {
                // Q is accepted as an alias for the variable after a
                // ramified change of variable; it prints as z
                if c == 'S' {
                    toks.push((i, Tok::Shift));
                } else {
                    toks.push((i, Tok::Z));
                }
                i += 1;
            }
            'q' | 'p' => {
                toks.push((i, Tok::Q));
                i += 1;
            }
            'i' => {
                toks.push((i, Tok::Imag));
                i += 1;
            }
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                let mut seen_dot = false;
                let mut seen_exp = false;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() {
                        i += 1;
                    } else if d == '.' && !seen_dot && !seen_exp {
                        seen_dot = true;
                        i += 1;
                    } else if (d == 'e' || d == 'E') && !seen_exp && i + 1 < bytes.len() {
                        let nx = bytes[i + 1] as char;
                        let nn = if nx == '+' || nx == '-' {
                            bytes.get(i + 2).map(|b| *b as char)
                        } else {
                            Some(nx)
                        };
                        if nn.is_some_and(|d2| d2.is_ascii_digit()) {
                            seen_exp = true;
                            i += if nx == '+' || nx == '-' { 2 } else { 1 };
                        } else {
                            break;
                        }
                    } else {
                        break;
                    }
                }
                let lit = &text[start..i];
                if !seen_dot && !seen_exp {
                    let v: i64 = lit
                        .parse()
                        .map_err(|_| err(start, format!("integer literal too large: {lit}")))?;
                    // imaginary suffix
                    if i < bytes.len() && bytes[i] as char == 'i' {
                        i += 1;
                        toks.push((start, Tok::Num(Complex::new(T::zero(), T::from_i64(v)))));
                    } else {
                        toks.push((start, Tok::Int(v)));
                    }
                } else {
                    let v = T::from_decimal_str(lit)
                        .ok_or_else(|| err(start, format!("bad number literal: {lit}")))?;
                    if i < bytes.len() && bytes[i] as char == 'i' {
                        i += 1;
                        toks.push((start, Tok::Num(Complex::new(T::zero(), v))));
                    } else {
                        toks.push((start, Tok::Num(Complex::from_real(v))));
                    }
                }
            }
            other => return Err(err(i, format!("unexpected character '{other}'"))),
        }
    }
    Ok(toks)
}

impl<T: Real> Lexer<T> {
    fn peek(&self) -> Option<&Tok<T>> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_pos(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok<T>> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok<T>, what: &str) -> Result<()> {
        let p = self.peek_pos();
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => Err(err(p, format!("expected {what}"))),
        }
    }
}

/// Parses an operator expression against a context (literals are realized
/// at the context's precision, `q` at its value).
pub fn parse_expr<T: Real>(text: &str, ctx: &NumericContext<T>) -> Result<Expr<T>> {
    let toks = lex::<T>(text)?;
    let mut lx = Lexer {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = parse_sum(&mut lx, ctx)?;
    if lx.peek().is_some() {
        return Err(err(lx.peek_pos(), "trailing input"));
    }
    Ok(e)
}

fn parse_sum<T: Real>(lx: &mut Lexer<T>, ctx: &NumericContext<T>) -> Result<Expr<T>> {
    let mut acc = if lx.peek() == Some(&Tok::Minus) {
        lx.next();
        Expr::Neg(Box::new(parse_term(lx, ctx)?))
    } else {
        parse_term(lx, ctx)?
    };
    loop {
        match lx.peek() {
            Some(Tok::Plus) => {
                lx.next();
                let rhs = parse_term(lx, ctx)?;
                acc = Expr::Add(Box::new(acc), Box::new(rhs));
            }
            Some(Tok::Minus) => {
                lx.next();
                let rhs = parse_term(lx, ctx)?;
                acc = Expr::Sub(Box::new(acc), Box::new(rhs));
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_term<T: Real>(lx: &mut Lexer<T>, ctx: &NumericContext<T>) -> Result<Expr<T>> {
    let mut acc = parse_factor(lx, ctx)?;
    while lx.peek() == Some(&Tok::Star) {
        lx.next();
        let rhs = parse_factor(lx, ctx)?;
        acc = Expr::Mul(Box::new(acc), Box::new(rhs));
    }
    Ok(acc)
}

fn parse_signed_int<T: Real>(lx: &mut Lexer<T>) -> Result<i64> {
    let p = lx.peek_pos();
    let neg = if lx.peek() == Some(&Tok::Minus) {
        lx.next();
        true
    } else {
        false
    };
    match lx.next() {
        Some(Tok::Int(v)) => Ok(if neg { -v } else { v }),
        _ => Err(err(p, "expected integer exponent")),
    }
}

/// rational := ['-'] int ['/' int], with optional parentheses.
fn parse_rational_exp<T: Real>(lx: &mut Lexer<T>) -> Result<Rational> {
    let parens = lx.peek() == Some(&Tok::LParen);
    if parens {
        lx.next();
    }
    let n = parse_signed_int(lx)?;
    let mut r = Rational::from_integer(n);
    if lx.peek() == Some(&Tok::Slash) {
        lx.next();
        let p = lx.peek_pos();
        match lx.next() {
            Some(Tok::Int(d)) if d != 0 => r = rat(n, d),
            _ => return Err(err(p, "expected nonzero denominator")),
        }
    }
    if parens {
        lx.expect(Tok::RParen, "')'")?;
    }
    Ok(r)
}

fn parse_factor<T: Real>(lx: &mut Lexer<T>, ctx: &NumericContext<T>) -> Result<Expr<T>> {
    let atom = parse_atom(lx, ctx)?;
    if lx.peek() == Some(&Tok::Caret) {
        lx.next();
        let e = parse_signed_int(lx)?;
        return Ok(Expr::Pow(Box::new(atom), e));
    }
    Ok(atom)
}

fn parse_atom<T: Real>(lx: &mut Lexer<T>, ctx: &NumericContext<T>) -> Result<Expr<T>> {
    let p = lx.peek_pos();
    match lx.next() {
        Some(Tok::Z) => Ok(Expr::Z),
        Some(Tok::Shift) => Ok(Expr::Shift),
        Some(Tok::Imag) => Ok(Expr::Const(Complex::i())),
        Some(Tok::Q) => {
            if lx.peek() == Some(&Tok::Caret) {
                lx.next();
                let r = parse_rational_exp(lx)?;
                Ok(Expr::Const(ctx.q_power(r)))
            } else {
                Ok(Expr::Const(ctx.q().clone()))
            }
        }
        Some(Tok::Int(v)) => {
            // integer possibly followed by '/' denominator (rational literal)
            if lx.peek() == Some(&Tok::Slash) {
                lx.next();
                let dp = lx.peek_pos();
                match lx.next() {
                    Some(Tok::Int(d)) if d != 0 => {
                        let val = T::from_i64(v).div(&T::from_i64(d));
                        Ok(Expr::Const(Complex::from_real(val)))
                    }
                    _ => Err(err(dp, "expected nonzero denominator")),
                }
            } else {
                Ok(Expr::Const(Complex::from_i64(v)))
            }
        }
        Some(Tok::Num(c)) => Ok(Expr::Const(c)),
        Some(Tok::LParen) => {
            let e = parse_sum(lx, ctx)?;
            lx.expect(Tok::RParen, "')'")?;
            Ok(e)
        }
        _ => Err(err(p, "expected 'z', 'S', 'q', a number, or '('")),
    }
}

/// Coefficient list of the fully expanded normal form sum_i a_i(z) S^i,
/// using the rewrite S * a(z) = a(qz) * S.
pub fn expand<T: Real>(expr: &Expr<T>, ctx: &NumericContext<T>) -> Result<Vec<PuiseuxSeries<T>>> {
    match expr {
        Expr::Z => Ok(vec![PuiseuxSeries::monomial(Complex::one(), 1, 1)]),
        Expr::Shift => Ok(vec![PuiseuxSeries::zero(1), PuiseuxSeries::one(1)]),
        Expr::Const(c) => Ok(vec![PuiseuxSeries::monomial(c.clone(), 0, 1)]),
        Expr::Neg(e) => Ok(expand(e, ctx)?.into_iter().map(|s| s.neg()).collect()),
        Expr::Add(a, b) => Ok(add_coeffs(expand(a, ctx)?, expand(b, ctx)?)),
        Expr::Sub(a, b) => {
            let nb: Vec<_> = expand(b, ctx)?.into_iter().map(|s| s.neg()).collect();
            Ok(add_coeffs(expand(a, ctx)?, nb))
        }
        Expr::Mul(a, b) => Ok(mul_coeffs(&expand(a, ctx)?, &expand(b, ctx)?, ctx)),
        Expr::Pow(a, e) => {
            let base = expand(a, ctx)?;
            if *e < 0 {
                // negative powers are only meaningful for scalars
                if base.len() == 1 && base[0].len() <= 1 && base[0].offset() == 0 {
                    let c = base[0].coeff(0).unwrap_or_else(Complex::zero);
                    if c.is_exact_zero() {
                        return Err(Error::Parse {
                            pos: 0,
                            msg: "zero raised to a negative power".into(),
                        });
                    }
                    return Ok(vec![PuiseuxSeries::monomial(c.powi(*e), 0, 1)]);
                }
                return Err(Error::Parse {
                    pos: 0,
                    msg: "negative exponents are only allowed on scalars".into(),
                });
            }
            let mut acc = vec![PuiseuxSeries::one(1)];
            for _ in 0..*e {
                acc = mul_coeffs(&acc, &base, ctx);
            }
            Ok(acc)
        }
    }
}

fn add_coeffs<T: Real>(
    mut a: Vec<PuiseuxSeries<T>>,
    b: Vec<PuiseuxSeries<T>>,
) -> Vec<PuiseuxSeries<T>> {
    if b.len() > a.len() {
        a.resize(b.len(), PuiseuxSeries::zero(1));
    }
    for (i, s) in b.into_iter().enumerate() {
        a[i] = a[i].add(&s);
    }
    a
}

fn mul_coeffs<T: Real>(
    a: &[PuiseuxSeries<T>],
    b: &[PuiseuxSeries<T>],
    ctx: &NumericContext<T>,
) -> Vec<PuiseuxSeries<T>> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![PuiseuxSeries::zero(1); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_empty() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_empty() {
                continue;
            }
            // a_i(z) S^i * b_j(z) S^j = a_i(z) b_j(q^i z) S^(i+j)
            let shifted = bj.sigma_pow(ctx, i as i64);
            out[i + j] = out[i + j].add(&ai.mul(&shifted));
        }
    }
    out
}

/// Applies the unexpanded expression tree to a series: the independent
/// route for checking normal-form correctness.
pub fn apply_expr<T: Real>(
    expr: &Expr<T>,
    ctx: &NumericContext<T>,
    f: &PuiseuxSeries<T>,
) -> PuiseuxSeries<T> {
    match expr {
        Expr::Z => f.with_ram(f.ram()).shift_exponent(f.ram()),
        Expr::Shift => f.sigma_pow(ctx, 1),
        Expr::Const(c) => f.scale(c),
        Expr::Neg(e) => apply_expr(e, ctx, f).neg(),
        Expr::Add(a, b) => apply_expr(a, ctx, f).add(&apply_expr(b, ctx, f)),
        Expr::Sub(a, b) => apply_expr(a, ctx, f).sub(&apply_expr(b, ctx, f)),
        Expr::Mul(a, b) => {
            let inner = apply_expr(b, ctx, f);
            apply_expr(a, ctx, &inner)
        }
        Expr::Pow(a, e) => {
            assert!(*e >= 0, "apply_expr on negative operator power");
            let mut acc = f.clone();
            for _ in 0..*e {
                acc = apply_expr(a, ctx, &acc);
            }
            acc
        }
    }
}
