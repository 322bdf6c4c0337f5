//! `qfrob`: classify, solve, and verify linear q-difference equations at
//! z = 0 from the command line.
//!
//! Exit codes: 0 success, 1 oracle/verification mismatch or runtime
//! failure, 2 operator parse error, 3 invalid configuration.

mod output;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qfrob_core::classify::{is_regular_singular, newton_polygon};
use qfrob_core::fixtures::{builtin_fixtures, find_fixture, run_fixture, Fixture};
use qfrob_core::frobenius::{solve, SolveOptions};
use qfrob_core::jsonio::{polygon_to_json, solution_from_json, solution_to_json};
use qfrob_core::operator::DifferenceOperator;
use qfrob_core::scalar::set_big_precision_bits;
use qfrob_core::special::ThetaEvaluator;
use qfrob_core::verify::{apply_operator, growth_classify};
use qfrob_core::{BigReal, Complex, Error, NumericContext, Real};

#[derive(Parser)]
#[command(name = "qfrob", version, about = "local solution bases for linear q-difference equations")]
struct Cli {
    /// parameter q, |q| > 1: decimal, rational p/r, or a+bi
    #[arg(long, global = true, default_value = "2", allow_hyphen_values = true)]
    q: String,

    /// significant decimal digits; above 16 switches to big floats
    #[arg(long, global = true, default_value_t = 15)]
    precision: u32,

    /// comparison tolerance (default 1e-10 double, 1e-30 high precision)
    #[arg(long, global = true)]
    tol: Option<String>,

    /// default series truncation order
    #[arg(long, global = true, default_value_t = 40)]
    truncation: i64,

    /// resonance search bound
    #[arg(long, global = true, default_value_t = 64)]
    max_shift: i64,

    /// machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,

    /// write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolygonFormat {
    Ascii,
    Svg,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalTarget {
    Theta,
    Lq,
    Eq,
}

#[derive(Subcommand)]
enum Command {
    /// regular/irregular verdict with the valuation report
    Classify { operator: String },

    /// Newton polygon of the operator
    Polygon {
        #[arg(long, value_enum, default_value_t = PolygonFormat::Ascii)]
        format: PolygonFormat,
        operator: String,
    },

    /// local solution basis at z = 0
    Solve {
        /// emit the coefficient table as CSV instead of text/JSON
        #[arg(long)]
        csv: bool,
        operator: String,
    },

    /// residual and growth report for the solution basis
    Verify {
        /// JSON file with solutions (output of `solve --json`); solved
        /// in-process when absent
        #[arg(long)]
        solutions: Option<String>,
        operator: String,
    },

    /// evaluate a special function at a point
    Eval {
        #[arg(value_enum)]
        target: EvalTarget,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },

    /// list fixtures or run them against their oracles
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    /// list fixture names and operators
    List,
    /// run one fixture (or all) and compare against the oracle
    Run {
        name: Option<String>,
        #[arg(long)]
        all: bool,
        /// load a fixture from a JSON file instead of the built-in set
        #[arg(long)]
        file: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = if cli.precision <= 16 {
        run::<f64>(&cli)
    } else {
        set_big_precision_bits(((cli.precision as f64) * std::f64::consts::LOG2_10) as usize + 32);
        run::<BigReal>(&cli)
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err((c, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(c)
        }
    }
}

type CliResult = Result<u8, (u8, String)>;

fn classify_error(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::InvalidContext(_) => 3,
        _ => 1,
    }
}

fn run<T: Real>(cli: &Cli) -> CliResult {
    let ctx = build_context::<T>(cli)?;
    let mut sink = output::Sink::new(cli.out.as_deref()).map_err(|e| (1, e.to_string()))?;
    let code = dispatch(cli, &ctx, &mut sink).map_err(|e| (classify_error(&e), e.to_string()))?;
    sink.finish().map_err(|e| (1, e.to_string()))?;
    Ok(code)
}

fn build_context<T: Real>(cli: &Cli) -> Result<NumericContext<T>, (u8, String)> {
    let q = parse_complex_literal::<T>(&cli.q)
        .ok_or((3, format!("cannot parse q literal '{}'", cli.q)))?;
    let tol = match &cli.tol {
        Some(t) => T::from_decimal_str(t).ok_or((3, format!("cannot parse tolerance '{t}'")))?,
        None => {
            if cli.precision <= 16 {
                T::from_f64(1e-10)
            } else {
                T::from_decimal_str("1e-30").expect("tol literal")
            }
        }
    };
    NumericContext::new(q, cli.precision, tol, cli.truncation)
        .map_err(|e| (3, e.to_string()))
}

/// Parses `a`, `p/r`, `a+bi`, `a-bi`, or `bi` into a complex number.
fn parse_complex_literal<T: Real>(s: &str) -> Option<Complex<T>> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let parse_real = |t: &str| -> Option<T> {
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.parse().ok()?;
            let d: i64 = d.parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(T::from_i64(n).div(&T::from_i64(d)))
        } else {
            T::from_decimal_str(t)
        }
    };
    // find a top-level sign separating real and imaginary parts
    let bytes = s.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
            split = Some(i);
            break;
        }
    }
    if s.ends_with('i') {
        match split {
            Some(i) => {
                let re = parse_real(&s[..i])?;
                let im_txt = &s[i..s.len() - 1];
                let im = if im_txt == "+" || im_txt == "-" {
                    let one = T::one();
                    if im_txt == "-" {
                        one.neg()
                    } else {
                        one
                    }
                } else {
                    parse_real(im_txt)?
                };
                Some(Complex::new(re, im))
            }
            None => {
                let body = &s[..s.len() - 1];
                let im = if body.is_empty() {
                    T::one()
                } else {
                    parse_real(body)?
                };
                Some(Complex::new(T::zero(), im))
            }
        }
    } else {
        Some(Complex::from_real(parse_real(&s)?))
    }
}

fn dispatch<T: Real>(
    cli: &Cli,
    ctx: &NumericContext<T>,
    sink: &mut output::Sink,
) -> qfrob_core::Result<u8> {
    match &cli.command {
        Command::Classify { operator } => {
            let op = DifferenceOperator::parse(operator, ctx)?;
            let rep = is_regular_singular(&op);
            if cli.json {
                sink.json(&rep)?;
            } else {
                writeln!(sink, "{}", rep.summary)?;
                for (i, v, offending) in &rep.valuations {
                    let mark = if *offending { "  <-- offending" } else { "" };
                    writeln!(sink, "  val(a_{i}) = {v}{mark}")?;
                }
            }
            Ok(0)
        }
        Command::Polygon { format, operator } => {
            let op = DifferenceOperator::parse(operator, ctx)?;
            let polygon = newton_polygon(&op);
            match (cli.json, format) {
                (true, _) | (_, PolygonFormat::Json) => sink.json(&polygon_to_json(&polygon))?,
                (_, PolygonFormat::Ascii) => write!(sink, "{}", render::polygon_ascii(&polygon))?,
                (_, PolygonFormat::Svg) => write!(sink, "{}", render::polygon_svg(&polygon))?,
            }
            Ok(0)
        }
        Command::Solve { csv, operator } => {
            let op = DifferenceOperator::parse(operator, ctx)?;
            let basis = solve(&op, solve_opts(cli))?;
            if *csv {
                writeln!(sink, "solution,stratum,exponent_num,ramification,re,im")?;
                for (i, sol) in basis.solutions.iter().enumerate() {
                    for (v, _, series) in sol.strata() {
                        for (num, c) in series.iter() {
                            writeln!(
                                sink,
                                "{i},{v},{num},{},{},{}",
                                series.ram(),
                                c.re.to_f64(),
                                c.im.to_f64()
                            )?;
                        }
                    }
                }
            } else if cli.json {
                let doc = output::SolveDoc {
                    operator: operator.clone(),
                    order: basis.diagnostics.order,
                    solutions: basis
                        .solutions
                        .iter()
                        .map(|s| solution_to_json(s, ctx))
                        .collect(),
                };
                sink.json(&doc)?;
            } else {
                writeln!(
                    sink,
                    "order {} operator; {} solution(s) found",
                    basis.diagnostics.order, basis.diagnostics.total_found
                )?;
                for seg in &basis.diagnostics.segments {
                    writeln!(
                        sink,
                        "  segment slope {} length {}: {} solution(s), {} zero root(s) skipped",
                        qfrob_core::numctx::rational_str(seg.slope),
                        seg.length,
                        seg.solutions_found,
                        seg.zero_roots_removed
                    )?;
                }
                for (i, sol) in basis.solutions.iter().enumerate() {
                    writeln!(sink, "[{i}] {}", render::solution_human(sol, ctx))?;
                }
            }
            Ok(0)
        }
        Command::Verify {
            solutions,
            operator,
        } => {
            let op = DifferenceOperator::parse(operator, ctx)?;
            let sols: Vec<qfrob_core::frobenius::SolutionForm<T>> = match solutions {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let doc: output::SolveDoc = serde_json::from_str(&text)?;
                    doc.solutions
                        .iter()
                        .map(|j| solution_from_json(j, ctx))
                        .collect::<qfrob_core::Result<Vec<_>>>()?
                }
                None => solve(&op, solve_opts(cli))?.solutions,
            };
            let mut rows = Vec::new();
            let mut ok = true;
            for (i, sol) in sols.iter().enumerate() {
                let residual = apply_operator(&op, sol)?;
                let growth = growth_classify(&sol.series, ctx).ok();
                let rel = residual.max_rel.to_f64();
                if rel > 1e-8 {
                    ok = false;
                }
                rows.push(output::VerifyRow {
                    solution_index: i,
                    residual_max_abs: residual.max_abs.to_f64(),
                    residual_max_rel: rel,
                    guaranteed_order: residual
                        .guaranteed_order
                        .map(qfrob_core::numctx::rational_str),
                    growth: growth.map(output::GrowthJson::from),
                });
            }
            if cli.json {
                sink.json(&rows)?;
            } else {
                for r in &rows {
                    writeln!(
                        sink,
                        "solution {}: residual max |.| = {:.3e} (rel {:.3e}), guaranteed to z^{}, growth: {}",
                        r.solution_index,
                        r.residual_max_abs,
                        r.residual_max_rel,
                        r.guaranteed_order.as_deref().unwrap_or("?"),
                        r.growth
                            .as_ref()
                            .map(|g| g.describe())
                            .unwrap_or_else(|| "n/a".into())
                    )?;
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Eval { target, z, lambda } => {
            let z = parse_complex_literal::<T>(z)
                .ok_or_else(|| Error::Eval(format!("cannot parse z literal '{z}'")))?;
            let ev = ThetaEvaluator::new(ctx);
            let value = match target {
                EvalTarget::Theta => ev.theta(&z)?,
                EvalTarget::Lq => ev.ell_q(&z)?,
                EvalTarget::Eq => {
                    let lam = lambda
                        .as_deref()
                        .and_then(parse_complex_literal::<T>)
                        .ok_or_else(|| Error::Eval("eq requires --lambda".into()))?;
                    ev.q_character(&z, &lam)?
                }
            };
            if cli.json {
                sink.json(&serde_json::json!({
                    "re": value.re.to_f64(),
                    "im": value.im.to_f64(),
                }))?;
            } else {
                writeln!(
                    sink,
                    "{} + {}i",
                    value.re.to_decimal_string(),
                    value.im.to_decimal_string()
                )?;
            }
            Ok(0)
        }
        Command::Examples { action } => run_examples(cli, ctx, sink, action),
    }
}

fn solve_opts(cli: &Cli) -> SolveOptions {
    SolveOptions {
        truncation: Some(cli.truncation),
        max_shift: cli.max_shift,
    }
}

fn run_examples<T: Real>(
    cli: &Cli,
    ctx: &NumericContext<T>,
    sink: &mut output::Sink,
    action: &ExamplesAction,
) -> qfrob_core::Result<u8> {
    match action {
        ExamplesAction::List => {
            for f in builtin_fixtures() {
                writeln!(sink, "{:18} {}", f.name, f.operator)?;
                writeln!(sink, "{:18}   ({})", "", f.provenance)?;
            }
            Ok(0)
        }
        ExamplesAction::Run { name, all, file } => {
            let fixtures: Vec<Fixture> = if let Some(path) = file {
                let text = std::fs::read_to_string(path)?;
                vec![serde_json::from_str(&text)?]
            } else if *all {
                builtin_fixtures()
            } else {
                let name = name
                    .as_deref()
                    .ok_or_else(|| Error::Eval("examples run needs a name, --all, or --file".into()))?;
                vec![find_fixture(name)
                    .ok_or_else(|| Error::Eval(format!("unknown fixture '{name}'")))?]
            };
            // coefficient tolerance: ten times the context tolerance
            let rel = ctx.tol().mul(&T::from_f64(10.0));
            let res = ctx.tol().mul(&T::from_f64(100.0));
            let mut all_ok = true;
            let mut reports = Vec::new();
            for f in &fixtures {
                let rep = run_fixture(f, ctx, &rel, &res)?;
                if !rep.passed {
                    all_ok = false;
                }
                reports.push(rep);
            }
            if cli.json {
                let rows: Vec<_> = reports
                    .iter()
                    .map(|r| {
                        serde_json::json!({
                            "name": r.name,
                            "passed": r.passed,
                            "max_coeff_deviation": r.max_coeff_deviation,
                            "max_residual_rel": r.max_residual_rel,
                            "details": r.details,
                        })
                    })
                    .collect();
                sink.json(&rows)?;
            } else {
                for r in &reports {
                    let verdict = if r.passed { "PASS" } else { "FAIL" };
                    writeln!(
                        sink,
                        "{verdict} {} (max coefficient deviation {:.3e}, max residual {:.3e})",
                        r.name, r.max_coeff_deviation, r.max_residual_rel
                    )?;
                    if !r.passed {
                        for d in &r.details {
                            writeln!(sink, "      {d}")?;
                        }
                    }
                }
            }
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}
