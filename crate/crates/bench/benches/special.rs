use criterion::{black_box, criterion_group, criterion_main, Criterion};

use qfrob_bench::double_ctx;
use qfrob_core::special::ThetaEvaluator;
use qfrob_core::{BigReal, Complex, NumericContext};

fn bench_theta(c: &mut Criterion) {
    let ctx = double_ctx();
    let ev = ThetaEvaluator::new(&ctx);
    let z = Complex::from_f64(0.7, 0.3);
    c.bench_function("theta_double", |b| b.iter(|| ev.theta(black_box(&z)).unwrap()));
    c.bench_function("theta_triple_product_double", |b| {
        b.iter(|| ev.theta_triple_product(black_box(&z)).unwrap())
    });
    c.bench_function("ell_q_double", |b| b.iter(|| ev.ell_q(black_box(&z)).unwrap()));

    let q: Complex<BigReal> = Complex::from_f64(2.0, 0.0);
    let hctx = NumericContext::high(q, 50, 32).unwrap();
    let hev = ThetaEvaluator::new(&hctx);
    let hz: Complex<BigReal> = Complex::from_f64(0.7, 0.3);
    c.bench_function("theta_50digits", |b| b.iter(|| hev.theta(black_box(&hz)).unwrap()));
}

criterion_group!(benches, bench_theta);
criterion_main!(benches);
