use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex;
use qqsys::bethe::solve_newton;
use qqsys::operkit::ode::OdeOptions;
use qqsys::operkit::{canonical_form, monodromy_matrix, q_of_e};
use qqsys::qqverify::{verify_qq_system_at, verify_recursion_at};
use qqsys::{NewtonOptions, QOptions, XOper};
use qqsys_bench::{algebra, ds_pair, g2_system, kdv_m1};

fn bench_qq(c: &mut Criterion) {
    let mut g = c.benchmark_group("qq_verify");
    for (s, r, depth) in [('A', 2, 6), ('G', 2, 6), ('F', 4, 4)] {
        let alg = algebra(s, r);
        g.bench_with_input(BenchmarkId::new(alg.name(), depth), &depth, |b, &d| {
            b.iter(|| verify_qq_system_at(&alg, 0, 0, d).unwrap())
        });
    }
    g.finish();
    let b3 = algebra('B', 3);
    c.bench_function("recursion_B3_d6", |b| {
        b.iter(|| verify_recursion_at(&b3, 2, 0, 6).unwrap())
    });
}

fn bench_bethe(c: &mut Criterion) {
    let (sys, init) = g2_system();
    let sys = sys.clone().with_branches(sys.fit_branches(&init).unwrap()).unwrap();
    let opts = NewtonOptions::default();
    c.bench_function("newton_G2_2_2", |b| {
        b.iter(|| solve_newton(&sys, black_box(&init), &opts).unwrap())
    });
}

fn bench_q(c: &mut Criterion) {
    let op = XOper::new(1.0, 0.3).unwrap();
    let opts = QOptions::default();
    let mut g = c.benchmark_group("q_of_e");
    g.sample_size(20);
    for e in [Complex::new(3.0, 0.0), Complex::new(12.0, 5.0)] {
        g.bench_with_input(BenchmarkId::from_parameter(e), &e, |b, &e| {
            b.iter(|| q_of_e(&op, black_box(e), &opts).unwrap())
        });
    }
    g.finish();
}

fn bench_ds(c: &mut Criterion) {
    let mut g = c.benchmark_group("canonical_form");
    for r in [2, 3, 4] {
        let (op, n) = ds_pair(r);
        let gauged = op.gauge(&n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(r), &gauged, |b, op| {
            b.iter(|| canonical_form(op).unwrap())
        });
    }
    g.finish();
}

fn bench_monodromy(c: &mut Criterion) {
    let op = kdv_m1();
    let radius = 0.5 * op.w[0].norm();
    let opts = OdeOptions::default();
    c.bench_function("monodromy_m1", |b| {
        b.iter(|| monodromy_matrix(&op, 0, radius, Complex::new(0.5, 2.0), &opts).unwrap())
    });
}

criterion_group!(benches, bench_qq, bench_bethe, bench_q, bench_ds, bench_monodromy);
criterion_main!(benches);
