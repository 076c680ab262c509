use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use twotime::holevo::{analyze, random_instance};
use twotime::linalg::{compressed_exp, spectral_decompose, Projector};
use twotime::random::{random_hermitian, random_unitary, rng_from_seed};
use twotime::ttm::{random_protocol, verify_ft, ChannelFamily, FtTolerance};
use twotime::Tolerances;

fn linalg(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut rng = rng_from_seed(1);
    let mut g = c.benchmark_group("linalg");
    for d in [4, 16, 36] {
        let h = random_hermitian(&mut rng, d);
        let u = random_unitary(&mut rng, d);
        let n = Projector::from_orthonormal_columns(&u.columns(0, d / 2).into_owned());
        g.bench_with_input(BenchmarkId::new("spectral_decompose", d), &h, |b, h| {
            b.iter(|| spectral_decompose(h))
        });
        g.bench_with_input(
            BenchmarkId::new("compressed_exp", d),
            &(h, n),
            |b, (h, n)| b.iter(|| compressed_exp(h, n, &tol).unwrap()),
        );
    }
    g.finish();
}

fn verification(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut rng = rng_from_seed(2);
    let mut g = c.benchmark_group("verify_ft");
    for d in [2, 4, 6] {
        let p = random_protocol(&mut rng, d, ChannelFamily::RandomKraus, &tol).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(d), &p, |b, p| {
            b.iter(|| verify_ft(p, FtTolerance::default(), &tol).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("holevo_analyze");
    for (d, j, k) in [(2, 2, 2), (3, 3, 4)] {
        let inst = random_instance(d, j, k, 7);
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("d{d}_J{j}_K{k}")),
            &inst,
            |b, inst| b.iter(|| analyze(inst, &tol).unwrap()),
        );
    }
    g.finish();
}

criterion_group!(benches, linalg, verification);
criterion_main!(benches);
