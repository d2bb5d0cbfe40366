use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ipsbell::fock::{cutoff_for, ips_apply, ips_apply_dilation, twb_state, wigner_from_fock};
use ipsbell::PhasePoint;

fn oracle(c: &mut Criterion) {
    let r = 0.3;
    let dim = cutoff_for(r).unwrap();
    let rho = twb_state(r, dim).unwrap();
    let mut group = c.benchmark_group("fock");
    group.sample_size(10);
    group.bench_function("kraus", |b| b.iter(|| ips_apply(black_box(&rho), 0.9, 0.7, dim - 1).unwrap()));
    group.bench_function("dilation", |b| b.iter(|| ips_apply_dilation(black_box(&rho), 0.9, 0.7).unwrap()));
    let (out, _) = ips_apply(&rho, 0.9, 0.7, dim - 1).unwrap();
    let point = PhasePoint::real(0.5, -0.5);
    group.bench_function("wigner", |b| b.iter(|| wigner_from_fock(&out, black_box(&point)).unwrap()));
    group.bench_function("trace_distance", |b| b.iter(|| out.trace_distance(black_box(&rho)).unwrap()));
    group.finish();
}

criterion_group!(benches, oracle);
criterion_main!(benches);
