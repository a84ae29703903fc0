use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use num_complex::Complex64;
use schlicht::classes::{membership_default, random_pm_beta, ClassSpec};
use schlicht::harness::{map_indexed, Exec, Verifier};
use schlicht::kernels;

const SEED: u64 = 5426;

fn ratio_verifier() -> Verifier {
    Verifier::new(ClassSpec::ratio(2.0, 0.0, kernels::koebe(kernels::KERNEL_ORDER)).unwrap()).unwrap()
}

fn operator_verifier() -> Verifier {
    let alpha = Complex64::new(0.5, 0.5);
    Verifier::new(ClassSpec::operator(3.0, 0.25, alpha, kernels::log(kernels::KERNEL_ORDER)).unwrap()).unwrap()
}

fn sample_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_batch");
    group.sample_size(10);
    for (label, verifier) in [("ratio", ratio_verifier()), ("operator", operator_verifier())] {
        for n in [256u64, 2048] {
            let expected = verifier.run(n, SEED, Exec::Sequential);
            group.throughput(Throughput::Elements(n));
            for exec in [Exec::Sequential, Exec::Parallel] {
                let id = BenchmarkId::new(format!("{label}/{exec:?}"), n);
                group.bench_with_input(id, &n, |b, &n| {
                    assert_eq!(expected, verifier.run(n, SEED, exec));
                    b.iter(|| verifier.run(black_box(n), SEED, exec))
                });
            }
        }
    }
    group.finish();
}

/// The per-trial hot spot on its own: FFT quadrature at three radii.
fn membership(c: &mut Criterion) {
    let spec = ClassSpec::ratio(2.0, 0.0, kernels::koebe(kernels::KERNEL_ORDER)).unwrap();
    let phis: Vec<_> = (0..512).map(|i| random_pm_beta(&spec, i, 4, 24).1.dilate(0.9)).collect();
    let mut group = c.benchmark_group("membership");
    group.throughput(Throughput::Elements(phis.len() as u64));
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| map_indexed(phis.len() as u64, exec, |i| membership_default(&phis[i as usize], &spec).pass))
        });
    }
    group.finish();
}

criterion_group!(benches, sample_batch, membership);
criterion_main!(benches);
