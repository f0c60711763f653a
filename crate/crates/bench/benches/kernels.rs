use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use adiab_bench::paper_lz_superop;
use adiab_core::dynamics::{integrate_master, IntegratorConfig};
use adiab_core::linalg::eig_general;
use adiab_core::measurement::fidelity;
use adiab_core::models::{lz_hamiltonian, LzParams};
use adiab_core::spectral::{decompose, PathOptions, SpectralPath};
use adiab_core::superop::{DensityMatrix, NoiseChannel};

fn bench_superop_eval(c: &mut Criterion) {
    let sup = paper_lz_superop();
    c.bench_function("superop_eval_lz", |b| {
        let mut t = 0.0;
        b.iter(|| {
            t += 1.3e-9;
            black_box(sup.eval(black_box(t)))
        })
    });
}

fn bench_eig_general(c: &mut Criterion) {
    let sup = paper_lz_superop();
    let l = sup.eval(2.7e-7);
    c.bench_function("eig_general_4x4", |b| b.iter(|| eig_general(black_box(&l)).unwrap()));
}

fn bench_decompose(c: &mut Criterion) {
    let sup = paper_lz_superop();
    let l = sup.eval(2.7e-7);
    c.bench_function("spectral_decompose_4x4", |b| {
        b.iter(|| decompose(black_box(&l), 2.7e-7).unwrap())
    });
}

fn bench_fidelity(c: &mut Criterion) {
    let a = DensityMatrix::from_bloch(0.3, -0.4, 0.5).unwrap();
    let d = DensityMatrix::from_bloch(-0.2, 0.1, 0.6).unwrap();
    c.bench_function("uhlmann_fidelity_qubit", |b| {
        b.iter(|| fidelity(black_box(&a), black_box(&d)).unwrap())
    });
}

fn bench_master_integration(c: &mut Criterion) {
    let p = LzParams::resonant_preset(1256.0);
    let cfg = IntegratorConfig {
        grid: vec![0.0, 3.0e-5],
        ..Default::default()
    };
    c.bench_function("integrate_master_lz_30us", |b| {
        b.iter(|| {
            integrate_master(
                |t| lz_hamiltonian(black_box(&p), t),
                &NoiseChannel::dephasing(p.gamma),
                &DensityMatrix::ket1(),
                3.0e-5,
                &cfg,
            )
            .unwrap()
        })
    });
}

fn bench_path_tracking(c: &mut Criterion) {
    let sup = paper_lz_superop();
    let grid: Vec<f64> = (0..200).map(|k| k as f64 * 2.0e-8).collect();
    c.bench_function("spectral_path_200_frames", |b| {
        b.iter(|| SpectralPath::build(black_box(&sup), &grid, PathOptions::default()).unwrap())
    });
}

criterion_group!(
    benches,
    bench_superop_eval,
    bench_eig_general,
    bench_decompose,
    bench_fidelity,
    bench_master_integration,
    bench_path_tracking
);
criterion_main!(benches);
