// SPDX-License-Identifier: Apache-2.0

//! Sequential vs rayon execution for the engines, a sweep grid and bundle
//! profiling. Build with `--no-default-features` to bench the sequential
//! fallback alone.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use unary_gemm::costmodel::CostModel;
use unary_gemm::sparsity::{profile_bundle, DType, ProfileOptions, Role, Tensor, TensorBundle};
use unary_gemm::sweep::{run_sweep, SweepConfig};
use unary_gemm::{random_matrix, BitWidth, Design, Exec, GemmShape, Simulator};

fn strategies() -> Vec<(&'static str, Exec)> {
    vec![
        ("sequential", Exec::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Exec::Parallel),
    ]
}

fn engines(c: &mut Criterion) {
    let w8 = BitWidth::new(8).unwrap();
    let a = random_matrix(32, 32, w8, 1).unwrap();
    let b = random_matrix(32, 32, w8, 2).unwrap();
    let mut group = c.benchmark_group("engine_32x32_w8");
    group.sample_size(10);
    for design in [
        Design::Ugemm,
        Design::Tubgemm,
        Design::Bgemm,
        Design::TugemmSerial,
    ] {
        for (name, exec) in strategies() {
            let sim = Simulator::new(exec);
            group.bench_with_input(BenchmarkId::new(design.name(), name), &sim, |bench, sim| {
                bench.iter(|| sim.run(design, black_box(&a), black_box(&b)).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let widths = [2, 4, 8].map(|b| BitWidth::new(b).unwrap()).to_vec();
    let shapes = vec![
        GemmShape::square(16).unwrap(),
        GemmShape::square(32).unwrap(),
    ];
    let designs = vec![Design::Ugemm, Design::Tubgemm, Design::Bgemm];
    let model = CostModel::default();
    let mut group = c.benchmark_group("sweep_grid");
    group.sample_size(10);
    for (name, exec) in strategies() {
        let mut cfg = SweepConfig::new(designs.clone(), widths.clone(), shapes.clone());
        cfg.exec = exec;
        group.bench_function(name, |bench| {
            bench.iter(|| run_sweep(black_box(&cfg), Some(&model)).unwrap())
        });
    }
    group.finish();
}

fn profiling(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let w8 = BitWidth::new(8).unwrap();
    let tensors: Vec<(String, Tensor)> = (0..16)
        .map(|i| {
            let m = random_matrix(256, 256, w8, i).unwrap();
            let t = Tensor::new(vec![64, 4, 16, 16], DType::Int8, m.data().to_vec()).unwrap();
            (format!("conv{i:02}"), t)
        })
        .collect();
    let layers: Vec<(&str, Role, &Tensor)> = tensors
        .iter()
        .map(|(n, t)| (n.as_str(), Role::Weight, t))
        .collect();
    let bundle = TensorBundle::write(dir.path(), Some("bench"), &layers).unwrap();
    let mut group = c.benchmark_group("profile_bundle");
    for (name, exec) in strategies() {
        let opts = ProfileOptions {
            exec,
            ..ProfileOptions::new(w8)
        };
        group.bench_function(name, |bench| {
            bench.iter(|| profile_bundle(black_box(&bundle), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, engines, sweep, profiling);
criterion_main!(benches);
