use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use ndarray::Array2;
use num_complex::Complex64;
use sqs_core::dyn_dense::{evolve, initial_state, InitialMode, Method, ObservableSpec};
use sqs_core::dyn_mps::{mps_from_dense, tebd_evolve, MpsModel, TruncationParams};
use sqs_core::model::{enumerate_basis, Constraint, HamiltonianOperator};
use sqs_core::schedule::sqs;
use sqs_core::{blockade_graph, build_equilateral_doublet_chain, interaction_matrix, linalg, Truncation, VdwCoupling};

fn chain(l: usize) -> (sqs_core::AtomArray, sqs_core::BlockadeGraph, sqs_core::InteractionMatrix, HamiltonianOperator) {
    let a = build_equilateral_doublet_chain(l, 5.5).unwrap();
    let c = VdwCoupling::default();
    let g = blockade_graph(&a, &c, 1.0).unwrap();
    let v = interaction_matrix(&a, &c, Truncation::Nnn).unwrap();
    let basis = Arc::new(enumerate_basis(&g, Constraint::Blockade).unwrap());
    let h = HamiltonianOperator::build(&a, basis, &v).unwrap();
    (a, g, v, h)
}

fn matvec(c: &mut Criterion) {
    let (_, _, _, h) = chain(15);
    let x: Vec<Complex64> = (0..h.dim()).map(|i| Complex64::new((i as f64).sin(), (i as f64).cos())).collect();
    let mut y = vec![Complex64::new(0.0, 0.0); h.dim()];
    c.bench_function("matvec_L15", |b| b.iter(|| h.apply(1.0, 2.0, black_box(&x), &mut y)));
}

fn krylov(c: &mut Criterion) {
    let (a, _, _, h) = chain(11);
    let w = sqs(-4.0, 4.0, 1.5, 0.55, 1.5, 0.45).unwrap();
    let spec = ObservableSpec::for_array(&a, 1000).unwrap();
    let psi0 = initial_state(&h, &w, InitialMode::ExactGround).unwrap();
    c.bench_function("krylov_sweep_L11_100_steps", |b| {
        b.iter_batched(
            || psi0.clone(),
            |mut psi| evolve(&mut psi, &h, &w, 100, Method::Krylov, &spec).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn tebd(c: &mut Criterion) {
    let (a, g, v, h) = chain(11);
    let w = sqs(-4.0, 4.0, 1.5, 0.55, 1.5, 0.45).unwrap();
    let spec = ObservableSpec::for_array(&a, 1000).unwrap();
    let model = MpsModel::new(&a, &g, &v, Constraint::Blockade).unwrap();
    let trunc = TruncationParams::capped(32, 1e-8);
    let psi0 = initial_state(&h, &w, InitialMode::ExactGround).unwrap();
    let mps0 = mps_from_dense(model.cells(), &psi0, &trunc).unwrap();
    let mut group = c.benchmark_group("tebd");
    group.sample_size(10);
    group.bench_function("tebd_sweep_L11_100_steps", |b| {
        b.iter_batched(
            || mps0.clone(),
            |mut m| tebd_evolve(&mut m, &model, &w, 100, &trunc, &spec).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn svd(c: &mut Criterion) {
    let m = Array2::from_shape_fn((96, 96), |(i, j)| Complex64::new(((i * 7 + j * 3) as f64).sin(), ((i + 2 * j) as f64).cos()));
    c.bench_function("svd_96x96", |b| b.iter(|| linalg::svd(&black_box(&m).view()).unwrap()));
}

criterion_group!(kernels, matvec, krylov, tebd, svd);
criterion_main!(kernels);
