use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use lvpp::fespace::{
    assemble_load, assemble_stiffness, build_space, integrate, par_assemble_load, par_assemble_stiffness,
    par_integrate, Coefficient, SpaceKind,
};
use lvpp::linalg::{cg_jacobi, par_cg_jacobi, DirichletReduction};
use lvpp::mesh::unit_square_mesh;

fn kernels(c: &mut Criterion) {
    let mesh = unit_square_mesh(4).unwrap().refined(5);
    let space = build_space(&mesh, SpaceKind::P1Nodal);
    let k = assemble_stiffness(&mesh, &space, Coefficient::Const(1.0)).unwrap();
    let load = assemble_load(&mesh, &space, &|x| x[0].sin() * x[1], 4).unwrap();
    let red = DirichletReduction::new(space.ndofs(), space.fixed());
    let (a, b) = red.reduce(&k, &load, &vec![0.0; space.ndofs()]);
    let x: Vec<f64> = (0..a.ncols()).map(|i| (i as f64).cos()).collect();
    let f = |p: [f64; 2]| (p[0] * p[1]).exp();

    let mut group = c.benchmark_group("serial");
    group.sample_size(20);
    group.bench_function("stiffness assembly", |bch| {
        bch.iter(|| assemble_stiffness(black_box(&mesh), &space, Coefficient::Const(1.0)).unwrap())
    });
    group.bench_function("load assembly", |bch| bch.iter(|| assemble_load(black_box(&mesh), &space, &f, 6).unwrap()));
    group.bench_function("quadrature", |bch| bch.iter(|| integrate(black_box(&mesh), 6, |_, _, _, p| f(p))));
    group.bench_function("spmv", |bch| bch.iter(|| a.mul_vec(black_box(&x))));
    group.bench_function("cg", |bch| bch.iter(|| cg_jacobi(black_box(&a), &b, 1e-10, 5000).unwrap()));
    group.finish();

    let mut group = c.benchmark_group("parallel");
    group.sample_size(20);
    group.bench_function("stiffness assembly", |bch| {
        bch.iter(|| par_assemble_stiffness(black_box(&mesh), &space, Coefficient::Const(1.0)).unwrap())
    });
    group.bench_function("load assembly", |bch| {
        bch.iter(|| par_assemble_load(black_box(&mesh), &space, &f, 6).unwrap())
    });
    group.bench_function("quadrature", |bch| bch.iter(|| par_integrate(black_box(&mesh), 6, |_, _, _, p| f(p))));
    group.bench_function("spmv", |bch| bch.iter(|| a.par_mul_vec(black_box(&x))));
    group.bench_function("cg", |bch| bch.iter(|| par_cg_jacobi(black_box(&a), &b, 1e-10, 5000).unwrap()));
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
