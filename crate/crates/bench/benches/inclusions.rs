use criterion::{criterion_group, criterion_main, Criterion};
use subfactor_core::inclusions::{basic_construction, build_group_inclusion, build_tensor_inclusion, Inclusion, PermGroup};
use subfactor_core::scalars::QuadraticNumber;
use subfactor_core::Complex64;

fn s3<F: subfactor_core::field::Field>() -> Inclusion<F> {
    let g = PermGroup::named("S3").unwrap();
    build_group_inclusion(&g, &[g.parse_element("(12)").unwrap()]).unwrap()
}

fn bench_build(c: &mut Criterion) {
    c.bench_function("group inclusion S3 float", |b| b.iter(s3::<Complex64>));
    c.bench_function("tensor inclusion M2 in M4", |b| b.iter(|| build_tensor_inclusion::<Complex64>(2, 2).unwrap()));
}

fn bench_basic_construction(c: &mut Criterion) {
    let float = s3::<Complex64>();
    c.bench_function("basic construction S3 float", |b| b.iter(|| basic_construction(&float).unwrap()));
    let exact = s3::<QuadraticNumber>();
    c.bench_function("basic construction S3 exact", |b| b.iter(|| basic_construction(&exact).unwrap()));
}

criterion_group!(benches, bench_build, bench_basic_construction);
criterion_main!(benches);
