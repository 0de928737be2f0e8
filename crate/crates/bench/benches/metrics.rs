use criterion::{criterion_group, criterion_main, Criterion};
use subfactor_core::inclusions::{build_group_inclusion, PermGroup};
use subfactor_core::metrics::{norm_inf2, random_unitaries, Budget};
use subfactor_core::Complex64;

fn bench_norm(c: &mut Criterion) {
    let g = PermGroup::named("S3").unwrap();
    let inc = build_group_inclusion::<Complex64>(&g, &[g.parse_element("(12)").unwrap()]).unwrap();
    let u = random_unitaries(inc.m(), 1, 3).remove(0);
    let budget = Budget { restarts: 4, iterations: 100, samples: 1 };
    let mut group = c.benchmark_group("norm_inf2");
    group.sample_size(10);
    group.bench_function("S3 in (12)", |b| b.iter(|| norm_inf2(&inc, &u, &budget, 7).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_norm);
criterion_main!(benches);
