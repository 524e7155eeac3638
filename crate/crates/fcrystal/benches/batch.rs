use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fcrystal::fcrystal_point::FCrystalPoint;
use fcrystal::gen::{random_point, random_uniform_lifted, seeded};
use fcrystal::lifted::LiftedCrystal;
use fcrystal::par;

fn axioms(d: &FCrystalPoint) -> bool {
    let (lo, hi) = d.effective_range();
    d.stabilization_check().unwrap()
        && (lo - 1..=hi + 1).all(|r| d.filtration_isomorphism_check(r).unwrap() && d.filtration_sequences_check(r).unwrap())
}

fn lifted(d: &LiftedCrystal) -> bool {
    (0..=1).all(|r| d.griffiths_check_graded(r, 16).unwrap() && d.fstar_a_vs_m_graded(r, 16).unwrap())
}

fn bench(c: &mut Criterion) {
    let points: Vec<FCrystalPoint> = (0..64).map(|i| random_point(&mut seeded(i), 4, 12)).collect();
    let lifts: Vec<LiftedCrystal> = (0..8).map(|i| random_uniform_lifted(&mut seeded(i), 3, 8, 16)).collect();

    let mut g = c.benchmark_group("point_axioms");
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("parallel", points.len()), &points, |b, xs| b.iter(|| par::map(xs, axioms)));
    g.bench_with_input(BenchmarkId::new("sequential", points.len()), &points, |b, xs| b.iter(|| par::map_sequential(xs, axioms)));
    g.finish();

    let mut g = c.benchmark_group("lifted_graded");
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("parallel", lifts.len()), &lifts, |b, xs| b.iter(|| par::map(xs, lifted)));
    g.bench_with_input(BenchmarkId::new("sequential", lifts.len()), &lifts, |b, xs| b.iter(|| par::map_sequential(xs, lifted)));
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
