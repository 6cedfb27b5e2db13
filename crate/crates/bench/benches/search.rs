use criterion::{black_box, criterion_group, criterion_main, Criterion};
use crossint_core::arith::int;
use crossint_core::compress::{co_compress, compress_to_fixpoint};
use crossint_core::search::{brute_force_pair, k_family_search_keys, max_product_pair, max_t_intersecting, KMethod, SearchOptions};
use crossint_core::setcore::{gen_k_subsets, gen_upto_r, power_set};
use crossint_core::weights::{build_weight, WeightSpec};
use crossint_core::{Family, WeightFn};

fn pair_search(c: &mut Criterion) {
    let g = gen_k_subsets(6, 2).unwrap();
    let w = WeightFn::uniform(g.clone());
    c.bench_function("pair concept C([6],2) t=1", |b| {
        b.iter(|| max_product_pair(black_box(&g), &g, 1, &w, &w).unwrap())
    });

    let small = gen_k_subsets(5, 2).unwrap();
    let ws = WeightFn::uniform(small.clone());
    c.bench_function("pair concept C([5],2) t=1", |b| b.iter(|| max_product_pair(&small, &small, 1, &ws, &ws).unwrap()));
    c.bench_function("pair brute force C([5],2) t=1", |b| {
        b.iter(|| brute_force_pair(&small, &small, 1, &ws, &ws).unwrap())
    });

    let p = power_set(5).unwrap();
    let pw = build_weight(&WeightSpec::ProductMeasure { p: crossint_core::arith::ratio(2, 9) }, &p).unwrap();
    c.bench_function("pair weighted 2^[5] t=2", |b| b.iter(|| max_product_pair(&p, &p, 2, &pw, &pw).unwrap()));
}

fn clique(c: &mut Criterion) {
    let f = gen_upto_r(6, 3).unwrap();
    let w = WeightFn::uniform(f.clone());
    c.bench_function("clique subsets of [6] up to size 3, t=1", |b| {
        b.iter(|| max_t_intersecting(black_box(&f), 1, &w).unwrap())
    });
}

fn k_families(c: &mut Criterion) {
    let keys: Vec<u64> = gen_k_subsets(6, 2).unwrap().iter().map(|s| s.bits()).collect();
    let fams = vec![keys.clone(), keys.clone(), keys];
    let ones: Vec<Vec<_>> = fams.iter().map(|f| vec![int(1); f.len()]).collect();
    let opts = SearchOptions::default();
    let mut group = c.benchmark_group("three families C([6],2)");
    group.sample_size(10);
    group.bench_function("concept", |b| {
        b.iter(|| k_family_search_keys(&fams, 1, &ones, KMethod::Concept, &opts).unwrap())
    });
    group.finish();
}

fn compression(c: &mut Criterion) {
    let f = Family::from_lists(8, &[&[5, 6, 7], &[6, 7, 8], &[4, 7, 8], &[3, 5, 8], &[2, 6, 8], &[7, 8], &[8]]).unwrap();
    c.bench_function("compress to fixpoint", |b| b.iter(|| compress_to_fixpoint(black_box(&f))));
    let g = Family::from_lists(8, &[&[5, 6, 7, 8], &[3, 6, 7, 8], &[4, 5, 7, 8]]).unwrap();
    let pair = vec![f, g];
    c.bench_function("co-compress pair t=1", |b| b.iter(|| co_compress(black_box(&pair), 1).unwrap()));
}

criterion_group!(benches, pair_search, clique, k_families, compression);
criterion_main!(benches);
