use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use persym_core::gf2matrix::rank_in_place;
use persym_core::persym::{build_stacked, tuple_from_index};

fn bench_rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_12xk");
    for k in [4usize, 6, 12] {
        let tuples: Vec<Vec<u64>> = (0..1024u128)
            .map(|i| {
                let idx = i.wrapping_mul(0x9e37_79b9_7f4a_7c15) & ((1u128 << (6 * (k + 1))) - 1);
                build_stacked(&tuple_from_index(idx, 6, k).unwrap()).row_bits().to_vec()
            })
            .collect();
        group.throughput(Throughput::Elements(tuples.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(k), &tuples, |b, tuples| {
            let mut scratch = [0u64; 12];
            b.iter(|| {
                let mut acc = 0;
                for rows in tuples {
                    scratch.copy_from_slice(rows);
                    acc += rank_in_place(black_box(&mut scratch));
                }
                acc
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_rank);
criterion_main!(benches);
