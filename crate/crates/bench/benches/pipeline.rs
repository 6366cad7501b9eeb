use bcod_bench::sources;
use bcod_core::{bench, coders, compress, decompress, model, tokenize, Archive, Mode};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn tokenizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("tokenize");
    for (name, bits) in sources() {
        group.throughput(Throughput::Bytes(bits.len() as u64 / 8));
        group.bench_with_input(BenchmarkId::from_parameter(name), &bits, |b, bits| {
            b.iter(|| tokenize(black_box(bits)))
        });
    }
    group.finish();
}

fn build_books(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    let (_, bits) = sources().remove(1);
    let table = model::count(&tokenize(&bits));
    group.bench_function("huffman", |b| b.iter(|| coders::build_huffman(black_box(&table))));
    group.bench_function("shannon", |b| b.iter(|| coders::build_shannon(black_box(&table))));
    group.bench_function("symmetric", |b| b.iter(|| coders::build_symmetric(black_box(&table))));
    group.finish();
}

fn round_trip(c: &mut Criterion) {
    let mut group = c.benchmark_group("round_trip");
    group.sample_size(20);
    for (name, bits) in sources() {
        group.throughput(Throughput::Bytes(bits.len() as u64 / 8));
        for mode in [Mode::Huffman, Mode::Symmetric, Mode::Shannon] {
            let id = BenchmarkId::new(mode.name(), name);
            group.bench_with_input(id, &bits, |b, bits| {
                b.iter(|| {
                    let packed = compress(black_box(bits), mode).pack();
                    decompress(&Archive::unpack(&packed).unwrap()).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn flips(c: &mut Criterion) {
    let (_, bits) = sources().remove(1);
    let n = bench::symmetric_payload_bits(&bits);
    let positions = bench::random_positions(n, 4, 1).unwrap();
    c.bench_function("flip_experiment/4-flips", |b| {
        b.iter(|| bench::flip_experiment(black_box(&bits), &positions))
    });
}

criterion_group!(benches, tokenizer, build_books, round_trip, flips);
criterion_main!(benches);
