use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use paperwave_bench::{noise_clip, ragged_plan, synthetic_document, SAMPLE_PDF};
use paperwave_core::audio::{assemble_episode, encode_master, integrated_loudness, MasterFormat, MixSpec};
use paperwave_core::ingest::{chunk_bundle, extract_text, DEFAULT_CHUNK_CHARS};
use paperwave_core::planner::{repair_chapter_plan, turns_for_duration};
use std::hint::black_box;

fn ingest(c: &mut Criterion) {
    c.bench_function("extract_text/fixture", |b| b.iter(|| extract_text(black_box(SAMPLE_PDF)).unwrap()));
    let doc = synthetic_document(40);
    c.bench_function("chunk_bundle/40_pages", |b| {
        b.iter_batched(|| vec![doc.clone()], |docs| chunk_bundle(docs, DEFAULT_CHUNK_CHARS).unwrap(), BatchSize::SmallInput)
    });
}

fn planner(c: &mut Criterion) {
    let budget = turns_for_duration(60, 18.0).unwrap();
    let plans: Vec<_> = (0..64).map(|s| ragged_plan(1 + s as usize % 12, s)).collect();
    c.bench_function("repair_chapter_plan/64_plans", |b| {
        b.iter(|| {
            for plan in &plans {
                black_box(repair_chapter_plan(plan, &budget).unwrap());
            }
        })
    });
}

fn audio(c: &mut Criterion) {
    let clips: Vec<_> = (0..20).map(|i| noise_clip(6.0, i)).collect();
    let spec = MixSpec { bgm_clip: Some(noise_clip(8.0, 99)), ..Default::default() };
    let mut group = c.benchmark_group("audio");
    group.sample_size(10);
    group.bench_function("assemble_episode/20x6s", |b| b.iter(|| assemble_episode(black_box(&clips), &spec).unwrap()));
    let minute = noise_clip(60.0, 7);
    group.bench_function("integrated_loudness/60s", |b| b.iter(|| integrated_loudness(black_box(&minute))));
    group.bench_function("encode_wav/60s", |b| {
        b.iter(|| encode_master(black_box(&minute), MasterFormat::WavPcm16, None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, ingest, planner, audio);
criterion_main!(benches);
