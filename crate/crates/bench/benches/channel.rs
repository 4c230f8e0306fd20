use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use irsvlc::{los_gain, ma_gain, nlos_gain, segment_intersects_box, OrientedBox, Segment, Vec3};
use irsvlc_bench::{draw, scene};

fn occlusion(c: &mut Criterion) {
    let b = OrientedBox::new(Vec3::new(2.0, 2.0, 0.875), Vec3::new(0.375, 0.1, 0.875), 0.6).unwrap();
    let hit = Segment::new(Vec3::new(2.5, 2.5, 3.0), Vec3::new(1.8, 1.9, 1.0)).unwrap();
    let miss = Segment::new(Vec3::new(2.5, 2.5, 3.0), Vec3::new(4.0, 4.5, 1.0)).unwrap();
    c.bench_function("segment_box/hit", |bch| bch.iter(|| segment_intersects_box(black_box(&hit), &b)));
    c.bench_function("segment_box/miss", |bch| bch.iter(|| segment_intersects_box(black_box(&miss), &b)));
}

fn gains(c: &mut Criterion) {
    let s = scene(50, 1.0);
    let (ue, blockers) = draw(&s, 11);
    let ap = s.aps[0];
    c.bench_function("los_gain", |b| b.iter(|| los_gain(&ap, black_box(&ue), &blockers)));
    c.bench_function("nlos_gain/0.25m", |b| b.iter(|| nlos_gain(&ap, black_box(&ue), &s.patches, &blockers)));
    let array = &s.mirror_arrays[0];
    c.bench_function("ma_gain/50x50", |b| b.iter(|| ma_gain(&ap, array, black_box(&ue), &blockers)));
}

criterion_group!(benches, occlusion, gains);
criterion_main!(benches);
