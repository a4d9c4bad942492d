use std::time::Instant;
use paperwave_core::audio::*;
fn main() {
    let n = 40_000_000usize;
    let s: Vec<f32> = (0..n*2).map(|i| ((i % 1000) as f32 / 1000.0 - 0.5) * 0.2).collect();
    let c = AudioClip::new(s, 44100, 2).unwrap();
    let t = Instant::now(); let l = integrated_loudness(&c); println!("loudness {l} {:?}", t.elapsed());
    let t = Instant::now(); let c2 = c.clone(); println!("clone {:?} {}", t.elapsed(), c2.frames());
    let t = Instant::now(); let p = sample_peak(c.samples()); println!("peak {p} {:?}", t.elapsed());
}
