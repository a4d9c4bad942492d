//! ITU-R BS.1770 integrated loudness with K-weighting and two-stage gating.

use super::AudioClip;

const BLOCK_SECS: f64 = 0.4;
const STEP_SECS: f64 = 0.1;
const ABSOLUTE_GATE_LUFS: f64 = -70.0;
const RELATIVE_GATE_LU: f64 = -10.0;
const OFFSET: f64 = -0.691;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// High-shelf pre-filter modelling the acoustic effect of the head.
    pub fn shelf(rate: f64) -> Self {
        let f0 = 1681.974_450_955_533;
        let gain_db = 3.999_843_853_973_347;
        let q = 0.707_175_236_955_419_6;
        let k = (std::f64::consts::PI * f0 / rate).tan();
        let vh = 10f64.powf(gain_db / 20.0);
        let vb = vh.powf(0.499_666_774_154_541_6);
        let a0 = 1.0 + k / q + k * k;
        Self {
            b0: (vh + vb * k / q + k * k) / a0,
            b1: 2.0 * (k * k - vh) / a0,
            b2: (vh - vb * k / q + k * k) / a0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }

    /// Second-order high-pass (RLB weighting).
    pub fn highpass(rate: f64) -> Self {
        let f0 = 38.135_470_876_024_44;
        let q = 0.500_327_037_323_877_3;
        let k = (std::f64::consts::PI * f0 / rate).tan();
        let a0 = 1.0 + k / q + k * k;
        Self {
            b0: 1.0,
            b1: -2.0,
            b2: 1.0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }
}

#[derive(Default)]
struct State {
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
}

impl State {
    #[inline]
    fn step(&mut self, f: &Biquad, x: f64) -> f64 {
        let y = f.b0 * x + f.b1 * self.x1 + f.b2 * self.x2 - f.a1 * self.y1 - f.a2 * self.y2;
        self.x2 = self.x1;
        self.x1 = x;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Sum over channels of the K-weighted mean square of each 100 ms step.
fn step_powers(samples: &[f32], rate: u32, channels: u16) -> (Vec<f64>, usize) {
    let rate = rate as f64;
    let ch = channels as usize;
    let (shelf, hp) = (Biquad::shelf(rate), Biquad::highpass(rate));
    let step = (STEP_SECS * rate).round() as usize;
    let frames = samples.len() / ch;
    let mut sums = vec![0.0f64; frames / step];
    let mut states: Vec<(State, State)> = (0..ch).map(|_| Default::default()).collect();
    for (i, frame) in samples.chunks_exact(ch).enumerate() {
        let mut power = 0.0;
        for (x, (s1, s2)) in frame.iter().zip(states.iter_mut()) {
            let y = s2.step(&hp, s1.step(&shelf, *x as f64));
            power += y * y;
        }
        if let Some(slot) = sums.get_mut(i / step) {
            *slot += power;
        }
    }
    (sums, step)
}

/// Integrated loudness in LUFS, or negative infinity when every block falls
/// under the absolute gate (including clips shorter than one block).
pub fn integrated_loudness(clip: &AudioClip) -> f64 {
    loudness_of(clip.samples(), clip.sample_rate(), clip.channels())
}

/// [`integrated_loudness`] over raw interleaved samples.
pub fn loudness_of(samples: &[f32], rate: u32, channels: u16) -> f64 {
    let (steps, step_len) = step_powers(samples, rate, channels);
    let per_block = (BLOCK_SECS / STEP_SECS).round() as usize;
    if steps.len() < per_block {
        return f64::NEG_INFINITY;
    }
    let block_len = (per_block * step_len) as f64;
    let blocks: Vec<f64> = steps
        .windows(per_block)
        .map(|w| w.iter().sum::<f64>() / block_len)
        .collect();
    let lufs = |z: f64| OFFSET + 10.0 * z.log10();
    let gated_mean = |threshold: f64| {
        let kept: Vec<f64> = blocks.iter().copied().filter(|&z| lufs(z) > threshold).collect();
        (!kept.is_empty()).then(|| kept.iter().sum::<f64>() / kept.len() as f64)
    };
    let Some(abs_mean) = gated_mean(ABSOLUTE_GATE_LUFS) else {
        return f64::NEG_INFINITY;
    };
    let relative = lufs(abs_mean) + RELATIVE_GATE_LU;
    match gated_mean(relative.max(ABSOLUTE_GATE_LUFS)) {
        Some(z) => lufs(z),
        None => f64::NEG_INFINITY,
    }
}

/// Largest absolute sample value.
pub fn sample_peak(samples: &[f32]) -> f32 {
    samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
}
