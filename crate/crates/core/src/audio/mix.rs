use serde::{Deserialize, Serialize};

use super::loudness::{integrated_loudness, loudness_of, sample_peak};
use super::{db_to_gain, AudioClip, AudioError, MASTER_CHANNELS, MASTER_RATE, PEAK_CEILING_DBFS};

/// Length of the linear gain ramps at the edges of the ducked region.
const DUCK_RAMP_SECS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixSpec {
    pub inter_turn_gap: f64,
    /// Background music; looped over the whole episode when present.
    #[serde(skip)]
    pub bgm_clip: Option<AudioClip>,
    /// Level of the music under speech, relative to the speech loudness.
    pub bgm_gain_db: f64,
    pub intro_lead: f64,
    pub outro_fade: f64,
    pub loudness_target_lufs: f64,
}

impl Default for MixSpec {
    fn default() -> Self {
        Self {
            inter_turn_gap: 0.4,
            bgm_clip: None,
            bgm_gain_db: -18.0,
            intro_lead: 2.0,
            outro_fade: 3.0,
            loudness_target_lufs: -16.0,
        }
    }
}

impl MixSpec {
    pub fn validate(&self) -> Result<(), AudioError> {
        let bad = |m: &str| Err(AudioError::InvalidMixSpec(m.into()));
        let finite = [
            self.inter_turn_gap,
            self.bgm_gain_db,
            self.intro_lead,
            self.outro_fade,
            self.loudness_target_lufs,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all values must be finite");
        }
        if self.inter_turn_gap < 0.0 {
            return bad("inter_turn_gap must be >= 0");
        }
        if self.bgm_gain_db > 0.0 {
            return bad("bgm_gain_db must be <= 0");
        }
        if self.intro_lead < 0.0 {
            return bad("intro_lead must be >= 0");
        }
        if self.outro_fade < 0.0 {
            return bad("outro_fade must be >= 0");
        }
        if self.loudness_target_lufs > 0.0 {
            return bad("loudness_target_lufs must be <= 0");
        }
        Ok(())
    }

    /// Mastered length in frames for clips of the given lengths.
    pub fn total_frames(&self, clip_frames: &[usize]) -> usize {
        let n = clip_frames.len();
        frames_for(self.intro_lead)
            + clip_frames.iter().sum::<usize>()
            + frames_for(self.inter_turn_gap) * n.saturating_sub(1)
            + frames_for(self.outro_fade)
    }
}

/// Seconds to master-rate frames, rounded to nearest.
pub fn frames_for(seconds: f64) -> usize {
    (seconds * MASTER_RATE as f64).round() as usize
}

/// Measurements taken while mastering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixReport {
    /// Integrated loudness of the master; negative infinity for silence.
    pub loudness_lufs: f64,
    pub peak: f32,
    /// Gain applied by normalization.
    pub gain_db: f64,
}

/// Lays clips end to end with gaps, beds them on looped background music and
/// masters the result to the loudness target under a -1 dBFS sample peak.
pub fn assemble_episode(clips: &[AudioClip], spec: &MixSpec) -> Result<AudioClip, AudioError> {
    master_episode(clips, spec).map(|(clip, _)| clip)
}

/// [`assemble_episode`] that also reports the master's loudness and peak.
pub fn master_episode(clips: &[AudioClip], spec: &MixSpec) -> Result<(AudioClip, MixReport), AudioError> {
    spec.validate()?;
    if clips.is_empty() {
        return Err(AudioError::EmptyClipList);
    }
    for (index, c) in clips.iter().enumerate() {
        if c.sample_rate() != MASTER_RATE || c.channels() != MASTER_CHANNELS {
            return Err(AudioError::RateMismatch { index, rate: c.sample_rate(), channels: c.channels() });
        }
    }
    let ch = MASTER_CHANNELS as usize;
    let lengths: Vec<usize> = clips.iter().map(AudioClip::frames).collect();
    let total = spec.total_frames(&lengths);
    let intro = frames_for(spec.intro_lead);
    let gap = frames_for(spec.inter_turn_gap);
    let outro = frames_for(spec.outro_fade);

    let mut mix = vec![0.0f32; total * ch];
    let mut at = intro;
    for (i, c) in clips.iter().enumerate() {
        if i > 0 {
            at += gap;
        }
        mix[at * ch..(at + c.frames()) * ch].copy_from_slice(c.samples());
        at += c.frames();
    }
    let speech_lufs = loudness_of(&mix, MASTER_RATE, MASTER_CHANNELS);
    let mut lufs = speech_lufs;

    if let Some(bgm) = &spec.bgm_clip {
        let bgm = bgm.conform(MASTER_RATE, MASTER_CHANNELS)?;
        let bgm_lufs = integrated_loudness(&bgm);
        if bgm_lufs.is_finite() {
            let reference = if speech_lufs.is_finite() { speech_lufs } else { spec.loudness_target_lufs };
            let full = db_to_gain(reference - bgm_lufs) as f32;
            let ducked = full * db_to_gain(spec.bgm_gain_db) as f32;
            let envelope = BedEnvelope::new(total, intro, outro, full, ducked);
            let src = bgm.samples();
            let src_frames = bgm.frames();
            for (f, frame) in mix.chunks_exact_mut(ch).enumerate() {
                let g = envelope.at(f);
                let s = (f % src_frames) * ch;
                for (c, out) in frame.iter_mut().enumerate() {
                    *out += src[s + c] * g;
                }
            }
            lufs = loudness_of(&mix, MASTER_RATE, MASTER_CHANNELS);
        }
    }

    let peak = sample_peak(&mix) as f64;
    let mut gain = if lufs.is_finite() { db_to_gain(spec.loudness_target_lufs - lufs) } else { 1.0 };
    let ceiling = db_to_gain(PEAK_CEILING_DBFS);
    if peak * gain > ceiling {
        gain = ceiling / peak;
    }
    if gain != 1.0 {
        let (g, c) = (gain as f32, ceiling as f32);
        for s in mix.iter_mut() {
            *s = (*s * g).clamp(-c, c);
        }
    }
    let gain_db = 20.0 * gain.log10();
    let report = MixReport {
        loudness_lufs: lufs + gain_db,
        peak: sample_peak(&mix),
        gain_db,
    };
    Ok((AudioClip::new(mix, MASTER_RATE, MASTER_CHANNELS)?, report))
}

/// Music gain per frame: full through the intro, a ramp down to the ducked
/// level, ducked under speech, a ramp back up, then a linear fade to zero
/// across the outro.
struct BedEnvelope {
    total: usize,
    speech_start: usize,
    speech_end: usize,
    ramp: usize,
    full: f32,
    ducked: f32,
}

impl BedEnvelope {
    fn new(total: usize, intro: usize, outro: usize, full: f32, ducked: f32) -> Self {
        let speech_end = total - outro;
        let ramp = frames_for(DUCK_RAMP_SECS).min((speech_end - intro) / 2);
        Self { total, speech_start: intro, speech_end, ramp, full, ducked }
    }

    fn at(&self, f: usize) -> f32 {
        let lerp = |a: f32, b: f32, t: f32| a + (b - a) * t;
        if f < self.speech_start {
            self.full
        } else if f >= self.speech_end {
            let len = (self.total - self.speech_end) as f32;
            self.full * (1.0 - (f - self.speech_end) as f32 / len)
        } else if self.ramp > 0 && f < self.speech_start + self.ramp {
            lerp(self.full, self.ducked, (f - self.speech_start) as f32 / self.ramp as f32)
        } else if self.ramp > 0 && f >= self.speech_end - self.ramp {
            lerp(self.ducked, self.full, (f + self.ramp - self.speech_end) as f32 / self.ramp as f32)
        } else {
            self.ducked
        }
    }
}
