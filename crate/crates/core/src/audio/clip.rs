use super::AudioError;

pub const SUPPORTED_RATES: [u32; 4] = [22_050, 24_000, 44_100, 48_000];

/// Interleaved floating-point PCM, nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
    channels: u16,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32, channels: u16) -> Result<Self, AudioError> {
        if !SUPPORTED_RATES.contains(&sample_rate) {
            return Err(AudioError::InvalidClip(format!("unsupported sample rate {sample_rate}")));
        }
        if !(1..=2).contains(&channels) {
            return Err(AudioError::InvalidClip(format!("unsupported channel count {channels}")));
        }
        if samples.is_empty() {
            return Err(AudioError::InvalidClip("clip has no frames".into()));
        }
        if samples.len() % channels as usize != 0 {
            return Err(AudioError::InvalidClip("sample count is not a whole number of frames".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(AudioError::InvalidClip("non-finite sample".into()));
        }
        Ok(Self { samples, sample_rate, channels })
    }

    pub fn silence(frames: usize, sample_rate: u32, channels: u16) -> Result<Self, AudioError> {
        Self::new(vec![0.0; frames * channels as usize], sample_rate, channels)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.samples.len() / self.channels as usize
    }

    pub fn duration_secs(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    /// Converts to the given rate and channel layout. Mono is duplicated to
    /// stereo; stereo is averaged down to mono. Rate conversion uses linear
    /// interpolation with the output length `round(frames * to / from)`.
    pub fn conform(&self, rate: u32, channels: u16) -> Result<AudioClip, AudioError> {
        if rate == self.sample_rate && channels == self.channels {
            return Ok(self.clone());
        }
        let src_ch = self.channels as usize;
        let mut layout = Vec::with_capacity(self.frames() * channels as usize);
        for frame in self.samples.chunks_exact(src_ch) {
            match (src_ch, channels) {
                (1, 2) => layout.extend([frame[0], frame[0]]),
                (2, 1) => layout.push((frame[0] + frame[1]) * 0.5),
                _ => layout.extend_from_slice(frame),
            }
        }
        let samples = if rate == self.sample_rate {
            layout
        } else {
            resample_linear(&layout, channels as usize, self.sample_rate, rate)
        };
        AudioClip::new(samples, rate, channels)
    }
}

pub(crate) fn resample_linear(samples: &[f32], channels: usize, from: u32, to: u32) -> Vec<f32> {
    let in_frames = samples.len() / channels;
    let out_frames = ((in_frames as u64 * to as u64 + from as u64 / 2) / from as u64).max(1) as usize;
    let step = from as f64 / to as f64;
    let mut out = Vec::with_capacity(out_frames * channels);
    for i in 0..out_frames {
        let pos = i as f64 * step;
        let i0 = (pos.floor() as usize).min(in_frames - 1);
        let i1 = (i0 + 1).min(in_frames - 1);
        let frac = (pos - i0 as f64) as f32;
        for c in 0..channels {
            let a = samples[i0 * channels + c];
            let b = samples[i1 * channels + c];
            out.push(a + (b - a) * frac);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_shapes() {
        assert!(AudioClip::new(vec![0.0; 10], 16_000, 1).is_err());
        assert!(AudioClip::new(vec![0.0; 10], 44_100, 3).is_err());
        assert!(AudioClip::new(vec![], 44_100, 1).is_err());
        assert!(AudioClip::new(vec![0.0; 3], 44_100, 2).is_err());
        assert!(AudioClip::new(vec![f32::NAN], 44_100, 1).is_err());
    }

    #[test]
    fn duration_is_frames_over_rate() {
        let c = AudioClip::silence(22_050, 44_100, 2).unwrap();
        assert_eq!(c.frames(), 22_050);
        assert_eq!(c.duration_secs(), 0.5);
    }

    #[test]
    fn conform_keeps_duration_and_dc_level() {
        let c = AudioClip::new(vec![0.25; 24_000], 24_000, 1).unwrap();
        let up = c.conform(44_100, 2).unwrap();
        assert_eq!(up.frames(), 44_100);
        assert_eq!(up.channels(), 2);
        assert!(up.samples().iter().all(|s| (*s - 0.25).abs() < 1e-6));
        let down = up.conform(22_050, 1).unwrap();
        assert_eq!(down.frames(), 22_050);
    }
}
