use std::path::{Path, PathBuf};

use super::{decode_wav, AudioClip, AudioError, MASTER_CHANNELS, MASTER_RATE};

/// WAV tracks in a directory, chosen round-robin per episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgmLibrary {
    tracks: Vec<PathBuf>,
}

impl BgmLibrary {
    /// Collects `*.wav` files (case-insensitive) directly inside `dir`, sorted
    /// by file name.
    pub fn from_dir(dir: &Path) -> Result<Self, AudioError> {
        let entries = std::fs::read_dir(dir).map_err(|e| AudioError::Bgm(format!("{}: {e}", dir.display())))?;
        let mut tracks: Vec<PathBuf> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
            .collect();
        tracks.sort();
        if tracks.is_empty() {
            return Err(AudioError::Bgm(format!("no .wav files in {}", dir.display())));
        }
        Ok(Self { tracks })
    }

    pub fn tracks(&self) -> &[PathBuf] {
        &self.tracks
    }

    pub fn track_for(&self, rotation: usize) -> &Path {
        &self.tracks[rotation % self.tracks.len()]
    }

    /// Loads the track for the given rotation index at the master format.
    pub fn load(&self, rotation: usize) -> Result<AudioClip, AudioError> {
        let path = self.track_for(rotation);
        let bytes = std::fs::read(path).map_err(|e| AudioError::Bgm(format!("{}: {e}", path.display())))?;
        decode_wav(&bytes)?.conform(MASTER_RATE, MASTER_CHANNELS)
    }
}

/// Built-in eight-second pad that loops without a seam: every partial
/// completes a whole number of cycles.
pub fn synth_pad() -> AudioClip {
    use std::f64::consts::TAU;
    const SECS: usize = 8;
    const CHORD: [f64; 4] = [220.0, 261.625, 329.625, 392.0];
    let frames = SECS * MASTER_RATE as usize;
    let mut samples = Vec::with_capacity(frames * 2);
    for i in 0..frames {
        let t = i as f64 / MASTER_RATE as f64;
        let swell = 0.75 + 0.25 * (TAU * 0.25 * t).sin();
        let (mut l, mut r) = (0.0, 0.0);
        for (k, f) in CHORD.iter().enumerate() {
            let v = (TAU * f * t).sin() / CHORD.len() as f64;
            let pan = 0.35 + 0.1 * k as f64;
            l += v * (1.0 - pan);
            r += v * pan;
        }
        samples.push((0.3 * swell * l) as f32);
        samples.push((0.3 * swell * r) as f32);
    }
    AudioClip::new(samples, MASTER_RATE, MASTER_CHANNELS).expect("pad is a valid clip")
}
