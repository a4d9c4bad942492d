use std::io::{Cursor, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::clip::{resample_linear, SUPPORTED_RATES};
use super::{AudioClip, AudioError, MASTER_RATE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterFormat {
    WavPcm16,
    Mp3,
}

impl MasterFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            MasterFormat::WavPcm16 => "audio/wav",
            MasterFormat::Mp3 => "audio/mpeg",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            MasterFormat::WavPcm16 => "wav",
            MasterFormat::Mp3 => "mp3",
        }
    }
}

/// Turns a PCM16 WAV file into MP3 bytes.
pub trait Mp3Encoder: Send + Sync {
    fn encode(&self, wav: &[u8]) -> Result<Vec<u8>, AudioError>;
}

/// Pipes the WAV through an external program (for example `lame - -`) and
/// collects its standard output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandMp3Encoder {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl Mp3Encoder for CommandMp3Encoder {
    fn encode(&self, wav: &[u8]) -> Result<Vec<u8>, AudioError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| AudioError::EncoderUnavailable(format!("{}: {e}", self.program.display())))?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let input = wav.to_vec();
        let feeder = std::thread::spawn(move || stdin.write_all(&input));
        let out = child.wait_with_output().map_err(|e| AudioError::Encode(e.to_string()))?;
        let _ = feeder.join();
        if !out.status.success() {
            return Err(AudioError::Encode(format!(
                "{} exited with {}: {}",
                self.program.display(),
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(out.stdout)
    }
}

fn to_pcm16(s: f32) -> i16 {
    (s.clamp(-1.0, 1.0) * i16::MAX as f32).round() as i16
}

fn encode_wav(master: &AudioClip) -> Result<Vec<u8>, AudioError> {
    let spec = hound::WavSpec {
        channels: master.channels(),
        sample_rate: master.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = Vec::with_capacity(44 + master.samples().len() * 2);
    {
        let err = |e: hound::Error| AudioError::Encode(e.to_string());
        let mut w = hound::WavWriter::new(Cursor::new(&mut buf), spec).map_err(err)?;
        let mut w16 = w.get_i16_writer(master.samples().len() as u32);
        for &s in master.samples() {
            w16.write_sample(to_pcm16(s));
        }
        w16.flush().map_err(err)?;
        w.finalize().map_err(err)?;
    }
    Ok(buf)
}

/// Encodes the mastered episode. PCM16 output is a canonical 44-byte-header
/// RIFF/WAVE file and is byte-identical for identical input.
pub fn encode_master(
    master: &AudioClip,
    format: MasterFormat,
    mp3: Option<&dyn Mp3Encoder>,
) -> Result<Vec<u8>, AudioError> {
    match format {
        MasterFormat::WavPcm16 => encode_wav(master),
        MasterFormat::Mp3 => {
            let encoder = mp3.ok_or_else(|| AudioError::EncoderUnavailable("no mp3 encoder configured".into()))?;
            encoder.encode(&encode_wav(master)?)
        }
    }
}

/// Decodes integer or float WAV. Unsupported rates are resampled to the
/// master rate; layouts wider than stereo keep their first two channels.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    let err = |e: hound::Error| AudioError::Decode(e.to_string());
    let mut reader = hound::WavReader::new(Cursor::new(bytes)).map_err(err)?;
    let spec = reader.spec();
    let samples: Vec<f32> = match spec.sample_format {
        hound::SampleFormat::Float => reader.samples::<f32>().collect::<Result<_, _>>().map_err(err)?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f32;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f32 * scale))
                .collect::<Result<_, _>>()
                .map_err(err)?
        }
    };
    if spec.channels == 0 {
        return Err(AudioError::Decode("zero channels".into()));
    }
    let (samples, channels) = if spec.channels > 2 {
        let wide = spec.channels as usize;
        (samples.chunks_exact(wide).flat_map(|f| [f[0], f[1]]).collect(), 2)
    } else {
        (samples, spec.channels)
    };
    if samples.is_empty() {
        return Err(AudioError::Decode("no audio frames".into()));
    }
    let (samples, rate) = if SUPPORTED_RATES.contains(&spec.sample_rate) {
        (samples, spec.sample_rate)
    } else {
        (resample_linear(&samples, channels as usize, spec.sample_rate, MASTER_RATE), MASTER_RATE)
    };
    AudioClip::new(samples, rate, channels)
}
