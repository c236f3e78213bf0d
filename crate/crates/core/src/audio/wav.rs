use std::io::{Read, Seek, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AudioBuffer, AudioError};
use crate::Real;

/// Encoding used when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BitDepth {
    #[default]
    Pcm16,
    Float32,
}

impl std::str::FromStr for BitDepth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pcm16" => Ok(BitDepth::Pcm16),
            "float32" => Ok(BitDepth::Float32),
            other => Err(format!("unknown bit depth {other:?} (expected pcm16 or float32)")),
        }
    }
}

/// What happened while encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriteReport {
    /// Samples outside [-1, 1] that were clamped (PCM only).
    pub clipped_samples: usize,
}

impl WriteReport {
    pub fn clipped(&self) -> bool {
        self.clipped_samples > 0
    }
}

pub fn read_wav<T: Real>(path: &Path) -> Result<AudioBuffer<T>, AudioError> {
    let file = std::fs::File::open(path).map_err(|source| AudioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_wav_from(std::io::BufReader::new(file))
}

/// Decodes PCM16, PCM24 or float32 WAV, mono or stereo.
pub fn read_wav_from<T: Real, R: Read>(reader: R) -> Result<AudioBuffer<T>, AudioError> {
    let mut wav = hound::WavReader::new(reader).map_err(decode_err)?;
    let spec = wav.spec();
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(AudioError::UnsupportedEncoding(format!("{channels} channels")));
    }
    let expected = wav.len() as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (16 | 24)) => {
            let full_scale = (1i64 << (bits - 1)) as f64;
            wav.samples::<i32>()
                .map(|s| s.map(|v| v as f64 / full_scale))
                .collect::<Result<_, _>>()
                .map_err(decode_err)?
        }
        (hound::SampleFormat::Float, 32) => wav
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(decode_err)?,
        (format, bits) => {
            return Err(AudioError::UnsupportedEncoding(format!("{format:?} {bits}-bit")));
        }
    };
    if interleaved.len() != expected || !interleaved.len().is_multiple_of(channels) {
        return Err(AudioError::Truncated(format!(
            "read {} of {} samples",
            interleaved.len(),
            expected
        )));
    }
    let frames = interleaved.len() / channels;
    let mut planar = vec![Vec::with_capacity(frames); channels];
    for frame in interleaved.chunks_exact(channels) {
        for (c, &x) in frame.iter().enumerate() {
            planar[c].push(T::lit(x));
        }
    }
    AudioBuffer::new(planar, spec.sample_rate)
}

pub fn write_wav<T: Real>(buffer: &AudioBuffer<T>, path: &Path, depth: BitDepth) -> Result<WriteReport, AudioError> {
    let file = std::fs::File::create(path).map_err(|source| AudioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_wav_to(buffer, std::io::BufWriter::new(file), depth)
}

/// Encodes `buffer`. PCM output clamps out-of-range samples and counts them.
pub fn write_wav_to<T: Real, W: Write + Seek>(
    buffer: &AudioBuffer<T>,
    writer: W,
    depth: BitDepth,
) -> Result<WriteReport, AudioError> {
    let spec = hound::WavSpec {
        channels: buffer.channel_count() as u16,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: match depth {
            BitDepth::Pcm16 => 16,
            BitDepth::Float32 => 32,
        },
        sample_format: match depth {
            BitDepth::Pcm16 => hound::SampleFormat::Int,
            BitDepth::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut w = hound::WavWriter::new(writer, spec).map_err(encode_err)?;
    let mut report = WriteReport::default();
    for i in 0..buffer.len() {
        for c in buffer.channels() {
            let x = c[i].as_f64();
            match depth {
                BitDepth::Float32 => w.write_sample(x as f32).map_err(encode_err)?,
                BitDepth::Pcm16 => {
                    if x.abs() > 1.0 {
                        report.clipped_samples += 1;
                    }
                    let q = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    w.write_sample(q).map_err(encode_err)?;
                }
            }
        }
    }
    w.finalize().map_err(encode_err)?;
    Ok(report)
}

fn decode_err(e: hound::Error) -> AudioError {
    match e {
        hound::Error::Unsupported => AudioError::UnsupportedEncoding("unsupported WAV variant".into()),
        hound::Error::IoError(io) => AudioError::Truncated(io.to_string()),
        other => AudioError::Truncated(other.to_string()),
    }
}

fn encode_err(e: hound::Error) -> AudioError {
    match e {
        hound::Error::IoError(source) => AudioError::Io { path: "<wav output>".into(), source },
        other => AudioError::UnsupportedEncoding(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn encode<T: Real>(b: &AudioBuffer<T>, depth: BitDepth) -> (Vec<u8>, WriteReport) {
        let mut cur = Cursor::new(Vec::new());
        let report = write_wav_to(b, &mut cur, depth).unwrap();
        (cur.into_inner(), report)
    }

    fn raw_pcm16(channels: u16, samples: &[i16]) -> Vec<u8> {
        let spec = hound::WavSpec { channels, sample_rate: 44100, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
        let mut cur = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cur, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        cur.into_inner()
    }

    #[test]
    fn silence_reads_as_zeros() {
        let bytes = raw_pcm16(1, &vec![0; 44100]);
        let b: AudioBuffer<f32> = read_wav_from(Cursor::new(bytes)).unwrap();
        assert_eq!(b.len(), 44100);
        assert!(b.channel(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn full_scale_negative_is_minus_one() {
        let b: AudioBuffer<f64> = read_wav_from(Cursor::new(raw_pcm16(1, &[-32768, 16384]))).unwrap();
        assert_eq!(b.channel(0), &[-1.0, 0.5]);
    }

    #[test]
    fn three_channels_unsupported() {
        let err = read_wav_from::<f32, _>(Cursor::new(raw_pcm16(3, &[0; 9]))).unwrap_err();
        assert!(matches!(err, AudioError::UnsupportedEncoding(_)));
    }

    #[test]
    fn pcm24_reads_normalized() {
        let spec = hound::WavSpec { channels: 2, sample_rate: 48000, bits_per_sample: 24, sample_format: hound::SampleFormat::Int };
        let mut cur = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cur, spec).unwrap();
        for s in [-8_388_608i32, 4_194_304, 0, 8_388_607] {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        let b: AudioBuffer<f64> = read_wav_from(Cursor::new(cur.into_inner())).unwrap();
        assert_eq!(b.channel(0), &[-1.0, 0.0]);
        assert_eq!(b.channel(1), &[0.5, 8_388_607.0 / 8_388_608.0]);
    }

    #[test]
    fn truncated_data_is_an_error() {
        let mut bytes = raw_pcm16(1, &vec![100; 1000]);
        bytes.truncate(bytes.len() - 301);
        let err = read_wav_from::<f32, _>(Cursor::new(bytes)).unwrap_err();
        assert!(matches!(err, AudioError::Truncated(_)), "{err:?}");
        let err = read_wav_from::<f32, _>(Cursor::new(b"RIFF\x10\0\0\0WAVE".to_vec())).unwrap_err();
        assert!(matches!(err, AudioError::Truncated(_)), "{err:?}");
    }

    #[test]
    fn pcm16_clamps_and_reports() {
        let b = AudioBuffer::mono(vec![1.5f32, -2.0, 0.25, 1.0], 8000).unwrap();
        let (bytes, report) = encode(&b, BitDepth::Pcm16);
        assert_eq!(report.clipped_samples, 2);
        let back: AudioBuffer<f32> = read_wav_from(Cursor::new(bytes)).unwrap();
        assert_eq!(back.channel(0), &[32767.0 / 32768.0, -1.0, 0.25, 32767.0 / 32768.0]);
    }

    proptest! {
        #[test]
        fn float32_round_trip_is_exact(samples in prop::collection::vec(-4.0f32..4.0, 1..400), stereo in any::<bool>()) {
            let b = if stereo {
                let other: Vec<f32> = samples.iter().map(|x| -x * 0.5).collect();
                AudioBuffer::new(vec![samples, other], 22050).unwrap()
            } else {
                AudioBuffer::mono(samples, 22050).unwrap()
            };
            let (bytes, report) = encode(&b, BitDepth::Float32);
            prop_assert!(!report.clipped());
            let back: AudioBuffer<f32> = read_wav_from(Cursor::new(bytes)).unwrap();
            prop_assert_eq!(back, b);
        }

        #[test]
        fn pcm16_round_trip_within_quantization(samples in prop::collection::vec(-1.0f64..=1.0, 1..400)) {
            let b = AudioBuffer::mono(samples, 44100).unwrap();
            let (bytes, _) = encode(&b, BitDepth::Pcm16);
            let back: AudioBuffer<f64> = read_wav_from(Cursor::new(bytes)).unwrap();
            for (x, y) in b.channel(0).iter().zip(back.channel(0)) {
                prop_assert!((x - y).abs() <= 2f64.powi(-15));
            }
        }
    }
}
