//! Synthetic signals and analyses for fixtures, demos and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::{AudioBuffer, BitDepth};
use crate::ingest::{CocolaScoreSet, Key, Mode, PitchClass, Role, Segment, StemEmbedding, TrackAnalysis};
use crate::library::LibraryLayout;
use crate::{Real, Result};

/// Length of one synthetic click.
pub const CLICK_SECONDS: f64 = 0.010;

/// A 4/4 track at constant tempo whose sections are whole bars laid out
/// back to back from time zero.
pub fn grid_track(id: &str, bpm: f64, key: Key, sections: &[(&str, usize)]) -> TrackAnalysis {
    let beat = 60.0 / bpm;
    let bars: usize = sections.iter().map(|(_, n)| n).sum();
    let beats: Vec<f64> = (0..bars * 4).map(|i| i as f64 * beat).collect();
    let downbeats = beats.iter().step_by(4).copied().collect();
    let mut segments = Vec::new();
    let mut bar = 0;
    for (label, n) in sections {
        segments.push(Segment::new(bar as f64 * 4.0 * beat, (bar + n) as f64 * 4.0 * beat, *label));
        bar += n;
    }
    TrackAnalysis {
        song_id: id.to_string(),
        bpm,
        beats,
        downbeats,
        key,
        duration: bars as f64 * 4.0 * beat,
        segments,
    }
}

pub fn sine<T: Real>(freq: f64, seconds: f64, sample_rate: u32, amplitude: f64) -> AudioBuffer<T> {
    let n = (seconds * sample_rate as f64).round() as usize;
    let w = std::f64::consts::TAU * freq / sample_rate as f64;
    let samples = (0..n).map(|i| T::lit(amplitude * (w * i as f64).sin())).collect();
    AudioBuffer::mono(samples, sample_rate).expect("mono buffer")
}

/// Decaying tone bursts at every beat, louder on downbeats.
pub fn click_track<T: Real>(track: &TrackAnalysis, sample_rate: u32, tone_hz: f64) -> AudioBuffer<T> {
    let sr = sample_rate as f64;
    let n = (track.duration * sr).round() as usize;
    let mut samples = vec![T::zero(); n];
    let click_len = (CLICK_SECONDS * sr) as usize;
    for &beat in &track.beats {
        let strong = track.downbeats.iter().any(|d| (d - beat).abs() < 1e-6);
        let amp = if strong { 0.9 } else { 0.6 };
        let start = (beat * sr).round() as usize;
        for i in 0..click_len {
            if let Some(s) = samples.get_mut(start + i) {
                let t = i as f64 / sr;
                let env = (-t / (CLICK_SECONDS / 4.0)).exp();
                *s = *s + T::lit(amp * env * (std::f64::consts::TAU * tone_hz * t).cos());
            }
        }
    }
    AudioBuffer::mono(samples, sample_rate).expect("mono buffer")
}

/// Deterministic random embeddings: one vocal and one accompaniment vector
/// per song.
pub fn random_embeddings(song_ids: &[String], model: &str, dim: usize, seed: u64) -> Vec<StemEmbedding<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(song_ids.len() * 2);
    for id in song_ids {
        for role in [Role::Vocals, Role::Accompaniment] {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            out.push(StemEmbedding::new(id.clone(), role, model, v));
        }
    }
    out
}

/// Uniform random directed scores over all ordered pairs of distinct songs.
pub fn random_scores(song_ids: &[String], seed: u64) -> CocolaScoreSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = CocolaScoreSet::new();
    for v in song_ids {
        for a in song_ids {
            if v != a {
                set.insert(v.clone(), a.clone(), rng.gen_range(0.0..1.0));
            }
        }
    }
    set
}


/// Shape of a generated fixture library.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub songs: usize,
    pub bars_per_section: usize,
    pub sample_rate: u32,
    pub models: Vec<String>,
    pub embedding_dim: usize,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            songs: 4,
            bars_per_section: 2,
            sample_rate: 22_050,
            models: vec!["clap".to_string(), "mert".to_string()],
            embedding_dim: 16,
            seed: 0,
        }
    }
}

/// Writes a complete library of synthetic songs: analyses with
/// verse/chorus structure at random tempi and keys, click-track
/// accompaniment, tonal vocals on the beats, random embeddings per model
/// and random directed scores. Returns the song ids.
pub fn write_fixture_library(layout: &LibraryLayout, spec: &FixtureSpec) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ids: Vec<String> = (0..spec.songs).map(|i| format!("song{i:02}")).collect();
    let bars = spec.bars_per_section;
    for id in &ids {
        let bpm = rng.gen_range(90..=130) as f64;
        let key = Key { tonic: PitchClass::new(rng.gen_range(0..12)).expect("pitch class"), mode: Mode::Major };
        let sections: &[(&str, usize)] = if rng.gen_bool(0.5) {
            &[("intro", 1), ("verse", bars), ("chorus", bars), ("verse", bars), ("chorus", bars)]
        } else {
            &[("verse", bars), ("chorus", bars), ("bridge", 1), ("chorus", bars)]
        };
        let track = grid_track(id, bpm, key, sections);
        let accompaniment: AudioBuffer<f32> = click_track(&track, spec.sample_rate, 1000.0);
        let vocal_hz = 220.0 * 2f64.powf(key.tonic.value() as f64 / 12.0);
        let vocals = beat_tones(&track, spec.sample_rate, vocal_hz);
        layout.write_analysis(&track)?;
        layout.write_stem(id, Role::Accompaniment, &accompaniment, BitDepth::Pcm16)?;
        layout.write_stem(id, Role::Vocals, &vocals, BitDepth::Pcm16)?;
    }
    for (k, model) in spec.models.iter().enumerate() {
        let seed = spec.seed.wrapping_add(1 + k as u64);
        layout.write_embeddings(model, &random_embeddings(&ids, model, spec.embedding_dim, seed))?;
    }
    layout.write_scores(&random_scores(&ids, spec.seed.wrapping_add(1000)))?;
    Ok(ids)
}

/// A sustained tone for the first half of every beat.
fn beat_tones(track: &TrackAnalysis, sample_rate: u32, freq: f64) -> AudioBuffer<f32> {
    let sr = sample_rate as f64;
    let mut samples = vec![0.0f32; (track.duration * sr).round() as usize];
    let half = (track.beat_period() / 2.0 * sr) as usize;
    let ramp = (0.005 * sr) as usize;
    for &beat in &track.beats {
        let start = (beat * sr).round() as usize;
        for i in 0..half {
            let env = (i.min(half - i) as f64 / ramp as f64).min(1.0);
            if let Some(s) = samples.get_mut(start + i) {
                *s = (0.4 * env * (std::f64::consts::TAU * freq * i as f64 / sr).sin()) as f32;
            }
        }
    }
    AudioBuffer::mono(samples, sample_rate).expect("mono buffer")
}
