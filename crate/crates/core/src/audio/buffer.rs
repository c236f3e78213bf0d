use super::{AudioError, Role};
use crate::Real;

/// Planar audio: one sample vector per channel, all of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<T> {
    channels: Vec<Vec<T>>,
    sample_rate: u32,
}

impl<T: Real> AudioBuffer<T> {
    pub fn new(channels: Vec<Vec<T>>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidBuffer("sample rate must be positive".into()));
        }
        if channels.is_empty() || channels.len() > 2 {
            return Err(AudioError::InvalidBuffer(format!(
                "{} channels (1 or 2 supported)",
                channels.len()
            )));
        }
        if channels.iter().any(|c| c.len() != channels[0].len()) {
            return Err(AudioError::InvalidBuffer("channels differ in length".into()));
        }
        Ok(AudioBuffer { channels, sample_rate })
    }

    pub fn mono(samples: Vec<T>, sample_rate: u32) -> Result<Self, AudioError> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn silence(channels: usize, frames: usize, sample_rate: u32) -> Result<Self, AudioError> {
        Self::new(vec![vec![T::zero(); frames]; channels], sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Frames per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, index: usize) -> &[T] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<T>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<T>> {
        self.channels
    }

    /// Average of all channels.
    pub fn mono_mix(&self) -> Vec<T> {
        if self.channels.len() == 1 {
            return self.channels[0].clone();
        }
        let scale = T::one() / T::from_usize_lossy(self.channels.len());
        (0..self.len())
            .map(|i| self.channels.iter().map(|c| c[i]).sum::<T>() * scale)
            .collect()
    }

    /// Duplicates a mono buffer up to `channels`; no-op when already wide enough.
    pub fn upmix(&self, channels: usize) -> Self {
        if self.channels.len() >= channels {
            return self.clone();
        }
        let src = &self.channels[0];
        AudioBuffer { channels: vec![src.clone(); channels], sample_rate: self.sample_rate }
    }

    pub fn peak(&self) -> T {
        self.channels
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn scaled(&self, gain: T) -> Self {
        self.map_channels(|c| c.iter().map(|&x| x * gain).collect())
    }

    /// Applies `f` to each channel; every output channel must have the same length.
    pub fn map_channels(&self, mut f: impl FnMut(&[T]) -> Vec<T>) -> Self {
        let channels: Vec<Vec<T>> = self.channels.iter().map(|c| f(c)).collect();
        debug_assert!(channels.iter().all(|c| c.len() == channels[0].len()));
        AudioBuffer { channels, sample_rate: self.sample_rate }
    }

    pub fn cast<U: Real>(&self) -> AudioBuffer<U> {
        AudioBuffer {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|x| U::lit(x.as_f64())).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// A separated stem of one song.
#[derive(Debug, Clone, PartialEq)]
pub struct Stem<T> {
    pub song_id: String,
    pub role: Role,
    pub audio: AudioBuffer<T>,
}

impl<T: Real> Stem<T> {
    pub fn new(song_id: impl Into<String>, role: Role, audio: AudioBuffer<T>) -> Self {
        Stem { song_id: song_id.into(), role, audio }
    }
}
