use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, IngestError};

/// Directed compatibility scores keyed by `(vocal_song_id, accomp_song_id)`.
///
/// `(a, b)` and `(b, a)` are independent entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CocolaScoreSet {
    entries: BTreeMap<(String, String), f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreRow {
    vocal_song_id: String,
    accomp_song_id: String,
    score: f64,
}

impl CocolaScoreSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a directed pair; returns false if it was already present.
    pub fn insert(&mut self, vocal: impl Into<String>, accompaniment: impl Into<String>, score: f64) -> bool {
        use std::collections::btree_map::Entry;
        match self.entries.entry((vocal.into(), accompaniment.into())) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(score);
                true
            }
        }
    }

    pub fn get(&self, vocal: &str, accompaniment: &str) -> Option<f64> {
        self.entries.get(&(vocal.to_string(), accompaniment.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries.iter().map(|((v, a), s)| (v.as_str(), a.as_str(), *s))
    }

    /// Entries whose vocal and accompaniment come from the same song.
    pub fn self_pairs(&self) -> Vec<(&str, f64)> {
        self.iter().filter(|(v, a, _)| v == a).map(|(v, _, s)| (v, s)).collect()
    }

    /// Every song id mentioned on either side.
    pub fn song_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> =
            self.entries.keys().flat_map(|(v, a)| [v.clone(), a.clone()]).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (v, a, s) in self.iter() {
            w.serialize(ScoreRow { vocal_song_id: v.into(), accomp_song_id: a.into(), score: s })
                .expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

/// Parses score CSV. When `known` is given, every id must be in it.
pub fn parse_cocola_scores(
    text: &str,
    origin: &str,
    known: Option<&HashSet<String>>,
) -> Result<CocolaScoreSet, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| parse_err(origin, e))?.clone();
    let expected = ["vocal_song_id", "accomp_song_id", "score"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(IngestError::Parse {
            path: origin.to_string(),
            message: format!("expected header {:?}, found {:?}", expected.join(","), headers),
        });
    }
    let mut set = CocolaScoreSet::new();
    for row in reader.deserialize::<ScoreRow>() {
        let row = row.map_err(|e| parse_err(origin, e))?;
        if let Some(known) = known {
            for id in [&row.vocal_song_id, &row.accomp_song_id] {
                if !known.contains(id) {
                    return Err(IngestError::UnknownSong { path: origin.to_string(), song_id: id.clone() });
                }
            }
        }
        let (v, a) = (row.vocal_song_id, row.accomp_song_id);
        if !set.insert(v.clone(), a.clone(), row.score) {
            return Err(IngestError::DuplicatePair { path: origin.to_string(), vocal: v, accompaniment: a });
        }
    }
    Ok(set)
}

pub fn load_cocola_scores(path: &Path, known: Option<&HashSet<String>>) -> Result<CocolaScoreSet, IngestError> {
    let text = read_to_string(path)?;
    parse_cocola_scores(&text, &path.display().to_string(), known)
}

fn parse_err(origin: &str, e: csv::Error) -> IngestError {
    IngestError::Parse { path: origin.to_string(), message: e.to_string() }
}
