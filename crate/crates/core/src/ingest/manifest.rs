use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_to_string, IngestError, Role};

/// Locations of one song's separated stems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StemPaths {
    pub vocals: PathBuf,
    pub accompaniment: PathBuf,
}

impl StemPaths {
    pub fn get(&self, role: Role) -> &Path {
        match role {
            Role::Vocals => &self.vocals,
            Role::Accompaniment => &self.accompaniment,
        }
    }
}

/// Song id to stem file mapping. Relative paths resolve against the library root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StemsManifest {
    pub songs: BTreeMap<String, StemPaths>,
}

impl StemsManifest {
    /// The `stems/<id>/{vocals,accompaniment}.wav` convention for the given ids.
    pub fn conventional<'a>(ids: impl IntoIterator<Item = &'a str>) -> Self {
        let songs = ids
            .into_iter()
            .map(|id| {
                let dir = Path::new("stems").join(id);
                (
                    id.to_string(),
                    StemPaths { vocals: dir.join("vocals.wav"), accompaniment: dir.join("accompaniment.wav") },
                )
            })
            .collect();
        StemsManifest { songs }
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| IngestError::Parse { path: path.display().to_string(), message: e.to_string() })
    }

    pub fn resolve(&self, root: &Path, song_id: &str, role: Role) -> Option<PathBuf> {
        self.songs.get(song_id).map(|p| root.join(p.get(role)))
    }
}
