//! The on-disk library layout:
//!
//! ```text
//! <root>/analysis/<id>.json
//! <root>/stems/<id>/{vocals,accompaniment}.wav   (or stems/manifest.json)
//! <root>/embeddings/<model>.emb
//! <root>/scores/cocola.csv
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{read_wav, write_wav, AudioBuffer, BitDepth, Stem};
use crate::compat::{build_cocola_matrix, build_embedding_matrix, DirectedScoreMatrix};
use crate::ingest::{
    load_analysis, load_cocola_scores, load_embeddings, CocolaScoreSet, EmbeddingFile, IngestError, Role,
    StemEmbedding, StemsManifest, TrackAnalysis,
};
use crate::{Error, Result};

/// Score source name for the externally computed compatibility scores.
pub const COCOLA_SOURCE: &str = "cocola";

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("{0}: not a directory")]
    NotADirectory(String),
    #[error("unknown song {0:?}")]
    UnknownSong(String),
    #[error("no data for source {0:?}")]
    MissingSource(String),
    #[error("{count} validation problem(s), first: {first}")]
    Invalid { count: usize, first: Diagnostic },
}

/// One validation failure: the file and the invariant it breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.file, self.message)
    }
}

impl Diagnostic {
    fn new(file: &Path, message: impl Into<String>) -> Self {
        Diagnostic { file: file.display().to_string(), message: message.into() }
    }

    fn from_ingest(file: &Path, e: &IngestError) -> Self {
        // Ingest messages already start with the path.
        let text = e.to_string();
        let prefix = format!("{}: ", file.display());
        let message = text.strip_prefix(&prefix).unwrap_or(&text).to_string();
        Diagnostic::new(file, message)
    }
}

/// Paths inside a library root, plus writers for building one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibraryLayout {
    pub root: PathBuf,
}

impl LibraryLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        LibraryLayout { root: root.into() }
    }

    pub fn analysis_dir(&self) -> PathBuf {
        self.root.join("analysis")
    }

    pub fn analysis_path(&self, song_id: &str) -> PathBuf {
        self.analysis_dir().join(format!("{song_id}.json"))
    }

    pub fn stems_dir(&self) -> PathBuf {
        self.root.join("stems")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.stems_dir().join("manifest.json")
    }

    pub fn stem_path(&self, song_id: &str, role: Role) -> PathBuf {
        self.stems_dir().join(song_id).join(format!("{}.wav", role.as_str()))
    }

    pub fn embeddings_dir(&self) -> PathBuf {
        self.root.join("embeddings")
    }

    pub fn embeddings_path(&self, model: &str) -> PathBuf {
        self.embeddings_dir().join(format!("{model}.emb"))
    }

    pub fn scores_path(&self) -> PathBuf {
        self.root.join("scores").join("cocola.csv")
    }

    pub fn write_analysis(&self, track: &TrackAnalysis) -> Result<()> {
        create_dir(&self.analysis_dir())?;
        Ok(track.save(&self.analysis_path(&track.song_id))?)
    }

    pub fn write_stem(&self, song_id: &str, role: Role, audio: &AudioBuffer<f32>, depth: BitDepth) -> Result<()> {
        let path = self.stem_path(song_id, role);
        create_dir(path.parent().expect("stem path has a parent"))?;
        write_wav(audio, &path, depth)?;
        Ok(())
    }

    pub fn write_embeddings(&self, model: &str, embeddings: &[StemEmbedding<f64>]) -> Result<()> {
        create_dir(&self.embeddings_dir())?;
        let doc = EmbeddingFile::from_embeddings(model, embeddings);
        let text = serde_json::to_string(&doc).expect("embeddings serialize");
        write_file(&self.embeddings_path(model), text)
    }

    pub fn write_scores(&self, scores: &CocolaScoreSet) -> Result<()> {
        let path = self.scores_path();
        create_dir(path.parent().expect("scores path has a parent"))?;
        write_file(&path, scores.to_csv())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })
}

fn write_file(path: &Path, contents: String) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Files in `dir` with the given extension, sorted by name. A missing
/// directory is empty.
fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let io = |source| Error::Io { path: dir.display().to_string(), source };
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == ext) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// A loaded, validated library. Immutable once opened.
#[derive(Debug, Clone)]
pub struct Library {
    layout: LibraryLayout,
    tracks: BTreeMap<String, TrackAnalysis>,
    stems: StemsManifest,
    embeddings: BTreeMap<String, Vec<StemEmbedding<f64>>>,
    cocola: Option<CocolaScoreSet>,
}

impl Library {
    /// Opens a library, failing on the first I/O error or on any
    /// validation problem.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let (library, diagnostics) = scan(root.as_ref())?;
        match diagnostics.first() {
            None => Ok(library),
            Some(first) => Err(LibraryError::Invalid { count: diagnostics.len(), first: first.clone() }.into()),
        }
    }

    /// All validation problems in the library. `Err` only for I/O failures.
    pub fn validate(root: impl AsRef<Path>) -> Result<Vec<Diagnostic>> {
        scan(root.as_ref()).map(|(_, d)| d)
    }

    pub fn root(&self) -> &Path {
        &self.layout.root
    }

    pub fn layout(&self) -> &LibraryLayout {
        &self.layout
    }

    /// Song ids in sorted order.
    pub fn song_ids(&self) -> Vec<String> {
        self.tracks.keys().cloned().collect()
    }

    pub fn tracks(&self) -> impl Iterator<Item = &TrackAnalysis> {
        self.tracks.values()
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn track(&self, song_id: &str) -> Result<&TrackAnalysis, LibraryError> {
        self.tracks.get(song_id).ok_or_else(|| LibraryError::UnknownSong(song_id.to_string()))
    }

    pub fn stem_path(&self, song_id: &str, role: Role) -> Result<PathBuf, LibraryError> {
        self.track(song_id)?;
        Ok(self.stems.resolve(&self.layout.root, song_id, role).unwrap_or_else(|| self.layout.stem_path(song_id, role)))
    }

    pub fn load_stem(&self, song_id: &str, role: Role) -> Result<Stem<f32>> {
        let path = self.stem_path(song_id, role)?;
        Ok(Stem::new(song_id, role, read_wav(&path)?))
    }

    /// Embedding model ids, sorted.
    pub fn models(&self) -> Vec<String> {
        self.embeddings.keys().cloned().collect()
    }

    pub fn embeddings(&self, model: &str) -> Result<&[StemEmbedding<f64>], LibraryError> {
        self.embeddings.get(model).map(Vec::as_slice).ok_or_else(|| LibraryError::MissingSource(model.to_string()))
    }

    pub fn cocola(&self) -> Result<&CocolaScoreSet, LibraryError> {
        self.cocola.as_ref().ok_or_else(|| LibraryError::MissingSource(COCOLA_SOURCE.to_string()))
    }

    /// Names accepted by [`Library::matrix`].
    pub fn sources(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.cocola.is_some() {
            out.push(COCOLA_SOURCE.to_string());
        }
        out.extend(self.models());
        out
    }

    /// Directed matrix for `source`: `"cocola"` or an embedding model id.
    /// Songs are in sorted order.
    pub fn matrix(&self, source: &str) -> Result<DirectedScoreMatrix<f64>> {
        if source == COCOLA_SOURCE {
            let scores = self.cocola()?;
            return Ok(build_cocola_matrix(scores, &scores.song_ids())?);
        }
        let mut items = self.embeddings(source)?.to_vec();
        items.sort_by(|a, b| a.song_id.cmp(&b.song_id).then(a.role.cmp(&b.role)));
        Ok(build_embedding_matrix(&items, source)?)
    }
}

fn scan(root: &Path) -> Result<(Library, Vec<Diagnostic>)> {
    let meta = std::fs::metadata(root).map_err(|source| Error::Io { path: root.display().to_string(), source })?;
    if !meta.is_dir() {
        return Err(LibraryError::NotADirectory(root.display().to_string()).into());
    }
    let layout = LibraryLayout::new(root);
    let mut diags = Vec::new();
    // Ingest I/O failures abort; content problems become diagnostics.
    let check = |path: &Path, e: IngestError, diags: &mut Vec<Diagnostic>| -> Result<()> {
        if e.is_io() {
            return Err(e.into());
        }
        diags.push(Diagnostic::from_ingest(path, &e));
        Ok(())
    };

    let mut tracks = BTreeMap::new();
    for path in files_with_extension(&layout.analysis_dir(), "json")? {
        match load_analysis(&path) {
            Ok(track) => {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                if track.song_id != stem {
                    diags.push(Diagnostic::new(&path, format!("id {:?} does not match file name", track.song_id)));
                } else {
                    tracks.insert(track.song_id.clone(), track);
                }
            }
            Err(e) => check(&path, e, &mut diags)?,
        }
    }

    let manifest_path = layout.manifest_path();
    let stems = if manifest_path.exists() {
        match StemsManifest::load(&manifest_path) {
            Ok(m) => m,
            Err(e) => {
                check(&manifest_path, e, &mut diags)?;
                StemsManifest::default()
            }
        }
    } else {
        StemsManifest::conventional(tracks.keys().map(String::as_str))
    };
    for id in tracks.keys() {
        for role in [Role::Vocals, Role::Accompaniment] {
            match stems.resolve(root, id, role) {
                None => diags.push(Diagnostic::new(&manifest_path, format!("no stems listed for {id:?}"))),
                Some(p) if !p.is_file() => diags.push(Diagnostic::new(&p, format!("missing {role} stem for {id:?}"))),
                Some(_) => {}
            }
        }
    }

    let known: HashSet<String> = tracks.keys().cloned().collect();
    let mut embeddings = BTreeMap::new();
    for path in files_with_extension(&layout.embeddings_dir(), "emb")? {
        let model = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        match load_embeddings(&path) {
            Ok(items) => {
                let mut ok = true;
                for e in &items {
                    if e.model_id != model {
                        diags.push(Diagnostic::new(&path, format!("model {:?} does not match file name", e.model_id)));
                        ok = false;
                        break;
                    }
                    if !known.contains(&e.song_id) {
                        diags.push(Diagnostic::new(&path, format!("unknown song id {:?}", e.song_id)));
                        ok = false;
                    }
                }
                if ok {
                    embeddings.insert(model, items);
                }
            }
            Err(e) => check(&path, e, &mut diags)?,
        }
    }

    let scores_path = layout.scores_path();
    let cocola = if scores_path.exists() {
        match load_cocola_scores(&scores_path, Some(&known)) {
            Ok(s) => Some(s),
            Err(e) => {
                check(&scores_path, e, &mut diags)?;
                None
            }
        }
    } else {
        None
    };

    Ok((Library { layout, tracks, stems, embeddings, cocola }, diags))
}
