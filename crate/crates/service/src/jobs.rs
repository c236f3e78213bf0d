//! Render jobs: the job table, the worker pool and the on-disk cache.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use mashup_core::audio::write_wav;
use mashup_core::render::{render, RenderSettings};
use mashup_core::{Library, MashupPlan};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tokio::sync::Semaphore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    /// Transitions only run queued -> running -> done | failed.
    fn can_become(self, next: JobState) -> bool {
        matches!(
            (self, next),
            (JobState::Queued, JobState::Running) | (JobState::Running, JobState::Done | JobState::Failed)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RenderJob {
    pub job_id: String,
    pub state: JobState,
    pub plan: MashupPlan,
    pub settings: RenderSettings,
    /// Served from a previous render with the same plan and settings.
    pub cached: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Hex SHA-256 of the plan and settings documents.
pub fn cache_key(plan: &MashupPlan, settings: &RenderSettings) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(plan).expect("plan serializes"));
    hasher.update(b"\n");
    hasher.update(serde_json::to_vec(settings).expect("settings serialize"));
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// The single mutable structure shared between handlers and workers.
pub struct JobTable {
    jobs: Mutex<HashMap<String, RenderJob>>,
    next_id: AtomicU64,
    // Fair semaphore: permits go out in request order.
    workers: Arc<Semaphore>,
}

impl JobTable {
    pub fn new(workers: usize) -> Self {
        JobTable { jobs: Mutex::new(HashMap::new()), next_id: AtomicU64::new(1), workers: Arc::new(Semaphore::new(workers)) }
    }

    pub fn get(&self, job_id: &str) -> Option<RenderJob> {
        self.jobs.lock().expect("job table poisoned").get(job_id).cloned()
    }

    fn insert(&self, plan: MashupPlan, settings: RenderSettings) -> String {
        let job_id = format!("job-{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let job = RenderJob {
            job_id: job_id.clone(),
            state: JobState::Queued,
            plan,
            settings,
            cached: false,
            error: None,
            output: None,
        };
        self.jobs.lock().expect("job table poisoned").insert(job_id.clone(), job);
        job_id
    }

    fn advance(&self, job_id: &str, next: JobState, update: impl FnOnce(&mut RenderJob)) {
        let mut jobs = self.jobs.lock().expect("job table poisoned");
        if let Some(job) = jobs.get_mut(job_id) {
            if job.state.can_become(next) {
                job.state = next;
                update(job);
            }
        }
    }

    /// Queues a render and returns its id. The render starts once a worker
    /// is free; a cached result completes the job without rendering.
    pub fn submit(
        self: &Arc<Self>,
        library: Arc<Library>,
        cache_dir: PathBuf,
        plan: MashupPlan,
        settings: RenderSettings,
    ) -> String {
        let job_id = self.insert(plan.clone(), settings);
        let table = Arc::clone(self);
        let id = job_id.clone();
        tokio::spawn(async move {
            let Ok(_permit) = table.workers.clone().acquire_owned().await else {
                return;
            };
            table.advance(&id, JobState::Running, |_| {});
            let output = cache_dir.join(format!("{}.wav", cache_key(&plan, &settings)));
            let cached = output.is_file();
            let result = if cached {
                Ok(())
            } else {
                let (out, tag) = (output.clone(), id.clone());
                tokio::task::spawn_blocking(move || render_to(&library, &plan, &settings, &out, &tag))
                    .await
                    .unwrap_or_else(|e| Err(format!("render task aborted: {e}")))
            };
            match result {
                Ok(()) => table.advance(&id, JobState::Done, |job| {
                    job.output = Some(output);
                    job.cached = cached;
                }),
                Err(message) => table.advance(&id, JobState::Failed, |job| job.error = Some(message)),
            }
        });
        job_id
    }
}

/// Renders into a temporary file and moves it into place, so a cache entry
/// is either complete or absent.
fn render_to(library: &Library, plan: &MashupPlan, settings: &RenderSettings, out: &Path, tag: &str) -> Result<(), String> {
    let roles = &plan.roles;
    let base = library.load_stem(&roles.base_song_id, roles.base_role()).map_err(|e| e.to_string())?;
    let donor = library.load_stem(&roles.donor_song_id, roles.donor_role).map_err(|e| e.to_string())?;
    let rendered = render(plan, &base, &donor, settings).map_err(|e| e.to_string())?;
    let dir = out.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let partial = out.with_extension(format!("{}.{tag}.partial", std::process::id()));
    write_wav(&rendered.audio, &partial, settings.output_bit_depth).map_err(|e| e.to_string())?;
    std::fs::rename(&partial, out).map_err(|e| format!("{}: {e}", out.display()))
}
