//! Batch entry points for every stage of the mashup pipeline.
//!
//! Exit status: 0 on success, 1 on invalid input or a failed check,
//! 2 on I/O failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mashup_core::align::{build_plan, PlanOptions};
use mashup_core::audio::{write_wav, BitDepth};
use mashup_core::compat::{compat_report, rank_candidates, Linkage};
use mashup_core::ingest::{filter_library, FilterRules, Mode, PitchClass};
use mashup_core::library::{Diagnostic, LibraryLayout};
use mashup_core::render::{render, RenderReport, RenderSettings};
use mashup_core::synth::{write_fixture_library, FixtureSpec};
use mashup_core::{Library, MashupPlan, Role, RoleAssignment};
use serde::Serialize;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mashup", version, about = "Align two songs' stems and render a mashup; analyse stem compatibility")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every file in a library against its schema and invariants.
    Validate {
        #[arg(long)]
        library: PathBuf,
    },
    /// Rank donor candidates for a base song.
    Rank(RankArgs),
    /// Plan and render a two-song mashup.
    Render(RenderArgs),
    /// Correlate an embedding model's similarities with the directed scores.
    Report(ReportArgs),
    /// Export a directed similarity matrix as CSV.
    Matrix {
        #[arg(long)]
        library: PathBuf,
        /// `cocola` or an embedding model id.
        #[arg(long)]
        source: String,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the tracks passing the key and duration filter.
    Filter(FilterArgs),
    /// Generate a synthetic library.
    Fixture(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub base: String,
    /// Role the base song contributes.
    #[arg(long, default_value = "accompaniment")]
    pub role: Role,
    /// `cocola` or an embedding model id such as `clap` or `mert`.
    #[arg(long, default_value = "cocola")]
    pub source: String,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub base: String,
    #[arg(long)]
    pub donor: String,
    /// Stem the donor contributes; the base contributes the other one.
    #[arg(long, default_value = "vocals")]
    pub donor_role: Role,
    /// Output WAV. The plan and render report are written beside it.
    #[arg(long)]
    pub out: PathBuf,
    /// Replace the key-derived pitch shift.
    #[arg(long, allow_hyphen_values = true)]
    pub semitones: Option<f64>,
    /// Replace beat alignment with one uniform stretch ratio.
    #[arg(long)]
    pub tempo_ratio: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub base_gain: f64,
    #[arg(long, default_value_t = 1.0)]
    pub donor_gain: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub normalize_dbfs: f64,
    #[arg(long, default_value = "pcm16")]
    pub bit_depth: BitDepth,
    /// Permit base and donor to be the same song.
    #[arg(long)]
    pub allow_self: bool,
}

impl RenderArgs {
    pub fn new(library: impl Into<PathBuf>, base: &str, donor: &str, out: impl Into<PathBuf>) -> Self {
        RenderArgs {
            library: library.into(),
            base: base.to_string(),
            donor: donor.to_string(),
            donor_role: Role::Vocals,
            out: out.into(),
            semitones: None,
            tempo_ratio: None,
            base_gain: 1.0,
            donor_gain: 1.0,
            normalize_dbfs: -1.0,
            bit_depth: BitDepth::Pcm16,
            allow_self: false,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Cosine-distance cut; repeat for several clusterings.
    #[arg(long = "threshold")]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value = "average")]
    pub linkage: Linkage,
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long, default_value = "C")]
    pub center: PitchClass,
    /// Largest circular distance in semitones from the center tonic.
    #[arg(long, default_value_t = 2)]
    pub max_distance: u8,
    #[arg(long, default_value = "major")]
    pub mode: Mode,
    #[arg(long, default_value_t = 184.0)]
    pub min_duration: f64,
    #[arg(long, default_value_t = 194.0)]
    pub max_duration: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FixtureArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub songs: usize,
    #[arg(long, default_value_t = 2)]
    pub bars: usize,
    #[arg(long, default_value_t = 22_050)]
    pub sample_rate: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Engine(#[from] mashup_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} validation problem(s)")]
    Invalid(usize),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Engine(e) if e.is_io() => EXIT_IO,
            _ => EXIT_FAILURE,
        }
    }
}

fn engine<E: Into<mashup_core::Error>>(e: E) -> CliError {
    CliError::Engine(e.into())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Runs one command, printing results to `out` and errors to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Validate { library } => cmd_validate(&library, out),
        Command::Rank(args) => cmd_rank(&args, out),
        Command::Render(args) => cmd_render(&args).map(|r| {
            let _ = writeln!(out, "wrote {} ({:.2} s)", args.out.display(), r.frames as f64 / r.sample_rate as f64);
            for w in &r.plan.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
        }),
        Command::Report(args) => cmd_report(&args).map(|r| {
            let _ = writeln!(out, "wrote {} ({} directed pairs)", args.out.display(), r.correlation.n_pairs);
        }),
        Command::Matrix { library, source, out: path } => cmd_matrix(&library, &source).and_then(|csv| match path {
            Some(p) => write_text(&p, &csv),
            None => out.write_all(csv.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
        }),
        Command::Filter(args) => cmd_filter(&args).map(|ids| {
            for id in ids {
                let _ = writeln!(out, "{id}");
            }
        }),
        Command::Fixture(args) => cmd_fixture(&args).map(|ids| {
            let _ = writeln!(out, "wrote {} songs to {}", ids.len(), args.out.display());
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Prints one `file: problem` line per violation.
pub fn cmd_validate(library: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let diagnostics: Vec<Diagnostic> = Library::validate(library)?;
    for d in &diagnostics {
        let _ = writeln!(out, "{d}");
    }
    if diagnostics.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(diagnostics.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub song_id: String,
    pub score: f64,
}

pub fn rank(args: &RankArgs) -> Result<Vec<RankRow>, CliError> {
    let library = Library::open(&args.library)?;
    library.track(&args.base).map_err(engine)?;
    let matrix = library.matrix(&args.source)?;
    let ranked = rank_candidates(&matrix, &args.base, args.role).map_err(engine)?;
    Ok(ranked
        .into_iter()
        .enumerate()
        .map(|(i, (song_id, score))| RankRow { rank: i + 1, song_id, score })
        .collect())
}

pub fn cmd_rank(args: &RankArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = rank(args)?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        Format::Table => rank_table(&rows),
    };
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn rank_table(rows: &[RankRow]) -> String {
    let cells: Vec<[String; 3]> = rows
        .iter()
        .map(|r| [r.rank.to_string(), r.song_id.clone(), format!("{:.6}", r.score)])
        .collect();
    let header = ["rank", "song_id", "score"];
    let mut width = header.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut text = format!("{:>w0$}  {:<w1$}  {:>w2$}\n", header[0], header[1], header[2], w0 = width[0], w1 = width[1], w2 = width[2]);
    for [a, b, c] in &cells {
        text += &format!("{a:>w0$}  {b:<w1$}  {c:>w2$}\n", w0 = width[0], w1 = width[1], w2 = width[2]);
    }
    text
}

/// Path of the plan written beside a rendered file.
pub fn plan_path(out: &Path) -> PathBuf {
    out.with_extension("plan.json")
}

/// Path of the render report written beside a rendered file.
pub fn report_path(out: &Path) -> PathBuf {
    out.with_extension("report.json")
}

/// Plans and renders, writing the mix, the plan and the render report.
pub fn cmd_render(args: &RenderArgs) -> Result<RenderReport, CliError> {
    let library = Library::open(&args.library)?;
    let base = library.track(&args.base).map_err(engine)?;
    let donor = library.track(&args.donor).map_err(engine)?;
    let roles = RoleAssignment::new(&args.base, &args.donor, args.donor_role, args.allow_self).map_err(engine)?;
    let options = PlanOptions { allow_self: args.allow_self, semitones: args.semitones, tempo_ratio: args.tempo_ratio };
    let plan: MashupPlan = build_plan(base, donor, &roles, &options).map_err(engine)?;

    let settings = RenderSettings {
        output_bit_depth: args.bit_depth,
        donor_gain: args.donor_gain,
        base_gain: args.base_gain,
        normalize_peak_dbfs: args.normalize_dbfs,
    };
    let base_stem = library.load_stem(&args.base, roles.base_role())?;
    let donor_stem = library.load_stem(&args.donor, roles.donor_role)?;
    let rendered = render(&plan, &base_stem, &donor_stem, &settings).map_err(engine)?;
    let written = write_wav(&rendered.audio, &args.out, settings.output_bit_depth).map_err(engine)?;

    let report = RenderReport {
        sample_rate: rendered.audio.sample_rate(),
        channels: rendered.audio.channel_count(),
        frames: rendered.audio.len(),
        peak_before: rendered.peak_before,
        normalization_gain: rendered.normalization_gain,
        clipped_samples: written.clipped_samples,
        plan,
        settings,
    };
    write_text(&plan_path(&args.out), &report.plan.to_json())?;
    write_text(&report_path(&args.out), &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(report)
}

pub fn cmd_report(args: &ReportArgs) -> Result<mashup_core::compat::CompatReport, CliError> {
    let library = Library::open(&args.library)?;
    let embeddings = library.embeddings(&args.model).map_err(engine)?;
    let scores = library.cocola().map_err(engine)?;
    let report = compat_report(embeddings, scores, &args.model, &args.thresholds, args.linkage).map_err(engine)?;
    write_text(&args.out, &report.to_json())?;
    Ok(report)
}

pub fn cmd_matrix(library: &Path, source: &str) -> Result<String, CliError> {
    Ok(Library::open(library)?.matrix(source)?.to_csv())
}

pub fn cmd_filter(args: &FilterArgs) -> Result<Vec<String>, CliError> {
    if args.min_duration > args.max_duration {
        return Err(CliError::Usage("--min-duration exceeds --max-duration".into()));
    }
    let library = Library::open(&args.library)?;
    let rules = FilterRules {
        tonics: FilterRules::tonics_near(args.center, args.max_distance),
        modes: vec![args.mode],
        min_duration: args.min_duration,
        max_duration: args.max_duration,
    };
    let tracks: Vec<_> = library.tracks().cloned().collect();
    Ok(filter_library(&tracks, &rules).into_iter().map(|t| t.song_id).collect())
}

pub fn cmd_fixture(args: &FixtureArgs) -> Result<Vec<String>, CliError> {
    let spec = FixtureSpec {
        songs: args.songs,
        bars_per_section: args.bars.max(1),
        sample_rate: args.sample_rate,
        seed: args.seed,
        ..FixtureSpec::default()
    };
    Ok(write_fixture_library(&LibraryLayout::new(&args.out), &spec)?)
}
