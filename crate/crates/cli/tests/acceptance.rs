//! One PASS/FAIL line per primary acceptance criterion. Exits non-zero if
//! any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::time::Instant;

use common::{
    brute_ari, brute_force_clusters, brute_kendall, brute_pearson, brute_spearman, canonical, fft_peak_hz,
    nearest_distance, onsets,
};
use mashup_cli::{cmd_render, plan_path, RenderArgs};
use mashup_core::align::key_shift_semitones;
use mashup_core::audio::{read_wav, BitDepth};
use mashup_core::compat::{
    adjusted_rand_index, agglomerative_cluster, asymmetry_stats, build_embedding_matrix, correlate, cosine_distance_matrix,
    rank_candidates, DirectedScoreMatrix, Linkage, ScoreSource,
};
use mashup_core::ingest::{filter_library, FilterRules, PitchClass};
use mashup_core::library::LibraryLayout;
use mashup_core::synth::{click_track, grid_track, random_embeddings, random_scores, sine};
use mashup_core::tsm::{pitch_shift, time_stretch, TsmParams};
use mashup_core::{AudioBufferF32, Key, MashupPlan, Mode, Role, TrackAnalysis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const TONE_SR: u32 = 44_100;

fn tsm_correctness() -> Outcome {
    let start = Instant::now();
    let tone: AudioBufferF32 = sine(440.0, 1.0, TONE_SR, 0.5);
    let params = TsmParams::for_rate(TONE_SR);
    let (mut worst_dur, mut worst_pitch) = (0.0f64, 0.0f64);
    for ratio in [0.5, 0.8333, 1.0, 1.2, 2.0] {
        let out = time_stretch(&tone, ratio, &params).map_err(|e| e.to_string())?;
        let dur_err = (out.duration() - ratio).abs();
        let pitch_err = (fft_peak_hz(out.channel(0), TONE_SR) - 440.0).abs() / 440.0;
        check(dur_err <= 0.020, || format!("ratio {ratio}: duration off by {:.1} ms", dur_err * 1e3))?;
        check(pitch_err < 0.01, || format!("ratio {ratio}: peak off by {:.2}%", pitch_err * 100.0))?;
        worst_dur = worst_dur.max(dur_err);
        worst_pitch = worst_pitch.max(pitch_err);
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!(
        "max duration error {:.2} ms (tol 20), max peak error {:.3}% (tol 1%), {secs:.2} s (limit 5)",
        worst_dur * 1e3,
        worst_pitch * 100.0
    ))
}

fn pitch_correctness() -> Outcome {
    let tone: AudioBufferF32 = sine(440.0, 1.0, TONE_SR, 0.5);
    let params = TsmParams::for_rate(TONE_SR);
    let (mut worst_dur, mut worst_pitch) = (0.0f64, 0.0f64);
    for s in [-12.0, -2.0, 0.0, 7.0, 12.0] {
        let out = pitch_shift(&tone, s, &params).map_err(|e| e.to_string())?;
        let want = 440.0 * 2f64.powf(s / 12.0);
        let pitch_err = (fft_peak_hz(out.channel(0), TONE_SR) - want).abs() / want;
        let dur_err = (out.duration() - 1.0).abs();
        check(pitch_err < 0.01, || format!("{s:+} st: peak off by {:.2}%", pitch_err * 100.0))?;
        check(dur_err <= 0.020, || format!("{s:+} st: duration off by {:.1} ms", dur_err * 1e3))?;
        worst_dur = worst_dur.max(dur_err);
        worst_pitch = worst_pitch.max(pitch_err);
    }
    Ok(format!("max peak error {:.3}% (tol 1%), max duration error {:.2} ms (tol 20)", worst_pitch * 100.0, worst_dur * 1e3))
}

/// Writes analyses and click-track stems for the given tracks.
fn click_library(root: &Path, tracks: &[&TrackAnalysis], sample_rate: u32) {
    let layout = LibraryLayout::new(root);
    for t in tracks {
        layout.write_analysis(t).unwrap();
        let clicks: AudioBufferF32 = click_track(t, sample_rate, 1000.0);
        layout.write_stem(&t.song_id, Role::Vocals, &clicks, BitDepth::Float32).unwrap();
        layout.write_stem(&t.song_id, Role::Accompaniment, &clicks, BitDepth::Float32).unwrap();
    }
}

fn beat_alignment() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = grid_track("base120", 120.0, Key::major(0), &[("verse", 8), ("chorus", 8)]);
    let donor = grid_track("donor100", 100.0, Key::major(0), &[("verse", 8), ("chorus", 8)]);
    click_library(dir.path(), &[&base, &donor], TONE_SR);
    let out = dir.path().join("aligned.wav");
    let mut args = RenderArgs::new(dir.path(), "base120", "donor100", &out);
    args.base_gain = 0.0;
    args.bit_depth = BitDepth::Float32;

    let start = Instant::now();
    cmd_render(&args).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let audio: AudioBufferF32 = read_wav(&out).map_err(|e| e.to_string())?;
    let found = onsets(audio.channel(0), TONE_SR, 0.2, 0.1);
    let within = found.iter().filter(|t| nearest_distance(**t, &base.beats) <= 0.010).count();
    let share = within as f64 / found.len().max(1) as f64;
    check(found.len() * 100 >= base.beats.len() * 95, || {
        format!("only {} of {} donor clicks detected", found.len(), base.beats.len())
    })?;
    check(share >= 0.95, || format!("{within}/{} clicks within 10 ms", found.len()))?;
    check(secs < 10.0, || format!("render took {secs:.2} s"))?;
    let worst = found.iter().map(|t| nearest_distance(*t, &base.beats)).fold(0.0, f64::max);
    Ok(format!(
        "{within}/{} donor clicks within 10 ms (need 95%), worst {:.2} ms, render {secs:.2} s (limit 10)",
        found.len(),
        worst * 1e3
    ))
}

fn segment_fill() -> Outcome {
    // At 240 BPM a 4/4 bar lasts exactly one second.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = grid_track("base", 240.0, Key::major(0), &[("verse", 20), ("chorus", 8), ("bridge", 7)]);
    let donor = grid_track("donor", 240.0, Key::major(0), &[("verse", 8), ("chorus", 8), ("bridge", 8)]);
    click_library(dir.path(), &[&base, &donor], 8000);
    let out = dir.path().join("fill.wav");
    cmd_render(&RenderArgs::new(dir.path(), "base", "donor", &out)).map_err(|e| e.to_string())?;
    let plan = MashupPlan::from_json(&std::fs::read_to_string(plan_path(&out)).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let lengths: Vec<Vec<f64>> = plan.pairings.iter().map(|p| p.placements.iter().map(|x| x.length).collect()).collect();
    let want = [vec![8.0, 8.0, 4.0], vec![8.0], vec![7.0]];
    let matches = lengths.len() == want.len()
        && lengths.iter().zip(&want).all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9));
    check(matches, || format!("placements {lengths:?}, want {want:?}"))?;
    Ok(format!("placement lengths {lengths:?} (tol 1e-9 s)"))
}

fn key_shift_table() -> Outcome {
    let mut tritones = 0;
    for base in 0..12u8 {
        for donor in 0..12u8 {
            let s = key_shift_semitones(Key::major(base), Key::major(donor)).semitones;
            check(s.fract() == 0.0 && (-6.0..=5.0).contains(&s), || format!("base {base} donor {donor}: {s}"))?;
            check((donor as i64 + s as i64).rem_euclid(12) == base as i64, || format!("base {base} donor {donor}: {s} misses"))?;
            if (base as i64 - donor as i64).rem_euclid(12) == 6 {
                check(s == -6.0, || format!("tritone base {base} donor {donor}: {s}"))?;
                tritones += 1;
            }
        }
    }
    Ok(format!("144 pairs in [-6, +5] and land on the base tonic; {tritones} tritones give -6"))
}

fn ari_suite() -> Outcome {
    let same: f64 = adjusted_rand_index(&[0, 0, 1, 1, 2], &[3, 3, 7, 7, 9]).map_err(|e| e.to_string())?;
    check(same == 1.0, || format!("identical partitions gave {same}"))?;
    let crossed: f64 = adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]).map_err(|e| e.to_string())?;
    check((crossed + 0.5).abs() < 1e-12, || format!("crossed partition gave {crossed}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0.0;
    for _ in 0..1000 {
        let k = rng.gen_range(2..=6);
        let a: Vec<usize> = (0..40).map(|_| rng.gen_range(0..k)).collect();
        let b: Vec<usize> = (0..40).map(|_| rng.gen_range(0..k)).collect();
        let ari: f64 = adjusted_rand_index(&a, &b).map_err(|e| e.to_string())?;
        check((ari - brute_ari(&a, &b)).abs() < 1e-12, || "disagrees with pair-count oracle".into())?;
        total += ari;
    }
    let mean = total / 1000.0;
    check(mean.abs() <= 0.05, || format!("mean random ARI {mean}"))?;
    Ok(format!("identical 1.0, crossed {crossed:.15}, mean over 1000 random labelings {mean:+.4} (tol 0.05)"))
}

fn clustering_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut compared = 0;
    for set in 0..20u64 {
        let n = rng.gen_range(2..=8usize);
        let ids: Vec<String> = (0..n.div_ceil(2)).map(|i| format!("s{i}")).collect();
        let mut items = random_embeddings(&ids, "m", rng.gen_range(2..=12), 500 + set);
        items.truncate(n);
        let vectors: Vec<&[f64]> = items.iter().map(|e| e.vector.as_slice()).collect();
        let dist = cosine_distance_matrix(&vectors).map_err(|e| e.to_string())?;
        for (linkage, name) in [(Linkage::Single, "single"), (Linkage::Complete, "complete"), (Linkage::Average, "average")] {
            let mut prev = usize::MAX;
            for step in 0..10 {
                let threshold = step as f64 * 2.0 / 9.0;
                let got = agglomerative_cluster(&items, threshold, linkage).map_err(|e| e.to_string())?;
                let want = brute_force_clusters(&dist, threshold, name);
                check(canonical(&got.labels) == want, || format!("set {set} {name} t={threshold:.3}: {:?} vs {want:?}", got.labels))?;
                check(got.cluster_count() <= prev, || format!("set {set} {name}: count rose at t={threshold:.3}"))?;
                prev = got.cluster_count();
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} cuts over 20 sets (n <= 8, 3 linkages, 10 thresholds) match the brute-force reference; counts non-increasing"))
}

fn correlation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut worst = 0.0f64;
    let mut tied = 0;
    let diff = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => Ok((a - b).abs()),
        (None, None) => Ok(0.0),
        _ => Err(format!("defined-ness differs: {a:?} vs {b:?}")),
    };
    for case in 0..100 {
        let n = rng.gen_range(2..=30);
        let ties = case % 2 == 0;
        let mut draw = || if ties { rng.gen_range(0..5) as f64 } else { rng.gen_range(-10.0..10.0) };
        let x: Vec<f64> = (0..n).map(|_| draw()).collect();
        let y: Vec<f64> = (0..n).map(|_| draw()).collect();
        tied += ties as usize;
        let r = correlate(&x, &y).map_err(|e| e.to_string())?;
        for (got, want) in [
            (r.pearson, brute_pearson(&x, &y)),
            (r.spearman, brute_spearman(&x, &y)),
            (r.kendall_tau, brute_kendall(&x, &y)),
        ] {
            let d = diff(got, want)?;
            check(d <= 1e-12, || format!("case {case}: off by {d:e}"))?;
            worst = worst.max(d);
        }
        let tx: Vec<f64> = x.iter().map(|v| (v / 3.0).exp()).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * v * v + v).collect();
        let t = correlate(&tx, &ty).map_err(|e| e.to_string())?;
        let d = diff(t.spearman, r.spearman)?.max(diff(t.kendall_tau, r.kendall_tau)?);
        check(d <= 1e-12, || format!("case {case}: monotone transform changed ranks by {d:e}"))?;
    }
    Ok(format!("100 vectors ({tied} with ties) match brute force, worst {worst:.1e} (tol 1e-12); monotone invariance holds"))
}

fn asymmetry() -> Outcome {
    let ids: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
    let mut embs = random_embeddings(&ids, "m", 8, 77);
    for pair in embs.chunks_mut(2) {
        pair[1].vector = pair[0].vector.clone();
    }
    let sym = asymmetry_stats(&build_embedding_matrix(&embs, "m").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    check((sym.mean_abs_diff, sym.max_abs_diff, sym.frobenius_index) == (0.0, 0.0, 0.0), || format!("symmetric fixture gave {sym:?}"))?;

    let two: DirectedScoreMatrix<f64> = DirectedScoreMatrix::from_rows(
        vec!["a".into(), "b".into()],
        vec![vec![None, Some(0.9)], vec![Some(0.3), None]],
        ScoreSource::Cocola,
        None,
    );
    let s = asymmetry_stats(&two).map_err(|e| e.to_string())?;
    check((s.mean_abs_diff - 0.6).abs() < 1e-12 && (s.max_abs_diff - 0.6).abs() < 1e-12, || format!("2x2 gave {s:?}"))?;

    let three: DirectedScoreMatrix<f64> = DirectedScoreMatrix::from_rows(
        vec!["x".into(), "y".into(), "z".into()],
        vec![vec![None, Some(0.9), Some(0.1)], vec![Some(0.2), None, Some(0.5)], vec![Some(0.8), Some(0.4), None]],
        ScoreSource::Cocola,
        None,
    );
    let order = |role| -> Result<Vec<String>, String> {
        Ok(rank_candidates(&three, "x", role).map_err(|e| e.to_string())?.into_iter().map(|r| r.0).collect())
    };
    let (accomp, vocals) = (order(Role::Accompaniment)?, order(Role::Vocals)?);
    check(accomp != vocals, || format!("ranking did not flip: {accomp:?}"))?;
    Ok(format!("symmetric (0, 0, 0); 2x2 mean = max = {:.12} (tol 1e-12); 3x3 order {accomp:?} flips to {vocals:?}", s.mean_abs_diff))
}

fn dataset_filter() -> Outcome {
    // (tonic, mode, duration, hand-marked keep)
    let rows: [(&str, &str, f64, bool); 50] = [
        ("C", "major", 190.0, true), ("C", "minor", 190.0, false), ("D", "major", 184.0, true),
        ("D", "major", 183.9, false), ("A#", "major", 194.0, true), ("A#", "major", 194.1, false),
        ("B", "major", 188.0, true), ("C#", "major", 192.0, true), ("D#", "major", 190.0, false),
        ("A", "major", 190.0, false), ("E", "major", 186.0, false), ("F", "major", 186.0, false),
        ("F#", "major", 189.0, false), ("G", "major", 189.0, false), ("G#", "major", 189.0, false),
        ("B", "minor", 188.0, false), ("C", "major", 200.0, false), ("C", "major", 150.0, false),
        ("D", "major", 194.0, true), ("C#", "minor", 187.0, false), ("A#", "minor", 185.0, false),
        ("B", "major", 184.5, true), ("C", "major", 184.0, true), ("C", "major", 193.99, true),
        ("D#", "minor", 191.0, false), ("A", "major", 184.0, false), ("D", "major", 210.0, false),
        ("A#", "major", 186.2, true), ("C#", "major", 183.0, false), ("B", "major", 195.0, false),
        ("G", "major", 190.0, false), ("C", "major", 191.5, true), ("D", "major", 187.25, true),
        ("E", "minor", 190.0, false), ("F#", "minor", 190.0, false), ("C#", "major", 190.0, true),
        ("A#", "major", 170.0, false), ("B", "major", 194.0, true), ("G#", "minor", 184.0, false),
        ("D", "minor", 189.0, false), ("C", "major", 186.6, true), ("F", "major", 193.0, false),
        ("D#", "major", 185.0, false), ("A", "major", 192.0, false), ("B", "major", 190.3, true),
        ("C#", "major", 188.8, true), ("C", "minor", 184.0, false), ("D", "major", 194.0001, false),
        ("A#", "major", 184.0, true), ("E", "major", 190.0, false),
    ];
    let tracks: Vec<TrackAnalysis> = rows
        .iter()
        .enumerate()
        .map(|(i, (tonic, mode, duration, _))| TrackAnalysis {
            song_id: format!("t{i:02}"),
            bpm: 120.0,
            beats: vec![0.5],
            downbeats: vec![],
            key: Key::new(tonic.parse::<PitchClass>().unwrap(), mode.parse::<Mode>().unwrap()),
            duration: *duration,
            segments: vec![],
        })
        .collect();
    let kept: Vec<String> = filter_library(&tracks, &FilterRules::default()).into_iter().map(|t| t.song_id).collect();
    let marked: Vec<String> = rows.iter().enumerate().filter(|(_, r)| r.3).map(|(i, _)| format!("t{i:02}")).collect();
    check(kept == marked, || format!("kept {kept:?}, marked {marked:?}"))?;
    Ok(format!("{} of 50 retained, exactly the hand-marked subset", kept.len()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = grid_track("b", 118.0, Key::major(0), &[("verse", 4), ("chorus", 4)]);
    let donor = grid_track("d", 97.0, Key::major(3), &[("verse", 3), ("chorus", 2)]);
    click_library(dir.path(), &[&base, &donor], 16_000);
    let layout = LibraryLayout::new(dir.path());
    layout.write_stem("d", Role::Vocals, &sine(330.0, donor.duration, 16_000, 0.5), BitDepth::Float32).unwrap();
    let ids = vec!["b".to_string(), "d".to_string()];
    layout.write_scores(&random_scores(&ids, 1)).unwrap();
    let runs: Vec<(Vec<u8>, Vec<u8>)> = ["one.wav", "two.wav"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            cmd_render(&RenderArgs::new(dir.path(), "b", "d", &out)).map_err(|e| e.to_string())?;
            Ok((std::fs::read(&out).map_err(|e| e.to_string())?, std::fs::read(plan_path(&out)).map_err(|e| e.to_string())?))
        })
        .collect::<Result<_, String>>()?;
    check(runs[0].0 == runs[1].0, || "audio differs between runs".into())?;
    check(runs[0].1 == runs[1].1, || "plan files differ between runs".into())?;
    Ok(format!("two renders: {} audio bytes and {} plan bytes identical", runs[0].0.len(), runs[0].1.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("tsm-correctness", tsm_correctness),
        ("pitch-shift-correctness", pitch_correctness),
        ("beat-alignment-end-to-end", beat_alignment),
        ("segment-fill-exactness", segment_fill),
        ("key-shift-table", key_shift_table),
        ("ari-oracle-suite", ari_suite),
        ("clustering-oracle", clustering_oracle),
        ("correlation-oracle", correlation_oracle),
        ("asymmetry", asymmetry),
        ("dataset-filter", dataset_filter),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
