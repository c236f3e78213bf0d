#![allow(dead_code)]

use rustfft::{num_complex::Complex, FftPlanner};

/// Frequency of the strongest spectral peak, from a Hann-windowed,
/// zero-padded FFT of the middle 80% of `x` with parabolic refinement.
pub fn fft_peak_hz(x: &[f32], sample_rate: u32) -> f64 {
    let skip = x.len() / 10;
    let body = &x[skip..x.len() - skip];
    let n = (body.len() * 8).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n];
    let m = body.len() as f64;
    for (i, &s) in body.iter().enumerate() {
        let w = 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (m - 1.0)).cos();
        buf[i] = Complex::new(s as f64 * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm().max(1e-300).ln()).collect();
    let k = (1..mag.len() - 1).max_by(|&a, &b| mag[a].partial_cmp(&mag[b]).unwrap()).unwrap();
    let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
    let delta = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + delta) * sample_rate as f64 / n as f64
}

/// Times where |x| first rises above `threshold` after at least
/// `refractory` seconds below it.
pub fn onsets(x: &[f32], sample_rate: u32, threshold: f32, refractory: f64) -> Vec<f64> {
    let gap = (refractory * sample_rate as f64) as usize;
    let mut out = Vec::new();
    let mut last_loud: Option<usize> = None;
    for (i, &s) in x.iter().enumerate() {
        if s.abs() >= threshold {
            if last_loud.is_none_or(|l| i - l > gap) {
                out.push(i as f64 / sample_rate as f64);
            }
            last_loud = Some(i);
        }
    }
    out
}

pub fn nearest_distance(t: f64, refs: &[f64]) -> f64 {
    refs.iter().map(|r| (r - t).abs()).fold(f64::INFINITY, f64::min)
}

/// Agglomerative clustering recomputing every inter-cluster distance from
/// the item distances at each step. `linkage` is "single", "complete" or
/// "average". Ties go to the pair with the smallest (min member, min member).
pub fn brute_force_clusters(dist: &[Vec<f64>], threshold: f64, linkage: &str) -> Vec<usize> {
    let n = dist.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let ds: Vec<f64> = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| dist[i][j])
                    .collect();
                let d = match linkage {
                    "single" => ds.iter().copied().fold(f64::INFINITY, f64::min),
                    "complete" => ds.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    _ => ds.iter().sum::<f64>() / ds.len() as f64,
                };
                let key = (clusters[a][0], clusters[b][0]);
                let better = match best {
                    None => true,
                    Some((bd, x, y)) => d < bd || (d == bd && key < (clusters[x][0], clusters[y][0])),
                };
                if better {
                    best = Some((d, a, b));
                }
            }
        }
        match best {
            Some((d, a, b)) if d <= threshold => {
                let merged = clusters.remove(b);
                clusters[a].extend(merged);
                clusters[a].sort();
                clusters.sort_by_key(|c| c[0]);
            }
            _ => break,
        }
    }
    let mut labels = vec![0; n];
    for (k, c) in clusters.iter().enumerate() {
        for &i in c {
            labels[i] = k;
        }
    }
    canonical(&labels)
}

/// Relabels in order of first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub fn brute_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// Average ranks by counting: 1 + #smaller + (#equal - 1) / 2.
pub fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|a| {
            let less = x.iter().filter(|b| *b < a).count() as f64;
            let equal = x.iter().filter(|b| *b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn brute_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    brute_pearson(&brute_ranks(x), &brute_ranks(y))
}

/// Kendall tau-b by enumerating all pairs.
pub fn brute_kendall(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mut conc, mut disc, mut tx, mut ty) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = (x[i] - x[j]).signum() * (x[i] != x[j]) as i32 as f64;
            let dy = (y[i] - y[j]).signum() * (y[i] != y[j]) as i32 as f64;
            match (dx == 0.0, dy == 0.0) {
                (true, true) => {}
                (true, false) => tx += 1.0,
                (false, true) => ty += 1.0,
                (false, false) if dx == dy => conc += 1.0,
                _ => disc += 1.0,
            }
        }
    }
    let denom = ((conc + disc + tx) * (conc + disc + ty)).sqrt();
    (denom > 0.0).then(|| (conc - disc) / denom)
}

/// Adjusted Rand index from pair counts over all item pairs.
pub fn brute_ari(a: &[usize], b: &[usize]) -> f64 {
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let denom = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (both * neither - only_a * only_b) / denom
}
