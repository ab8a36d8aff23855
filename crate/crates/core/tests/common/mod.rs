//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use spikewave::signal_io::ClassLabel;

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integral over `[a, b]` split into `pieces` equal sub-intervals.
pub fn integrate_pieces(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize, tol: f64) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            integrate(f, lo, lo + h, tol / pieces as f64)
        })
        .sum()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn standard_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Full-sort kNN: every distance computed, all sorted by (distance, index),
/// first k taken, votes counted label by label.
pub struct OracleAnswer {
    pub label: ClassLabel,
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

pub fn brute_force_knn(
    query: &[f64; 3],
    features: &[[f64; 3]],
    labels: &[ClassLabel],
    k: usize,
) -> OracleAnswer {
    let mut all: Vec<(f64, usize)> = features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let d2: f64 = (0..3).map(|j| (query[j] - f[j]).powi(2)).sum();
            (d2.sqrt(), i)
        })
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let chosen = &all[..k];
    let ones = chosen
        .iter()
        .filter(|(_, i)| labels[*i] == ClassLabel::SpikeWave)
        .count();
    let zeros = k - ones;
    let label = if ones > zeros {
        ClassLabel::SpikeWave
    } else if zeros > ones {
        ClassLabel::Background
    } else {
        labels[chosen[0].1]
    };
    OracleAnswer {
        label,
        indices: chosen.iter().map(|c| c.1).collect(),
        distances: chosen.iter().map(|c| c.0).collect(),
    }
}

/// Exhaustive grid minimum of `f` over the Cartesian product of the axes.
pub fn grid_argmin(f: &dyn Fn(f64, f64, f64) -> f64, a: &[f64], b: &[f64], c: &[f64]) -> ([f64; 3], f64) {
    let mut best = ([f64::NAN; 3], f64::INFINITY);
    for &x in a {
        for &y in b {
            for &z in c {
                let v = f(x, y, z);
                if v < best.1 {
                    best = ([x, y, z], v);
                }
            }
        }
    }
    best
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// A seeded random kNN problem: up to 200 training points, k up to 20.
/// Odd instances draw from a coarse integer grid so distance ties occur.
pub struct KnnInstance {
    pub features: Vec<[f64; 3]>,
    pub labels: Vec<ClassLabel>,
    pub queries: Vec<[f64; 3]>,
    pub k: usize,
}

pub fn random_knn_instance(seed: u64) -> KnnInstance {
    use rand::Rng;
    let mut rng = spikewave::tls_model::generator(seed, 7);
    let n = rng.random_range(1..=200usize);
    let k = rng.random_range(1..=20usize.min(n));
    let gridded = seed % 2 == 1;
    let point = |rng: &mut rand_chacha::ChaCha8Rng| -> [f64; 3] {
        if gridded {
            [0; 3].map(|_| rng.random_range(-3..=3i32) as f64)
        } else {
            [rng.random_range(-5.0..5.0), rng.random_range(0.1..50.0), rng.random_range(0.5..100.0)]
        }
    };
    let features: Vec<[f64; 3]> = (0..n).map(|_| point(&mut rng)).collect();
    let labels = (0..n)
        .map(|_| ClassLabel::from_u8(rng.random_range(0..=1u8)).unwrap())
        .collect();
    let queries = (0..5).map(|_| point(&mut rng)).collect();
    KnnInstance { features, labels, queries, k }
}
