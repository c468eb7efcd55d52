//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::time::Instant;

use common::{normal, normal_matrix};
use construct_validity::cards::{
    build_proxy, build_variant_proxies, card1_reliability, card3_discriminant_incremental, Card1Config, Card3Config,
    ProxySpec, RunOptions,
};
use construct_validity::corpus::SplitAssignment;
use construct_validity::geometry::{
    cosine_decomposition, euclidean_decomposition, neutralize_score, nullspace_project,
    rotation_ambiguity_experiment, LinearProbe, SplitEmbedding, INLP_TOLERANCE,
};
use construct_validity::stats::{
    auc, icc_two_way, logistic_fit, ols_fit, FitOptions, RatingsMatrix,
};
use construct_validity::synthetic::{
    export_as_manifest, generate, LabelLink, PerturbationRecipe, Rotation, SyntheticSpec, PROXY_DIRECTION_FILE,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

/// Shrout–Fleiss sums of squares computed cell by cell. Returns ICC(2,1),
/// ICC(2,k) (`None` when its denominator is not positive) and ICC(3,1).
fn icc_oracle(x: &[Vec<f64>]) -> (f64, Option<f64>, f64) {
    let n = x.len();
    let k = x[0].len();
    let (nf, kf) = (n as f64, k as f64);
    let grand: f64 = x.iter().flatten().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = x.iter().map(|r| r.iter().sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / nf).collect();
    let ss_total: f64 = x.iter().flatten().map(|v| (v - grand).powi(2)).sum();
    let ss_rows: f64 = kf * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols: f64 = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_err = ss_total - ss_rows - ss_cols;
    let msr = ss_rows / (nf - 1.0);
    let msc = ss_cols / (kf - 1.0);
    let mse = ss_err / ((nf - 1.0) * (kf - 1.0));
    let icc1 = (msr - mse) / (msr + (kf - 1.0) * mse + kf * (msc - mse) / nf);
    let den_k = msr + (msc - mse) / nf;
    let icck = (den_k > 0.0).then(|| ((msr - mse) / den_k).min(1.0));
    let icc3 = (msr - mse) / (msr + (kf - 1.0) * mse);
    (icc1, icck, icc3)
}

fn icc_criterion(gate: &mut Gate) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=20);
        let k = rng.random_range(2..=8);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..k).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        let r = icc_two_way(&RatingsMatrix::new(n, k, values).unwrap());
        let (o1, ok, o3) = icc_oracle(&rows);
        worst = worst.max((r.icc_2_1 - o1).abs()).max((r.icc_3_1 - o3).abs());
        if let Some(ok) = ok {
            worst = worst.max((r.icc_2_k - ok).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    gate.check(
        "kernels/icc-oracle",
        worst <= 1e-9 && secs < 5.0,
        format!("max |diff| = {worst:.2e} over 200 matrices (n <= 20, k <= 8) in {secs:.3} s"),
    );
}

fn ols_criterion(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(10..200);
        let p = rng.random_range(1..6);
        let x = normal_matrix(n, p, seed + 100);
        let beta: Vec<f64> = normal(p + 1, seed + 200);
        let noise = normal(n, seed + 300);
        let y: Vec<f64> = (0..n)
            .map(|i| beta[0] + (0..p).map(|j| beta[j + 1] * x[(i, j)]).sum::<f64>() + noise[i])
            .collect();
        let fit = ols_fit(&x, &y, &FitOptions::default()).unwrap();
        let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
        let xtx = design.transpose() * &design;
        let xty = design.transpose() * DVector::from_column_slice(&y);
        let oracle = xtx.lu().solve(&xty).unwrap();
        worst = worst.max((fit.intercept - oracle[0]).abs());
        for j in 0..p {
            worst = worst.max((fit.coefficients[j] - oracle[j + 1]).abs());
        }
    }
    gate.check("kernels/ols-normal-equations", worst <= 1e-8, format!("max |diff| = {worst:.2e} over 50 fits"));
}

fn auc_criterion(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut cases = 0;
    for n in 2..=100usize {
        for _ in 0..5 {
            let labels: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
            let pos = labels.iter().filter(|&&l| l == 1.0).count();
            if pos == 0 || pos == n {
                continue;
            }
            let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..10u8))).collect();
            let (mut wins, mut pairs) = (0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    if labels[i] == 1.0 && labels[j] == 0.0 {
                        pairs += 1.0;
                        wins += if scores[i] > scores[j] {
                            1.0
                        } else if scores[i] == scores[j] {
                            0.5
                        } else {
                            0.0
                        };
                    }
                }
            }
            cases += 1;
            if auc(&scores, &labels).unwrap() != wins / pairs {
                mismatches += 1;
            }
        }
    }
    gate.check(
        "kernels/auc-exhaustive",
        mismatches == 0,
        format!("{mismatches} mismatches over {cases} tied-score cases with 2..=100 points"),
    );
}

fn penalized_loglik(x: &[f64], y: &[f64], a: f64, b: f64, lambda: f64) -> f64 {
    let ll: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let eta = a + b * xi;
            yi * eta - eta.max(0.0) - (-eta.abs()).exp().ln_1p()
        })
        .sum();
    ll - 0.5 * lambda * b * b
}

/// Intercept profiled out by 1-D Newton, then a zooming grid over the slope.
fn logistic_slope_oracle(x: &[f64], y: &[f64], lambda: f64) -> f64 {
    let profile = |b: f64| {
        let mut a = 0.0;
        for _ in 0..100 {
            let (mut g, mut h) = (0.0, 0.0);
            for (xi, yi) in x.iter().zip(y) {
                let p = 1.0 / (1.0 + (-(a + b * xi)).exp());
                g += yi - p;
                h += p * (1.0 - p);
            }
            a += g / h;
            if g.abs() < 1e-13 {
                break;
            }
        }
        penalized_loglik(x, y, a, b, lambda)
    };
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..12 {
        let step = (hi - lo) / 40.0;
        let best = (0..=40)
            .map(|i| lo + step * f64::from(i))
            .max_by(|p, q| profile(*p).total_cmp(&profile(*q)))
            .unwrap();
        lo = best - step;
        hi = best + step;
    }
    0.5 * (lo + hi)
}

fn logistic_criterion(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let n = 300;
        let x = normal(n, seed + 500);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 600);
        let slope = 0.5 + 0.4 * seed as f64;
        let y: Vec<f64> = x
            .iter()
            .map(|v| f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-(0.3 + slope * v)).exp()))))
            .collect();
        let options = FitOptions::default();
        let fit = logistic_fit(&DMatrix::from_column_slice(n, 1, &x), &y, &options).unwrap();
        let oracle = logistic_slope_oracle(&x, &y, options.penalty * n as f64);
        worst = worst.max((fit.coefficients[0] - oracle).abs());
    }
    gate.check("kernels/logistic-grid-search", worst <= 1e-4, format!("max |slope diff| = {worst:.2e} over 5 fits"));
}

fn decomposition_criteria(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let dc = rng.random_range(1..30);
        let dz = rng.random_range(0..30);
        let mut v = |d: usize| (0..d).map(|_| rng.random_range(-1e3..1e3)).collect::<Vec<f64>>();
        let a = SplitEmbedding { concept_part: v(dc), nuisance_part: v(dz) };
        let b = SplitEmbedding { concept_part: v(dc), nuisance_part: v(dz) };
        let r = euclidean_decomposition(&a, &b).unwrap();
        let full_a: Vec<f64> = a.concept_part.iter().chain(&a.nuisance_part).copied().collect();
        let full_b: Vec<f64> = b.concept_part.iter().chain(&b.nuisance_part).copied().collect();
        let direct: f64 = full_a.iter().zip(&full_b).map(|(p, q)| (p - q).powi(2)).sum();
        let rel = ((r.concept_term + r.nuisance_term - direct).abs()).max((r.total - direct).abs()) / direct;
        worst = worst.max(rel);
    }
    gate.check(
        "geometry/euclidean-additivity",
        worst <= 1e-9,
        format!("max relative error = {worst:.2e} over 10000 fuzzed pairs"),
    );

    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let d = rng.random_range(1..50);
        let c1: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let c2: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let dz = rng.random_range(0..10);
        let a = SplitEmbedding { concept_part: c1.clone(), nuisance_part: vec![0.0; dz] };
        let b = SplitEmbedding { concept_part: c2.clone(), nuisance_part: vec![0.0; dz] };
        let r = cosine_decomposition(&a, &b).unwrap();
        let dot: f64 = c1.iter().zip(&c2).map(|(p, q)| p * q).sum();
        let na: f64 = c1.iter().map(|p| p * p).sum::<f64>().sqrt();
        let nb: f64 = c2.iter().map(|p| p * p).sum::<f64>().sqrt();
        worst = worst.max((r.total - dot / (na * nb)).abs());
    }
    gate.check(
        "geometry/cosine-without-nuisance",
        worst <= 1e-12,
        format!("max |diff| from plain cosine = {worst:.2e} over 10000 pairs"),
    );
}

fn card3_recovery_criterion(gate: &mut Gate) {
    let start = Instant::now();
    let mut values = Vec::new();
    for seed in 0..10u64 {
        let spec = SyntheticSpec { n_docs: 2000, proxy_nuisance_share: 0.3, ..SyntheticSpec::default() };
        let truth = generate(&spec, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = export_as_manifest(&truth, &PerturbationRecipe { seed, ..PerturbationRecipe::default() }, dir.path()).unwrap();
        let spec = ProxySpec::Linear { weights_path: PROXY_DIRECTION_FILE.into(), bias: 0.0, variant: None };
        let proxy = build_proxy(&manifest, &spec).unwrap();
        let config = Card3Config { blocks: vec!["z".into()], ..Card3Config::default() };
        let r = card3_discriminant_incremental(&manifest, &proxy, &config, &RunOptions { seed, cv_folds: 5 }).unwrap();
        values.push(r.get("step1.r_squared_full").unwrap().value);
    }
    let secs = start.elapsed().as_secs_f64();
    let worst = values.iter().map(|v| (v - 0.30).abs()).fold(0.0, f64::max);
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.3}")).collect();
    gate.check(
        "synthetic/card3-full-z-recovery",
        worst <= 0.05 && secs < 60.0,
        format!("full-Z R^2 per seed [{}] (target 0.30 +/- 0.05) in {secs:.2} s", shown.join(", ")),
    );
}

fn rotation_criterion(gate: &mut Gate) {
    let spec = SyntheticSpec {
        n_docs: 1000,
        c_dims: 1,
        z_dims: 7,
        embed_dims: 8,
        nuisance_to_concept_ratio: 1.0,
        noise_sd: 0.1,
        rotation: Rotation::Random { seed: 0 },
        label_link: LabelLink::Linear,
        proxy_nuisance_share: 0.0,
    };
    let mut worst: f64 = 0.0;
    let mut below = 0;
    for seed in 0..20 {
        let r = rotation_ambiguity_experiment(&spec, seed).unwrap();
        worst = worst.max((r.probe_r2_rotated - r.probe_r2_unrotated).abs());
        if r.coord1_corr_rotated.abs() < 0.9 {
            below += 1;
        }
    }
    gate.check("geometry/rotation-probe-invariance", worst <= 1e-6, format!("max |R^2 diff| = {worst:.2e} over 20 seeds"));
    gate.check(
        "geometry/rotation-coordinate-ambiguity",
        below >= 18,
        format!("|corr(rotated coord 1, c)| < 0.9 in {below} of 20 seeds at dims = 8"),
    );
}

fn nullspace_criterion(gate: &mut Gate) {
    let n = 2000;
    let d = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let z: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random::<f64>() < 0.3))).collect();
    let noise = normal_matrix(n, d, 32);
    let x = DMatrix::from_fn(n, d, |i, j| noise[(i, j)] + if j == 0 { 2.0 * (2.0 * z[i] - 1.0) } else { 0.0 });
    let split = SplitAssignment::holdout(n, 0.3, 33).unwrap();
    let (projected, state) = nullspace_project(&x, &z, 10, &split).unwrap();
    let (train, test) = split.train_test().unwrap();
    let pick = |m: &DMatrix<f64>, rows: &[usize]| DMatrix::from_fn(rows.len(), d, |i, j| m[(rows[i], j)]);
    let y_train: Vec<f64> = train.iter().map(|&i| z[i]).collect();
    let y_test: Vec<f64> = test.iter().map(|&i| z[i]).collect();
    let probe = logistic_fit(&pick(&projected, &train), &y_train, &FitOptions { ridge_fallback: true, ..FitOptions::default() }).unwrap();
    let pred = probe.predict(&pick(&projected, &test));
    let acc = pred.iter().zip(&y_test).filter(|(p, y)| (**p > 0.5) == (**y > 0.5)).count() as f64 / y_test.len() as f64;
    let before = state.probe_scores[0];
    let gap = (acc - state.majority_baseline).abs();
    gate.check(
        "geometry/nullspace-projection",
        gap <= INLP_TOLERANCE && state.iterations <= 10,
        format!(
            "held-out accuracy {before:.4} -> {acc:.4} vs majority {:.4} after {} iterations ({} directions removed)",
            state.majority_baseline,
            state.iterations,
            state.removed_directions.len()
        ),
    );
}

fn jitter_icc_criterion(gate: &mut Gate) {
    let spec = SyntheticSpec { n_docs: 2000, ..SyntheticSpec::default() };
    let truth = generate(&spec, 5).unwrap();
    let m = truth.proxy.iter().sum::<f64>() / truth.proxy.len() as f64;
    let var = truth.proxy.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (truth.proxy.len() as f64 - 1.0);
    let recipe = PerturbationRecipe { n_variants: 8, jitter_sd: (var / 9.0).sqrt(), seed: 5, ..PerturbationRecipe::default() };
    let dir = tempfile::tempdir().unwrap();
    let manifest = export_as_manifest(&truth, &recipe, dir.path()).unwrap();
    let spec = ProxySpec::Linear { weights_path: PROXY_DIRECTION_FILE.into(), bias: 0.0, variant: None };
    let proxies = build_variant_proxies(&manifest, &spec, &[]).unwrap();
    let r = card1_reliability(&manifest, &proxies, &Card1Config::default()).unwrap();
    let icc = r.get("icc_2_1").unwrap().value;
    gate.check(
        "synthetic/jitter-icc",
        (icc - 0.90).abs() <= 0.02 && proxies.len() == 8,
        format!("Card 1 ICC(2,1) = {icc:.4} at 9:1 between:within variance (n = 2000, k = 8; target 0.90 +/- 0.02)"),
    );
}

fn neutralization_criterion(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    for _ in 0..10_000 {
        let d = rng.random_range(1..64);
        let mut v = |s: f64| (0..d).map(|_| rng.random_range(-s..s)).collect::<Vec<f64>>();
        let scorer = LinearProbe { weights: v(1.0), bias: 0.25 };
        let (a, b, shift) = (v(1.0), v(1.0), v(1.0));
        let before = neutralize_score(&scorer, &a, &b).unwrap();
        let sa: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let sb: Vec<f64> = b.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let after = neutralize_score(&scorer, &sa, &sb).unwrap();
        let scale: f64 = (0..d)
            .map(|i| scorer.weights[i].abs() * (a[i].abs() + b[i].abs() + 2.0 * shift[i].abs()))
            .sum::<f64>()
            .max(1.0);
        worst_abs = worst_abs.max((before - after).abs());
        worst_ratio = worst_ratio.max((before - after).abs() / scale);
    }
    gate.check(
        "geometry/neutralization-shift-invariance",
        worst_abs <= 1e-12,
        format!("max |before - after| = {worst_abs:.2e} (relative to term magnitudes {worst_ratio:.2e}) over 10000 cases"),
    );
}

fn main() {
    let mut gate = Gate { failures: 0 };
    icc_criterion(&mut gate);
    ols_criterion(&mut gate);
    auc_criterion(&mut gate);
    logistic_criterion(&mut gate);
    decomposition_criteria(&mut gate);
    card3_recovery_criterion(&mut gate);
    rotation_criterion(&mut gate);
    nullspace_criterion(&mut gate);
    jitter_icc_criterion(&mut gate);
    neutralization_criterion(&mut gate);
    if gate.failures > 0 {
        println!("{} acceptance criteria failed", gate.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
