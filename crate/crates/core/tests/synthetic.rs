use construct_validity::stats::{ols_fit, FitOptions};
use construct_validity::synthetic::{generate, LabelLink, Rotation, SyntheticSpec};

#[test]
fn full_embedding_probe_recovers_planted_concept_r2() {
    for seed in 0..10 {
        let spec = SyntheticSpec {
            n_docs: 1500,
            noise_sd: 0.6,
            rotation: Rotation::Random { seed: seed + 100 },
            ..SyntheticSpec::default()
        };
        let t = generate(&spec, seed).unwrap();
        let r2 = ols_fit(&t.embeddings, &t.concept_score(), &FitOptions::default()).unwrap().r_squared;
        assert!((r2 - t.planted_r2_c).abs() <= 0.03, "seed {seed}: {r2} vs {}", t.planted_r2_c);
    }
}

#[test]
fn logistic_link_at_zero_threshold_is_balanced() {
    for seed in 0..5 {
        let spec = SyntheticSpec { n_docs: 1000, label_link: LabelLink::Logistic { threshold: 0.0 }, ..SyntheticSpec::default() };
        let t = generate(&spec, seed).unwrap();
        let share = t.labels.iter().sum::<f64>() / t.labels.len() as f64;
        assert!((share - 0.5).abs() <= 0.05, "seed {seed}: {share}");
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let spec = SyntheticSpec { n_docs: 300, ..SyntheticSpec::default() };
    let a = generate(&spec, 9).unwrap();
    let b = generate(&spec, 9).unwrap();
    let c = generate(&spec, 10).unwrap();
    assert_eq!(a.proxy, b.proxy);
    assert_ne!(a.proxy, c.proxy);
}

#[test]
fn too_few_documents_for_the_factor_count_are_rejected() {
    let spec = SyntheticSpec { n_docs: 20, ..SyntheticSpec::default() };
    assert!(generate(&spec, 0).is_err());
}
