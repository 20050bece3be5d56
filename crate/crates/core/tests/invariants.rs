use lscd_core::aggregate::aggregate;
use lscd_core::align::{procrustes_residual, solve_orthogonal_procrustes};
use lscd_core::analysis::isotropy;
use lscd_core::corpus::{word_inject, Corpus};
use lscd_core::derive_seed;
use lscd_core::evaluation::{average_ranks, spearman};
use lscd_core::postprocess::{
    apply_stacked, mean_center, pc_remove, sot, McPcrParams, SotParams, StackingMode, Transform,
};
use lscd_core::sgns::{train, InitSpec, TrainConfig};
use lscd_core::synthetic::{generate_synthetic_change_pair, SyntheticConfig};
use lscd_core::Matrix;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-3.0f64..3.0, rows * cols).prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
}

fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn rotation(angles: &[f64], d: usize) -> Matrix {
    // Product of Givens rotations in consecutive coordinate planes.
    let mut r = Matrix::identity(d, d);
    for (k, &t) in angles.iter().enumerate() {
        let (i, j) = (k % d, (k + 1) % d);
        let mut g = Matrix::identity(d, d);
        g[(i, i)] = t.cos();
        g[(j, j)] = t.cos();
        g[(i, j)] = -t.sin();
        g[(j, i)] = t.sin();
        r *= g;
    }
    r
}

fn cosines(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..i {
            out.push(m.row(i).dot(&m.row(j)) / (m.row(i).norm() * m.row(j).norm()));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn procrustes_is_orthogonal_and_beats_the_identity(a in matrix(12, 4), b in matrix(12, 4)) {
        let w = solve_orthogonal_procrustes(&a, &b).unwrap();
        prop_assert!(max_abs(&(w.transpose() * &w - Matrix::identity(4, 4))) < 1e-9);
        let best = procrustes_residual(&a, &b, &w);
        prop_assert!(best <= procrustes_residual(&a, &b, &Matrix::identity(4, 4)) + 1e-9);
    }

    #[test]
    fn procrustes_recovers_a_rotation(a in matrix(10, 3), angles in proptest::collection::vec(-3.0f64..3.0, 3)) {
        prop_assume!(a.clone().svd(false, false).singular_values.min() > 1e-3);
        let r = rotation(&angles, 3);
        let b = &a * r.transpose();
        let w = solve_orthogonal_procrustes(&a, &b).unwrap();
        prop_assert!(procrustes_residual(&a, &b, &w) < 1e-8);
    }

    #[test]
    fn sot_with_zero_alpha_keeps_cosines(x in matrix(8, 4)) {
        prop_assume!((0..8).all(|i| x.row(i).norm() > 1e-2));
        let y = sot(&x, &SotParams::new(0.0).unwrap()).unwrap();
        for (c, d) in cosines(&x).iter().zip(cosines(&y)) {
            prop_assert!((c - d).abs() < 1e-9);
        }
    }

    #[test]
    fn sot_keeps_the_shape(x in matrix(7, 3), alpha in -1.0f64..=1.0) {
        let y = sot(&x, &SotParams::new(alpha).unwrap()).unwrap();
        prop_assert_eq!(y.shape(), x.shape());
        prop_assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mean_centering_is_idempotent(x in matrix(9, 4)) {
        let c = mean_center(&x);
        prop_assert!(max_abs(&(mean_center(&c) - &c)) < 1e-12);
        for j in 0..4 {
            prop_assert!(c.column(j).sum().abs() < 1e-10);
        }
    }

    #[test]
    fn pc_removal_never_adds_variance(x in matrix(10, 5), m in 0usize..4) {
        let p = McPcrParams { num_pcs: m };
        let y = pc_remove(&x, &p).unwrap();
        let yy = pc_remove(&y, &p).unwrap();
        // Re-removing m components from y may take further directions, but never adds variance.
        prop_assert!(yy.norm() <= y.norm() + 1e-9);
        prop_assert!(y.norm() <= mean_center(&x).norm() + 1e-9);
    }

    #[test]
    fn separate_stacking_treats_sides_independently(a in matrix(6, 3), b in matrix(5, 3), m in 0usize..3) {
        let t = Transform::McPcr(McPcrParams { num_pcs: m });
        let (ta, tb) = apply_stacked(&a, &b, &[], &t, StackingMode::Sep).unwrap();
        prop_assert_eq!(ta, t.apply(&a).unwrap());
        prop_assert_eq!(tb, t.apply(&b).unwrap());
    }

    #[test]
    fn joint_stacking_keeps_row_counts(a in matrix(6, 3), b in matrix(4, 3), alpha in -1.0f64..=1.0) {
        let t = Transform::Sot(SotParams::new(alpha).unwrap());
        let (ta, tb) = apply_stacked(&a, &b, &[], &t, StackingMode::Sta).unwrap();
        prop_assert_eq!(ta.shape(), (6, 3));
        prop_assert_eq!(tb.shape(), (4, 3));
    }

    #[test]
    fn isotropy_lies_in_the_unit_interval(x in matrix(15, 3)) {
        prop_assume!(max_abs(&x) > 1e-3);
        let i = isotropy(&x).unwrap();
        prop_assert!(i > 0.0 && i <= 1.0 + 1e-12);
    }

    #[test]
    fn isotropy_is_rotation_invariant(x in matrix(15, 3), angles in proptest::collection::vec(-3.0f64..3.0, 3)) {
        prop_assume!(max_abs(&x) > 1e-3);
        let y = &x * rotation(&angles, 3);
        prop_assert!((isotropy(&x).unwrap() - isotropy(&y).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn average_ranks_sum_like_distinct_ranks(v in proptest::collection::vec(0u8..5, 1..20)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let n = v.len() as f64;
        let total: f64 = average_ranks(&v).iter().sum();
        prop_assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn spearman_is_bounded_symmetric_and_monotone_invariant(
        pairs in proptest::collection::vec((0u8..6, 0u8..6), 3..15),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().map(|(a, b)| (f64::from(a), f64::from(b))).unzip();
        if let Ok(r) = spearman(&x, &y) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            prop_assert!((r - spearman(&y, &x).unwrap()).abs() < 1e-12);
            let warped: Vec<f64> = x.iter().map(|v| v.powi(3) + 7.0).collect();
            prop_assert!((r - spearman(&warped, &y).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_orders_its_statistics(v in proptest::collection::vec(-1.0f64..1.0, 1..30)) {
        let a = aggregate(&v).unwrap();
        prop_assert!(a.mean <= a.max + 1e-12);
        prop_assert!(a.std >= 0.0);
        prop_assert_eq!(a.single_sample(), v.len() == 1);
    }

    #[test]
    fn derived_seeds_are_deterministic_and_salt_sensitive(seed in any::<u64>(), salt in 0u64..1000) {
        prop_assert_eq!(derive_seed(seed, salt), derive_seed(seed, salt));
        prop_assert_ne!(derive_seed(seed, salt), derive_seed(seed, salt + 1));
    }

    #[test]
    fn word_injection_tags_every_target_occurrence(seed in any::<u64>()) {
        let first = Corpus::new("a", vec![vec!["x".into(), "t".into()], vec!["y".into()]]);
        let second = Corpus::new("b", vec![vec!["t".into(), "t".into(), "z".into()]]);
        let inj = word_inject(&first, &second, &["t"], seed);
        let vocab = inj.corpus.vocab();
        prop_assert!(!vocab.contains("t"));
        prop_assert_eq!(vocab.frequency_of(&inj.targets[0].tagged[0]), 1);
        prop_assert_eq!(vocab.frequency_of(&inj.targets[0].tagged[1]), 2);
        prop_assert_eq!(inj.corpus.token_count(), first.token_count() + second.token_count());
    }
}

#[test]
fn training_is_reproducible_from_the_seed() {
    let cfg = SyntheticConfig {
        vocab_size: 40,
        sentences_per_corpus: 200,
        ..SyntheticConfig::default()
    };
    let pair = generate_synthetic_change_pair(&cfg, 3).unwrap();
    let tc = TrainConfig {
        dim: 8,
        window: 3,
        epochs: 2,
        seed: 11,
        ..TrainConfig::default()
    };
    let a = train(&pair.first, &tc, &InitSpec::random()).unwrap();
    let b = train(&pair.first, &tc, &InitSpec::random()).unwrap();
    assert_eq!(a.word_matrix(), b.word_matrix());
    assert_eq!(a.context_matrix(), b.context_matrix());
    let c = train(&pair.first, &tc.with_seed(12), &InitSpec::random()).unwrap();
    assert_ne!(a.word_matrix(), c.word_matrix());
}

#[test]
fn background_rate_is_validated() {
    for rate in [-0.1, 1.0, 1.5] {
        let cfg = SyntheticConfig {
            background_rate: rate,
            ..SyntheticConfig::default()
        };
        assert!(generate_synthetic_change_pair(&cfg, 0).is_err(), "rate {rate} accepted");
    }
    let cfg = SyntheticConfig {
        background_rate: 0.5,
        sentences_per_corpus: 300,
        ..SyntheticConfig::default()
    };
    let pair = generate_synthetic_change_pair(&cfg, 0).unwrap();
    // With background noise a sentence mixes fillers from several topics.
    let mixed = pair.first.sentences().iter().any(|s| {
        let topics: std::collections::BTreeSet<&str> = s
            .iter()
            .filter(|t| t.starts_with('w'))
            .filter_map(|t| t.split('_').next())
            .collect();
        topics.len() > 1
    });
    assert!(mixed);
}
