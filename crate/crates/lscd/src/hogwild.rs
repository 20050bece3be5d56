//! Lock-free multi-worker SGNS training.
//!
//! Workers share the weight arrays through relaxed atomics and update them
//! without locks, each over its own contiguous shard of sentences. Results
//! depend on thread scheduling, so models trained this way are marked as
//! non-deterministic in their metadata.

use std::sync::atomic::AtomicU64;

use lscd_core::corpus::Corpus;
use lscd_core::sgns::{from_atomic, to_atomic, EmbeddingModel, InitSpec, SgnsTrainer, TrainConfig};

use crate::error::Result;

/// Trains with `workers` threads; `workers <= 1` falls back to deterministic training.
pub fn train_parallel(
    corpus: &Corpus,
    cfg: &TrainConfig,
    init: &InitSpec<'_>,
    workers: usize,
) -> Result<EmbeddingModel> {
    let trainer = SgnsTrainer::new(corpus, cfg, init)?;
    if workers <= 1 {
        return Ok(trainer.train());
    }
    let (word, ctx) = trainer.initial_weights();
    let word = to_atomic(&word);
    let ctx = to_atomic(&ctx);
    let progress = AtomicU64::new(0);
    let n = trainer.num_sentences();
    let shard = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for w in 0..workers {
            let range = (w * shard).min(n)..((w + 1) * shard).min(n);
            let (trainer, word, ctx, progress) = (&trainer, &word[..], &ctx[..], &progress);
            scope.spawn(move || {
                for epoch in 0..trainer.config().epochs {
                    let mut rng = trainer.epoch_rng(epoch, w);
                    trainer.train_range(word, ctx, range.clone(), &mut rng, progress);
                }
            });
        }
    });
    Ok(trainer.into_model(from_atomic(&word), from_atomic(&ctx), false, workers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lscd_core::sgns::train;
    use lscd_core::synthetic::{generate_synthetic_change_pair, SyntheticConfig};

    fn cfg() -> TrainConfig {
        TrainConfig {
            dim: 10,
            window: 3,
            epochs: 2,
            seed: 4,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn single_worker_is_the_deterministic_trainer() {
        let pair = generate_synthetic_change_pair(
            &SyntheticConfig {
                sentences_per_corpus: 300,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        let a = train_parallel(&pair.first, &cfg(), &InitSpec::random(), 1).unwrap();
        let b = train(&pair.first, &cfg(), &InitSpec::random()).unwrap();
        assert_eq!(a, b);
        assert!(a.meta().deterministic);
    }

    #[test]
    fn parallel_training_is_flagged_and_finite() {
        let pair = generate_synthetic_change_pair(
            &SyntheticConfig {
                sentences_per_corpus: 300,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        let m = train_parallel(&pair.first, &cfg(), &InitSpec::random(), 3).unwrap();
        assert!(!m.meta().deterministic);
        assert_eq!(m.meta().workers, 3);
        assert!(m.word_matrix().iter().all(|v| v.is_finite()));
        assert!(m.word_matrix().iter().any(|v| *v != 0.0));
    }
}
