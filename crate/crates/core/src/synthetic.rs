//! Synthetic diachronic corpus pairs with known changed and stable pseudo-words.
//!
//! Filler words are partitioned into topic clusters. Each sentence is drawn
//! from a single cluster. A stable target appears in sentences of the same
//! cluster in both corpora; a changed target moves to a different cluster in
//! the second corpus.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, TargetWordList};
use crate::error::{Error, Result};
use crate::evaluation::GoldRanking;
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    /// Number of filler (non-target) word types.
    pub vocab_size: usize,
    pub num_clusters: usize,
    pub sentences_per_corpus: usize,
    pub sentence_length: usize,
    pub num_changed: usize,
    pub num_stable: usize,
    /// Probability that a sentence carries a target word.
    pub target_rate: f64,
    /// Zipf exponent for filler words inside a cluster.
    pub zipf_exponent: f64,
    /// Zipf exponent over targets; 0 gives every target the same expected frequency.
    pub target_skew: f64,
    /// Probability that a filler token ignores the sentence topic and is
    /// drawn from the whole filler vocabulary instead.
    pub background_rate: f64,
}

impl Default for SyntheticConfig {
    /// Roughly 50k tokens per corpus with 2 changed and 8 stable targets.
    fn default() -> Self {
        Self {
            vocab_size: 400,
            num_clusters: 4,
            sentences_per_corpus: 5000,
            sentence_length: 10,
            num_changed: 2,
            num_stable: 8,
            target_rate: 0.5,
            zipf_exponent: 1.0,
            target_skew: 0.0,
            background_rate: 0.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(String::from(msg)));
        if self.num_clusters < 2 {
            return bad("need at least two topic clusters");
        }
        if self.vocab_size < self.num_clusters {
            return bad("fewer filler words than clusters");
        }
        if self.num_changed + self.num_stable == 0 {
            return bad("no target words requested");
        }
        if self.num_changed + self.num_stable > self.vocab_size {
            return bad("more targets than vocabulary");
        }
        if self.sentences_per_corpus == 0 || self.sentence_length < 2 {
            return bad("sentences must be non-empty and hold at least two tokens");
        }
        if !(0.0..=1.0).contains(&self.target_rate) || self.target_rate == 0.0 {
            return bad("target_rate must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.background_rate) {
            return bad("background_rate must lie in [0, 1)");
        }
        if !(self.zipf_exponent >= 0.0 && self.target_skew >= 0.0) {
            return bad("exponents must be non-negative");
        }
        Ok(())
    }
}

/// Cluster membership of one target in both periods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetAssignment {
    pub word: String,
    pub clusters: [usize; 2],
}

impl TargetAssignment {
    pub fn changed(&self) -> bool {
        self.clusters[0] != self.clusters[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub first: Corpus,
    pub second: Corpus,
    pub targets: TargetWordList,
    /// 1.0 for changed targets, 0.0 for stable ones.
    pub gold: GoldRanking,
    pub assignments: Vec<TargetAssignment>,
}

/// Name of the `j`-th filler word of cluster `k`.
pub fn filler_word(cluster: usize, j: usize) -> String {
    format!("w{cluster}_{j}")
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    for c in &mut cdf {
        *c /= acc;
    }
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Generates two corpora, the target list and the binary gold ranking.
pub fn generate_synthetic_change_pair(cfg: &SyntheticConfig, seed: u64) -> Result<SyntheticPair> {
    cfg.validate()?;
    let k = cfg.num_clusters;
    let clusters: Vec<Vec<String>> = (0..k)
        .map(|c| {
            let size = cfg.vocab_size / k + usize::from(c < cfg.vocab_size % k);
            (0..size).map(|j| filler_word(c, j)).collect()
        })
        .collect();
    let filler_cdf: Vec<Vec<f64>> = clusters
        .iter()
        .map(|words| cumulative((0..words.len()).map(|j| libm::pow(j as f64 + 1.0, -cfg.zipf_exponent))))
        .collect();

    let background: Vec<&String> = clusters.iter().flatten().collect();
    let background_cdf = cumulative((0..background.len()).map(|j| libm::pow(j as f64 + 1.0, -cfg.zipf_exponent)));

    let num_targets = cfg.num_changed + cfg.num_stable;
    let width = format!("{}", num_targets.saturating_sub(1)).len();
    let assignments: Vec<TargetAssignment> = (0..num_targets)
        .map(|i| {
            let home = i % k;
            let second = if i < cfg.num_changed {
                (home + 1 + (i / k) % (k - 1)) % k
            } else {
                home
            };
            TargetAssignment {
                word: format!("t{i:0width$}"),
                clusters: [home, second],
            }
        })
        .collect();
    let target_cdf = cumulative((0..num_targets).map(|i| libm::pow(i as f64 + 1.0, -cfg.target_skew)));

    let mut corpora = Vec::with_capacity(2);
    for period in 0..2 {
        let mut rng = stream_rng(seed, 0x5359_0000 + period as u64);
        let mut sentences = Vec::with_capacity(cfg.sentences_per_corpus);
        for _ in 0..cfg.sentences_per_corpus {
            let mut sentence = Vec::with_capacity(cfg.sentence_length);
            let carrier = if rng.gen::<f64>() < cfg.target_rate {
                Some(draw(&target_cdf, &mut rng))
            } else {
                None
            };
            let cluster = match carrier {
                Some(t) => assignments[t].clusters[period],
                None => rng.gen_range(0..k),
            };
            let slot = carrier.map(|_| rng.gen_range(0..cfg.sentence_length));
            for pos in 0..cfg.sentence_length {
                match (slot, carrier) {
                    (Some(s), Some(t)) if s == pos => sentence.push(assignments[t].word.clone()),
                    _ if cfg.background_rate > 0.0 && rng.gen::<f64>() < cfg.background_rate => {
                        sentence.push(background[draw(&background_cdf, &mut rng)].clone())
                    }
                    _ => sentence.push(clusters[cluster][draw(&filler_cdf[cluster], &mut rng)].clone()),
                }
            }
            sentences.push(sentence);
        }
        corpora.push(Corpus::new(format!("synthetic_t{}", period + 1), sentences));
    }
    let second = corpora.pop().expect("two corpora");
    let first = corpora.pop().expect("two corpora");

    let targets = TargetWordList::new(assignments.iter().map(|a| a.word.clone()).collect())?;
    let gold = GoldRanking::new(
        assignments
            .iter()
            .map(|a| (a.word.clone(), if a.changed() { 1.0 } else { 0.0 }))
            .collect(),
    )?;
    Ok(SyntheticPair {
        first,
        second,
        targets,
        gold,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            vocab_size: 60,
            num_clusters: 2,
            sentences_per_corpus: 400,
            sentence_length: 8,
            num_changed: 1,
            num_stable: 3,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn gold_by_construction() {
        let pair = generate_synthetic_change_pair(&small(), 1).unwrap();
        let scores: Vec<f64> = pair.gold.items().iter().map(|(_, s)| *s).collect();
        assert_eq!(scores, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(pair.targets.len(), 4);
    }

    #[test]
    fn deterministic() {
        let a = generate_synthetic_change_pair(&small(), 9).unwrap();
        let b = generate_synthetic_change_pair(&small(), 9).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_change_pair(&small(), 10).unwrap();
        assert_ne!(a.first, c.first);
    }

    #[test]
    fn inconsistent_config() {
        let cfg = SyntheticConfig {
            vocab_size: 3,
            num_clusters: 2,
            num_changed: 2,
            num_stable: 2,
            ..SyntheticConfig::default()
        };
        assert!(matches!(
            generate_synthetic_change_pair(&cfg, 0),
            Err(Error::InvalidConfig(_))
        ));
        let cfg = SyntheticConfig {
            num_clusters: 1,
            ..SyntheticConfig::default()
        };
        assert!(generate_synthetic_change_pair(&cfg, 0).is_err());
    }

    fn context_histogram(corpus: &Corpus, target: &str) -> BTreeMap<String, u64> {
        let mut h = BTreeMap::new();
        for s in corpus.sentences().iter().filter(|s| s.iter().any(|t| t == target)) {
            for t in s.iter().filter(|t| t.as_str() != target) {
                *h.entry(t.clone()).or_insert(0) += 1;
            }
        }
        h
    }

    fn overlap(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> f64 {
        let total_a: u64 = a.values().sum();
        let total_b: u64 = b.values().sum();
        a.iter()
            .map(|(t, &n)| {
                let m = b.get(t).copied().unwrap_or(0);
                (n as f64 / total_a as f64).min(m as f64 / total_b as f64)
            })
            .sum()
    }

    #[test]
    fn changed_contexts_do_not_overlap() {
        let pair = generate_synthetic_change_pair(&small(), 5).unwrap();
        for a in &pair.assignments {
            let h1 = context_histogram(&pair.first, &a.word);
            let h2 = context_histogram(&pair.second, &a.word);
            let o = overlap(&h1, &h2);
            if a.changed() {
                assert!(o < 0.01, "{}: overlap {o}", a.word);
            } else {
                assert!(o > 0.5, "{}: overlap {o}", a.word);
            }
        }
    }

    #[test]
    fn default_size_is_about_fifty_thousand_tokens() {
        let pair = generate_synthetic_change_pair(&SyntheticConfig::default(), 3).unwrap();
        assert_eq!(pair.first.token_count(), 50_000);
        assert_eq!(pair.second.token_count(), 50_000);
    }
}
