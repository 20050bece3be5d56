//! Rank-correlation evaluation for word similarity and graded change.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measures::{cosine_similarity, ChangeRanking};
use crate::sgns::EmbeddingModel;

/// Human judgements keyed by item. Items are words for change detection and
/// word pairs for similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldRanking<I = String> {
    items: Vec<(I, f64)>,
}

/// Gold scores for word pairs.
pub type PairGold = GoldRanking<(String, String)>;

impl<I: Ord + Clone + core::fmt::Debug> GoldRanking<I> {
    pub fn new(items: Vec<(I, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let mut seen = BTreeMap::new();
        for (item, score) in &items {
            if !score.is_finite() {
                return Err(Error::NonFinite);
            }
            if seen.insert(item.clone(), ()).is_some() {
                return Err(Error::Duplicate(alloc::format!("{item:?}")));
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(I, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, item: &I) -> Option<f64> {
        self.items.iter().find(|(i, _)| i == item).map(|(_, s)| *s)
    }
}

/// Correlation plus how many gold items could be used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOutcome {
    pub rho: f64,
    /// Items that entered the correlation.
    pub coverage: usize,
    /// Items dropped because a prediction was missing.
    pub dropped: usize,
}

/// Fractional ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Tie-corrected Spearman correlation (Pearson over average ranks).
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch(pred.len(), gold.len()));
    }
    if pred.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pred.len(),
        });
    }
    pearson(&average_ranks(pred), &average_ranks(gold))
}

/// Spearman between cosine similarities and gold pair judgements.
/// Pairs with an out-of-vocabulary word are dropped and counted.
pub fn eval_similarity(model: &EmbeddingModel, gold: &PairGold) -> Result<EvalOutcome> {
    let vocab = model.vocab();
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for ((w1, w2), score) in gold.items() {
        let (Some(i), Some(j)) = (vocab.index_of(w1), vocab.index_of(w2)) else {
            continue;
        };
        let u: Vec<f64> = model.word_matrix().row(i).iter().copied().collect();
        let v: Vec<f64> = model.word_matrix().row(j).iter().copied().collect();
        if let Ok(sim) = cosine_similarity(&u, &v) {
            pred.push(sim);
            truth.push(*score);
        }
    }
    if pred.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pred.len(),
        });
    }
    Ok(EvalOutcome {
        rho: spearman(&pred, &truth)?,
        coverage: pred.len(),
        dropped: gold.len() - pred.len(),
    })
}

/// Spearman between change scores and gold over their shared, scored targets.
pub fn eval_lscd(ranking: &ChangeRanking, gold: &GoldRanking) -> Result<EvalOutcome> {
    let scores: BTreeMap<&str, f64> = ranking.scored().collect();
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for (word, g) in gold.items() {
        if let Some(&s) = scores.get(word.as_str()) {
            pred.push(s);
            truth.push(*g);
        }
    }
    if pred.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pred.len(),
        });
    }
    Ok(EvalOutcome {
        rho: spearman(&pred, &truth)?,
        coverage: pred.len(),
        dropped: gold.len() - pred.len(),
    })
}
