//! Skip-gram with negative sampling.
//!
//! Training runs over sentences of vocabulary indices. Each centre word is
//! paired with every context inside a dynamic window (drawn uniformly from
//! `1..=window`, never crossing a sentence boundary); for every pair the
//! centre's word vector is pushed towards the context's context vector and
//! away from `negative` samples of the smoothed unigram distribution.
//!
//! The inner loop is written against [`WeightCells`] so that the same code
//! drives the deterministic single-threaded mode (`[Cell<f64>]`) and the
//! lock-free multi-worker mode (`[AtomicU64]`).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;
use core::ops::Range;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::stream_rng;
use crate::vocab::Vocabulary;

/// Unigram smoothing exponent for negative sampling.
pub const UNIGRAM_POWER: f64 = 0.75;
/// Frequency threshold used when sub-sampling is switched on.
pub const SUBSAMPLE_THRESHOLD: f64 = 1e-3;
/// Learning rate never decays below `initial_lr * MIN_LR_FRACTION`.
pub const MIN_LR_FRACTION: f64 = 1e-4;

const STREAM_INIT: u64 = 0x494e_4954;
const STREAM_EPOCH: u64 = 0x4550_0000_0000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negative: usize,
    pub initial_lr: f64,
    pub subsampling: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            epochs: 5,
            negative: 5,
            initial_lr: 0.025,
            subsampling: false,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(String::from(msg)));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.negative == 0 {
            return bad("negative must be positive");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be a positive number");
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum InitSource<'a> {
    Random,
    Pretrained(&'a EmbeddingModel),
}

/// How the weights are initialized before the first epoch.
#[derive(Debug, Clone)]
pub struct InitSpec<'a> {
    pub source: InitSource<'a>,
    /// Scale pre-trained word vectors to unit length before training.
    pub length_normalize: bool,
    /// Also scale pre-trained context vectors to unit length.
    pub normalize_context: bool,
    /// `(token, source_token)`: initialize `token` from `source_token`'s
    /// pre-trained rows when `token` itself is not in the source model.
    pub aliases: Vec<(String, String)>,
}

impl<'a> InitSpec<'a> {
    pub fn random() -> Self {
        Self {
            source: InitSource::Random,
            length_normalize: false,
            normalize_context: false,
            aliases: Vec::new(),
        }
    }

    pub fn pretrained(model: &'a EmbeddingModel, length_normalize: bool) -> Self {
        Self {
            source: InitSource::Pretrained(model),
            length_normalize,
            normalize_context: false,
            aliases: Vec::new(),
        }
    }
}

/// Hyper-parameters and mode a model was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub config: TrainConfig,
    pub deterministic: bool,
    pub workers: usize,
}

/// Word and context matrices over a vocabulary, rows aligned to vocabulary indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vocabulary,
    word: Matrix,
    context: Matrix,
    meta: TrainingMeta,
}

impl EmbeddingModel {
    pub fn new(vocab: Vocabulary, word: Matrix, context: Matrix, meta: TrainingMeta) -> Result<Self> {
        if word.shape() != context.shape() || word.nrows() != vocab.len() {
            return Err(crate::linalg::shape_error(&word, &context));
        }
        if word.ncols() != meta.config.dim {
            return Err(Error::DimensionMismatch {
                expected: meta.config.dim,
                found: word.ncols(),
            });
        }
        Ok(Self {
            vocab,
            word,
            context,
            meta,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn word_matrix(&self) -> &Matrix {
        &self.word
    }

    pub fn context_matrix(&self) -> &Matrix {
        &self.context
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.word.ncols()
    }

    /// Word vector of `token`, if in vocabulary.
    pub fn vector(&self, token: &str) -> Option<Vec<f64>> {
        self.vocab
            .index_of(token)
            .map(|i| self.word.row(i).iter().copied().collect())
    }

    pub fn into_parts(self) -> (Vocabulary, Matrix, Matrix, TrainingMeta) {
        (self.vocab, self.word, self.context, self.meta)
    }
}

/// Arithmetic mean of the L2 norms of the rows of `m`; 0 for an empty matrix.
pub fn mean_row_length(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    (0..m.nrows()).map(|i| crate::linalg::row_norm(m, i)).sum::<f64>() / m.nrows() as f64
}

/// Mean L2 norm of a model's word vectors.
pub fn mean_vector_length(model: &EmbeddingModel) -> f64 {
    mean_row_length(&model.word)
}

/// Draws indices from the unigram distribution raised to [`UNIGRAM_POWER`].
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cdf: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(frequencies: &[u64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = frequencies
            .iter()
            .map(|&f| {
                acc += libm::pow(f as f64, UNIGRAM_POWER);
                acc
            })
            .collect();
        for c in &mut cdf {
            *c /= acc;
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self { cdf }
    }

    /// Probability of drawing index `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.cdf[i] - if i == 0 { 0.0 } else { self.cdf[i - 1] }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    pub fn sample_negatives<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Vec<usize> {
        (0..k).map(|_| self.sample(rng)).collect()
    }
}

/// Shared scalar storage the training loop reads and writes.
pub trait WeightCells {
    fn get(&self, i: usize) -> f64;
    fn set(&self, i: usize, v: f64);
}

impl WeightCells for [Cell<f64>] {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        self[i].get()
    }

    #[inline]
    fn set(&self, i: usize, v: f64) {
        self[i].set(v)
    }
}

/// Racy (Hogwild-style) storage: each scalar is an `f64` bit pattern.
impl WeightCells for [AtomicU64] {
    #[inline]
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self[i].load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, i: usize, v: f64) {
        self[i].store(v.to_bits(), Ordering::Relaxed)
    }
}

pub fn to_atomic(values: &[f64]) -> Vec<AtomicU64> {
    values.iter().map(|v| AtomicU64::new(v.to_bits())).collect()
}

pub fn from_atomic(values: &[AtomicU64]) -> Vec<f64> {
    values
        .iter()
        .map(|v| f64::from_bits(v.load(Ordering::Relaxed)))
        .collect()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Prepared training state: indexed sentences, sampler and initial weights.
pub struct SgnsTrainer {
    cfg: TrainConfig,
    vocab: Vocabulary,
    sentences: Vec<Vec<u32>>,
    sampler: NegativeSampler,
    keep_prob: Option<Vec<f64>>,
    word_init: Vec<f64>,
    ctx_init: Vec<f64>,
    corpus_tokens: u64,
}

impl SgnsTrainer {
    pub fn new(corpus: &Corpus, cfg: &TrainConfig, init: &InitSpec<'_>) -> Result<Self> {
        cfg.validate()?;
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let vocab = corpus.vocab().clone();
        let d = cfg.dim;
        let sentences = corpus
            .sentences()
            .iter()
            .map(|s| {
                s.iter()
                    .map(|t| vocab.index_of(t).expect("corpus tokens are in its vocabulary") as u32)
                    .collect()
            })
            .collect();

        let mut rng = stream_rng(cfg.seed, STREAM_INIT);
        let scale = 1.0 / d as f64;
        let mut word_init: Vec<f64> = (0..vocab.len() * d).map(|_| (rng.gen::<f64>() - 0.5) * scale).collect();
        let mut ctx_init = vec![0.0; vocab.len() * d];

        if let InitSource::Pretrained(source) = init.source {
            if source.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: source.dim(),
                });
            }
            for (i, token) in vocab.tokens().iter().enumerate() {
                let src = source.vocab.index_of(token).or_else(|| {
                    init.aliases
                        .iter()
                        .find(|(t, _)| t == token)
                        .and_then(|(_, s)| source.vocab.index_of(s))
                });
                let Some(j) = src else { continue };
                copy_row(
                    &source.word,
                    j,
                    &mut word_init[i * d..(i + 1) * d],
                    init.length_normalize,
                );
                copy_row(
                    &source.context,
                    j,
                    &mut ctx_init[i * d..(i + 1) * d],
                    init.normalize_context,
                );
            }
        }

        let keep_prob = cfg.subsampling.then(|| {
            let total = vocab.total() as f64;
            vocab
                .frequencies()
                .iter()
                .map(|&f| {
                    let f = f as f64;
                    let t = SUBSAMPLE_THRESHOLD * total;
                    ((libm::sqrt(f / t) + 1.0) * t / f).min(1.0)
                })
                .collect()
        });

        Ok(Self {
            cfg: cfg.clone(),
            sampler: NegativeSampler::new(vocab.frequencies()),
            vocab,
            sentences,
            keep_prob,
            word_init,
            ctx_init,
            corpus_tokens: corpus.token_count(),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn sampler(&self) -> &NegativeSampler {
        &self.sampler
    }

    /// Row-major `(word, context)` initial weights.
    pub fn initial_weights(&self) -> (Vec<f64>, Vec<f64>) {
        (self.word_init.clone(), self.ctx_init.clone())
    }

    /// Random stream for one epoch of one worker.
    pub fn epoch_rng(&self, epoch: usize, worker: usize) -> ChaCha8Rng {
        stream_rng(self.cfg.seed, STREAM_EPOCH + ((epoch as u64) << 16) + worker as u64)
    }

    fn learning_rate(&self, processed: u64) -> f64 {
        let planned = (self.cfg.epochs as u64 * self.corpus_tokens + 1) as f64;
        let frac = (1.0 - processed as f64 / planned).max(MIN_LR_FRACTION);
        self.cfg.initial_lr * frac
    }

    /// One pass over `range` of the sentences.
    ///
    /// `progress` counts processed tokens across all workers and drives the
    /// linear learning-rate decay.
    pub fn train_range<W: WeightCells + ?Sized>(
        &self,
        word: &W,
        ctx: &W,
        range: Range<usize>,
        rng: &mut ChaCha8Rng,
        progress: &AtomicU64,
    ) {
        let d = self.cfg.dim;
        let mut grad = vec![0.0; d];
        let mut kept: Vec<u32> = Vec::new();
        for sentence in &self.sentences[range] {
            let lr = self.learning_rate(progress.fetch_add(sentence.len() as u64, Ordering::Relaxed));
            let sentence: &[u32] = match &self.keep_prob {
                Some(keep) => {
                    kept.clear();
                    kept.extend(
                        sentence
                            .iter()
                            .copied()
                            .filter(|&w| keep[w as usize] >= rng.gen::<f64>()),
                    );
                    &kept
                }
                None => sentence,
            };
            for (pos, &center) in sentence.iter().enumerate() {
                let reach = self.cfg.window - rng.gen_range(0..self.cfg.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(sentence.len() - 1);
                let w_off = center as usize * d;
                for (cpos, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for j in 0..=self.cfg.negative {
                        let (target, label) = if j == 0 {
                            (context as usize, 1.0)
                        } else {
                            let t = self.sampler.sample(rng);
                            if t == context as usize {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let c_off = target * d;
                        let mut dot = 0.0;
                        for x in 0..d {
                            dot += word.get(w_off + x) * ctx.get(c_off + x);
                        }
                        let g = (label - sigmoid(dot)) * lr;
                        for (x, acc) in grad.iter_mut().enumerate() {
                            let c = ctx.get(c_off + x);
                            *acc += g * c;
                            ctx.set(c_off + x, c + g * word.get(w_off + x));
                        }
                    }
                    for (x, g) in grad.iter().enumerate() {
                        word.set(w_off + x, word.get(w_off + x) + g);
                    }
                }
            }
        }
    }

    /// Deterministic single-threaded training for `epochs` full passes.
    pub fn train(self) -> EmbeddingModel {
        let (mut word, mut ctx) = self.initial_weights();
        {
            let word_cells = Cell::from_mut(word.as_mut_slice()).as_slice_of_cells();
            let ctx_cells = Cell::from_mut(ctx.as_mut_slice()).as_slice_of_cells();
            let progress = AtomicU64::new(0);
            for epoch in 0..self.cfg.epochs {
                let mut rng = self.epoch_rng(epoch, 0);
                self.train_range(word_cells, ctx_cells, 0..self.sentences.len(), &mut rng, &progress);
            }
        }
        self.into_model(word, ctx, true, 1)
    }

    /// Wraps trained row-major weights into a model.
    pub fn into_model(self, word: Vec<f64>, ctx: Vec<f64>, deterministic: bool, workers: usize) -> EmbeddingModel {
        let n = self.vocab.len();
        let d = self.cfg.dim;
        EmbeddingModel {
            word: Matrix::from_row_slice(n, d, &word),
            context: Matrix::from_row_slice(n, d, &ctx),
            vocab: self.vocab,
            meta: TrainingMeta {
                config: self.cfg,
                deterministic,
                workers,
            },
        }
    }
}

fn copy_row(src: &Matrix, row: usize, dst: &mut [f64], normalize: bool) {
    for (x, v) in dst.iter_mut().enumerate() {
        *v = src[(row, x)];
    }
    if normalize {
        let norm = libm::sqrt(dst.iter().map(|v| v * v).sum());
        if norm > 0.0 {
            dst.iter_mut().for_each(|v| *v /= norm);
        }
    }
}

/// Trains SGNS on `corpus` in deterministic single-threaded mode.
pub fn train(corpus: &Corpus, cfg: &TrainConfig, init: &InitSpec<'_>) -> Result<EmbeddingModel> {
    Ok(SgnsTrainer::new(corpus, cfg, init)?.train())
}

/// Mean negative log-likelihood of the SGNS objective over fixed
/// `(centre, context)` pairs and their negatives.
pub fn sgns_loss(model: &EmbeddingModel, pairs: &[(usize, usize)], negatives: &[Vec<usize>]) -> f64 {
    let dot = |i: usize, j: usize| model.word.row(i).dot(&model.context.row(j));
    let log_sigmoid = |x: f64| -libm::log1p(libm::exp(-x));
    let total: f64 = pairs
        .iter()
        .zip(negatives)
        .map(|(&(w, c), negs)| -log_sigmoid(dot(w, c)) - negs.iter().map(|&n| log_sigmoid(-dot(w, n))).sum::<f64>())
        .sum();
    total / pairs.len().max(1) as f64
}
