//! One alignment run from loaded inputs, described by an [`AlignSpec`].

use lscd_core::align::{
    align_no, align_op_corpora, align_vi, align_wi, pretrain_workflow, AlignedSpaces, AlignmentMethod, PretrainCorpora,
    PretrainSource, Pretrained, ViOptions,
};
use lscd_core::corpus::{Corpus, TargetWordList};
use lscd_core::derive_seed;
use lscd_core::evaluation::GoldRanking;
use lscd_core::postprocess::{postprocess_spaces, StackingMode, Transform};
use lscd_core::sgns::{EmbeddingModel, TrainConfig};

use crate::error::{Error, Result};

/// Salt for the pre-training seed derived from a grid point's seed.
pub const PRETRAIN_SALT: u64 = 0x5052;
/// Salt for the Word-Injection shuffle seed.
pub const SHUFFLE_SALT: u64 = 0x5348;

/// Everything an alignment run reads.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub first: Corpus,
    pub second: Corpus,
    /// Required for WI and for scoring.
    pub targets: Option<TargetWordList>,
    pub gold: Option<GoldRanking>,
    /// External corpus for MODERN pre-training.
    pub modern: Option<Corpus>,
}

/// How to produce one pair of aligned spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignSpec {
    pub method: AlignmentMethod,
    pub pretrain: PretrainSource,
    pub train: TrainConfig,
    /// Length-normalize pre-trained word vectors before they initialize training.
    pub length_normalize: bool,
    pub vi_reverse: bool,
    /// NO: train both periods with the same seed.
    pub same_seed: bool,
}

impl AlignSpec {
    pub fn new(method: AlignmentMethod, pretrain: PretrainSource, train: TrainConfig) -> Self {
        Self {
            method,
            pretrain,
            train,
            length_normalize: false,
            vi_reverse: false,
            same_seed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == AlignmentMethod::No && self.pretrain == PretrainSource::None {
            return Err(Error::Config("NO alignment requires a pre-training source".into()));
        }
        Ok(self.train.validate()?)
    }

    pub fn pretrain_config(&self) -> TrainConfig {
        self.train.with_seed(derive_seed(self.train.seed, PRETRAIN_SALT))
    }

    pub fn shuffle_seed(&self) -> u64 {
        derive_seed(self.train.seed, SHUFFLE_SALT)
    }
}

/// Trains the pre-training model for `source`, if any.
pub fn pretrain(inputs: &Inputs, source: PretrainSource, cfg: &TrainConfig) -> Result<Option<EmbeddingModel>> {
    let corpora = match source {
        PretrainSource::None => return Ok(None),
        PretrainSource::Diachron => PretrainCorpora::Diachron(&inputs.first, &inputs.second),
        PretrainSource::Modern => PretrainCorpora::Modern(
            inputs
                .modern
                .as_ref()
                .ok_or_else(|| Error::Config("MODERN pre-training needs a modern corpus".into()))?,
        ),
    };
    Ok(Some(pretrain_workflow(corpora, cfg)?))
}

/// Pre-trains if requested, then aligns.
pub fn align(inputs: &Inputs, spec: &AlignSpec) -> Result<AlignedSpaces> {
    spec.validate()?;
    let model = pretrain(inputs, spec.pretrain, &spec.pretrain_config())?;
    let pretrained = model.as_ref().map(|model| Pretrained {
        model,
        source: spec.pretrain,
        length_normalize: spec.length_normalize,
    });
    let (first, second, cfg) = (&inputs.first, &inputs.second, &spec.train);
    let spaces = match spec.method {
        AlignmentMethod::Op => align_op_corpora(first, second, cfg, pretrained.as_ref())?,
        AlignmentMethod::Vi => align_vi(
            first,
            second,
            cfg,
            &ViOptions {
                reverse: spec.vi_reverse,
                pretrained,
            },
        )?,
        AlignmentMethod::Wi => {
            let targets = inputs
                .targets
                .as_ref()
                .ok_or_else(|| Error::Config("WI alignment needs a target list".into()))?;
            align_wi(first, second, targets, cfg, spec.shuffle_seed(), pretrained.as_ref())?
        }
        AlignmentMethod::No => align_no(
            first,
            second,
            cfg,
            pretrained.as_ref().expect("validated"),
            spec.same_seed,
        )?,
    };
    Ok(spaces)
}

/// Applies a chain of post-processing steps in order.
pub fn apply_chain(spaces: AlignedSpaces, chain: &[(Transform, StackingMode)]) -> Result<AlignedSpaces> {
    chain
        .iter()
        .try_fold(spaces, |s, (t, mode)| Ok(postprocess_spaces(&s, t, *mode)?))
}
