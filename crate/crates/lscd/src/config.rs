//! Experiment configuration in flat `key = value` form.
//!
//! ```text
//! corpus1 = data/ccoha1.txt
//! corpus2 = data/ccoha2.txt
//! targets = data/targets.txt
//! gold = data/graded.tsv
//! min_freq = 4
//! alignment = OP, VI, WI
//! pretrain = none, diachron
//! dims = 25, 50, 100, 200, 300, 500
//! windows = 5, 10
//! epochs = 5, 10, 20, 30
//! postprocess = sot, mcpcr
//! stacking = STA
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lscd_core::align::{AlignmentMethod, PretrainSource};
use lscd_core::postprocess::{pcr_sweep_grid, sot_sweep_grid, McPcrParams, SotParams, StackingMode, Transform};
use lscd_core::sgns::TrainConfig;

use crate::error::{Error, Result};
use crate::kv::KvDoc;

/// Hyper-parameter grid of the reference experiments.
pub const REFERENCE_DIMS: [usize; 6] = [25, 50, 100, 200, 300, 500];
pub const REFERENCE_WINDOWS: [usize; 2] = [5, 10];
pub const REFERENCE_EPOCHS: [usize; 4] = [5, 10, 20, 30];
/// Dimensionality below which the star filter drops a result from means.
pub const STAR_MIN_DIM: usize = 100;

/// Which aligned matrices receive the post-processing grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpMode {
    /// Every grid point.
    Full,
    /// Only the best baseline of each (alignment, pre-training) group.
    Paper,
}

impl FromStr for PpMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "paper" => Ok(Self::Paper),
            _ => Err(Error::Config(format!("unknown pp_mode `{s}` (full or paper)"))),
        }
    }
}

impl fmt::Display for PpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Paper => "paper",
        })
    }
}

/// Which matrices a sweep writes to the output directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Persist {
    None,
    Baseline,
    All,
}

impl FromStr for Persist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "baseline" => Ok(Self::Baseline),
            "all" => Ok(Self::All),
            _ => Err(Error::Config(format!(
                "unknown persist mode `{s}` (none, baseline or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub corpus1: PathBuf,
    pub corpus2: PathBuf,
    pub targets: PathBuf,
    pub gold: PathBuf,
    pub modern_corpus: Option<PathBuf>,
    pub min_freq: u64,
    pub alignments: Vec<AlignmentMethod>,
    pub pretrain: Vec<PretrainSource>,
    pub length_normalize: bool,
    pub dims: Vec<usize>,
    pub windows: Vec<usize>,
    pub epochs: Vec<usize>,
    pub negative: usize,
    pub initial_lr: f64,
    pub subsampling: bool,
    pub transforms: Vec<Transform>,
    pub stacking: Vec<StackingMode>,
    pub pp_mode: PpMode,
    pub seed: u64,
    pub repeats: usize,
    pub workers: usize,
    pub star_filter: bool,
    pub vi_reverse: bool,
    pub same_seed: bool,
    pub persist: Persist,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "corpus1",
    "corpus2",
    "targets",
    "gold",
    "modern_corpus",
    "min_freq",
    "alignment",
    "pretrain",
    "length_normalize",
    "dims",
    "windows",
    "epochs",
    "negative",
    "initial_lr",
    "subsampling",
    "postprocess",
    "sot_alphas",
    "pcr_pcs",
    "stacking",
    "pp_mode",
    "seed",
    "repeats",
    "workers",
    "star_filter",
    "vi_reverse",
    "same_seed",
    "persist",
    "output",
];

impl ExperimentConfig {
    /// Reference grid with OP, VI and WI, no pre-training, no post-processing.
    pub fn new(corpus1: PathBuf, corpus2: PathBuf, targets: PathBuf, gold: PathBuf) -> Self {
        let train = TrainConfig::default();
        Self {
            corpus1,
            corpus2,
            targets,
            gold,
            modern_corpus: None,
            min_freq: 1,
            alignments: vec![AlignmentMethod::Op, AlignmentMethod::Vi, AlignmentMethod::Wi],
            pretrain: vec![PretrainSource::None],
            length_normalize: false,
            dims: REFERENCE_DIMS.to_vec(),
            windows: REFERENCE_WINDOWS.to_vec(),
            epochs: REFERENCE_EPOCHS.to_vec(),
            negative: train.negative,
            initial_lr: train.initial_lr,
            subsampling: train.subsampling,
            transforms: Vec::new(),
            stacking: vec![StackingMode::Sta],
            pp_mode: PpMode::Full,
            seed: train.seed,
            repeats: 1,
            workers: 1,
            star_filter: false,
            vi_reverse: false,
            same_seed: false,
            persist: Persist::All,
            output: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let doc = KvDoc::read(path)?;
        Self::from_kv(&doc, path.parent())
    }

    pub fn from_kv(doc: &KvDoc, base: Option<&Path>) -> Result<Self> {
        if let Some(k) = doc.unknown_key(KEYS) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let resolve = |p: String| match base {
            Some(b) if Path::new(&p).is_relative() => b.join(p),
            _ => PathBuf::from(p),
        };
        let path = |k: &str| -> Result<PathBuf> { Ok(resolve(doc.required(k)?)) };
        let mut cfg = Self::new(path("corpus1")?, path("corpus2")?, path("targets")?, path("gold")?);
        cfg.modern_corpus = doc.parsed::<String>("modern_corpus")?.map(resolve);
        cfg.output = doc.parsed::<String>("output")?.map(resolve);
        cfg.min_freq = doc.parsed_or("min_freq", cfg.min_freq)?;
        let core_list = |k: &str| -> Result<Option<Vec<String>>> { doc.list(k) };
        if let Some(v) = core_list("alignment")? {
            cfg.alignments = v.iter().map(|s| s.parse()).collect::<lscd_core::Result<_>>()?;
        }
        if let Some(v) = core_list("pretrain")? {
            cfg.pretrain = v.iter().map(|s| s.parse()).collect::<lscd_core::Result<_>>()?;
        }
        if let Some(v) = core_list("stacking")? {
            cfg.stacking = v.iter().map(|s| s.parse()).collect::<lscd_core::Result<_>>()?;
        }
        cfg.length_normalize = doc.flag("length_normalize", cfg.length_normalize)?;
        cfg.dims = doc.list("dims")?.unwrap_or(cfg.dims);
        cfg.windows = doc.list("windows")?.unwrap_or(cfg.windows);
        cfg.epochs = doc.list("epochs")?.unwrap_or(cfg.epochs);
        cfg.negative = doc.parsed_or("negative", cfg.negative)?;
        cfg.initial_lr = doc.parsed_or("initial_lr", cfg.initial_lr)?;
        cfg.subsampling = doc.flag("subsampling", cfg.subsampling)?;

        let alphas: Vec<f64> = doc.list("sot_alphas")?.unwrap_or_else(sot_sweep_grid);
        let pcs: Vec<usize> = doc.list("pcr_pcs")?.unwrap_or_else(pcr_sweep_grid);
        for family in core_list("postprocess")?.unwrap_or_default() {
            match family.to_ascii_lowercase().as_str() {
                "none" => {}
                "sot" => {
                    for &a in &alphas {
                        cfg.transforms.push(Transform::Sot(SotParams::new(a)?));
                    }
                }
                "mcpcr" | "mc+pcr" | "pcr" => {
                    cfg.transforms
                        .extend(pcs.iter().map(|&num_pcs| Transform::McPcr(McPcrParams { num_pcs })));
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown post-processing `{other}` (sot or mcpcr)"
                    )))
                }
            }
        }
        cfg.pp_mode = doc.parsed_or("pp_mode", cfg.pp_mode)?;
        cfg.seed = doc.parsed_or("seed", cfg.seed)?;
        cfg.repeats = doc.parsed_or("repeats", cfg.repeats)?;
        cfg.workers = doc.parsed_or("workers", cfg.workers)?;
        cfg.star_filter = doc.flag("star_filter", cfg.star_filter)?;
        cfg.vi_reverse = doc.flag("vi_reverse", cfg.vi_reverse)?;
        cfg.same_seed = doc.flag("same_seed", cfg.same_seed)?;
        cfg.persist = doc.parsed_or("persist", cfg.persist)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str| Err(Error::Config(format!("`{name}` must not be empty")));
        if self.alignments.is_empty() {
            return empty("alignment");
        }
        if self.pretrain.is_empty() {
            return empty("pretrain");
        }
        if self.dims.is_empty() {
            return empty("dims");
        }
        if self.windows.is_empty() {
            return empty("windows");
        }
        if self.epochs.is_empty() {
            return empty("epochs");
        }
        if self.stacking.is_empty() {
            return empty("stacking");
        }
        if self.repeats == 0 {
            return Err(Error::Config("`repeats` must be at least 1".into()));
        }
        if self.alignments.contains(&AlignmentMethod::No) && self.pretrain.iter().all(|p| *p == PretrainSource::None) {
            return Err(Error::Config(
                "NO alignment requires a pre-training source (diachron or modern)".into(),
            ));
        }
        if self.pretrain.contains(&PretrainSource::Modern) && self.modern_corpus.is_none() {
            return Err(Error::Config("pretrain = modern needs `modern_corpus`".into()));
        }
        for &d in &self.dims {
            self.train_config(d, self.windows[0], self.epochs[0], self.seed)
                .validate()?;
        }
        Ok(())
    }

    pub fn train_config(&self, dim: usize, window: usize, epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            dim,
            window,
            epochs,
            negative: self.negative,
            initial_lr: self.initial_lr,
            subsampling: self.subsampling,
            seed,
        }
    }

    /// (alignment, pre-training) cells; NO without pre-training is skipped.
    pub fn cells(&self) -> Vec<(AlignmentMethod, PretrainSource)> {
        let mut out = Vec::new();
        for &a in &self.alignments {
            for &p in &self.pretrain {
                if !(a == AlignmentMethod::No && p == PretrainSource::None) {
                    out.push((a, p));
                }
            }
        }
        out
    }

    /// Training configurations per cell.
    pub fn configs_per_cell(&self) -> usize {
        self.dims.len() * self.windows.len() * self.epochs.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(extra: &str) -> KvDoc {
        KvDoc::parse(
            &format!("corpus1 = c1.txt\ncorpus2 = c2.txt\ntargets = t.txt\ngold = g.tsv\n{extra}"),
            None,
        )
        .unwrap()
    }

    #[test]
    fn defaults_are_the_reference_grid() {
        let cfg = ExperimentConfig::from_kv(&doc(""), Some(Path::new("/exp"))).unwrap();
        assert_eq!(cfg.configs_per_cell(), 48);
        assert_eq!(cfg.corpus1, Path::new("/exp/c1.txt"));
        assert_eq!(cfg.cells().len(), 3);
        assert!(cfg.transforms.is_empty());
        assert_eq!((cfg.negative, cfg.initial_lr, cfg.subsampling), (5, 0.025, false));
    }

    #[test]
    fn postprocessing_grids() {
        let cfg = ExperimentConfig::from_kv(&doc("postprocess = sot, mcpcr\nstacking = STA, SEP"), None).unwrap();
        assert_eq!(cfg.transforms.len(), 21 + 26);
        assert_eq!(cfg.stacking, [StackingMode::Sta, StackingMode::Sep]);
        let cfg = ExperimentConfig::from_kv(&doc("postprocess = sot\nsot_alphas = -0.5, 0.5"), None).unwrap();
        assert_eq!(cfg.transforms.len(), 2);
    }

    #[test]
    fn no_requires_pretraining() {
        assert!(ExperimentConfig::from_kv(&doc("alignment = NO"), None).is_err());
        let cfg = ExperimentConfig::from_kv(&doc("alignment = OP, NO\npretrain = none, diachron"), None).unwrap();
        assert_eq!(
            cfg.cells(),
            [
                (AlignmentMethod::Op, PretrainSource::None),
                (AlignmentMethod::Op, PretrainSource::Diachron),
                (AlignmentMethod::No, PretrainSource::Diachron)
            ]
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_kv(&doc("dims ="), None).is_err());
        assert!(ExperimentConfig::from_kv(&doc("colour = red"), None).is_err());
        assert!(ExperimentConfig::from_kv(&doc("pretrain = modern"), None).is_err());
        assert!(ExperimentConfig::from_kv(&doc("alignment = XX"), None).is_err());
        assert!(ExperimentConfig::from_kv(&doc("sot_alphas = 2\npostprocess = sot"), None).is_err());
        assert!(ExperimentConfig::from_kv(&KvDoc::parse("corpus1 = a", None).unwrap(), None).is_err());
    }
}
