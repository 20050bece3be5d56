//! Persistence of aligned spaces together with the provenance needed to re-derive them.
//!
//! A spaces directory holds
//!
//! * `a.vec`, `b.vec`: the two word matrices (word2vec text format)
//! * `a.vocab`, `b.vocab`: `token<TAB>frequency` per row
//! * `joint.vec`, `joint.vocab`: the single underlying space, WI only
//! * `provenance.kv`: method, pre-training source, training config, seeds,
//!   input paths and post-processing chain

use std::fs;
use std::path::{Path, PathBuf};

use lscd_core::align::{AlignedSpaces, AlignmentMethod, JointSpace, PretrainSource};
use lscd_core::corpus::InjectedTarget;
use lscd_core::postprocess::{StackingMode, Transform};
use lscd_core::sgns::TrainConfig;
use lscd_core::vocab::Vocabulary;
use lscd_core::Matrix;

use crate::error::{Error, Result};
use crate::formats::{load_corpus, read_gold, read_lines, read_targets, write_text};
use crate::kv::KvDoc;
use crate::model_io::{read_word2vec, write_word2vec};
use crate::pipeline::{align, apply_chain, AlignSpec, Inputs};

pub const PROVENANCE_FILE: &str = "provenance.kv";

/// Where a pair of aligned spaces came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub spec: AlignSpec,
    pub corpus1: Option<PathBuf>,
    pub corpus2: Option<PathBuf>,
    pub targets: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub modern_corpus: Option<PathBuf>,
    pub min_freq: u64,
    pub postprocess: Vec<(Transform, StackingMode)>,
}

impl Provenance {
    pub fn new(spec: AlignSpec) -> Self {
        Self {
            spec,
            corpus1: None,
            corpus2: None,
            targets: None,
            gold: None,
            modern_corpus: None,
            min_freq: 1,
            postprocess: Vec::new(),
        }
    }

    pub fn with_step(&self, transform: Transform, mode: StackingMode) -> Self {
        let mut out = self.clone();
        out.postprocess.push((transform, mode));
        out
    }

    /// Directory-name suffix encoding the post-processing chain, e.g. `sot_a0.5+STA`.
    pub fn suffix(&self) -> String {
        self.postprocess
            .iter()
            .map(|(t, m)| format!("{}+{m}", t.label()))
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn to_kv(&self) -> KvDoc {
        let s = &self.spec;
        let c = &s.train;
        let mut doc = KvDoc::new();
        doc.push("method", s.method)
            .push("pretrain", s.pretrain)
            .push("dim", c.dim)
            .push("window", c.window)
            .push("epochs", c.epochs)
            .push("negative", c.negative)
            .push("initial_lr", c.initial_lr)
            .push("subsampling", c.subsampling)
            .push("seed", c.seed)
            .push("pretrain_seed", s.pretrain_config().seed)
            .push("shuffle_seed", s.shuffle_seed())
            .push("length_normalize", s.length_normalize)
            .push("vi_reverse", s.vi_reverse)
            .push("same_seed", s.same_seed)
            .push("min_freq", self.min_freq);
        for (key, path) in [
            ("corpus1", &self.corpus1),
            ("corpus2", &self.corpus2),
            ("targets", &self.targets),
            ("gold", &self.gold),
            ("modern_corpus", &self.modern_corpus),
        ] {
            if let Some(p) = path {
                doc.push(key, p.display());
            }
        }
        for (t, m) in &self.postprocess {
            doc.push("postprocess", format!("{}+{m}", t.label()));
        }
        doc
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        let core = |e: lscd_core::Error| Error::Config(e.to_string());
        let method: AlignmentMethod = doc.required::<String>("method")?.parse().map_err(core)?;
        let pretrain: PretrainSource = doc.required::<String>("pretrain")?.parse().map_err(core)?;
        let train = TrainConfig {
            dim: doc.required("dim")?,
            window: doc.required("window")?,
            epochs: doc.required("epochs")?,
            negative: doc.required("negative")?,
            initial_lr: doc.required("initial_lr")?,
            subsampling: doc.flag("subsampling", false)?,
            seed: doc.required("seed")?,
        };
        let spec = AlignSpec {
            method,
            pretrain,
            train,
            length_normalize: doc.flag("length_normalize", false)?,
            vi_reverse: doc.flag("vi_reverse", false)?,
            same_seed: doc.flag("same_seed", false)?,
        };
        let path = |k: &str| doc.get(k).map(PathBuf::from);
        let mut postprocess = Vec::new();
        for step in doc.get_all("postprocess") {
            let (t, m) = step
                .rsplit_once('+')
                .ok_or_else(|| Error::Config(format!("bad post-processing step `{step}`")))?;
            postprocess.push((t.parse().map_err(core)?, m.parse().map_err(core)?));
        }
        Ok(Self {
            spec,
            corpus1: path("corpus1"),
            corpus2: path("corpus2"),
            targets: path("targets"),
            gold: path("gold"),
            modern_corpus: path("modern_corpus"),
            min_freq: doc.parsed_or("min_freq", 1)?,
            postprocess,
        })
    }

    /// Loads the inputs named by this provenance.
    pub fn load_inputs(&self) -> Result<Inputs> {
        let need = |p: &Option<PathBuf>, what: &str| {
            p.clone()
                .ok_or_else(|| Error::Config(format!("provenance does not record the {what} path")))
        };
        Ok(Inputs {
            first: load_corpus(&need(&self.corpus1, "corpus1")?, self.min_freq)?,
            second: load_corpus(&need(&self.corpus2, "corpus2")?, self.min_freq)?,
            targets: self.targets.as_deref().map(read_targets).transpose()?,
            gold: self.gold.as_deref().map(read_gold).transpose()?,
            modern: self
                .modern_corpus
                .as_deref()
                .map(|p| load_corpus(p, self.min_freq))
                .transpose()?,
        })
    }
}

/// Recomputes the spaces described by `prov` from its recorded inputs.
pub fn rederive(prov: &Provenance) -> Result<AlignedSpaces> {
    rederive_from(&prov.load_inputs()?, prov)
}

/// Recomputes the spaces described by `prov` from already loaded inputs.
pub fn rederive_from(inputs: &Inputs, prov: &Provenance) -> Result<AlignedSpaces> {
    apply_chain(align(inputs, &prov.spec)?, &prov.postprocess)
}

fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let text: String = vocab.iter().map(|(t, f)| format!("{t}\t{f}\n")).collect();
    write_text(path, &text)
}

fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let mut entries = Vec::new();
    for (i, line) in read_lines(path)?.iter().enumerate().filter(|(_, l)| !l.is_empty()) {
        let (t, f) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `token<TAB>frequency`"))?;
        let f = f.parse().map_err(|_| Error::parse(path, i + 1, "bad frequency"))?;
        entries.push((t.to_string(), f));
    }
    Ok(Vocabulary::from_entries(entries))
}

fn write_matrix(dir: &Path, stem: &str, vocab: &Vocabulary, m: &Matrix) -> Result<()> {
    write_word2vec(&dir.join(format!("{stem}.vec")), vocab.tokens(), m)?;
    write_vocab(&dir.join(format!("{stem}.vocab")), vocab)
}

fn read_matrix(dir: &Path, stem: &str) -> Result<(Vocabulary, Matrix)> {
    let (tokens, m) = read_word2vec(&dir.join(format!("{stem}.vec")))?;
    let vocab = read_vocab(&dir.join(format!("{stem}.vocab")))?;
    if vocab.tokens() != tokens.as_slice() {
        return Err(Error::Config(format!(
            "{}: vocabulary and matrix rows differ",
            dir.display()
        )));
    }
    Ok((vocab, m))
}

/// Writes `spaces` and `prov` into `dir`, creating it if needed.
pub fn save_spaces(dir: &Path, spaces: &AlignedSpaces, prov: &Provenance) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix(dir, "a", &spaces.vocab_a, &spaces.matrix_a)?;
    write_matrix(dir, "b", &spaces.vocab_b, &spaces.matrix_b)?;
    let mut doc = prov.to_kv();
    if let Some(joint) = &spaces.joint {
        write_matrix(dir, "joint", &joint.vocab, &joint.matrix)?;
        for t in &joint.targets {
            doc.push(
                "injected",
                format!(
                    "{} {} {} {} {}",
                    t.target, t.tagged[0], t.tagged[1], t.frequency[0], t.frequency[1]
                ),
            );
        }
    }
    for n in &spaces.notes {
        doc.push("note", n);
    }
    doc.write(&dir.join(PROVENANCE_FILE))
}

fn parse_injected(line: &str) -> Option<InjectedTarget> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 5 {
        return None;
    }
    Some(InjectedTarget {
        target: f[0].to_string(),
        tagged: [f[1].to_string(), f[2].to_string()],
        frequency: [f[3].parse().ok()?, f[4].parse().ok()?],
    })
}

/// Reads a directory written by [`save_spaces`].
pub fn load_spaces(dir: &Path) -> Result<(AlignedSpaces, Provenance)> {
    let doc = KvDoc::read(&dir.join(PROVENANCE_FILE))?;
    let prov = Provenance::from_kv(&doc)?;
    let mut spaces = if prov.spec.method == AlignmentMethod::Wi {
        let (vocab, matrix) = read_matrix(dir, "joint")?;
        let targets = doc
            .get_all("injected")
            .map(|l| parse_injected(l).ok_or_else(|| Error::Config(format!("bad injected-target entry `{l}`"))))
            .collect::<Result<_>>()?;
        AlignedSpaces::from_joint(JointSpace { vocab, matrix, targets }, prov.spec.pretrain)
    } else {
        let (va, a) = read_matrix(dir, "a")?;
        let (vb, b) = read_matrix(dir, "b")?;
        AlignedSpaces::new(a, va, b, vb, prov.spec.method, prov.spec.pretrain)?
    };
    spaces.notes = doc.get_all("note").map(String::from).collect();
    Ok((spaces, prov))
}
