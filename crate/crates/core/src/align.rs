//! Making two embedding spaces comparable.
//!
//! Four strategies are provided:
//!
//! * **OP**: train both periods independently, then rotate the second space
//!   onto the first with the orthogonal Procrustes solution.
//! * **VI**: train the first period, then continue training on the second
//!   period starting from the first model's word and context vectors.
//! * **WI**: train once on a shuffled joint corpus in which targets carry a
//!   period tag, giving two rows per target in one space.
//! * **NO**: initialize both periods from the same pre-trained model and
//!   compare the results without any further transform.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::{concat_corpora, word_inject, Corpus, InjectedTarget, TargetWordList};
use crate::error::{Error, Result};
use crate::linalg::{column_means, normalize_rows, select_rows, shape_error, subtract_row_vector, svd, Matrix};
use crate::rng::derive_seed;
use crate::sgns::{train, EmbeddingModel, InitSpec, TrainConfig};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlignmentMethod {
    Op,
    Vi,
    Wi,
    No,
}

impl AlignmentMethod {
    pub const ALL: [AlignmentMethod; 4] = [Self::Op, Self::Vi, Self::Wi, Self::No];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Op => "OP",
            Self::Vi => "VI",
            Self::Wi => "WI",
            Self::No => "NO",
        }
    }
}

impl fmt::Display for AlignmentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlignmentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "op" => Ok(Self::Op),
            "vi" => Ok(Self::Vi),
            "wi" => Ok(Self::Wi),
            "no" => Ok(Self::No),
            _ => Err(Error::InvalidConfig(format!("unknown alignment method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PretrainSource {
    None,
    Diachron,
    Modern,
}

impl PretrainSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Diachron => "diachron",
            Self::Modern => "modern",
        }
    }
}

impl fmt::Display for PretrainSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PretrainSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "diachron" => Ok(Self::Diachron),
            "modern" => Ok(Self::Modern),
            _ => Err(Error::InvalidConfig(format!("unknown pre-training source `{s}`"))),
        }
    }
}

/// A pre-trained model used to initialize downstream training.
#[derive(Debug, Clone, Copy)]
pub struct Pretrained<'a> {
    pub model: &'a EmbeddingModel,
    pub source: PretrainSource,
    pub length_normalize: bool,
}

impl<'a> Pretrained<'a> {
    fn init(&self) -> InitSpec<'a> {
        InitSpec::pretrained(self.model, self.length_normalize)
    }
}

fn init_from<'a>(pretrained: Option<&Pretrained<'a>>) -> InitSpec<'a> {
    pretrained.map_or_else(InitSpec::random, |p| p.init())
}

fn source_of(pretrained: Option<&Pretrained<'_>>) -> PretrainSource {
    pretrained.map_or(PretrainSource::None, |p| p.source)
}

/// The single space behind a Word-Injection alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpace {
    pub vocab: Vocabulary,
    pub matrix: Matrix,
    pub targets: Vec<InjectedTarget>,
}

/// One period of a joint space: `(token, frequency)` entries and the joint row of each.
type PeriodView = (Vec<(String, u64)>, Vec<usize>);

/// Two word matrices whose rows are comparable across spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSpaces {
    pub matrix_a: Matrix,
    pub matrix_b: Matrix,
    pub vocab_a: Vocabulary,
    pub vocab_b: Vocabulary,
    pub method: AlignmentMethod,
    pub pretrain: PretrainSource,
    pub notes: Vec<String>,
    /// Present for WI: the underlying single space.
    pub joint: Option<JointSpace>,
}

impl AlignedSpaces {
    pub fn new(
        matrix_a: Matrix,
        vocab_a: Vocabulary,
        matrix_b: Matrix,
        vocab_b: Vocabulary,
        method: AlignmentMethod,
        pretrain: PretrainSource,
    ) -> Result<Self> {
        if matrix_a.ncols() != matrix_b.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix_a.ncols(),
                found: matrix_b.ncols(),
            });
        }
        if matrix_a.nrows() != vocab_a.len() {
            return Err(Error::LengthMismatch(matrix_a.nrows(), vocab_a.len()));
        }
        if matrix_b.nrows() != vocab_b.len() {
            return Err(Error::LengthMismatch(matrix_b.nrows(), vocab_b.len()));
        }
        Ok(Self {
            matrix_a,
            matrix_b,
            vocab_a,
            vocab_b,
            method,
            pretrain,
            notes: Vec::new(),
            joint: None,
        })
    }

    /// Exposes a WI joint space as two logical matrices: target rows come
    /// from the period-tagged forms, every other word shares its single row.
    pub fn from_joint(joint: JointSpace, pretrain: PretrainSource) -> Self {
        let mut views: [PeriodView; 2] = Default::default();
        for (row, (token, freq)) in joint.vocab.iter().enumerate() {
            let tagged = joint
                .targets
                .iter()
                .find_map(|t| t.tagged.iter().position(|x| x == token).map(|p| (t, p)));
            match tagged {
                Some((target, period)) => {
                    views[period].0.push((target.target.clone(), freq));
                    views[period].1.push(row);
                }
                None => {
                    for view in &mut views {
                        view.0.push((String::from(token), freq));
                        view.1.push(row);
                    }
                }
            }
        }
        let [(entries_a, rows_a), (entries_b, rows_b)] = views;
        let mut notes = Vec::new();
        for t in &joint.targets {
            for period in 0..2 {
                if t.frequency[period] == 0 {
                    notes.push(format!("target `{}` missing from corpus {}", t.target, period + 1));
                }
            }
        }
        Self {
            matrix_a: select_rows(&joint.matrix, rows_a.into_iter()),
            matrix_b: select_rows(&joint.matrix, rows_b.into_iter()),
            vocab_a: Vocabulary::from_entries(entries_a),
            vocab_b: Vocabulary::from_entries(entries_b),
            method: AlignmentMethod::Wi,
            pretrain,
            notes,
            joint: Some(joint),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix_a.ncols()
    }

    pub fn vector_a(&self, word: &str) -> Option<Vec<f64>> {
        self.vocab_a
            .index_of(word)
            .map(|i| self.matrix_a.row(i).iter().copied().collect())
    }

    pub fn vector_b(&self, word: &str) -> Option<Vec<f64>> {
        self.vocab_b
            .index_of(word)
            .map(|i| self.matrix_b.row(i).iter().copied().collect())
    }

    /// Row pairs of words present in both spaces.
    pub fn shared_rows(&self) -> Vec<(usize, usize)> {
        self.vocab_a.shared_with(&self.vocab_b)
    }

    /// Same provenance, new matrices (row order unchanged).
    pub fn with_matrices(&self, matrix_a: Matrix, matrix_b: Matrix) -> Result<Self> {
        if matrix_a.shape() != self.matrix_a.shape() {
            return Err(shape_error(&matrix_a, &self.matrix_a));
        }
        if matrix_b.shape() != self.matrix_b.shape() {
            return Err(shape_error(&matrix_b, &self.matrix_b));
        }
        Ok(Self {
            matrix_a,
            matrix_b,
            joint: None,
            ..self.clone()
        })
    }
}

/// Orthogonal `W` minimizing `‖bW − a‖_F`, from the SVD `bᵀa = UΣVᵀ`, `W = UVᵀ`.
pub fn solve_orthogonal_procrustes(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.shape() != b.shape() {
        return Err(shape_error(a, b));
    }
    let (u, _, v_t) = svd(&(b.transpose() * a))?;
    Ok(u * v_t)
}

/// `‖bW − a‖_F`.
pub fn procrustes_residual(a: &Matrix, b: &Matrix, w: &Matrix) -> f64 {
    (b * w - a).norm()
}

/// Rotates all of `b` onto `a` using `W` solved on the shared-vocabulary rows.
pub fn realign(a: &Matrix, vocab_a: &Vocabulary, b: &Matrix, vocab_b: &Vocabulary) -> Result<Matrix> {
    let shared = vocab_a.shared_with(vocab_b);
    if shared.is_empty() {
        return Err(Error::EmptySharedVocabulary);
    }
    let sa = select_rows(a, shared.iter().map(|p| p.0));
    let sb = select_rows(b, shared.iter().map(|p| p.1));
    Ok(b * solve_orthogonal_procrustes(&sa, &sb)?)
}

/// Length-normalizes and mean-centres both word matrices, then rotates the
/// second onto the first.
///
/// Centring offsets are the column means of the shared-vocabulary rows and
/// are applied to every row.
pub fn align_op(first: &EmbeddingModel, second: &EmbeddingModel) -> Result<AlignedSpaces> {
    if first.dim() != second.dim() {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            found: second.dim(),
        });
    }
    let shared = first.vocab().shared_with(second.vocab());
    if shared.is_empty() {
        return Err(Error::EmptySharedVocabulary);
    }
    let rows_a: Vec<usize> = shared.iter().map(|p| p.0).collect();
    let rows_b: Vec<usize> = shared.iter().map(|p| p.1).collect();

    let mut a = first.word_matrix().clone();
    let mut b = second.word_matrix().clone();
    normalize_rows(&mut a);
    normalize_rows(&mut b);
    let mean_a = column_means(&a, Some(&rows_a));
    let mean_b = column_means(&b, Some(&rows_b));
    subtract_row_vector(&mut a, &mean_a);
    subtract_row_vector(&mut b, &mean_b);

    let w = solve_orthogonal_procrustes(
        &select_rows(&a, rows_a.iter().copied()),
        &select_rows(&b, rows_b.iter().copied()),
    )?;
    let b = b * w;
    AlignedSpaces::new(
        a,
        first.vocab().clone(),
        b,
        second.vocab().clone(),
        AlignmentMethod::Op,
        PretrainSource::None,
    )
}

/// Trains one model per corpus (optionally from a shared pre-trained model), then [`align_op`].
pub fn align_op_corpora(
    first: &Corpus,
    second: &Corpus,
    cfg: &TrainConfig,
    pretrained: Option<&Pretrained<'_>>,
) -> Result<AlignedSpaces> {
    let init = init_from(pretrained);
    let a = train(first, cfg, &init)?;
    let b = train(second, &cfg.with_seed(derive_seed(cfg.seed, 2)), &init)?;
    let mut spaces = align_op(&a, &b)?;
    spaces.pretrain = source_of(pretrained);
    Ok(spaces)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ViOptions<'a> {
    /// Train the second corpus first and initialize the first from it.
    pub reverse: bool,
    pub pretrained: Option<Pretrained<'a>>,
}

/// Trains on the first corpus, then on the second corpus starting from the
/// first model's word and context vectors. No transform is applied afterwards.
pub fn align_vi(first: &Corpus, second: &Corpus, cfg: &TrainConfig, opts: &ViOptions<'_>) -> Result<AlignedSpaces> {
    let (early, late) = if opts.reverse { (second, first) } else { (first, second) };
    let base = train(early, cfg, &init_from(opts.pretrained.as_ref()))?;
    let cont = train(
        late,
        &cfg.with_seed(derive_seed(cfg.seed, 2)),
        &InitSpec::pretrained(&base, false),
    )?;
    let (a, b) = if opts.reverse { (cont, base) } else { (base, cont) };
    let (vocab_a, matrix_a, _, _) = a.into_parts();
    let (vocab_b, matrix_b, _, _) = b.into_parts();
    let mut spaces = AlignedSpaces::new(
        matrix_a,
        vocab_a,
        matrix_b,
        vocab_b,
        AlignmentMethod::Vi,
        source_of(opts.pretrained.as_ref()),
    )?;
    if opts.reverse {
        spaces.notes.push(String::from("vi direction: reverse"));
    }
    Ok(spaces)
}

/// Trains both corpora from the same pre-trained model and treats the results as aligned.
///
/// The second training uses a derived seed unless `same_seed` is set.
pub fn align_no(
    first: &Corpus,
    second: &Corpus,
    cfg: &TrainConfig,
    pretrained: &Pretrained<'_>,
    same_seed: bool,
) -> Result<AlignedSpaces> {
    let init = pretrained.init();
    let a = train(first, cfg, &init)?;
    let seed_b = if same_seed { cfg.seed } else { derive_seed(cfg.seed, 2) };
    let b = train(second, &cfg.with_seed(seed_b), &init)?;
    let (vocab_a, matrix_a, _, _) = a.into_parts();
    let (vocab_b, matrix_b, _, _) = b.into_parts();
    let mut spaces = AlignedSpaces::new(
        matrix_a,
        vocab_a,
        matrix_b,
        vocab_b,
        AlignmentMethod::No,
        pretrained.source,
    )?;
    if pretrained.length_normalize {
        spaces.notes.push(String::from("initialization length-normalized"));
    }
    Ok(spaces)
}

/// Trains one model on the word-injected joint corpus.
///
/// With a pre-trained model, tagged target forms are initialized from the
/// untagged target's pre-trained vectors.
pub fn align_wi(
    first: &Corpus,
    second: &Corpus,
    targets: &TargetWordList,
    cfg: &TrainConfig,
    shuffle_seed: u64,
    pretrained: Option<&Pretrained<'_>>,
) -> Result<AlignedSpaces> {
    let injected = word_inject(first, second, targets.words(), shuffle_seed);
    let mut init = init_from(pretrained);
    for t in &injected.targets {
        for tagged in &t.tagged {
            init.aliases.push((tagged.clone(), t.target.clone()));
        }
    }
    let model = train(&injected.corpus, cfg, &init)?;
    let (vocab, matrix, _, _) = model.into_parts();
    let mut spaces = AlignedSpaces::from_joint(
        JointSpace {
            vocab,
            matrix,
            targets: injected.targets,
        },
        source_of(pretrained),
    );
    spaces.notes.extend(injected.warnings);
    Ok(spaces)
}

/// Corpora feeding a pre-training run.
#[derive(Debug, Clone, Copy)]
pub enum PretrainCorpora<'a> {
    /// Both target corpora, concatenated.
    Diachron(&'a Corpus, &'a Corpus),
    /// An external corpus.
    Modern(&'a Corpus),
}

/// Trains the model used to initialize downstream training.
pub fn pretrain_workflow(corpora: PretrainCorpora<'_>, cfg: &TrainConfig) -> Result<EmbeddingModel> {
    match corpora {
        PretrainCorpora::Diachron(a, b) => train(&concat_corpora(a, b), cfg, &InitSpec::random()),
        PretrainCorpora::Modern(c) => train(c, cfg, &InitSpec::random()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::row_norm;
    use crate::measures::{cosine_distance, score_targets};
    use alloc::vec;
    use rand::Rng;

    fn sentences(lines: &[&str]) -> Corpus {
        Corpus::new(
            "c",
            lines.iter().map(|l| l.split(' ').map(String::from).collect()).collect(),
        )
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = crate::rng::stream_rng(seed, 9);
        Matrix::from_fn(rows, cols, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
    }

    fn small_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            dim: 6,
            window: 2,
            epochs,
            seed: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn procrustes_identity() {
        let a = random_matrix(10, 4, 1);
        let w = solve_orthogonal_procrustes(&a, &a).unwrap();
        assert!(procrustes_residual(&a, &a, &w) <= 1e-6);
    }

    #[test]
    fn procrustes_shape_mismatch() {
        let err = solve_orthogonal_procrustes(&random_matrix(3, 2, 1), &random_matrix(4, 2, 1));
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn op_is_self_consistent_both_ways() {
        let a = random_matrix(12, 4, 2);
        let b = random_matrix(12, 4, 3);
        let w = solve_orthogonal_procrustes(&a, &b).unwrap();
        let r1 = procrustes_residual(&a, &b, &w);
        let bw = &b * &w;
        let w2 = solve_orthogonal_procrustes(&bw, &a).unwrap();
        let r2 = procrustes_residual(&bw, &a, &w2);
        assert!((r1 - r2).abs() <= 1e-5, "{r1} {r2}");
    }

    #[test]
    fn op_on_identical_models() {
        let c = sentences(&["a b c d", "b c a", "d a b", "c d"]);
        let m = train(&c, &small_cfg(3), &InitSpec::random()).unwrap();
        let spaces = align_op(&m, &m).unwrap();
        for t in m.vocab().tokens() {
            let cd = cosine_distance(&spaces.vector_a(t).unwrap(), &spaces.vector_b(t).unwrap()).unwrap();
            assert!(cd <= 1e-6);
        }
    }

    #[test]
    fn op_requires_shared_vocabulary() {
        let m1 = train(&sentences(&["a b"]), &small_cfg(1), &InitSpec::random()).unwrap();
        let m2 = train(&sentences(&["c d"]), &small_cfg(1), &InitSpec::random()).unwrap();
        assert_eq!(align_op(&m1, &m2).unwrap_err(), Error::EmptySharedVocabulary);
    }

    #[test]
    fn vi_with_zero_epochs_copies_first_space() {
        let c1 = sentences(&["a b c", "c b a"]);
        let c2 = sentences(&["a b z", "z a"]);
        let spaces = align_vi(&c1, &c2, &small_cfg(0), &ViOptions::default()).unwrap();
        for t in ["a", "b"] {
            assert_eq!(spaces.vector_a(t), spaces.vector_b(t));
        }
        let z = spaces.vector_b("z").unwrap();
        for i in 0..spaces.matrix_a.nrows() {
            assert_ne!(spaces.matrix_a.row(i).iter().copied().collect::<Vec<_>>(), z);
        }
    }

    #[test]
    fn vi_reverse_keeps_period_order() {
        let c1 = sentences(&["a b c"]);
        let c2 = sentences(&["a b d"]);
        let opts = ViOptions {
            reverse: true,
            ..ViOptions::default()
        };
        let spaces = align_vi(&c1, &c2, &small_cfg(1), &opts).unwrap();
        assert!(spaces.vocab_a.contains("c") && spaces.vocab_b.contains("d"));
    }

    #[test]
    fn no_degenerate_cases() {
        let c = sentences(&["a b c d", "b c a", "d a b"]);
        let c2 = sentences(&["a b c", "c a"]);
        let pre = train(&c, &small_cfg(2), &InitSpec::random()).unwrap();
        let p = Pretrained {
            model: &pre,
            source: PretrainSource::Diachron,
            length_normalize: false,
        };
        let same = align_no(&c, &c, &small_cfg(3), &p, true).unwrap();
        assert_eq!(same.matrix_a, same.matrix_b);
        let zero = align_no(&c, &c2, &small_cfg(0), &p, false).unwrap();
        for t in c2.vocab().tokens() {
            assert_eq!(zero.vector_a(t), zero.vector_b(t));
            assert_eq!(zero.vector_a(t), pre.vector(t));
        }
    }

    #[test]
    fn no_length_normalized_init_rows_are_unit() {
        let c = sentences(&["a b c d", "b c a", "d a b"]);
        let pre = train(&c, &small_cfg(4), &InitSpec::random()).unwrap();
        let p = Pretrained {
            model: &pre,
            source: PretrainSource::Diachron,
            length_normalize: true,
        };
        let spaces = align_no(&c, &c, &small_cfg(0), &p, false).unwrap();
        for m in [&spaces.matrix_a, &spaces.matrix_b] {
            for i in 0..m.nrows() {
                assert!((row_norm(m, i) - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn no_rejects_dimension_mismatch() {
        let c = sentences(&["a b c"]);
        let pre = train(&c, &small_cfg(1), &InitSpec::random()).unwrap();
        let p = Pretrained {
            model: &pre,
            source: PretrainSource::Modern,
            length_normalize: false,
        };
        let cfg = TrainConfig { dim: 7, ..small_cfg(1) };
        assert!(matches!(
            align_no(&c, &c, &cfg, &p, false),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn wi_exposes_tagged_rows_and_missing_targets() {
        let c1 = sentences(&["x y q", "y q x"]);
        let c2 = sentences(&["y q", "q y y"]);
        let targets = TargetWordList::new(vec!["x".into(), "y".into()]).unwrap();
        let spaces = align_wi(&c1, &c2, &targets, &small_cfg(2), 3, None).unwrap();
        let joint = spaces.joint.as_ref().unwrap();
        assert_eq!(
            spaces.vector_a("y").unwrap(),
            joint
                .matrix
                .row(joint.vocab.index_of("y_CORPUS1").unwrap())
                .iter()
                .copied()
                .collect::<Vec<_>>()
        );
        // non-targets share one row
        assert_eq!(spaces.vector_a("q"), spaces.vector_b("q"));
        assert!(spaces.vector_b("x").is_none());
        assert!(spaces.notes.iter().any(|n| n.contains("`x` missing from corpus 2")));
        let ranking = score_targets(&spaces, &targets);
        assert_eq!(ranking.get("x"), Some(None));
        assert!(ranking.get("y").unwrap().is_some());
    }

    #[test]
    fn diachron_vocabulary_is_union() {
        let c1 = sentences(&["a b", "b c"]);
        let c2 = sentences(&["c d", "e"]);
        let m = pretrain_workflow(PretrainCorpora::Diachron(&c1, &c2), &small_cfg(1)).unwrap();
        let mut toks: Vec<&str> = m.vocab().tokens().iter().map(String::as_str).collect();
        toks.sort();
        assert_eq!(toks, ["a", "b", "c", "d", "e"]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in AlignmentMethod::ALL {
            assert_eq!(m.as_str().parse::<AlignmentMethod>().unwrap(), m);
        }
        assert_eq!("MODERN".parse::<PretrainSource>().unwrap(), PretrainSource::Modern);
    }
}
