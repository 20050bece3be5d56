//! `lscd` subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lscd_core::align::{align_op, pretrain_workflow, AlignmentMethod, PretrainCorpora, PretrainSource};
use lscd_core::analysis::{diagnose, frequency_bias};
use lscd_core::corpus::Corpus;
use lscd_core::evaluation::{eval_lscd, eval_similarity, EvalOutcome};
use lscd_core::measures::score_targets;
use lscd_core::postprocess::{apply_stacked, McPcrParams, SotParams, StackingMode, Transform};
use lscd_core::sgns::{InitSpec, TrainConfig};
use lscd_core::synthetic::{generate_synthetic_change_pair, SyntheticConfig};

use crate::config::ExperimentConfig;
use crate::experiment::run_experiment;
use crate::formats::{
    load_corpus, read_gold, read_pair_gold, read_scores, read_targets, write_corpus, write_gold, write_scores,
    write_targets,
};
use crate::hogwild::train_parallel;
use crate::kv::KvDoc;
use crate::model_io::{load_model, read_word2vec, save_model, write_word2vec};
use crate::pipeline::{align, apply_chain, AlignSpec, Inputs};
use crate::report::{aggregate_table, emit_plot_data, summaries_to_text, summaries_to_tsv, write_plot_data, PlotKind};
use crate::spaces_io::{load_spaces, save_spaces, Provenance};

#[derive(Debug, Parser)]
#[command(
    name = "lscd",
    version,
    about = "Lexical semantic change detection with static word embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct TrainArgs {
    /// Vector dimensionality d.
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    /// Maximum context window w.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Training epochs e.
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Negative samples per positive pair.
    #[arg(long, default_value_t = 5)]
    pub negative: usize,
    #[arg(long, default_value_t = 0.025)]
    pub initial_lr: f64,
    /// Enable frequent-word subsampling.
    #[arg(long)]
    pub subsampling: bool,
    /// Drop tokens rarer than this when loading corpora.
    #[arg(long, default_value_t = 1)]
    pub min_freq: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            negative: self.negative,
            initial_lr: self.initial_lr,
            subsampling: self.subsampling,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus pair with known changed and stable targets.
    GenerateSynthetic {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 400)]
        vocab_size: usize,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 5000)]
        sentences: usize,
        #[arg(long, default_value_t = 10)]
        sentence_length: usize,
        #[arg(long, default_value_t = 2)]
        changed: usize,
        #[arg(long, default_value_t = 8)]
        stable: usize,
        #[arg(long, default_value_t = 0.5)]
        target_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        target_skew: f64,
        #[arg(long, default_value_t = 0.0)]
        background_rate: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Train SGNS embeddings on one corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Initialize from this model (word and context vectors).
        #[arg(long)]
        init: Option<PathBuf>,
        /// Scale initialization word vectors to unit length.
        #[arg(long)]
        length_normalize: bool,
        /// Worker threads; more than one trains lock-free and non-deterministically.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Train the model used to initialize later training.
    Pretrain {
        /// `diachron` (both target corpora) or `modern` (an external corpus).
        #[arg(long)]
        source: PretrainSource,
        #[arg(long)]
        corpus1: Option<PathBuf>,
        #[arg(long)]
        corpus2: Option<PathBuf>,
        /// External corpus for `modern`.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Produce aligned spaces for two corpora (or OP on two trained models).
    Align {
        #[arg(long)]
        method: AlignmentMethod,
        #[arg(long)]
        corpus1: Option<PathBuf>,
        #[arg(long)]
        corpus2: Option<PathBuf>,
        /// Required for WI.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// OP only: align two already trained models instead of training.
        #[arg(long, requires = "model2")]
        model1: Option<PathBuf>,
        #[arg(long, requires = "model1")]
        model2: Option<PathBuf>,
        #[arg(long, default_value = "none")]
        pretrain: PretrainSource,
        /// External corpus for `--pretrain modern`.
        #[arg(long)]
        modern_corpus: Option<PathBuf>,
        #[arg(long)]
        length_normalize: bool,
        /// VI: train the second corpus first.
        #[arg(long)]
        vi_reverse: bool,
        /// NO: use the same seed for both trainings.
        #[arg(long)]
        same_seed: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Apply SOT or MC+PCR to aligned spaces or to a single matrix file.
    Postprocess {
        /// Aligned-spaces directory.
        #[arg(long, conflicts_with = "matrix")]
        spaces: Option<PathBuf>,
        /// A single word2vec matrix file.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// `sot` or `mcpcr`.
        #[arg(long)]
        transform: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long)]
        pcs: Option<usize>,
        #[arg(long, default_value = "STA")]
        stacking: StackingMode,
        /// Output path; defaults to the input with the transform label appended.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Recorded in the provenance; the transforms themselves are deterministic.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Cosine-distance change scores for the targets.
    Score {
        #[arg(long)]
        spaces: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Spearman correlation of scores with a gold ranking, or of a model with similarity judgements.
    Evaluate {
        #[arg(long, requires = "gold")]
        scores: Option<PathBuf>,
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long, requires = "pairs")]
        model: Option<PathBuf>,
        /// `word1<TAB>word2<TAB>score` judgements.
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Also write the result as a TSV row.
        #[arg(long)]
        tsv: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Isotropy, frequency bias and mean vector length.
    Analyze {
        #[arg(long, conflicts_with = "matrix")]
        spaces: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Targets for the frequency-bias correlation.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Take frequencies from the first corpus instead of the second.
        #[arg(long)]
        first_corpus_frequencies: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run an experiment grid from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` in the config.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Means and standard deviations ignore results with d < 100.
        #[arg(long)]
        star_filter: bool,
    },
    /// Turn a sweep's result table into per-baseline plot series.
    PlotData {
        #[arg(long)]
        results: PathBuf,
        /// `sot_curve`, `pcr_curve` or `isotropy_curve`.
        #[arg(long)]
        kind: PlotKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().with_context(|| format!("--{flag} is required here"))
}

fn load(path: &Path, min_freq: u64) -> Result<Corpus> {
    Ok(load_corpus(path, min_freq)?)
}

fn transform_from(name: &str, alpha: Option<f64>, pcs: Option<usize>) -> Result<Transform> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "sot" => Transform::Sot(SotParams::new(alpha.context("--alpha is required for sot")?)?),
        "mcpcr" | "mc+pcr" | "pcr" => Transform::McPcr(McPcrParams {
            num_pcs: pcs.context("--pcs is required for mcpcr")?,
        }),
        other => bail!("unknown transform `{other}` (sot or mcpcr)"),
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{suffix}"),
    };
    path.with_file_name(name)
}

fn outcome_doc(o: &EvalOutcome) -> KvDoc {
    let mut doc = KvDoc::new();
    doc.push("rho", o.rho)
        .push("coverage", o.coverage)
        .push("dropped", o.dropped);
    doc
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Runs one parsed command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::GenerateSynthetic {
            out: dir,
            vocab_size,
            clusters,
            sentences,
            sentence_length,
            changed,
            stable,
            target_rate,
            target_skew,
            background_rate,
            seed,
        } => {
            let cfg = SyntheticConfig {
                vocab_size,
                num_clusters: clusters,
                sentences_per_corpus: sentences,
                sentence_length,
                num_changed: changed,
                num_stable: stable,
                target_rate,
                target_skew,
                background_rate,
                ..SyntheticConfig::default()
            };
            let pair = generate_synthetic_change_pair(&cfg, seed)?;
            write_corpus(&dir.join("corpus1.txt"), &pair.first)?;
            write_corpus(&dir.join("corpus2.txt"), &pair.second)?;
            write_targets(&dir.join("targets.txt"), &pair.targets)?;
            write_gold(&dir.join("gold.tsv"), &pair.gold)?;
            writeln!(
                out,
                "wrote {} ({} + {} tokens, {} targets)",
                dir.display(),
                pair.first.token_count(),
                pair.second.token_count(),
                pair.targets.len()
            )?;
        }
        Command::Train {
            corpus,
            out: path,
            init,
            length_normalize,
            threads,
            train,
        } => {
            let corpus = load(&corpus, train.min_freq)?;
            let source = init.as_deref().map(load_model).transpose()?;
            let spec = match &source {
                Some(m) => InitSpec::pretrained(m, length_normalize),
                None => InitSpec::random(),
            };
            let model = train_parallel(&corpus, &train.config(), &spec, threads)?;
            save_model(&path, &model)?;
            writeln!(
                out,
                "wrote {} ({} words, d={})",
                path.display(),
                model.vocab().len(),
                model.dim()
            )?;
        }
        Command::Pretrain {
            source,
            corpus1,
            corpus2,
            corpus,
            out: path,
            train,
        } => {
            let cfg = train.config();
            let model = match source {
                PretrainSource::None => bail!("--source must be diachron or modern"),
                PretrainSource::Diachron => {
                    let first = load(need(&corpus1, "corpus1")?, train.min_freq)?;
                    let second = load(need(&corpus2, "corpus2")?, train.min_freq)?;
                    pretrain_workflow(PretrainCorpora::Diachron(&first, &second), &cfg)?
                }
                PretrainSource::Modern => {
                    let modern = load(need(&corpus, "corpus")?, train.min_freq)?;
                    pretrain_workflow(PretrainCorpora::Modern(&modern), &cfg)?
                }
            };
            save_model(&path, &model)?;
            writeln!(
                out,
                "wrote {} ({} words, d={})",
                path.display(),
                model.vocab().len(),
                model.dim()
            )?;
        }
        Command::Align {
            method,
            corpus1,
            corpus2,
            targets,
            model1,
            model2,
            pretrain,
            modern_corpus,
            length_normalize,
            vi_reverse,
            same_seed,
            out: dir,
            train,
        } => {
            let spec = AlignSpec {
                length_normalize,
                vi_reverse,
                same_seed,
                ..AlignSpec::new(method, pretrain, train.config())
            };
            let mut prov = Provenance::new(spec.clone());
            prov.min_freq = train.min_freq;
            let spaces = if let (Some(m1), Some(m2)) = (&model1, &model2) {
                if method != AlignmentMethod::Op {
                    bail!("--model1/--model2 only apply to OP");
                }
                align_op(&load_model(m1)?, &load_model(m2)?)?
            } else {
                let c1 = need(&corpus1, "corpus1")?;
                let c2 = need(&corpus2, "corpus2")?;
                prov.corpus1 = Some(absolute(c1));
                prov.corpus2 = Some(absolute(c2));
                prov.targets = targets.as_deref().map(absolute);
                prov.modern_corpus = modern_corpus.as_deref().map(absolute);
                let inputs = Inputs {
                    first: load(c1, train.min_freq)?,
                    second: load(c2, train.min_freq)?,
                    targets: targets.as_deref().map(read_targets).transpose()?,
                    gold: None,
                    modern: modern_corpus.as_deref().map(|p| load(p, train.min_freq)).transpose()?,
                };
                align(&inputs, &spec)?
            };
            save_spaces(&dir, &spaces, &prov)?;
            for n in &spaces.notes {
                writeln!(out, "note: {n}")?;
            }
            writeln!(out, "wrote {}", dir.display())?;
        }
        Command::Postprocess {
            spaces,
            matrix,
            transform,
            alpha,
            pcs,
            stacking,
            out: target,
            seed: _,
        } => {
            let t = transform_from(&transform, alpha, pcs)?;
            let label = format!("{}+{stacking}", t.label());
            if let Some(dir) = spaces {
                let (loaded, prov) = load_spaces(&dir)?;
                let result = apply_chain(loaded, &[(t, stacking)])?;
                let dest = target.unwrap_or_else(|| with_suffix(&dir, &label));
                save_spaces(&dest, &result, &prov.with_step(t, stacking))?;
                for n in &result.notes {
                    writeln!(out, "note: {n}")?;
                }
                writeln!(out, "wrote {}", dest.display())?;
            } else {
                let path = matrix.context("give --spaces or --matrix")?;
                if stacking != StackingMode::Sta {
                    writeln!(out, "note: stacking mode {stacking} ignored for a single matrix")?;
                }
                let (tokens, m) = read_word2vec(&path)?;
                let (result, _) =
                    apply_stacked(&m, &lscd_core::Matrix::zeros(0, m.ncols()), &[], &t, StackingMode::Sep)?;
                let dest = target.unwrap_or_else(|| with_suffix(&path, &t.label()));
                write_word2vec(&dest, &tokens, &result)?;
                writeln!(out, "wrote {}", dest.display())?;
            }
        }
        Command::Score {
            spaces,
            targets,
            out: dest,
            seed: _,
        } => {
            let (spaces, _) = load_spaces(&spaces)?;
            let ranking = score_targets(&spaces, &read_targets(&targets)?);
            match dest {
                Some(p) => {
                    write_scores(&p, &ranking)?;
                    writeln!(out, "wrote {} ({} missing)", p.display(), ranking.missing_count())?;
                }
                None => write!(out, "{}", crate::formats::format_scores(&ranking))?,
            }
        }
        Command::Evaluate {
            scores,
            gold,
            model,
            pairs,
            tsv,
            seed: _,
        } => {
            let (task, outcome) = match (scores, model) {
                (Some(s), None) => ("lscd", eval_lscd(&read_scores(&s)?, &read_gold(need(&gold, "gold")?)?)?),
                (None, Some(m)) => (
                    "similarity",
                    eval_similarity(&load_model(&m)?, &read_pair_gold(need(&pairs, "pairs")?)?)?,
                ),
                _ => bail!("give either --scores with --gold or --model with --pairs"),
            };
            write!(out, "{}", outcome_doc(&outcome))?;
            if let Some(p) = tsv {
                let text = format!(
                    "task\trho\tcoverage\tdropped\n{task}\t{}\t{}\t{}\n",
                    outcome.rho, outcome.coverage, outcome.dropped
                );
                crate::formats::write_text(&p, &text)?;
            }
        }
        Command::Analyze {
            spaces,
            matrix,
            targets,
            first_corpus_frequencies,
            out: dest,
            seed: _,
        } => {
            let mut tsv = String::from("matrix\tisotropy\tfrequency_bias\tmean_vector_length\n");
            let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
            if let Some(dir) = spaces {
                let (s, _) = load_spaces(&dir)?;
                let bias = match &targets {
                    Some(t) => {
                        let ranking = score_targets(&s, &read_targets(t)?);
                        let vocab = if first_corpus_frequencies {
                            &s.vocab_a
                        } else {
                            &s.vocab_b
                        };
                        frequency_bias(&ranking, vocab).ok()
                    }
                    None => None,
                };
                for (name, m) in [("a", &s.matrix_a), ("b", &s.matrix_b)] {
                    let r = diagnose(m, None)?;
                    tsv.push_str(&format!(
                        "{name}\t{}\t{}\t{}\n",
                        r.isotropy,
                        na(bias),
                        r.mean_vector_length
                    ));
                }
            } else {
                let path = matrix.context("give --spaces or --matrix")?;
                let (_, m) = read_word2vec(&path)?;
                let r = diagnose(&m, None)?;
                tsv.push_str(&format!(
                    "{}\t{}\tNA\t{}\n",
                    path.display(),
                    r.isotropy,
                    r.mean_vector_length
                ));
            }
            match dest {
                Some(p) => crate::formats::write_text(&p, &tsv)?,
                None => write!(out, "{tsv}")?,
            }
        }
        Command::Sweep {
            config,
            output,
            workers,
            seed,
            star_filter,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if output.is_some() {
                cfg.output = output;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.star_filter |= star_filter;
            let dir = cfg
                .output
                .clone()
                .context("no output directory (set `output` or --output)")?;
            let table = run_experiment(&cfg)?;
            table.write_tsv(&dir.join("results.tsv"))?;
            let groups = aggregate_table(&table)?;
            crate::formats::write_text(&dir.join("summary.tsv"), &summaries_to_tsv(&groups))?;
            crate::formats::write_text(&dir.join("summary.txt"), &summaries_to_text(&groups))?;
            let errors = table.error_count();
            crate::formats::write_text(&dir.join("errors.txt"), &format!("{errors}\n"))?;
            write!(out, "{}", summaries_to_text(&groups))?;
            writeln!(out, "configs_per_cell = {}", cfg.configs_per_cell())?;
            writeln!(out, "rows = {}", table.rows.len())?;
            writeln!(out, "errors = {errors}")?;
        }
        Command::PlotData {
            results,
            kind,
            out: dir,
            seed: _,
        } => {
            let table = crate::experiment::ResultTable::read_tsv(&results)?;
            let series = emit_plot_data(&table, kind)?;
            for p in write_plot_data(&dir, &series)? {
                writeln!(out, "wrote {}", p.display())?;
            }
        }
    }
    Ok(())
}
