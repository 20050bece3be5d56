//! Grid sweeps: train, align, post-process, score, evaluate and diagnose
//! every configuration, collecting one [`ResultRow`] per matrix pair.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lscd_core::align::{AlignedSpaces, AlignmentMethod, PretrainSource};
use lscd_core::analysis::{frequency_bias, isotropy};
use lscd_core::derive_seed;
use lscd_core::evaluation::eval_lscd;
use lscd_core::linalg::{normalize_rows, stack_rows};
use lscd_core::measures::score_targets;
use lscd_core::postprocess::{StackingMode, Transform};
use lscd_core::sgns::mean_row_length;
use lscd_core::Matrix;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Persist, PpMode};
use crate::error::{Error, Result};
use crate::formats::{load_corpus, read_gold, read_lines, read_targets, write_text};
use crate::pipeline::{align, apply_chain, AlignSpec, Inputs};
use crate::spaces_io::{save_spaces, Provenance};

/// Value of the `transform` column for un-post-processed rows.
pub const BASELINE: &str = "none";

/// One grid point: a training configuration within an (alignment, pre-training) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub alignment: AlignmentMethod,
    pub pretrain: PretrainSource,
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub repeat: usize,
    pub seed: u64,
}

impl GridPoint {
    pub fn id(&self) -> String {
        format!(
            "{}-{}-d{}-w{}-e{}-r{}",
            self.alignment, self.pretrain, self.dim, self.window, self.epochs, self.repeat
        )
    }
}

/// Statistics of one evaluated matrix pair; `None` marks an unavailable value.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub point: GridPoint,
    /// [`BASELINE`], `sot` or `mcpcr`.
    pub transform: String,
    pub parameter: Option<f64>,
    pub stacking: Option<StackingMode>,
    pub rho: Option<f64>,
    pub coverage: usize,
    pub missing: usize,
    /// Isotropy of the stacked matrices as they are.
    pub isotropy: Option<f64>,
    /// Isotropy after scaling every row to unit length, comparable across transforms.
    pub isotropy_unit: Option<f64>,
    pub frequency_bias: Option<f64>,
    pub mean_vector_length: Option<f64>,
    pub error: Option<String>,
}

impl ResultRow {
    fn empty(point: &GridPoint, step: Option<(Transform, StackingMode)>) -> Self {
        Self {
            point: point.clone(),
            transform: step.map_or_else(|| BASELINE.to_string(), |(t, _)| t.kind().to_string()),
            parameter: step.map(|(t, _)| t.parameter()),
            stacking: step.map(|(_, m)| m),
            rho: None,
            coverage: 0,
            missing: 0,
            isotropy: None,
            isotropy_unit: None,
            frequency_bias: None,
            mean_vector_length: None,
            error: None,
        }
    }

    pub fn is_baseline(&self) -> bool {
        self.transform == BASELINE
    }

    /// Identifies the baseline matrix pair a row derives from.
    pub fn baseline_key(&self) -> String {
        self.point.id()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub star_filter: bool,
}

const COLUMNS: [&str; 19] = [
    "point",
    "alignment",
    "pretrain",
    "dim",
    "window",
    "epochs",
    "repeat",
    "seed",
    "transform",
    "parameter",
    "stacking",
    "rho",
    "coverage",
    "missing",
    "isotropy",
    "isotropy_unit",
    "frequency_bias",
    "mean_vector_length",
    "error",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "NA".to_string(), ToString::to_string)
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n'], " ")
}

impl ResultTable {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = COLUMNS.join("\t");
        out.push('\n');
        for r in &self.rows {
            let p = &r.point;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                p.id(),
                p.alignment,
                p.pretrain,
                p.dim,
                p.window,
                p.epochs,
                p.repeat,
                p.seed,
                r.transform,
                opt(&r.parameter),
                opt(&r.stacking),
                opt(&r.rho),
                r.coverage,
                r.missing,
                opt(&r.isotropy),
                opt(&r.isotropy_unit),
                opt(&r.frequency_bias),
                opt(&r.mean_vector_length),
                r.error.as_deref().map_or_else(|| "NA".to_string(), clean),
            );
        }
        out
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_tsv())
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let lines = read_lines(path)?;
        let header: Vec<&str> = lines.first().map(|l| l.split('\t').collect()).unwrap_or_default();
        if header != COLUMNS {
            return Err(Error::parse(path, 1, "not a result table (unexpected header)"));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.iter().enumerate().skip(1).filter(|(_, l)| !l.is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            let bad = |what: &str| Error::parse(path, i + 1, format!("bad {what}"));
            if f.len() != COLUMNS.len() {
                return Err(bad("column count"));
            }
            fn na<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, ()> {
                if s == "NA" {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| ())
                }
            }
            let point = GridPoint {
                alignment: f[1].parse().map_err(|_| bad("alignment"))?,
                pretrain: f[2].parse().map_err(|_| bad("pretrain"))?,
                dim: f[3].parse().map_err(|_| bad("dim"))?,
                window: f[4].parse().map_err(|_| bad("window"))?,
                epochs: f[5].parse().map_err(|_| bad("epochs"))?,
                repeat: f[6].parse().map_err(|_| bad("repeat"))?,
                seed: f[7].parse().map_err(|_| bad("seed"))?,
            };
            rows.push(ResultRow {
                point,
                transform: f[8].to_string(),
                parameter: na(f[9]).map_err(|_| bad("parameter"))?,
                stacking: na(f[10]).map_err(|_| bad("stacking"))?,
                rho: na(f[11]).map_err(|_| bad("rho"))?,
                coverage: f[12].parse().map_err(|_| bad("coverage"))?,
                missing: f[13].parse().map_err(|_| bad("missing"))?,
                isotropy: na(f[14]).map_err(|_| bad("isotropy"))?,
                isotropy_unit: na(f[15]).map_err(|_| bad("isotropy_unit"))?,
                frequency_bias: na(f[16]).map_err(|_| bad("frequency_bias"))?,
                mean_vector_length: na(f[17]).map_err(|_| bad("mean_vector_length"))?,
                error: na::<String>(f[18]).map_err(|_| bad("error"))?,
            });
        }
        Ok(Self {
            rows,
            star_filter: false,
        })
    }
}

/// Grid points in a fixed order: cell, then d, w, e, repeat.
pub fn grid_points(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for (alignment, pretrain) in cfg.cells() {
        for &dim in &cfg.dims {
            for &window in &cfg.windows {
                for &epochs in &cfg.epochs {
                    for repeat in 0..cfg.repeats {
                        let seed = if repeat == 0 {
                            cfg.seed
                        } else {
                            derive_seed(cfg.seed, repeat as u64)
                        };
                        out.push(GridPoint {
                            alignment,
                            pretrain,
                            dim,
                            window,
                            epochs,
                            repeat,
                            seed,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Loads the corpora, targets and gold named by `cfg`.
pub fn load_inputs(cfg: &ExperimentConfig) -> Result<Inputs> {
    Ok(Inputs {
        first: load_corpus(&cfg.corpus1, cfg.min_freq)?,
        second: load_corpus(&cfg.corpus2, cfg.min_freq)?,
        targets: Some(read_targets(&cfg.targets)?),
        gold: Some(read_gold(&cfg.gold)?),
        modern: cfg
            .modern_corpus
            .as_deref()
            .map(|p| load_corpus(p, cfg.min_freq))
            .transpose()?,
    })
}

fn point_provenance(cfg: &ExperimentConfig, p: &GridPoint) -> Provenance {
    let spec = AlignSpec {
        length_normalize: cfg.length_normalize,
        vi_reverse: cfg.vi_reverse,
        same_seed: cfg.same_seed,
        ..AlignSpec::new(
            p.alignment,
            p.pretrain,
            cfg.train_config(p.dim, p.window, p.epochs, p.seed),
        )
    };
    Provenance {
        corpus1: Some(absolute(&cfg.corpus1)),
        corpus2: Some(absolute(&cfg.corpus2)),
        targets: Some(absolute(&cfg.targets)),
        gold: Some(absolute(&cfg.gold)),
        modern_corpus: cfg.modern_corpus.as_deref().map(absolute),
        min_freq: cfg.min_freq,
        ..Provenance::new(spec)
    }
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Stacked matrix the diagnostics are computed on; the joint matrix for WI.
fn diagnostic_matrix(spaces: &AlignedSpaces) -> Option<Matrix> {
    match &spaces.joint {
        Some(j) => Some(j.matrix.clone()),
        None => stack_rows(&spaces.matrix_a, &spaces.matrix_b).ok(),
    }
}

/// Scores, evaluates and diagnoses one matrix pair.
pub fn evaluate_spaces(spaces: &AlignedSpaces, inputs: &Inputs, row: &mut ResultRow) {
    let Some(targets) = &inputs.targets else {
        row.error = Some("evaluation: no target list".into());
        return;
    };
    let ranking = score_targets(spaces, targets);
    row.missing = ranking.missing_count();
    if let Some(gold) = &inputs.gold {
        match eval_lscd(&ranking, gold) {
            Ok(outcome) => {
                row.rho = Some(outcome.rho);
                row.coverage = outcome.coverage;
            }
            Err(e) => row.error = Some(format!("evaluation: {e}")),
        }
    }
    row.frequency_bias = frequency_bias(&ranking, &spaces.vocab_b).ok();
    if let Some(m) = diagnostic_matrix(spaces) {
        row.isotropy = isotropy(&m).ok();
        row.mean_vector_length = Some(mean_row_length(&m));
        let mut unit = m;
        normalize_rows(&mut unit);
        row.isotropy_unit = isotropy(&unit).ok();
    }
}

struct PointRun<'a> {
    cfg: &'a ExperimentConfig,
    inputs: &'a Inputs,
}

impl PointRun<'_> {
    fn out_dir(&self, p: &GridPoint, prov: &Provenance) -> Option<PathBuf> {
        let base = self.cfg.output.as_ref()?.join("points").join(p.id());
        Some(if prov.postprocess.is_empty() {
            base.join("baseline")
        } else {
            base.join(prov.suffix())
        })
    }

    fn persist(&self, p: &GridPoint, spaces: &AlignedSpaces, prov: &Provenance, row: &mut ResultRow) {
        let wanted = match self.cfg.persist {
            Persist::None => false,
            Persist::Baseline => prov.postprocess.is_empty(),
            Persist::All => true,
        };
        if let (true, Some(dir)) = (wanted, self.out_dir(p, prov)) {
            if let Err(e) = save_spaces(&dir, spaces, prov) {
                row.error.get_or_insert_with(|| format!("persist: {e}"));
            }
        }
    }

    fn baseline(&self, p: &GridPoint) -> (ResultRow, Option<AlignedSpaces>) {
        let mut row = ResultRow::empty(p, None);
        let prov = point_provenance(self.cfg, p);
        match align(self.inputs, &prov.spec) {
            Ok(spaces) => {
                evaluate_spaces(&spaces, self.inputs, &mut row);
                self.persist(p, &spaces, &prov, &mut row);
                (row, Some(spaces))
            }
            Err(e) => {
                row.error = Some(format!("alignment: {e}"));
                (row, None)
            }
        }
    }

    fn postprocessed(&self, p: &GridPoint, base: &AlignedSpaces) -> Vec<ResultRow> {
        let prov = point_provenance(self.cfg, p);
        let mut rows = Vec::new();
        for &mode in &self.cfg.stacking {
            for &t in &self.cfg.transforms {
                let mut row = ResultRow::empty(p, Some((t, mode)));
                match apply_chain(base.clone(), &[(t, mode)]) {
                    Ok(spaces) => {
                        evaluate_spaces(&spaces, self.inputs, &mut row);
                        self.persist(p, &spaces, &prov.with_step(t, mode), &mut row);
                    }
                    Err(e) => row.error = Some(format!("post-processing: {e}")),
                }
                rows.push(row);
            }
        }
        rows
    }

    fn full(&self, p: &GridPoint) -> Vec<ResultRow> {
        let (row, spaces) = self.baseline(p);
        let mut rows = vec![row];
        if let Some(spaces) = spaces.filter(|_| self.cfg.pp_mode == PpMode::Full) {
            rows.extend(self.postprocessed(p, &spaces));
        }
        rows
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs the whole grid on pre-loaded inputs.
///
/// Per-point failures are recorded in the rows and do not stop the run.
/// Rows come out in grid order whatever the number of workers.
pub fn run_experiment_with(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<ResultTable> {
    cfg.validate()?;
    let points = grid_points(cfg);
    let run = PointRun { cfg, inputs };
    let pool = pool(cfg.workers)?;
    let mut groups: Vec<Vec<ResultRow>> = pool.install(|| points.par_iter().map(|p| run.full(p)).collect());

    if cfg.pp_mode == PpMode::Paper && !cfg.transforms.is_empty() {
        let mut best: Vec<(usize, f64)> = Vec::new();
        for (i, g) in groups.iter().enumerate() {
            let (p, rho) = (&g[0].point, g[0].rho);
            let Some(rho) = rho else { continue };
            match best.iter_mut().find(|(j, _)| {
                let q = &groups[*j][0].point;
                (q.alignment, q.pretrain) == (p.alignment, p.pretrain)
            }) {
                Some(slot) if rho > slot.1 => *slot = (i, rho),
                Some(_) => {}
                None => best.push((i, rho)),
            }
        }
        let extra: Vec<(usize, Vec<ResultRow>)> = pool.install(|| {
            best.par_iter()
                .map(|&(i, _)| {
                    let p = &points[i];
                    let rows = match align(inputs, &point_provenance(cfg, p).spec) {
                        Ok(spaces) => run.postprocessed(p, &spaces),
                        Err(e) => {
                            let mut row = ResultRow::empty(p, None);
                            row.error = Some(format!("alignment: {e}"));
                            vec![row]
                        }
                    };
                    (i, rows)
                })
                .collect()
        });
        for (i, rows) in extra {
            groups[i].extend(rows);
        }
    }
    let table = ResultTable {
        rows: groups.into_iter().flatten().collect(),
        star_filter: cfg.star_filter,
    };
    Ok(table)
}

/// Loads the inputs named by `cfg` and runs the grid.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run_experiment_with(cfg, &load_inputs(cfg)?)
}
