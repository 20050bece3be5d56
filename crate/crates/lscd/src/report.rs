//! Summaries of a [`ResultTable`]: max/mean/std per group and plot series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lscd_core::aggregate::aggregate;
use lscd_core::align::{AlignmentMethod, PretrainSource};

use crate::config::STAR_MIN_DIM;
use crate::error::{Error, Result};
use crate::experiment::{ResultRow, ResultTable};
use crate::formats::write_text;

/// Max, mean and sample standard deviation of ρ over one group of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub alignment: AlignmentMethod,
    pub pretrain: PretrainSource,
    /// `none` for baselines, otherwise the transform label and stacking mode.
    pub setting: String,
    pub max: f64,
    /// `None` when the star filter removed every row of the group.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Rows behind `max`.
    pub count: usize,
    /// Rows behind `mean` and `std`.
    pub mean_count: usize,
    /// `std` is a placeholder because only one row entered the mean.
    pub single_sample: bool,
    /// Mean and std ignore results with `d < 100`.
    pub starred: bool,
}

fn setting(row: &ResultRow) -> String {
    match (row.parameter, row.stacking) {
        (Some(p), Some(m)) => format!("{}{}+{m}", if row.transform == "sot" { "sot_a" } else { "mcpcr_m" }, p),
        _ => row.transform.clone(),
    }
}

/// Groups successful rows by (alignment, pre-training, setting), in first-seen order.
///
/// With the table's star filter set, mean and std only use rows with `d ≥ 100`;
/// max always uses every row.
pub fn aggregate_table(table: &ResultTable) -> Result<Vec<GroupSummary>> {
    let mut keys: Vec<(AlignmentMethod, PretrainSource, String)> = Vec::new();
    for r in table.rows.iter().filter(|r| r.rho.is_some()) {
        let key = (r.point.alignment, r.point.pretrain, setting(r));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut out = Vec::with_capacity(keys.len());
    for (alignment, pretrain, set) in keys {
        let members: Vec<&ResultRow> = table
            .rows
            .iter()
            .filter(|r| r.point.alignment == alignment && r.point.pretrain == pretrain && setting(r) == set)
            .filter(|r| r.rho.is_some())
            .collect();
        let all: Vec<f64> = members.iter().filter_map(|r| r.rho).collect();
        let kept: Vec<f64> = members
            .iter()
            .filter(|r| !table.star_filter || r.point.dim >= STAR_MIN_DIM)
            .filter_map(|r| r.rho)
            .collect();
        let full = aggregate(&all)?;
        let filtered = aggregate(&kept).ok();
        out.push(GroupSummary {
            alignment,
            pretrain,
            setting: set,
            max: full.max,
            mean: filtered.map(|a| a.mean),
            std: filtered.map(|a| a.std),
            count: full.count,
            mean_count: kept.len(),
            single_sample: filtered.is_some_and(|a| a.single_sample()),
            starred: table.star_filter,
        });
    }
    Ok(out)
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn summaries_to_tsv(groups: &[GroupSummary]) -> String {
    let mut out =
        String::from("alignment\tpretrain\tsetting\tmax\tmean\tstd\tcount\tmean_count\tsingle_sample\tstarred\n");
    for g in groups {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            g.alignment,
            g.pretrain,
            g.setting,
            g.max,
            na(g.mean),
            na(g.std),
            g.count,
            g.mean_count,
            g.single_sample,
            g.starred
        );
    }
    out
}

/// Human-readable max and mean/std table, one line per group, e.g.
/// `OP  none  none  .62  .55 / .041*`.
pub fn summaries_to_text(groups: &[GroupSummary]) -> String {
    let fmt2 = |v: f64| {
        let s = format!("{v:.2}");
        s.strip_prefix("0").map(String::from).unwrap_or(s)
    };
    let mut out = String::from("alignment\tpretrain\tsetting\tmax\tmean / std\n");
    for g in groups {
        let mean = match (g.mean, g.std) {
            (Some(m), Some(s)) => format!("{} / {:.3}{}", fmt2(m), s, if g.starred { "*" } else { "" }),
            _ => "NA".into(),
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            g.alignment,
            g.pretrain,
            g.setting,
            fmt2(g.max),
            mean
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// ρ against α for SOT rows.
    SotCurve,
    /// ρ against m for MC+PCR rows.
    PcrCurve,
    /// Isotropy against the transform parameter, for every transform present.
    IsotropyCurve,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SotCurve => "sot_curve",
            Self::PcrCurve => "pcr_curve",
            Self::IsotropyCurve => "isotropy_curve",
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sot_curve" => Ok(Self::SotCurve),
            "pcr_curve" => Ok(Self::PcrCurve),
            "isotropy_curve" => Ok(Self::IsotropyCurve),
            _ => Err(Error::Config(format!("unknown plot kind `{s}`"))),
        }
    }
}

/// One series: a baseline matrix pair swept over one transform and stacking mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    /// File-name stem, e.g. `sot_curve__OP-none-d25-w5-e10-r0__STA`.
    pub name: String,
    pub tsv: String,
    pub rows: usize,
}

fn statistic(kind: PlotKind, r: &ResultRow) -> Option<f64> {
    match kind {
        PlotKind::SotCurve | PlotKind::PcrCurve => r.rho,
        PlotKind::IsotropyCurve => r.isotropy_unit,
    }
}

/// Builds one series per baseline matrix (and transform / stacking mode).
///
/// Each series has columns `parameter`, the statistic, and `baseline`, the
/// statistic of the un-post-processed matrix repeated on every row, plus
/// metadata columns. Rows are ordered by parameter.
pub fn emit_plot_data(table: &ResultTable, kind: PlotKind) -> Result<Vec<PlotSeries>> {
    if table.rows.is_empty() {
        return Err(Error::Config("empty result table".into()));
    }
    let wanted = |r: &ResultRow| match kind {
        PlotKind::SotCurve => r.transform == "sot",
        PlotKind::PcrCurve => r.transform == "mcpcr",
        PlotKind::IsotropyCurve => !r.is_baseline(),
    };
    let mut keys: Vec<(String, String, String)> = Vec::new();
    for r in table.rows.iter().filter(|r| wanted(r)) {
        let key = (r.baseline_key(), r.transform.clone(), na_mode(r));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    if keys.is_empty() {
        return Err(Error::Config(format!("table has no sweep rows for {}", kind.as_str())));
    }
    let stat_name = match kind {
        PlotKind::IsotropyCurve => "isotropy",
        _ => "rho",
    };
    let mut out = Vec::new();
    for (point, transform, mode) in keys {
        let baseline = table
            .rows
            .iter()
            .find(|r| r.is_baseline() && r.baseline_key() == point)
            .and_then(|r| statistic(kind, r));
        let mut members: Vec<&ResultRow> = table
            .rows
            .iter()
            .filter(|r| wanted(r) && r.baseline_key() == point && r.transform == transform && na_mode(r) == mode)
            .collect();
        members.sort_by(|a, b| {
            a.parameter
                .partial_cmp(&b.parameter)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut tsv = format!("parameter\t{stat_name}\tbaseline\ttransform\tstacking\tpoint\n");
        for r in &members {
            let _ = writeln!(
                tsv,
                "{}\t{}\t{}\t{transform}\t{mode}\t{point}",
                na(r.parameter),
                na(statistic(kind, r)),
                na(baseline)
            );
        }
        let name = match kind {
            PlotKind::IsotropyCurve => format!("{}__{point}__{transform}_{mode}", kind.as_str()),
            _ => format!("{}__{point}__{mode}", kind.as_str()),
        };
        out.push(PlotSeries {
            name,
            tsv,
            rows: members.len(),
        });
    }
    Ok(out)
}

fn na_mode(r: &ResultRow) -> String {
    r.stacking.map_or_else(|| "NA".to_string(), |m| m.to_string())
}

/// Writes every series as `<dir>/<name>.tsv`, returning the paths.
pub fn write_plot_data(dir: &Path, series: &[PlotSeries]) -> Result<Vec<PathBuf>> {
    series
        .iter()
        .map(|s| {
            let path = dir.join(format!("{}.tsv", s.name));
            write_text(&path, &s.tsv).map(|_| path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::GridPoint;
    use lscd_core::postprocess::StackingMode;

    fn row(dim: usize, transform: &str, parameter: Option<f64>, rho: f64) -> ResultRow {
        ResultRow {
            point: GridPoint {
                alignment: AlignmentMethod::Vi,
                pretrain: PretrainSource::None,
                dim,
                window: 5,
                epochs: 5,
                repeat: 0,
                seed: 1,
            },
            transform: transform.into(),
            parameter,
            stacking: parameter.map(|_| StackingMode::Sta),
            rho: Some(rho),
            coverage: 10,
            missing: 0,
            isotropy: Some(0.5),
            isotropy_unit: Some(rho / 2.0),
            frequency_bias: None,
            mean_vector_length: Some(1.0),
            error: None,
        }
    }

    #[test]
    fn arithmetic_sequence_summary() {
        let table = ResultTable {
            rows: vec![
                row(25, "none", None, 0.1),
                row(50, "none", None, 0.2),
                row(100, "none", None, 0.3),
            ],
            star_filter: false,
        };
        let g = &aggregate_table(&table).unwrap()[0];
        assert!((g.max - 0.3).abs() < 1e-12);
        assert!((g.mean.unwrap() - 0.2).abs() < 1e-12);
        assert!((g.std.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(g.count, 3);
    }

    #[test]
    fn star_filter_restricts_the_mean_only() {
        let table = ResultTable {
            rows: vec![
                row(25, "none", None, 0.9),
                row(100, "none", None, 0.3),
                row(200, "none", None, 0.5),
            ],
            star_filter: true,
        };
        let g = &aggregate_table(&table).unwrap()[0];
        assert!((g.max - 0.9).abs() < 1e-12);
        assert!((g.mean.unwrap() - 0.4).abs() < 1e-12);
        assert_eq!((g.count, g.mean_count), (3, 2));
        assert!(summaries_to_text(std::slice::from_ref(g)).contains('*'));
    }

    #[test]
    fn single_row_group() {
        let table = ResultTable {
            rows: vec![row(25, "none", None, 0.4)],
            star_filter: false,
        };
        let g = &aggregate_table(&table).unwrap()[0];
        assert_eq!((g.max, g.mean, g.std), (0.4, Some(0.4), Some(0.0)));
        assert!(g.single_sample);
    }

    #[test]
    fn plot_series_ordered_with_baseline_column() {
        let table = ResultTable {
            rows: vec![
                row(25, "none", None, 0.4),
                row(25, "sot", Some(0.5), 0.6),
                row(25, "sot", Some(-0.5), 0.2),
                row(25, "mcpcr", Some(1.0), 0.5),
            ],
            star_filter: false,
        };
        let sot = emit_plot_data(&table, PlotKind::SotCurve).unwrap();
        assert_eq!(sot.len(), 1);
        let lines: Vec<&str> = sot[0].tsv.lines().collect();
        assert!(lines[1].starts_with("-0.5\t0.2\t0.4\t"));
        assert!(lines[2].starts_with("0.5\t0.6\t0.4\t"));
        assert_eq!(emit_plot_data(&table, PlotKind::IsotropyCurve).unwrap().len(), 2);
        assert!(emit_plot_data(&ResultTable::default(), PlotKind::SotCurve).is_err());
        let baseline_only = ResultTable {
            rows: vec![row(25, "none", None, 0.4)],
            star_filter: false,
        };
        assert!(emit_plot_data(&baseline_only, PlotKind::PcrCurve).is_err());
    }
}
