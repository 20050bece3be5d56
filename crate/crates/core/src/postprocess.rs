//! Spectral post-processing: similarity order transformation, mean centring
//! and principal component removal, plus the stacking regimes used to apply
//! them to a pair of aligned matrices.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::align::{AlignedSpaces, JointSpace};
use crate::error::{Error, Result};
use crate::linalg::{
    column_means, ensure_finite, select_rows, shape_error, split_rows, stack_rows, subtract_row_vector, sym_eigen_desc,
    Matrix,
};

pub const DEFAULT_EIGEN_CLAMP: f64 = 1e-10;
/// Largest number of principal components in the reference sweep.
pub const MAX_SWEEP_PCS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SotParams {
    pub alpha: f64,
    /// Eigenvalues below this are raised to it before taking powers.
    pub eigen_clamp: f64,
}

impl SotParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!("alpha {alpha} outside [-1, 1]")));
        }
        Ok(Self {
            alpha,
            eigen_clamp: DEFAULT_EIGEN_CLAMP,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McPcrParams {
    /// Number of leading principal components removed; 0 is mean centring only.
    pub num_pcs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StackingMode {
    /// Transform the vertical stack of both matrices jointly.
    Sta,
    /// Transform each matrix separately.
    Sep,
    /// Separately, then rotate the second back onto the first.
    SepPa,
}

impl StackingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sta => "STA",
            Self::Sep => "SEP",
            Self::SepPa => "SEP_PA",
        }
    }
}

impl fmt::Display for StackingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StackingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['+', '-'], "_").as_str() {
            "sta" => Ok(Self::Sta),
            "sep" => Ok(Self::Sep),
            "sep_pa" => Ok(Self::SepPa),
            _ => Err(Error::InvalidConfig(format!("unknown stacking mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Sot(SotParams),
    McPcr(McPcrParams),
}

impl Transform {
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Self::Sot(p) => sot(x, p),
            Self::McPcr(p) => pc_remove(x, p),
        }
    }

    /// Short label such as `sot_a-0.2` or `mcpcr_m3`; parsed back by [`FromStr`].
    pub fn label(&self) -> String {
        format!("{}{}", self.prefix(), self.parameter())
    }

    /// `"sot"` or `"mcpcr"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Sot(_) => "sot",
            Self::McPcr(_) => "mcpcr",
        }
    }

    /// α for SOT, the number of removed components for MC+PCR.
    pub fn parameter(&self) -> f64 {
        match self {
            Self::Sot(p) => p.alpha,
            Self::McPcr(p) => p.num_pcs as f64,
        }
    }

    fn prefix(&self) -> &'static str {
        match self {
            Self::Sot(_) => "sot_a",
            Self::McPcr(_) => "mcpcr_m",
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown transform `{s}`"));
        if let Some(alpha) = s.strip_prefix("sot_a") {
            Ok(Self::Sot(SotParams::new(alpha.parse().map_err(|_| bad())?)?))
        } else if let Some(m) = s.strip_prefix("mcpcr_m") {
            Ok(Self::McPcr(McPcrParams {
                num_pcs: m.parse().map_err(|_| bad())?,
            }))
        } else {
            Err(bad())
        }
    }
}

/// `X' = X Q λ^α` with `XᵀX = QλQᵀ`, eigenvalues descending and clamped from below.
pub fn sot(x: &Matrix, p: &SotParams) -> Result<Matrix> {
    ensure_finite(x)?;
    let (values, q) = sym_eigen_desc(&(x.transpose() * x))?;
    let scale: Vec<f64> = values
        .iter()
        .map(|&l| libm::pow(l.max(p.eigen_clamp), p.alpha))
        .collect();
    let mut w = q;
    for (c, s) in scale.iter().enumerate() {
        w.column_mut(c).scale_mut(*s);
    }
    Ok(x * w)
}

/// Subtracts the centroid from every row.
pub fn mean_center(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    if x.nrows() > 0 {
        subtract_row_vector(&mut out, &column_means(x, None));
    }
    out
}

/// Leading principal directions (as columns) and variances of the
/// mean-centred data, covariance divisor `n`.
pub fn principal_components(centered: &Matrix) -> Result<(nalgebra::DVector<f64>, Matrix)> {
    let n = centered.nrows().max(1) as f64;
    let cov = centered.transpose() * centered / n;
    sym_eigen_desc(&cov)
}

/// Mean-centres `x` and removes its projection onto the top `num_pcs` principal components.
pub fn pc_remove(x: &Matrix, p: &McPcrParams) -> Result<Matrix> {
    ensure_finite(x)?;
    if p.num_pcs > x.ncols() {
        return Err(Error::InvalidConfig(format!(
            "cannot remove {} components from {}-dimensional vectors",
            p.num_pcs,
            x.ncols()
        )));
    }
    let centered = mean_center(x);
    if p.num_pcs == 0 || x.nrows() == 0 {
        return Ok(centered);
    }
    let (_, vectors) = principal_components(&centered)?;
    let top = vectors.columns(0, p.num_pcs);
    let projection = &centered * top * top.transpose();
    Ok(centered - projection)
}

/// Applies `transform` to a pair of matrices under the given stacking mode.
///
/// `shared` lists `(row_in_a, row_in_b)` pairs of the same word; it is only
/// used by [`StackingMode::SepPa`] for the post-alignment.
pub fn apply_stacked(
    a: &Matrix,
    b: &Matrix,
    shared: &[(usize, usize)],
    transform: &Transform,
    mode: StackingMode,
) -> Result<(Matrix, Matrix)> {
    if a.ncols() != b.ncols() {
        return Err(shape_error(a, b));
    }
    match mode {
        StackingMode::Sta => {
            let out = transform.apply(&stack_rows(a, b)?)?;
            Ok(split_rows(&out, a.nrows()))
        }
        StackingMode::Sep => Ok((transform.apply(a)?, transform.apply(b)?)),
        StackingMode::SepPa => {
            let ta = transform.apply(a)?;
            let tb = transform.apply(b)?;
            if shared.is_empty() {
                return Err(Error::EmptySharedVocabulary);
            }
            let sa = select_rows(&ta, shared.iter().map(|p| p.0));
            let sb = select_rows(&tb, shared.iter().map(|p| p.1));
            let w = crate::align::solve_orthogonal_procrustes(&sa, &sb)?;
            Ok((ta, tb * w))
        }
    }
}

/// Post-processes aligned spaces. WI spaces are transformed through their
/// single joint matrix, so `mode` has no effect for them.
pub fn postprocess_spaces(spaces: &AlignedSpaces, transform: &Transform, mode: StackingMode) -> Result<AlignedSpaces> {
    if let Some(joint) = &spaces.joint {
        let matrix = transform.apply(&joint.matrix)?;
        let mut out = AlignedSpaces::from_joint(
            JointSpace {
                matrix,
                ..joint.clone()
            },
            spaces.pretrain,
        );
        out.notes = spaces.notes.clone();
        if mode != StackingMode::Sta {
            out.notes
                .push(format!("stacking mode {mode} ignored for a single joint space"));
        }
        out.notes.push(transform.label());
        return Ok(out);
    }
    let (a, b) = apply_stacked(
        &spaces.matrix_a,
        &spaces.matrix_b,
        &spaces.shared_rows(),
        transform,
        mode,
    )?;
    let mut out = spaces.with_matrices(a, b)?;
    if mode == StackingMode::SepPa && matches!(transform, Transform::McPcr(_)) {
        out.notes
            .push(String::from("SEP_PA with MC+PCR: plain SEP is usually sufficient"));
    }
    out.notes.push(format!("{}+{}", transform.label(), mode));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    German,
    English,
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ger" | "german" | "de" => Ok(Self::German),
            "eng" | "english" | "en" => Ok(Self::English),
            _ => Err(Error::InvalidConfig(format!("unknown language `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageProfile {
    pub dim: usize,
    pub language: Option<Language>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    /// Grid of α values worth searching.
    pub alpha_grid: Vec<f64>,
    /// Single α to try first.
    pub alpha_default: f64,
    /// Grid for the number of removed components.
    pub pcs_grid: Vec<usize>,
    /// Rule-of-thumb component count, `round(d / 100)`.
    pub pcs_heuristic: usize,
    pub stacking: StackingMode,
}

/// Rule-of-thumb number of components to remove for dimensionality `dim`.
pub fn pcs_heuristic(dim: usize) -> usize {
    (dim + 50) / 100
}

fn alpha_range(lo_tenths: i32, hi_tenths: i32) -> Vec<f64> {
    (lo_tenths..=hi_tenths).map(|t| t as f64 / 10.0).collect()
}

/// Documented starting points for the post-processing parameters.
pub fn recommend_params(profile: &LanguageProfile) -> Recommendation {
    let (alpha_grid, alpha_default) = match profile.language {
        Some(Language::German) => (alpha_range(-2, 3), 0.0),
        Some(Language::English) => (alpha_range(-4, 1), -0.2),
        None => (alpha_range(-4, 3), -0.1),
    };
    Recommendation {
        alpha_grid,
        alpha_default,
        pcs_grid: (0..=5).collect(),
        pcs_heuristic: pcs_heuristic(profile.dim),
        stacking: StackingMode::Sta,
    }
}

/// α from -1 to 1 in steps of 0.1 (21 values).
pub fn sot_sweep_grid() -> Vec<f64> {
    alpha_range(-10, 10)
}

/// Component counts 0..=25.
pub fn pcr_sweep_grid() -> Vec<usize> {
    (0..=MAX_SWEEP_PCS).collect()
}
