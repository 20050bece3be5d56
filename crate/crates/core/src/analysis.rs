//! Diagnostics of embedding spaces: isotropy, frequency bias, vector length.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evaluation::{pearson, spearman};
use crate::linalg::{sym_eigen_desc, Matrix};
use crate::measures::ChangeRanking;
use crate::vocab::Vocabulary;

/// `log Σ_rows exp(c · row)`, stabilized by the largest exponent.
fn log_partition(x: &Matrix, c: &[f64], sign: f64) -> f64 {
    let exps: Vec<f64> = (0..x.nrows())
        .map(|i| sign * x.row(i).iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + libm::log(exps.iter().map(|e| libm::exp(e - max)).sum::<f64>())
}

/// `min Z(c) / max Z(c)` over the unit eigenvectors `c` of `XᵀX`, both signs,
/// where `Z(c) = Σ_rows exp(cᵀ row)`. The ratio is formed in log space.
pub fn isotropy(x: &Matrix) -> Result<f64> {
    if x.nrows() == 0 || x.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateMatrix);
    }
    let (_, q) = sym_eigen_desc(&(x.transpose() * x))?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..q.ncols() {
        let c: Vec<f64> = q.column(k).iter().copied().collect();
        for sign in [1.0, -1.0] {
            let z = log_partition(x, &c, sign);
            lo = lo.min(z);
            hi = hi.max(z);
        }
    }
    Ok(libm::exp(lo - hi))
}

/// Spearman correlation between change scores and target frequencies.
///
/// Only scored targets enter; `freqs` is usually the second target corpus's vocabulary.
pub fn frequency_bias(ranking: &ChangeRanking, freqs: &Vocabulary) -> Result<f64> {
    let (scores, counts): (Vec<f64>, Vec<f64>) =
        ranking.scored().map(|(w, s)| (s, freqs.frequency_of(w) as f64)).unzip();
    spearman(&scores, &counts)
}

/// Pearson correlation over `(parameter, statistic)` points.
pub fn parameter_correlation(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    let (p, s): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    pearson(&p, &s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsReport {
    pub isotropy: f64,
    /// `None` when too few targets were scored.
    pub frequency_bias: Option<f64>,
    pub mean_vector_length: f64,
}

/// Isotropy and mean vector length of `matrix`, plus frequency bias of `ranking` when available.
pub fn diagnose(matrix: &Matrix, ranking: Option<(&ChangeRanking, &Vocabulary)>) -> Result<DiagnosticsReport> {
    Ok(DiagnosticsReport {
        isotropy: isotropy(matrix)?,
        frequency_bias: ranking.and_then(|(r, v)| frequency_bias(r, v).ok()),
        mean_vector_length: crate::sgns::mean_row_length(matrix),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;
    use nalgebra::Rotation3;
    use rand::Rng;

    // Box-Muller
    fn gaussian<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
    }

    #[test]
    fn identical_rows_are_anisotropic() {
        let mut x = Matrix::zeros(20, 4);
        for i in 0..20 {
            x[(i, 0)] = 5.0;
        }
        assert!(isotropy(&x).unwrap() < 0.5);
    }

    #[test]
    fn signed_basis_is_perfectly_isotropic() {
        let d = 4;
        let mut x = Matrix::zeros(2 * d, d);
        for i in 0..d {
            x[(2 * i, i)] = 0.7;
            x[(2 * i + 1, i)] = -0.7;
        }
        assert!((isotropy(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_sphere_is_nearly_isotropic() {
        let mut rng = crate::rng::stream_rng(11, 0);
        let mut x = Matrix::zeros(500, 10);
        for i in 0..500 {
            let v: Vec<f64> = (0..10).map(|_| gaussian(&mut rng)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            for j in 0..10 {
                x[(i, j)] = v[j] / n;
            }
        }
        assert!(isotropy(&x).unwrap() > 0.7);
    }

    #[test]
    fn rotation_invariance() {
        let mut rng = crate::rng::stream_rng(12, 0);
        let x = Matrix::from_fn(40, 3, |_, _| rng.gen::<f64>() - 0.3);
        let r = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let rm = Matrix::from_row_slice(3, 3, r.matrix().as_slice()).transpose();
        let y = &x * rm;
        assert!((isotropy(&x).unwrap() - isotropy(&y).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn zero_matrix_rejected() {
        assert_eq!(isotropy(&Matrix::zeros(3, 2)), Err(Error::DegenerateMatrix));
    }

    fn ranking_with(scores: &[f64]) -> (ChangeRanking, Vocabulary) {
        let words: Vec<String> = (0..scores.len()).map(|i| alloc::format!("w{i}")).collect();
        let ranking = ChangeRanking::new(words.iter().cloned().zip(scores.iter().map(|s| Some(*s))).collect());
        let vocab = Vocabulary::from_entries(words.into_iter().zip((1..=scores.len() as u64).map(|f| f * 10)));
        (ranking, vocab)
    }

    #[test]
    fn frequency_bias_extremes() {
        let (r, v) = ranking_with(&[10.0, 20.0, 30.0, 40.0, 50.0]);
        assert!((frequency_bias(&r, &v).unwrap() - 1.0).abs() < 1e-12);
        let (r, v) = ranking_with(&[-10.0, -20.0, -30.0, -40.0, -50.0]);
        assert!((frequency_bias(&r, &v).unwrap() + 1.0).abs() < 1e-12);
        let (r, v) = ranking_with(&[0.1, 0.2]);
        assert!(frequency_bias(&r, &v).is_err());
    }

    #[test]
    fn parameter_correlation_cases() {
        let pts = vec![(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)];
        assert!((parameter_correlation(&pts).unwrap() - 1.0).abs() < 1e-12);
        let flat = vec![(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)];
        assert_eq!(parameter_correlation(&flat), Err(Error::UndefinedCorrelation));
        assert!(parameter_correlation(&pts[..2]).is_err());
    }
}
