//! Max / mean / sample standard deviation summaries of result groups.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`); 0 for a single value.
    pub std: f64,
    pub count: usize,
}

impl Aggregate {
    /// True when `std` is a placeholder because only one value was available.
    pub fn single_sample(&self) -> bool {
        self.count == 1
    }
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let std = if values.len() > 1 {
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
    } else {
        0.0
    };
    Ok(Aggregate {
        max,
        mean,
        std,
        count: values.len(),
    })
}
