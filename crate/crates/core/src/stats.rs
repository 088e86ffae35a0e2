//! Order-independent Monte Carlo accumulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation over a slice in its given order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    /// Largest single-path contribution, an undersampling diagnostic for
    /// heavy-tailed functionals.
    pub max: f64,
    pub n: usize,
}

impl Estimate {
    pub fn exact(v: f64) -> Self {
        Self { mean: v, se: 0.0, max: v, n: 1 }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: 0.0, se: 0.0, max: 0.0, n: 0 };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 { pairwise_sum(&dev) / (n - 1) as f64 } else { 0.0 };
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, se: (var / n as f64).sqrt(), max, n }
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.se.is_finite()
    }
}

/// Evaluates `f(i)` for `i in 0..n` on a pool of `threads` workers and returns
/// the results in index order. `threads = 0` uses rayon's default.
pub fn par_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
    match pool {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}
