//! Orthonormal DCT-II, coefficient truncation and sparsity estimation.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

pub const DEFAULT_TRUNCATION: f64 = 0.01;

fn scale(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Orthonormal DCT-II matrix; row `k` is the k-th basis vector.
pub fn dct_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |k, i| {
        scale(k, n) * (PI / n as f64 * (i as f64 + 0.5) * k as f64).cos()
    })
}

pub fn dct_forward(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(invalid("x", "empty vector"));
    }
    Ok((0..n)
        .map(|k| {
            let w = PI / n as f64 * k as f64;
            scale(k, n)
                * x.iter()
                    .enumerate()
                    .map(|(i, &v)| v * (w * (i as f64 + 0.5)).cos())
                    .sum::<f64>()
        })
        .collect())
}

pub fn dct_inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    let n = coeffs.len();
    if n == 0 {
        return Err(invalid("coeffs", "empty vector"));
    }
    Ok((0..n)
        .map(|i| {
            let t = PI / n as f64 * (i as f64 + 0.5);
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| scale(k, n) * c * (t * k as f64).cos())
                .sum()
        })
        .collect())
}

/// Coefficients surviving a relative magnitude cut.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    pub len: usize,
    /// `(index, value)` in ascending index order.
    pub kept: Vec<(usize, f64)>,
    pub fraction: f64,
}

impl SparseSpectrum {
    pub fn k(&self) -> usize {
        self.kept.len()
    }

    pub fn densify(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for &(i, v) in &self.kept {
            out[i] = v;
        }
        out
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid(
            "fraction",
            format!("must lie in (0, 1), got {fraction}"),
        ));
    }
    Ok(())
}

/// Keeps every coefficient with `|c| >= fraction * max|c|`. An all-zero
/// input yields an empty spectrum.
pub fn truncate(coeffs: &[f64], fraction: f64) -> Result<SparseSpectrum> {
    check_fraction(fraction)?;
    if coeffs.is_empty() {
        return Err(invalid("coeffs", "empty vector"));
    }
    let peak = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let kept = if peak == 0.0 {
        Vec::new()
    } else {
        let cut = fraction * peak;
        coeffs
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, c)| c.abs() >= cut)
            .collect()
    };
    Ok(SparseSpectrum {
        len: coeffs.len(),
        kept,
        fraction,
    })
}

/// K: number of DCT coefficients of `readings` above the truncation cut.
pub fn estimate_sparsity(readings: &[f64], fraction: f64) -> Result<usize> {
    check_fraction(fraction)?;
    let spectrum = truncate(&dct_forward(readings)?, fraction)?;
    let nonzero = readings.iter().any(|&v| v != 0.0);
    Ok(if nonzero { spectrum.k().max(1) } else { 0 })
}
