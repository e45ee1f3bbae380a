//! Measurement counting, seeded Gaussian sensing matrices, and orthogonal
//! matching pursuit recovery in the DCT basis.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::transform::dct_matrix;

/// Tikhonov damping applied when the selected atoms are nearly collinear.
pub const RIDGE: f64 = 1e-10;

/// `M = ceil(K log2 N)`.
pub fn measurement_count(k: usize, n: usize) -> Result<usize> {
    if k < 1 {
        return Err(invalid("k", "sparsity must be >= 1"));
    }
    if n < 2 {
        return Err(invalid("n", format!("vector length must be >= 2, got {n}")));
    }
    Ok((k as f64 * (n as f64).log2()).ceil() as usize)
}

/// N / log2 N, the largest sparsity for which compression pays off.
pub fn gate_bound(n: usize) -> f64 {
    n as f64 / (n as f64).log2()
}

/// Smallest cluster size for which the gate can open.
pub const MIN_GATED_SIZE: usize = 4;

/// CS pays off iff `K < N / log2 N`. Sizes below 4 are never gated open.
pub fn cs_gate(k: usize, n: usize) -> bool {
    n >= MIN_GATED_SIZE && (k as f64) < gate_bound(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementPlan {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl MeasurementPlan {
    pub fn new(k: usize, n: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            k,
            n,
            m: measurement_count(k, n)?,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPacket {
    pub plan: MeasurementPlan,
    pub measurements: Vec<f64>,
    pub origin: (usize, usize),
}

/// `M x N` matrix with i.i.d. N(0, 1/M) entries drawn from `seed`.
pub fn sensing_matrix(m: usize, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if m < 1 || n < 1 {
        return Err(invalid("m", format!("dimensions must be positive, got {m}x{n}")));
    }
    if m > n {
        return Err(invalid("m", format!("{m} measurements exceed length {n}")));
    }
    Ok(gaussian(m, n, seed))
}

fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (1.0 / m as f64).sqrt()).expect("finite std");
    DMatrix::from_row_iterator(m, n, (0..m * n).map(|_| normal.sample(&mut rng)))
}

pub fn measure(matrix: &DMatrix<f64>, x: &[f64]) -> Result<Vec<f64>> {
    if matrix.ncols() != x.len() {
        return Err(invalid(
            "x",
            format!("length {} does not match {} columns", x.len(), matrix.ncols()),
        ));
    }
    Ok((matrix * DVector::from_column_slice(x)).as_slice().to_vec())
}

/// Compresses `x` according to `plan` into a packet.
pub fn compress(x: &[f64], plan: MeasurementPlan, origin: (usize, usize)) -> Result<MeasurementPacket> {
    let phi = sensing_matrix(plan.m, plan.n, plan.seed)?;
    Ok(MeasurementPacket {
        plan,
        measurements: measure(&phi, x)?,
        origin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub signal: Vec<f64>,
    /// Selected DCT atoms, in selection order.
    pub support: Vec<usize>,
    pub residual_norm: f64,
    /// Set when the least-squares step needed ridge damping.
    pub damped: bool,
}

/// Reconstructs the length-N signal from `y` by running OMP for `plan.k`
/// iterations over the dictionary `Φ Ψ`, where `Φ` is regenerated from the
/// plan seed and `Ψ` is the inverse DCT basis.
pub fn recover(y: &[f64], plan: &MeasurementPlan) -> Result<Recovery> {
    if plan.m < 1 {
        return Err(invalid("m", "no measurements to recover from"));
    }
    if y.len() != plan.m {
        return Err(invalid(
            "y",
            format!("length {} does not match plan M = {}", y.len(), plan.m),
        ));
    }
    let phi = gaussian(plan.m, plan.n, plan.seed);
    let basis = dct_matrix(plan.n);
    // x = Ψ s with Ψ = Cᵀ, so the dictionary is Φ Cᵀ.
    let dict = &phi * basis.transpose();
    let y = DVector::from_column_slice(y);
    let (support, coeffs, residual_norm, damped) = omp(&dict, &y, plan.k);

    let mut spectrum = DVector::zeros(plan.n);
    for (&j, &c) in support.iter().zip(coeffs.iter()) {
        spectrum[j] = c;
    }
    let signal = basis.transpose() * spectrum;
    Ok(Recovery {
        signal: signal.as_slice().to_vec(),
        support,
        residual_norm,
        damped,
    })
}

fn omp(dict: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> (Vec<usize>, Vec<f64>, f64, bool) {
    let (m, n) = dict.shape();
    let iterations = k.min(m).min(n);
    let norms: Vec<f64> = dict.column_iter().map(|c| c.norm()).collect();
    let mut support: Vec<usize> = Vec::with_capacity(iterations);
    let mut chosen = vec![false; n];
    let mut coeffs = DVector::zeros(0);
    let mut residual = y.clone();
    let mut damped = false;

    for _ in 0..iterations {
        if residual.norm() == 0.0 {
            break;
        }
        let correlations = dict.tr_mul(&residual);
        let best = (0..n)
            .filter(|&j| !chosen[j] && norms[j] > 0.0)
            .max_by(|&a, &b| {
                let ca = correlations[a].abs() / norms[a];
                let cb = correlations[b].abs() / norms[b];
                ca.total_cmp(&cb).then(b.cmp(&a))
            });
        let Some(j) = best else { break };
        chosen[j] = true;
        support.push(j);

        let sub = dict.select_columns(support.iter());
        let (z, was_damped) = least_squares(&sub, y);
        damped |= was_damped;
        residual = y - &sub * &z;
        coeffs = z;
    }
    let residual_norm = residual.norm();
    (support, coeffs.as_slice().to_vec(), residual_norm, damped)
}

/// Solves `min ‖A z − y‖` via QR, falling back to ridge-damped normal
/// equations when R is numerically singular.
fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, bool) {
    let qr = a.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|d| d.abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if max > 0.0 && min > 1e-10 * max {
        let qty = qr.q().tr_mul(y);
        if let Some(z) = r.solve_upper_triangular(&qty) {
            return (z, false);
        }
    }
    let s = a.ncols();
    let gram = a.tr_mul(a) + DMatrix::identity(s, s) * RIDGE;
    let rhs = a.tr_mul(y);
    let z = gram
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| gram.lu().solve(&rhs))
        .unwrap_or_else(|| DVector::zeros(s));
    (z, true)
}
