//! Synthetic sensed phenomena over a square region.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Perpendicular distance to the diagonal `x = y`.
    pub fn distance_to_diagonal(&self) -> f64 {
        (self.x - self.y).abs() / std::f64::consts::SQRT_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Point,
    pub height: f64,
    /// Exponential decay rate per meter.
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldKind {
    GaussianBumps { base: f64, bumps: Vec<Bump> },
    Piecewise { low: f64, high: f64, noise_variance: f64 },
}

/// A deterministic scalar field over `[0, extent]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub extent: f64,
    pub seed: u64,
    pub kind: FieldKind,
}

pub const DEFAULT_EXTENT: f64 = 4000.0;
pub const DEFAULT_BUMP_COUNT: usize = 20;
/// Constant level the bumps sit on in experiments.
pub const DEFAULT_BUMP_BASE: f64 = 10.0;
pub const DEFAULT_BUMP_HEIGHT: f64 = 10.0;
pub const DEFAULT_BUMP_DECAY: f64 = 0.01;
pub const DEFAULT_PIECEWISE_LOW: f64 = 10.0;
pub const DEFAULT_PIECEWISE_HIGH: f64 = 20.0;
pub const DEFAULT_NOISE_VARIANCE: f64 = 0.01;

fn check_extent(extent: f64) -> Result<()> {
    if !(extent.is_finite() && extent > 0.0) {
        return Err(invalid("extent", format!("must be positive, got {extent}")));
    }
    Ok(())
}

/// Constant-zero field plus `bump_count` exponential bumps at uniformly
/// random centers.
pub fn gen_gaussian_bumps(
    extent: f64,
    bump_count: usize,
    height: f64,
    decay: f64,
    seed: u64,
) -> Result<ScalarField> {
    gen_gaussian_bumps_with_base(extent, bump_count, height, decay, 0.0, seed)
}

/// Like [`gen_gaussian_bumps`], on a constant `base` level instead of zero.
pub fn gen_gaussian_bumps_with_base(
    extent: f64,
    bump_count: usize,
    height: f64,
    decay: f64,
    base: f64,
    seed: u64,
) -> Result<ScalarField> {
    check_extent(extent)?;
    if bump_count == 0 {
        return Err(invalid("bump_count", "must be at least 1"));
    }
    if !(height.is_finite() && height > 0.0) {
        return Err(invalid("height", format!("must be positive, got {height}")));
    }
    if !(decay.is_finite() && decay > 0.0) {
        return Err(invalid("decay", format!("must be positive, got {decay}")));
    }
    if !base.is_finite() {
        return Err(invalid("base", "must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(&[seed, 0xB0]));
    let bumps = (0..bump_count)
        .map(|_| Bump {
            center: Point::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent),
            height,
            decay,
        })
        .collect();
    Ok(ScalarField {
        extent,
        seed,
        kind: FieldKind::GaussianBumps { base, bumps },
    })
}

/// Two constant regions split by the diagonal `x = y`, with optional
/// per-position Gaussian noise.
pub fn gen_piecewise(
    extent: f64,
    low: f64,
    high: f64,
    noise_variance: f64,
    seed: u64,
) -> Result<ScalarField> {
    check_extent(extent)?;
    if !(noise_variance.is_finite() && noise_variance >= 0.0) {
        return Err(invalid(
            "noise_variance",
            format!("must be non-negative, got {noise_variance}"),
        ));
    }
    Ok(ScalarField {
        extent,
        seed,
        kind: FieldKind::Piecewise {
            low,
            high,
            noise_variance,
        },
    })
}

impl ScalarField {
    /// Reading at `p`. Positions outside the square are rejected.
    pub fn sample(&self, p: Point) -> Result<f64> {
        let inside = |v: f64| v.is_finite() && (0.0..=self.extent).contains(&v);
        if !inside(p.x) || !inside(p.y) {
            return Err(out_of_range(
                "position",
                format!("({}, {}) outside [0, {}]²", p.x, p.y, self.extent),
            ));
        }
        Ok(self.value(p))
    }

    fn value(&self, p: Point) -> f64 {
        match &self.kind {
            FieldKind::GaussianBumps { base, bumps } => {
                base + bumps
                    .iter()
                    .map(|b| b.height * (-b.decay * p.distance(&b.center)).exp())
                    .sum::<f64>()
            }
            FieldKind::Piecewise {
                low,
                high,
                noise_variance,
            } => {
                let level = if p.x < p.y { *low } else { *high };
                if *noise_variance == 0.0 {
                    level
                } else {
                    level + noise_variance.sqrt() * self.standard_normal_at(p)
                }
            }
        }
    }

    // Box-Muller draw keyed on the 1 m cell containing `p`.
    fn standard_normal_at(&self, p: Point) -> f64 {
        let qx = p.x.floor() as i64 as u64;
        let qy = p.y.floor() as i64 as u64;
        let h1 = seed::derive(&[self.seed, 0x4E, qx, qy]);
        let h2 = seed::splitmix64(h1);
        let u1 = seed::unit_open(h1);
        let u2 = seed::unit_open(h2);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Upper bound on the field value (used by property checks).
    pub fn max_bound(&self) -> f64 {
        match &self.kind {
            FieldKind::GaussianBumps { base, bumps } => {
                base + bumps.iter().map(|b| b.height).sum::<f64>()
            }
            FieldKind::Piecewise { low, high, .. } => low.max(*high),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FieldKind::GaussianBumps { .. } => "bumps",
            FieldKind::Piecewise { .. } => "piecewise",
        }
    }
}
