//! Compresses a K-sparse signal with a seeded Gaussian matrix and recovers it.

use ahdacs::cs::{compress, recover, MeasurementPlan};
use ahdacs::transform::dct_inverse;
use ahdacs::Result;

fn main() -> Result<()> {
    let n = 128;
    for k in [1, 3, 5, 8] {
        let mut spectrum = vec![0.0; n];
        for j in 0..k {
            spectrum[(j * 37 + 5) % n] = 10.0 - j as f64;
        }
        let x = dct_inverse(&spectrum)?;

        let plan = MeasurementPlan::new(k, n, 42 + k as u64)?;
        let packet = compress(&x, plan, (1, 0))?;
        let rec = recover(&packet.measurements, &plan)?;

        let err: f64 = rec.signal.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        println!(
            "K={k}  M={:3}  support {:?}  relative error {:.2e}",
            plan.m,
            rec.support,
            err / norm
        );
    }
    Ok(())
}
