//! Samples both synthetic fields on a coarse grid and prints them as text.

use ahdacs::field::Point;
use ahdacs::{gen_gaussian_bumps_with_base, gen_piecewise, Result};

fn main() -> Result<()> {
    let extent = 4000.0;
    let piecewise = gen_piecewise(extent, 10.0, 20.0, 0.01, 7)?;
    let bumps = gen_gaussian_bumps_with_base(extent, 20, 10.0, 0.01, 10.0, 7)?;

    for field in [&piecewise, &bumps] {
        println!("{} field (max bound {:.1})", field.name(), field.max_bound());
        let steps = 8;
        for row in (0..steps).rev() {
            let y = (row as f64 + 0.5) * extent / steps as f64;
            let line: Vec<String> = (0..steps)
                .map(|col| {
                    let x = (col as f64 + 0.5) * extent / steps as f64;
                    format!("{:6.2}", field.sample(Point::new(x, y)).unwrap())
                })
                .collect();
            println!("  {}", line.join(" "));
        }
        println!();
    }

    // Samples outside the square are rejected.
    assert!(piecewise.sample(Point::new(-1.0, 0.0)).is_err());
    Ok(())
}
