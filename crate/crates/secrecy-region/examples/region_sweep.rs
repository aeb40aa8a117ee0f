//! Sweeps the weight simplex for a two-receiver system, prints every
//! sample, and reduces the cloud to the Pareto frontier of the region.
//!
//! Run with `cargo run --example region_sweep`.

use secrecy_region::{
    sweep_weights, CMat, ChannelSet, Complex64, PowerConstraint, RegionHull, SolverConfig,
};

fn real(rows: usize, cols: usize, v: &[f64]) -> CMat {
    let entries: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    CMat::from_row_slice(rows, cols, &entries)
}

fn main() -> secrecy_region::Result<()> {
    let h1 = real(2, 2, &[1.0, -0.5, 0.5, 2.0]);
    let h2 = real(2, 2, &[-0.3, 1.0, 2.0, -0.4]);
    let g = real(1, 2, &[0.8, -1.6]);
    let ch = ChannelSet::new(vec![h1, h2], g)?;
    let p = PowerConstraint::new(1.0)?;
    let cfg = SolverConfig::default();

    let sweep = sweep_weights(&ch, p, &cfg, 0.1)?;
    print!("{}", sweep.to_csv());

    match &sweep.hull {
        RegionHull::Two { points } => {
            println!("\npareto frontier ({} vertices):", points.len());
            for [r1, r2] in points {
                println!("  ({r1:.4}, {r2:.4})");
            }
        }
        RegionHull::Three { points, .. } => {
            println!("\nnondominated cloud: {} points", points.len());
        }
    }
    Ok(())
}
