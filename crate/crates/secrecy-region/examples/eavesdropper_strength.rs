//! Scales the eavesdropper channel from absent to full strength and shows
//! how the best weighted secrecy rate and the power split respond.
//!
//! Run with `cargo run --example eavesdropper_strength`.

use secrecy_region::{
    optimal_order, solve_wsr, CMat, ChannelSet, Complex64, PowerConstraint, SolverConfig,
    WeightVector,
};

fn real(rows: usize, cols: usize, v: &[f64]) -> CMat {
    let entries: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    CMat::from_row_slice(rows, cols, &entries)
}

fn main() -> secrecy_region::Result<()> {
    let h1 = real(2, 2, &[1.0, 0.8, 0.5, 2.0]);
    let h2 = real(2, 2, &[0.2, 1.0, 2.0, 0.5]);
    let g = real(2, 2, &[1.0, 0.4, -0.4, 1.0]);
    let base = ChannelSet::new(vec![h1, h2], g)?;
    let w = WeightVector::new(vec![0.5, 0.5])?;
    let order = optimal_order(&w);
    let p = PowerConstraint::new(1.0)?;
    let cfg = SolverConfig::default();

    println!("{:<8} {:<12} {:<12} {:<10} {:<10}", "scale", "weighted", "sum", "pow user1", "pow user2");
    for step in 0..=5 {
        let delta = step as f64 / 5.0;
        let ch = base.with_scaled_eavesdropper(delta)?;
        let sol = solve_wsr(&ch, &w, &order, p, &cfg)?;
        println!(
            "{:<8.1} {:<12.6} {:<12.6} {:<10.4} {:<10.4}",
            delta,
            sol.wsr,
            sol.rates.sum(),
            sol.covariances.get(0).trace(),
            sol.covariances.get(1).trace()
        );
    }
    println!("\na stronger eavesdropper can only shrink the achievable rates");
    Ok(())
}
