//! Transforms an optimized downlink solution to its uplink counterpart and
//! back, showing that per-user rates and total power survive both trips.
//!
//! Run with `cargo run --example uplink_transform`.

use secrecy_region::channel::{mac_rates, secrecy_rates};
use secrecy_region::duality::{bc_to_mac, mac_to_bc};
use secrecy_region::{
    solve_wsr, CMat, ChannelSet, Complex64, EncodingOrder, PowerConstraint, SolverConfig,
    WeightVector,
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
    let w = WeightVector::new(vec![0.5, 0.5])?;
    let order = EncodingOrder::new(vec![0, 1])?;
    let sol = solve_wsr(&ch, &w, &order, PowerConstraint::new(1.0)?, &SolverConfig::default())?;

    let (sigma, _) = bc_to_mac(&ch, &sol.covariances, &order)?;
    let down = secrecy_rates(&ch.without_eavesdropper(), &sol.covariances, &order)?;
    let up = mac_rates(&ch, &sigma, &order)?;
    println!("{:<8} {:<14} {:<14}", "user", "downlink rate", "uplink rate");
    for k in 0..ch.num_users() {
        println!("{:<8} {:<14.8} {:<14.8}", k + 1, down.get(k), up.get(k));
    }
    println!(
        "\ntotal power downlink {:.8}, uplink {:.8}",
        sol.covariances.total_power(),
        sigma.total_power()
    );

    let (back, _) = mac_to_bc(&ch, &sigma, &order)?;
    let drift: f64 = (0..ch.num_users())
        .map(|k| (back.get(k).matrix() - sol.covariances.get(k).matrix()).norm())
        .fold(0.0, f64::max);
    println!("round-trip covariance drift {drift:.2e}");
    Ok(())
}
