//! Solves the bundled two-receiver system at equal weights under both
//! encoding orders and prints the two corner points of the rate region.
//!
//! Run with `cargo run --example two_receiver_corners`.

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
    let p = PowerConstraint::new(1.0)?;
    let cfg = SolverConfig::default();

    println!("two receivers, one eavesdropper, power budget {}", p.value());
    for perm in [vec![0, 1], vec![1, 0]] {
        let order = EncodingOrder::new(perm)?;
        let sol = solve_wsr(&ch, &w, &order, p, &cfg)?;
        println!("\nencoding order {:?} (first listed is encoded first)", order.one_based());
        for (k, r) in sol.rates.as_slice().iter().enumerate() {
            println!("  user {} secrecy rate {r:.4} nats", k + 1);
        }
        println!(
            "  sum {:.4} nats, power used {:.4}, converged: {}",
            sol.rates.sum(),
            sol.power_used,
            sol.converged
        );
    }
    println!("\nthe order swap trades rate between the users at the same sum");
    Ok(())
}
