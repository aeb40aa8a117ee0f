//! Brackets the optimizer between the zero-forcing baseline (transmit only
//! in directions the eavesdropper cannot see) and the no-eavesdropper
//! upper bound on a three-receiver system.
//!
//! Run with `cargo run --example zero_forcing_baseline`.

use secrecy_region::{
    bc_upper_bound, optimal_order, solve_wsr, zf_project, zf_wsr, CMat, ChannelSet, Complex64,
    PowerConstraint, SolverConfig, WeightVector,
};

fn complex(rows: usize, cols: usize, v: &[(f64, f64)]) -> CMat {
    let entries: Vec<Complex64> = v.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    CMat::from_row_slice(rows, cols, &entries)
}

fn main() -> secrecy_region::Result<()> {
    let h1 = complex(
        2,
        2,
        &[(-0.4332, 0.7954), (-0.3152, -1.8835), (-1.0443, 1.2282), (-0.2614, 0.2198)],
    );
    let h2 = complex(
        2,
        2,
        &[(1.3389, -0.5995), (-0.6924, -0.4542), (-1.2542, 0.1338), (-2.1644, 0.6520)],
    );
    let h3 = complex(
        2,
        2,
        &[(1.0291, -0.0212), (-0.3016, -0.3662), (0.1646, 0.5179), (0.3075, 0.2919)],
    );
    let g = complex(1, 2, &[(-0.0875, -0.9443), (-0.4637, 0.7799)]);
    let ch = ChannelSet::new(vec![h1, h2, h3], g)?;
    let w = WeightVector::new(vec![0.15, 0.2, 0.65])?;
    let order = optimal_order(&w);
    let p = PowerConstraint::new(1.0)?;
    let cfg = SolverConfig::default();

    let projected = zf_project(&ch)?;
    println!(
        "eavesdropper-blind subspace: {} of {} transmit dimensions",
        projected.dim(),
        ch.n_t()
    );

    let zf = zf_wsr(&ch, &w, &order, p, &cfg)?;
    let full = solve_wsr(&ch, &w, &order, p, &cfg)?;
    let bound = bc_upper_bound(&ch, &w, &order, p, &cfg)?;
    println!("zero forcing        {:.6}", zf.wsr);
    println!("full optimizer      {:.6}", full.wsr);
    println!("no-eavesdropper cap {:.6}", bound.wsr);
    println!(
        "\nzero forcing pays {:.4} for blindness; secrecy costs {:.4} against the cap",
        full.wsr - zf.wsr,
        bound.wsr - full.wsr
    );
    Ok(())
}
