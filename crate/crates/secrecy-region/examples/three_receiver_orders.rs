//! Enumerates every encoding order of a three-receiver system at skewed
//! weights and compares the exhaustive best with the descending-weight rule.
//!
//! Run with `cargo run --example three_receiver_orders`.

use secrecy_region::{
    enumerate_orders, optimal_order, CMat, ChannelSet, Complex64, PowerConstraint, SolverConfig,
    WeightVector,
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
    let p = PowerConstraint::new(1.0)?;

    println!("weights {:?}", w.as_slice());
    let report = enumerate_orders(&ch, &w, p, &SolverConfig::default())?;
    println!("{:<14} {:<12} {}", "order", "weighted", "converged");
    for entry in &report.entries {
        println!(
            "{:<14} {:<12.6} {}",
            format!("{:?}", entry.order.one_based()),
            entry.wsr,
            entry.converged
        );
    }
    println!("\nbest order {:?} at {:.6}", report.best().order.one_based(), report.best().wsr);
    println!(
        "descending-weight rule gives {:?} at {:.6} (gap {:.2e})",
        optimal_order(&w).one_based(),
        report.rule().wsr,
        report.best().wsr - report.rule().wsr
    );
    Ok(())
}
