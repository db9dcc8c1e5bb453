//! Sweep the base solution-operator norm `||A0^{-1}(k)||_{L2 -> L2}` over a
//! log-spaced range of wavenumbers and fit the growth exponent.
//!
//! For the nontrapping model coefficient the norm grows like `k^1`, so the
//! fitted log-log slope lands near 1 and `estimate / k` stays bounded.
//!
//! Run with: `cargo run --release --example norm_sweep`

use helmholo::opnorm::{k_sweep, NormKind};
use helmholo::suite::{DEFAULT_PE, DEFAULT_PPW};
use helmholo::PiecewiseCoefficient;

fn main() {
    let n0 = PiecewiseCoefficient::model_n0();
    let ks: Vec<f64> = (0..25)
        .map(|i| 10.0 * (200.0f64 / 10.0).powf(i as f64 / 24.0))
        .collect();
    let table = k_sweep(&n0, &ks, (NormKind::L2, NormKind::L2), DEFAULT_PPW, DEFAULT_PE);

    println!("{:>10} {:>14} {:>12} {:>6}", "k", "||A0^-1||", "norm/k", "iters");
    for row in &table.rows {
        println!(
            "{:>10.3} {:>14.6} {:>12.6} {:>6}",
            row.k,
            row.value,
            row.value / row.k,
            row.iterations
        );
    }
    if let Some(msg) = &table.aborted {
        eprintln!("sweep aborted: {msg}");
        std::process::exit(2);
    }
    match &table.fit {
        Some(fit) => println!(
            "\nfitted slope over the upper half of the sweep: {:.4} (fit residual {:.2e})",
            fit.slope, fit.residual
        ),
        None => println!("\ntoo few rows for a slope fit"),
    }
}
