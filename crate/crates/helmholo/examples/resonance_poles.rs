//! Locate the solution-operator poles along the sharpness sequence
//! `k = 2 pi m sqrt(2)` with two independent methods: Newton iteration on
//! the transcendental resonance equation and eigenvalues of the matrix
//! pencil `A0 + y P1`.
//!
//! The scaled distance `k |y|` stays in a strip and approaches
//! `sqrt(2) |artanh(1/sqrt(2))| ~ 1.24645` from below.
//!
//! Run with: `cargo run --release --example resonance_poles`

use helmholo::poles::k_sequence_experiment;
use helmholo::suite::{DEFAULT_PE, K_ABS_Y_LIMIT};

fn main() {
    let report = k_sequence_experiment(5, 25, 12, 40.0, DEFAULT_PE).unwrap();
    println!(
        "{:>4} {:>10} {:>24} {:>10} {:>12} {:>10}",
        "m", "k", "y (transcendental)", "k |y|", "pencil rel", "residual"
    );
    for row in &report.rows {
        let agreement = row
            .agreement
            .map(|a| format!("{a:.2e}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>4} {:>10.3} {:>11.4e}+{:.4e}i {:>10.6} {:>12} {:>10.2e}",
            row.m,
            row.k,
            row.y_transcendental.re,
            row.y_transcendental.im,
            row.k_abs_y,
            agreement,
            row.residual
        );
    }
    println!(
        "\nk|y| range [{:.5}, {:.5}], asymptote {K_ABS_Y_LIMIT:.5}",
        report.min_k_abs_y, report.max_k_abs_y
    );
}
