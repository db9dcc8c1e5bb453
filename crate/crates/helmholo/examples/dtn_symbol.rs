//! Evaluate the 2-d Dirichlet-to-Neumann symbol
//! `DtN(n, z) = H1_{n-1}(z)/H1_n(z) - n/z` across Fourier modes and verify
//! its sign properties: `Im > 0` (outgoing energy flux) and `Re <= 0`
//! (dissipation), including deep in the evanescent regime `n >> z`.
//!
//! Run with: `cargo run --release --example dtn_symbol`

use helmholo::dtn::{check_sign_properties, dtn_symbol};

fn main() {
    let z = 10.0;
    println!("symbol at z = kR = {z}");
    println!("{:>6} {:>16} {:>16}", "n", "Re", "Im");
    for n in [0, 1, 2, 5, 10, 12, 15, 20, 40, 80] {
        let s = dtn_symbol(n, z).unwrap();
        println!("{:>6} {:>16.8e} {:>16.8e}", n, s.value.re, s.value.im);
    }

    // propagating modes (n < z) keep Im ~ 1; evanescent modes (n > z)
    // decay like exp(-2 n log(2n/ez)) but stay strictly positive
    let report = check_sign_properties(50, &[1.0, 10.0, 100.0]).unwrap();
    println!(
        "\nsign check over |n| <= 50, z in {{1, 10, 100}}: min Im = {:.3e}, max Re = {:.3e}",
        report.min_im, report.max_re
    );
    assert!(report.all_pass);

    let outgoing = dtn_symbol(0, 1e3).unwrap();
    println!(
        "outgoing limit: symbol(0, 1e3) = {:.6}+{:.6}i (-> i)",
        outgoing.value.re, outgoing.value.im
    );
}
