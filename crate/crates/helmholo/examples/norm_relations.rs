//! Measure the three solution-operator norms (`L2 -> L2`, `L2 -> H1_k`, and
//! the dual `(H1_k)* -> H1_k`) at a few wavenumbers and check the two
//! inequalities relating them:
//!
//! 1. `||.||_{H* -> H} <= (1 + 2 n_max ||.||_{L2 -> H1k}) / min(a_min, n_min)`
//! 2. `||.||_{L2 -> H1k} <= sqrt(3 n_max / (2 a_min) + 1) ||.||_{L2 -> L2}
//!     + 1 / (2 n_min k^2)`
//!
//! Run with: `cargo run --release --example norm_relations`

use helmholo::mesh::assemble_a0;
use helmholo::opnorm::norm_relation_check;
use helmholo::suite::{DEFAULT_PE, DEFAULT_PPW};
use helmholo::{Mesh, PiecewiseCoefficient};

fn main() {
    let n0 = PiecewiseCoefficient::model_n0();
    for k in [20.0, 40.0, 80.0] {
        let mesh = Mesh::build(k, DEFAULT_PPW, DEFAULT_PE, n0.breakpoints()).unwrap();
        let op = assemble_a0(&mesh, &n0).unwrap();
        let rep = norm_relation_check(&op).unwrap();
        println!("k = {k}");
        println!("  ||A0^-1||_{{L2 -> L2}}   = {:.4}", rep.l2_to_l2);
        println!("  ||A0^-1||_{{L2 -> H1k}}  = {:.4}", rep.l2_to_h1k);
        println!("  ||A0^-1||_{{H* -> H1k}}  = {:.4}", rep.hstar_to_h);
        println!(
            "  inequality 1: {:.4} <= {:.4}  [{}]",
            rep.hstar_to_h,
            rep.ineq1_rhs,
            if rep.ineq1_holds { "ok" } else { "VIOLATED" }
        );
        println!(
            "  inequality 2: {:.4} <= {:.4}  [{}]",
            rep.l2_to_h1k,
            rep.ineq2_rhs,
            if rep.ineq2_holds { "ok" } else { "VIOLATED" }
        );
        assert!(rep.ineq1_holds && rep.ineq2_holds);
    }
}
