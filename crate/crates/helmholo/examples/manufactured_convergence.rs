//! Convergence study of the P1 finite-element solver against a manufactured
//! solution with exact boundary conditions:
//!
//! `u(x) = e^{ikx} - (1 - x/2)^4` satisfies `u(0) = 0` and the impedance
//! condition at `x = 2`, and the matching load is
//! `f = -(k^{-2} u'' + n0 u)`.  The L2 error decreases at second order.
//!
//! Run with: `cargo run --release --example manufactured_convergence`

use helmholo::mesh::{assemble_a0, assemble_load_fn, solve};
use helmholo::{C64, Mesh, PiecewiseCoefficient};

fn exact_u(k: f64, x: f64) -> C64 {
    C64::new(0.0, k * x).exp() - C64::new((1.0 - x / 2.0).powi(4), 0.0)
}

fn load_f(k: f64, x: f64) -> C64 {
    let n0 = if x < 1.0 { 0.5 } else { 1.0 };
    C64::new(0.0, k * x).exp() + C64::new(3.0 * (1.0 - x / 2.0).powi(2) / (k * k), 0.0)
        - n0 * exact_u(k, x)
}

/// L2 error of the P1 solution by per-element Simpson quadrature.
fn l2_error(mesh: &Mesh, values: &[C64]) -> f64 {
    let nodes = mesh.nodes();
    let k = mesh.k();
    let mut acc = 0.0;
    for e in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let xm = 0.5 * (x0 + x1);
        let um = 0.5 * (values[e] + values[e + 1]);
        acc += (x1 - x0) / 6.0
            * ((values[e] - exact_u(k, x0)).norm_sqr()
                + 4.0 * (um - exact_u(k, xm)).norm_sqr()
                + (values[e + 1] - exact_u(k, x1)).norm_sqr());
    }
    acc.sqrt()
}

fn main() {
    let k = 10.0;
    let mut mesh = Mesh::build(k, 20.0, 1.0, &[0.0, 1.0, 2.0]).unwrap();
    println!("{:>8} {:>12} {:>12} {:>8}", "n_elems", "h_max", "L2 error", "order");
    let mut prev: Option<f64> = None;
    for _ in 0..5 {
        let op = assemble_a0(&mesh, &PiecewiseCoefficient::model_n0()).unwrap();
        let load = assemble_load_fn(&mesh, |x| load_f(k, x));
        let sol = solve(&op, &[], &load).unwrap();
        let err = l2_error(&mesh, &sol.values);
        let order = prev
            .map(|p| format!("{:.2}", (p / err).log2()))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>8} {:>12.4e} {:>12.4e} {:>8}",
            mesh.n_elements(),
            mesh.h_max(),
            err,
            order
        );
        prev = Some(err);
        mesh = mesh.refined();
    }
}
