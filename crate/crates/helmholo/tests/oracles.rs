//! Independent cross-checks of the core numerics on coarse meshes:
//!
//! * operator norms from the generalized power iteration against dense
//!   singular-value decompositions (nalgebra),
//! * the finite-element solver against a manufactured solution with known
//!   convergence order,
//! * the strong-form `H2_k` seminorm against direct quadrature of the exact
//!   second derivative.

use helmholo::linalg::Tridiag;
use helmholo::mesh::{
    assemble_a0, assemble_load_fn, h2k_seminorm_via_pde, solve,
};
use helmholo::opnorm::{dual_source_operator_norm, solution_operator_norm, NormKind};
use helmholo::{C64, Mesh, PiecewiseCoefficient};
use nalgebra::DMatrix;

fn dense(t: &Tridiag) -> DMatrix<C64> {
    let n = t.dim();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            t.d[i]
        } else if j + 1 == i {
            t.dl[j]
        } else if i + 1 == j {
            t.du[i]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Symmetric square root of a real SPD matrix, promoted to complex.
fn sqrt_spd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let real = DMatrix::from_fn(n, n, |i, j| m[(i, j)].re);
    let eig = real.symmetric_eigen();
    let mut s = DMatrix::zeros(n, n);
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        assert!(lambda > 0.0, "Gram matrix not positive definite");
        let q = eig.eigenvectors.column(idx);
        s += lambda.sqrt() * &q * q.transpose();
    }
    s.map(|x| C64::new(x, 0.0))
}

fn sigma_max(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values[0]
}

#[test]
fn operator_norms_match_dense_svd() {
    let mesh = Mesh::build(12.0, 20.0, 1.0, &[0.0, 1.0, 2.0]).unwrap();
    let op = assemble_a0(&mesh, &PiecewiseCoefficient::model_n0()).unwrap();
    let a = dense(&op.system);
    let a_inv = a.clone().lu().try_inverse().expect("A0 invertible");
    let mass = dense(&op.mass);
    let kk = mesh.k() * mesh.k();
    let w1 = dense(&op.stiffness) / C64::new(kk, 0.0) + &mass;
    let ms = sqrt_spd(&mass);
    let w1s = sqrt_spd(&w1);

    // L2 -> L2: sigma_max(M^{1/2} A^{-1} M^{1/2})
    let reference = sigma_max(&(&ms * &a_inv * &ms));
    let est = solution_operator_norm(&op, NormKind::L2, NormKind::L2).unwrap();
    assert!(
        (est.value - reference).abs() <= 1e-6 * reference,
        "L2->L2: power iteration {} vs dense {reference}",
        est.value
    );

    // L2 -> H1_k: sigma_max(W1^{1/2} A^{-1} M^{1/2})
    let reference = sigma_max(&(&w1s * &a_inv * &ms));
    let est = solution_operator_norm(&op, NormKind::L2, NormKind::H1k).unwrap();
    assert!(
        (est.value - reference).abs() <= 1e-6 * reference,
        "L2->H1k: power iteration {} vs dense {reference}",
        est.value
    );

    // (H1_k)* -> H1_k: sigma_max(W1^{1/2} A^{-1} W1^{1/2})
    let reference = sigma_max(&(&w1s * &a_inv * &w1s));
    let est = dual_source_operator_norm(&op).unwrap();
    assert!(
        (est.value - reference).abs() <= 1e-6 * reference,
        "dual->H1k: power iteration {} vs dense {reference}",
        est.value
    );
}

/// `u(x) = e^{ikx} - (1 - x/2)^4` satisfies `u(0) = 0` and the impedance
/// condition at `x = 2` exactly; the matching load is
/// `f = -(k^{-2} u'' + n0 u)` with `u'' = -k^2 e^{ikx} - 3 (1 - x/2)^2`.
fn exact_u(k: f64, x: f64) -> C64 {
    C64::new(0.0, k * x).exp() - C64::new((1.0 - x / 2.0).powi(4), 0.0)
}

fn load_f(k: f64, x: f64) -> C64 {
    let n0 = if x < 1.0 { 0.5 } else { 1.0 };
    C64::new(0.0, k * x).exp() + C64::new(3.0 * (1.0 - x / 2.0).powi(2) / (k * k), 0.0)
        - n0 * exact_u(k, x)
}

/// Continuum L2 error of the P1 solution against the exact solution, by
/// per-element Simpson quadrature.
fn l2_error(mesh: &Mesh, values: &[C64]) -> f64 {
    let nodes = mesh.nodes();
    let k = mesh.k();
    let mut acc = 0.0;
    for e in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let xm = 0.5 * (x0 + x1);
        let um = 0.5 * (values[e] + values[e + 1]);
        let g0 = (values[e] - exact_u(k, x0)).norm_sqr();
        let gm = (um - exact_u(k, xm)).norm_sqr();
        let g1 = (values[e + 1] - exact_u(k, x1)).norm_sqr();
        acc += (x1 - x0) / 6.0 * (g0 + 4.0 * gm + g1);
    }
    acc.sqrt()
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let k = 10.0;
    let coarse = Mesh::build(k, 40.0, 1.0, &[0.0, 1.0, 2.0]).unwrap();
    let fine = coarse.refined();
    let errs: Vec<f64> = [&coarse, &fine]
        .iter()
        .map(|mesh| {
            let op = assemble_a0(mesh, &PiecewiseCoefficient::model_n0()).unwrap();
            let load = assemble_load_fn(mesh, |x| load_f(k, x));
            let sol = solve(&op, &[], &load).unwrap();
            l2_error(mesh, &sol.values)
        })
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!(
        (1.7..=2.4).contains(&order),
        "L2 convergence order {order} (errors {errs:?})"
    );
    // |u''| ~ k^2, so the expected error level is ~ (kh)^2 / pi^2
    assert!(errs[1] < 4e-3, "fine-mesh L2 error too large: {}", errs[1]);
}

#[test]
fn h2k_seminorm_matches_exact_second_derivative() {
    let k = 10.0;
    let mesh = Mesh::build(k, 80.0, 1.0, &[0.0, 1.0, 2.0]).unwrap();
    let op = assemble_a0(&mesh, &PiecewiseCoefficient::model_n0()).unwrap();
    let load = assemble_load_fn(&mesh, |x| load_f(k, x));
    let sol = solve(&op, &[], &load).unwrap();
    let seminorm =
        h2k_seminorm_via_pde(&sol, &mesh, &PiecewiseCoefficient::model_n0(), |x| load_f(k, x))
            .unwrap();
    // reference: || k^{-2} u'' ||_{L2(0,2)} by fine composite Simpson
    let g = |x: f64| {
        (C64::new(0.0, k * x).exp() + C64::new(3.0 * (1.0 - x / 2.0).powi(2) / (k * k), 0.0))
            .norm_sqr()
    };
    let m = 20_000;
    let h = 2.0 / m as f64;
    let mut acc = 0.0;
    for i in 0..m {
        let x0 = i as f64 * h;
        acc += h / 6.0 * (g(x0) + 4.0 * g(x0 + 0.5 * h) + g(x0 + h));
    }
    let reference = acc.sqrt();
    assert!(
        (seminorm - reference).abs() <= 1e-2 * reference,
        "H2k seminorm {seminorm} vs exact {reference}"
    );
}
