//! P1 finite-element discretization of the truncated 1-d Helmholtz problem
//!
//! ```text
//! k^{-2} u'' + n(x) u = -f  on (0, R),
//! u(0) = 0,  (k^{-1} d/dx - i) u |_{x=R} = 0,
//! ```
//!
//! in weak form `a0(u, v) = k^{-2} (u', v') - (n u, v) - i k^{-1} u(R) conj(v(R))
//! = (f, v)`.  All element integrals use Gauss-Legendre quadrature that is
//! exact for the piece polynomials times P1 basis products.

use crate::coeffs::PiecewiseCoefficient;
use crate::linalg::{Tridiag, TriLu};
use crate::{C64, Error, Result};

/// 8-point Gauss-Legendre rule on [0, 1]; exact for polynomials of degree
/// up to 15.
pub const QUAD: [(f64, f64); 8] = [
    (0.019855071751231856, 0.05061426814518813),
    (0.10166676129318664, 0.11119051722668724),
    (0.2372337950418355, 0.15685332293894363),
    (0.40828267875217505, 0.18134189168918098),
    (0.591717321247825, 0.18134189168918098),
    (0.7627662049581645, 0.15685332293894363),
    (0.8983332387068134, 0.11119051722668724),
    (0.9801449282487682, 0.05061426814518813),
];

/// Mesh on `[0, R]` whose nodes include every coefficient breakpoint.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<f64>,
    k: f64,
    ppw: f64,
    pollution_exp: f64,
}

impl Mesh {
    /// Uniform-by-piece mesh with target element size
    /// `h = min(2 pi / (k ppw), 2 pi / (ppw k^pollution_exp))`: `ppw` points
    /// per wavelength, with the wavenumber inflated to `k^pollution_exp` to
    /// suppress the pollution error.  Breakpoints become nodes.
    pub fn build(k: f64, ppw: f64, pollution_exp: f64, breakpoints: &[f64]) -> Result<Self> {
        if k <= 0.0 {
            return Err(Error::Domain(format!("wavenumber k = {k} must be positive")));
        }
        if ppw < 10.0 {
            return Err(Error::Domain(format!("ppw = {ppw} below minimum of 10")));
        }
        let mut bps: Vec<f64> = breakpoints.to_vec();
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bps.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        if bps.len() < 2 || bps[0] != 0.0 {
            return Err(Error::Domain(
                "breakpoints must start at 0 and span a nonempty domain".into(),
            ));
        }
        let tau = 2.0 * std::f64::consts::PI / ppw;
        let h_target = (tau / k).min(tau * k.powf(-pollution_exp));
        let mut nodes = vec![0.0];
        for w in bps.windows(2) {
            let span = w[1] - w[0];
            let m = (span / h_target).ceil().max(1.0) as usize;
            for i in 1..=m {
                nodes.push(w[0] + span * i as f64 / m as f64);
            }
        }
        Ok(Self {
            nodes,
            k,
            ppw,
            pollution_exp,
        })
    }

    /// Same mesh policy with every element split in two.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len());
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Self {
            nodes,
            k: self.k,
            ppw: self.ppw,
            pollution_exp: self.pollution_exp,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn ppw(&self) -> f64 {
        self.ppw
    }

    pub fn pollution_exp(&self) -> f64 {
        self.pollution_exp
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of degrees of freedom after eliminating the Dirichlet node.
    pub fn n_dofs(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn domain_end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn h_max(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn contains_node(&self, x: f64) -> bool {
        self.nodes.iter().any(|&n| (n - x).abs() < 1e-12)
    }

    /// Drop the Dirichlet node value (index 0).
    pub fn restrict(&self, full: &[C64]) -> Vec<C64> {
        assert_eq!(full.len(), self.nodes.len());
        full[1..].to_vec()
    }

    /// Prepend the Dirichlet zero.
    pub fn extend(&self, dofs: &[C64]) -> Vec<C64> {
        assert_eq!(dofs.len(), self.n_dofs());
        let mut full = Vec::with_capacity(dofs.len() + 1);
        full.push(C64::new(0.0, 0.0));
        full.extend_from_slice(dofs);
        full
    }

    /// Interpolate a function onto the mesh nodes.
    pub fn interpolate(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Weighted mass matrix `(M(w))_{ab} = int w phi_a phi_b` over all nodes.
pub fn assemble_weighted_mass(mesh: &Mesh, weight: &PiecewiseCoefficient) -> Result<Tridiag> {
    for &b in weight.breakpoints() {
        if !mesh.contains_node(b) {
            return Err(Error::Domain(format!(
                "coefficient breakpoint {b} is not a mesh node"
            )));
        }
    }
    let n = mesh.nodes().len();
    let mut m = Tridiag::zeros(n);
    for (e, w) in mesh.nodes().windows(2).enumerate() {
        let h = w[1] - w[0];
        let mut m00 = C64::new(0.0, 0.0);
        let mut m01 = C64::new(0.0, 0.0);
        let mut m11 = C64::new(0.0, 0.0);
        for &(t, wq) in &QUAD {
            let x = w[0] + t * h;
            let val = weight.eval(x)? * wq * h;
            m00 += val * (1.0 - t) * (1.0 - t);
            m01 += val * (1.0 - t) * t;
            m11 += val * t * t;
        }
        m.d[e] += m00;
        m.d[e + 1] += m11;
        m.dl[e] += m01;
        m.du[e] += m01;
    }
    Ok(m)
}

/// Plain mass matrix over all nodes.
pub fn assemble_mass(mesh: &Mesh) -> Tridiag {
    let one = PiecewiseCoefficient::constant(C64::new(1.0, 0.0), mesh.domain_end());
    assemble_weighted_mass(mesh, &one).expect("constant weight always assembles")
}

/// Stiffness matrix `K_{ab} = int phi_a' phi_b'` over all nodes.
pub fn assemble_stiffness(mesh: &Mesh) -> Tridiag {
    let n = mesh.nodes().len();
    let mut k = Tridiag::zeros(n);
    for (e, w) in mesh.nodes().windows(2).enumerate() {
        let h = w[1] - w[0];
        let v = C64::new(1.0 / h, 0.0);
        k.d[e] += v;
        k.d[e + 1] += v;
        k.dl[e] -= v;
        k.du[e] -= v;
    }
    k
}

fn restrict_matrix(full: &Tridiag) -> Tridiag {
    Tridiag {
        dl: full.dl[1..].to_vec(),
        d: full.d[1..].to_vec(),
        du: full.du[1..].to_vec(),
    }
}

/// Assembled unperturbed system together with the matrices needed for the
/// weighted norms.  All matrices live on the Dirichlet-constrained dof set
/// (nodes `1..=M`).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    /// `k^{-2} K - M(n0) - i k^{-1} e_R e_R^T`
    pub system: Tridiag,
    /// plain mass matrix, dof-restricted
    pub mass: Tridiag,
    /// stiffness matrix, dof-restricted
    pub stiffness: Tridiag,
    pub k: f64,
    pub mesh: Mesh,
    pub n0: PiecewiseCoefficient,
}

/// Galerkin matrix of `a0` on the mesh.
pub fn assemble_a0(mesh: &Mesh, n0: &PiecewiseCoefficient) -> Result<DiscreteOperator> {
    let k = mesh.k();
    let stiff_full = assemble_stiffness(mesh);
    let mass_full = assemble_mass(mesh);
    let wmass_full = assemble_weighted_mass(mesh, n0)?;
    let stiffness = restrict_matrix(&stiff_full);
    let mass = restrict_matrix(&mass_full);
    let wmass = restrict_matrix(&wmass_full);
    let n = stiffness.dim();
    let mut system = Tridiag::zeros(n);
    for i in 0..n {
        system.d[i] = stiffness.d[i] / (k * k) - wmass.d[i];
    }
    for i in 0..n - 1 {
        system.dl[i] = stiffness.dl[i] / (k * k) - wmass.dl[i];
        system.du[i] = stiffness.du[i] / (k * k) - wmass.du[i];
    }
    system.d[n - 1] -= C64::new(0.0, 1.0 / k);
    Ok(DiscreteOperator {
        system,
        mass,
        stiffness,
        k,
        mesh: mesh.clone(),
        n0: n0.clone(),
    })
}

/// Perturbation matrix `(P_j)_{ab} = -int psi phi_a phi_b`, dof-restricted.
#[derive(Debug, Clone)]
pub struct PerturbationMatrix {
    pub matrix: Tridiag,
    pub mode_index: usize,
}

pub fn assemble_perturbation(
    mesh: &Mesh,
    psi: &PiecewiseCoefficient,
    mode_index: usize,
) -> Result<PerturbationMatrix> {
    if let Some((_, hi)) = psi.support() {
        if hi >= mesh.domain_end() {
            return Err(Error::InvalidCoefficient(format!(
                "mode {mode_index} support touches the truncation boundary"
            )));
        }
    }
    let full = assemble_weighted_mass(mesh, psi)?;
    let mut matrix = restrict_matrix(&full);
    for v in matrix
        .d
        .iter_mut()
        .chain(matrix.dl.iter_mut())
        .chain(matrix.du.iter_mut())
    {
        *v = -*v;
    }
    Ok(PerturbationMatrix { matrix, mode_index })
}

/// `system + sum_j y_j P_j`.
pub fn perturbed_system(
    op: &DiscreteOperator,
    perturbations: &[(&PerturbationMatrix, C64)],
) -> Tridiag {
    let mut a = op.system.clone();
    for (p, y) in perturbations {
        a = a.add_scaled(*y, &p.matrix);
    }
    a
}

/// Condition-estimate threshold beyond which a solve is reported as
/// "at or near pole".
pub const NEAR_POLE_COND: f64 = 1e14;

/// Factor a (possibly perturbed) system, rejecting near-singular matrices.
pub fn factor_checked(a: &Tridiag) -> Result<TriLu> {
    let lu = a.factor()?;
    let cond = a.norm_1() * lu.inv_norm_1_estimate();
    if cond > NEAR_POLE_COND {
        return Err(Error::NearPole { cond });
    }
    Ok(lu)
}

/// Load vector `F_a = int f phi_a` over the dofs, exact for piece
/// polynomials of degree <= 13.
pub fn assemble_load_coeff(mesh: &Mesh, f: &PiecewiseCoefficient) -> Result<Vec<C64>> {
    assemble_load_fn_checked(mesh, |x| f.eval(x))
}

/// Load vector for an arbitrary integrand, by the same per-element rule.
pub fn assemble_load_fn(mesh: &Mesh, f: impl Fn(f64) -> C64) -> Vec<C64> {
    assemble_load_fn_checked(mesh, |x| Ok(f(x))).expect("infallible integrand")
}

fn assemble_load_fn_checked(
    mesh: &Mesh,
    f: impl Fn(f64) -> Result<C64>,
) -> Result<Vec<C64>> {
    let n = mesh.nodes().len();
    let mut load = vec![C64::new(0.0, 0.0); n];
    for (e, w) in mesh.nodes().windows(2).enumerate() {
        let h = w[1] - w[0];
        for &(t, wq) in &QUAD {
            let x = w[0] + t * h;
            let val = f(x)? * wq * h;
            load[e] += val * (1.0 - t);
            load[e + 1] += val * t;
        }
    }
    Ok(load[1..].to_vec())
}

/// Nodal solution of the (perturbed) discrete problem.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Values over all nodes, including the Dirichlet zero at `x = 0`.
    pub values: Vec<C64>,
    pub k: f64,
}

impl Solution {
    pub fn dofs(&self) -> &[C64] {
        &self.values[1..]
    }
}

/// Direct solve of `(system + sum_j y_j P_j) u = load`.
///
/// The relative residual is checked against `1e-10` after the solve; systems
/// with 1-norm condition estimate above [`NEAR_POLE_COND`] are rejected as
/// at-or-near a pole.
pub fn solve(
    op: &DiscreteOperator,
    perturbations: &[(&PerturbationMatrix, C64)],
    load: &[C64],
) -> Result<Solution> {
    let a = perturbed_system(op, perturbations);
    if load.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "load has {} entries, system has {}",
            load.len(),
            a.dim()
        )));
    }
    let lu = factor_checked(&a)?;
    let x = lu.solve(load);
    let r = a.matvec(&x);
    let err: f64 = r
        .iter()
        .zip(load)
        .map(|(u, v)| (u - v).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let xn: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let bn: f64 = load.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = a.norm_1() * xn + bn;
    if scale > 0.0 && err / scale > 1e-10 {
        return Err(Error::NoConvergence {
            iters: 1,
            last: err / scale,
            rel_change: err / scale,
        });
    }
    Ok(Solution {
        values: op.mesh.extend(&x),
        k: op.k,
    })
}

/// Convenience solve with the load given as a piecewise coefficient.
pub fn solve_with_coeff_load(
    op: &DiscreteOperator,
    perturbations: &[(&PerturbationMatrix, C64)],
    f: &PiecewiseCoefficient,
) -> Result<Solution> {
    let load = assemble_load_coeff(&op.mesh, f)?;
    solve(op, perturbations, &load)
}

/// `k^{-2} ||u''||_{L2}` recovered from the strong equation
/// `k^{-2} u'' = -(f + n u)`, i.e. `||f + n u||_{L2}` by element-wise
/// quadrature.  No differencing of the discrete solution is involved.
pub fn h2k_seminorm_via_pde(
    sol: &Solution,
    mesh: &Mesh,
    n: &PiecewiseCoefficient,
    f: impl Fn(f64) -> C64,
) -> Result<f64> {
    if sol.values.len() != mesh.nodes().len() {
        return Err(Error::DimensionMismatch(
            "solution does not conform to mesh".into(),
        ));
    }
    let mut acc = 0.0;
    for (e, w) in mesh.nodes().windows(2).enumerate() {
        let h = w[1] - w[0];
        for &(t, wq) in &QUAD {
            let x = w[0] + t * h;
            let u = sol.values[e] * (1.0 - t) + sol.values[e + 1] * t;
            let g = f(x) + n.eval(x)? * u;
            acc += wq * h * g.norm_sqr();
        }
    }
    Ok(acc.sqrt())
}
