//! Weighted norms `L2`, `H1_k`, `H2_k` and discrete solution-operator norm
//! estimation.
//!
//! Operator norms are measured in the continuous (mass-matrix-weighted)
//! norms, not Euclidean vector norms, so the estimates are stable under mesh
//! refinement.  The largest singular value of the solve map `f -> u` is
//! found by power iteration on the associated self-adjoint composition,
//! using repeated factorized tridiagonal solves; the power-iteration start
//! vector comes from a fixed-seed PRNG (seed 42) so estimates are
//! reproducible.

use crate::coeffs::PiecewiseCoefficient;
use crate::linalg::{Tridiag, TriLu};
use crate::mesh::{
    assemble_a0, assemble_mass, assemble_stiffness, DiscreteOperator, Mesh, PerturbationMatrix,
    QUAD,
};
use crate::{C64, Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const POWER_ITER_SEED: u64 = 42;
pub const POWER_ITER_TOL: f64 = 1e-8;
pub const POWER_ITER_MAX: usize = 500;

/// Which weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormKind {
    L2,
    H1k,
    H2k,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormKind::L2 => write!(f, "L2"),
            NormKind::H1k => write!(f, "H1k"),
            NormKind::H2k => write!(f, "H2k"),
        }
    }
}

/// Weighted norm of a full nodal vector (including the `x = 0` node).
///
/// `H2k` is not available here: the second-derivative term is recovered
/// from the PDE via [`crate::mesh::h2k_seminorm_via_pde`], which needs the
/// right-hand side.
pub fn weighted_norm(v: &[C64], kind: NormKind, mesh: &Mesh) -> Result<f64> {
    if v.len() != mesh.nodes().len() {
        return Err(Error::DimensionMismatch(format!(
            "vector has {} entries, mesh has {} nodes",
            v.len(),
            mesh.nodes().len()
        )));
    }
    let m = assemble_mass(mesh);
    let l2sq = quad_form(&m, v);
    match kind {
        NormKind::L2 => Ok(l2sq.sqrt()),
        NormKind::H1k => {
            let k = assemble_stiffness(mesh);
            let h1 = quad_form(&k, v) / (mesh.k() * mesh.k());
            Ok((l2sq + h1).sqrt())
        }
        NormKind::H2k => Err(Error::Invalid(
            "H2k norms require the PDE right-hand side; use h2k_seminorm_via_pde".into(),
        )),
    }
}

fn quad_form(a: &Tridiag, v: &[C64]) -> f64 {
    let av = a.matvec(v);
    v.iter().zip(&av).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Power-iteration estimate of an operator norm.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorNormEstimate {
    pub value: f64,
    pub source: NormKind,
    pub target: NormKind,
    pub k: f64,
    pub iterations: usize,
    pub rel_change: f64,
}

/// Generalized power iteration for the pencil `G v = lambda M_src v` with
/// `G` Hermitian positive semidefinite.  Returns `sqrt(lambda_max)`.
///
/// `msrc_apply` applies the source Gram matrix, `msrc_solve` its inverse.
pub fn gram_power_iteration(
    apply_gram: &dyn Fn(&[C64]) -> Vec<C64>,
    msrc_apply: &dyn Fn(&[C64]) -> Vec<C64>,
    msrc_solve: &dyn Fn(&[C64]) -> Vec<C64>,
    n: usize,
    seed: u64,
) -> Result<(f64, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let nrm = inner_with(&msrc_apply, &v, &v).re.sqrt();
    v.iter_mut().for_each(|z| *z /= nrm);
    let mut last = 0.0f64;
    for it in 1..=POWER_ITER_MAX {
        let w = apply_gram(&v);
        let lambda: f64 = v
            .iter()
            .zip(&w)
            .map(|(x, y)| (x.conj() * y).re)
            .sum::<f64>()
            .max(0.0);
        let value = lambda.sqrt();
        let rel_change = if value > 0.0 {
            (value - last).abs() / value
        } else {
            0.0
        };
        if rel_change <= POWER_ITER_TOL && it > 1 {
            return Ok((value, it, rel_change));
        }
        last = value;
        let mut next = msrc_solve(&w);
        let nrm = inner_with(&msrc_apply, &next, &next).re.sqrt();
        if nrm == 0.0 {
            // G v = 0: the operator annihilates the iterate; norm is 0
            return Ok((0.0, it, 0.0));
        }
        next.iter_mut().for_each(|z| *z /= nrm);
        v = next;
    }
    Err(Error::NoConvergence {
        iters: POWER_ITER_MAX,
        last,
        rel_change: POWER_ITER_TOL,
    })
}

fn inner_with(apply: &dyn Fn(&[C64]) -> Vec<C64>, a: &[C64], b: &[C64]) -> C64 {
    let mb = apply(b);
    a.iter().zip(&mb).map(|(x, y)| x.conj() * y).sum()
}

/// Cached per-quadrature-point values of a coefficient on a mesh.
struct QuadValues {
    /// `(element, q) -> (x weight h, n(x))`, flattened
    vals: Vec<(f64, C64)>,
}

impl QuadValues {
    fn build(mesh: &Mesh, n: &PiecewiseCoefficient) -> Result<Self> {
        let mut vals = Vec::with_capacity(mesh.n_elements() * QUAD.len());
        for w in mesh.nodes().windows(2) {
            let h = w[1] - w[0];
            for &(t, wq) in &QUAD {
                vals.push((wq * h, n.eval(w[0] + t * h)?));
            }
        }
        Ok(Self { vals })
    }
}

/// The solve map together with everything needed to measure its norm.
struct NormContext<'a> {
    lu: TriLu,
    mass: &'a Tridiag,
    stiffness: &'a Tridiag,
    k: f64,
    mesh: &'a Mesh,
    quad_n0: Option<QuadValues>,
}

impl NormContext<'_> {
    /// `T v = A^{-1} (M v)`.
    fn apply_solve(&self, v: &[C64]) -> Vec<C64> {
        self.lu.solve(&self.mass.matvec(v))
    }

    /// `T^H z = M (A^{-H} z)`.
    fn apply_solve_adjoint(&self, z: &[C64]) -> Vec<C64> {
        self.mass.matvec(&self.lu.solve_adjoint(z))
    }

    fn w1_apply(&self, u: &[C64]) -> Vec<C64> {
        let ku = self.stiffness.matvec(u);
        let mu = self.mass.matvec(u);
        ku.iter()
            .zip(&mu)
            .map(|(a, b)| a / (self.k * self.k) + b)
            .collect()
    }

    /// Gram operator of the norm pair (L2 source, `target`).
    fn apply_gram(&self, v: &[C64], target: NormKind) -> Vec<C64> {
        let u = self.apply_solve(v);
        match target {
            NormKind::L2 => self.apply_solve_adjoint(&self.mass.matvec(&u)),
            NormKind::H1k => self.apply_solve_adjoint(&self.w1_apply(&u)),
            NormKind::H2k => {
                // H1k part plus the PDE-recovered second-derivative term
                // ||f + n0 u||^2 with f the P1 source function.
                let quad = self.quad_n0.as_ref().expect("H2k gram needs n0 cache");
                let ndofs = u.len();
                let mut s_f = vec![C64::new(0.0, 0.0); ndofs + 1];
                let mut s_n = vec![C64::new(0.0, 0.0); ndofs + 1];
                let full_v = self.mesh.extend(v);
                let full_u = self.mesh.extend(&u);
                let nq = QUAD.len();
                for e in 0..self.mesh.n_elements() {
                    for (q, &(t, _)) in QUAD.iter().enumerate() {
                        let (wh, nval) = quad.vals[e * nq + q];
                        let fq = full_v[e] * (1.0 - t) + full_v[e + 1] * t;
                        let uq = full_u[e] * (1.0 - t) + full_u[e + 1] * t;
                        let g = (fq + nval * uq) * wh;
                        s_f[e] += g * (1.0 - t);
                        s_f[e + 1] += g * t;
                        let gn = g * nval.conj();
                        s_n[e] += gn * (1.0 - t);
                        s_n[e + 1] += gn * t;
                    }
                }
                let s_f = &s_f[1..];
                let s_n = &s_n[1..];
                let z: Vec<C64> = self
                    .w1_apply(&u)
                    .iter()
                    .zip(s_n)
                    .map(|(a, b)| a + b)
                    .collect();
                let mut out = self.apply_solve_adjoint(&z);
                for (o, s) in out.iter_mut().zip(s_f) {
                    *o += s;
                }
                out
            }
        }
    }
}

fn build_context<'a>(
    op: &'a DiscreteOperator,
    system: &Tridiag,
    target: NormKind,
) -> Result<NormContext<'a>> {
    let lu = crate::mesh::factor_checked(system)?;
    let quad_n0 = if target == NormKind::H2k {
        Some(QuadValues::build(&op.mesh, &op.n0)?)
    } else {
        None
    };
    Ok(NormContext {
        lu,
        mass: &op.mass,
        stiffness: &op.stiffness,
        k: op.k,
        mesh: &op.mesh,
        quad_n0,
    })
}

/// Largest singular value of the discrete solve map `f -> u`, measured from
/// the `source` norm to the `target` norm.  Only `L2` sources are
/// supported; the dual `H*` source is covered by
/// [`dual_source_operator_norm`].
pub fn solution_operator_norm(
    op: &DiscreteOperator,
    source: NormKind,
    target: NormKind,
) -> Result<OperatorNormEstimate> {
    perturbed_operator_norm(op, &[], source, target)
}

/// Operator norm of the perturbed solve map `(A0 + sum y_j P_j)^{-1}`.
pub fn perturbed_operator_norm(
    op: &DiscreteOperator,
    perturbations: &[(&PerturbationMatrix, C64)],
    source: NormKind,
    target: NormKind,
) -> Result<OperatorNormEstimate> {
    if source != NormKind::L2 {
        return Err(Error::Invalid(format!(
            "only L2 source norms are measured directly (got {source})"
        )));
    }
    let system = crate::mesh::perturbed_system(op, perturbations);
    let ctx = build_context(op, &system, target)?;
    let mass_lu = op.mass.factor()?;
    let n = op.mass.dim();
    let (value, iterations, rel_change) = gram_power_iteration(
        &|v| ctx.apply_gram(v, target),
        &|v| op.mass.matvec(v),
        &|v| mass_lu.solve(v),
        n,
        POWER_ITER_SEED,
    )?;
    Ok(OperatorNormEstimate {
        value,
        source,
        target,
        k: op.k,
        iterations,
        rel_change,
    })
}

/// Discrete `H* -> H` norm: the solve map from antilinear functionals (with
/// the discrete dual norm `sqrt(r^H W1^{-1} r)`) into `H1_k`.
pub fn dual_source_operator_norm(op: &DiscreteOperator) -> Result<OperatorNormEstimate> {
    let ctx = build_context(op, &op.system, NormKind::H1k)?;
    let n = op.mass.dim();
    let w1 = {
        let mut w = op.stiffness.clone();
        let kk = op.k * op.k;
        for (wd, md) in w.d.iter_mut().zip(&op.mass.d) {
            *wd = *wd / kk + md;
        }
        for (wl, ml) in w.dl.iter_mut().zip(&op.mass.dl) {
            *wl = *wl / kk + ml;
        }
        for (wu, mu) in w.du.iter_mut().zip(&op.mass.du) {
            *wu = *wu / kk + mu;
        }
        w
    };
    let w1_lu = w1.factor()?;
    // T F = A^{-1} F with ||F||_{H*}^2 = F^H W1^{-1} F, ||u||^2 = u^H W1 u;
    // gram: G = A^{-H} W1 A^{-1}, source gram = W1^{-1}.
    let (value, iterations, rel_change) = gram_power_iteration(
        &|f| {
            let u = ctx.lu.solve(f);
            ctx.lu.solve_adjoint(&ctx.w1_apply(&u))
        },
        &|f| w1_lu.solve(f),
        &|f| w1.matvec(f),
        n,
        POWER_ITER_SEED,
    )?;
    Ok(OperatorNormEstimate {
        value,
        source: NormKind::H1k, // dual of H1k
        target: NormKind::H1k,
        k: op.k,
        iterations,
        rel_change,
    })
}

/// One row of a `k`-sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Least-squares fit of `log(norm)` against `log(k)`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Result of a `k`-sweep of operator-norm estimates.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub fit: Option<SlopeFit>,
    /// Set when an individual estimate failed; rows then hold the partial
    /// results gathered before the failure.
    pub aborted: Option<String>,
}

/// Sweeps `||A0^{-1}(k)||` over `ks` (each `k` gets its own mesh) and fits
/// the log-log slope over the upper half of the `k`-range, where the
/// large-`k` asymptotics dominate.
pub fn k_sweep(
    n0: &PiecewiseCoefficient,
    ks: &[f64],
    pair: (NormKind, NormKind),
    ppw: f64,
    pollution_exp: f64,
) -> SweepTable {
    let mut ks_sorted = ks.to_vec();
    ks_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let results: Vec<(f64, Result<OperatorNormEstimate>)> = ks_sorted
        .par_iter()
        .map(|&k| {
            let est = Mesh::build(k, ppw, pollution_exp, n0.breakpoints())
                .and_then(|mesh| assemble_a0(&mesh, n0))
                .and_then(|op| solution_operator_norm(&op, pair.0, pair.1));
            (k, est)
        })
        .collect();
    let mut rows = Vec::new();
    let mut aborted = None;
    for (k, res) in results {
        match res {
            Ok(est) => rows.push(SweepRow {
                k,
                value: est.value,
                iterations: est.iterations,
            }),
            Err(e) => {
                aborted = Some(format!("estimate at k = {k} failed: {e}"));
                break;
            }
        }
    }
    let fit = fit_upper_half(&rows);
    SweepTable {
        rows,
        fit,
        aborted,
    }
}

fn fit_upper_half(rows: &[SweepRow]) -> Option<SlopeFit> {
    let upper = &rows[rows.len() / 2..];
    if upper.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = upper.iter().map(|r| (r.k.ln(), r.value.ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = (pts
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Some(SlopeFit {
        slope,
        intercept,
        residual,
    })
}

/// Numerical check of the norm-relation inequalities between the measured
/// `H* -> H`, `L2 -> H1k`, and `L2 -> L2` solution-operator norms.
#[derive(Debug, Clone, Serialize)]
pub struct NormRelationReport {
    pub k: f64,
    pub hstar_to_h: f64,
    pub l2_to_h1k: f64,
    pub l2_to_l2: f64,
    pub a_min: f64,
    pub n_min: f64,
    pub n_max: f64,
    /// `||A0^{-1}||_{H*->H} <= (1 + 2 n_max ||A0^{-1}||_{L2->H}) / min(A_min, n_min)`
    pub ineq1_lhs: f64,
    pub ineq1_rhs: f64,
    pub ineq1_holds: bool,
    /// `||A0^{-1}||_{L2->H} <= sqrt(3 n_max / (2 A_min) + 1) ||A0^{-1}||_{L2->L2} + 1/(2 n_min k^2)`
    pub ineq2_lhs: f64,
    pub ineq2_rhs: f64,
    pub ineq2_holds: bool,
    pub ineq2_second_term: f64,
}

pub fn norm_relation_check(op: &DiscreteOperator) -> Result<NormRelationReport> {
    let hstar = dual_source_operator_norm(op)?.value;
    let l2h1 = solution_operator_norm(op, NormKind::L2, NormKind::H1k)?.value;
    let l2l2 = solution_operator_norm(op, NormKind::L2, NormKind::L2)?.value;
    let a_min = 1.0f64;
    let n_min = op.n0.min_real_on_domain();
    let n_max = op.n0.sup_norm();
    let ineq1_rhs = (1.0 + 2.0 * n_max * l2h1) / a_min.min(n_min);
    let second = 1.0 / (2.0 * n_min * op.k * op.k);
    let ineq2_rhs = (3.0 * n_max / (2.0 * a_min) + 1.0).sqrt() * l2l2 + second;
    Ok(NormRelationReport {
        k: op.k,
        hstar_to_h: hstar,
        l2_to_h1k: l2h1,
        l2_to_l2: l2l2,
        a_min,
        n_min,
        n_max,
        ineq1_lhs: hstar,
        ineq1_rhs,
        ineq1_holds: hstar <= ineq1_rhs,
        ineq2_lhs: l2h1,
        ineq2_rhs,
        ineq2_holds: l2h1 <= ineq2_rhs,
        ineq2_second_term: second,
    })
}
