//! Poles in `y` of the parametric solution operator for the model
//! discontinuous coefficient, found two independent ways:
//!
//! * the transcendental resonance equation
//!   `tan(k sqrt(1/2 - y)) = -i sqrt(1/2 - y)`, solved by complex Newton in
//!   the rescaled coordinate `omega` with `sqrt(1/2 - y) = 1/sqrt2 - omega/k`,
//!   along the wavenumber sequence `k = 2 pi m sqrt2`;
//! * eigenvalues of the discrete matrix pencil `A0 + y P1`, obtained from
//!   the largest eigenvalues of `A0^{-1} M1` by Arnoldi iteration.
//!
//! The sharpness experiment checks `k |y| -> sqrt2 * artanh(1/sqrt2)
//! (about 1.24645)` along the sequence, i.e. poles at distance of order
//! `k^{-1}` from the real parameter axis.

use crate::coeffs::PiecewiseCoefficient;
use crate::linalg::arnoldi_eigenvalues;
use crate::mesh::{assemble_a0, assemble_mass, assemble_perturbation, Mesh, PerturbationMatrix,
    DiscreteOperator};
use crate::{C64, Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

/// Newton residual target for the resonance equation.
const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX: usize = 50;
/// Smallest sequence index for which Newton from `omega_star` is trusted.
pub const M_MIN: usize = 5;

/// Where a pole estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoleSource {
    Transcendental,
    Pencil,
}

/// A located pole of `y -> A^{-1}(k, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct PoleEstimate {
    pub k: f64,
    pub y: C64,
    /// Rescaled root coordinate, `sqrt(1/2 - y) = 1/sqrt2 - omega/k`.
    pub omega: C64,
    pub newton_iters: usize,
    /// `|tan(k sqrt(1/2 - y)) + i sqrt(1/2 - y)|`, evaluated directly.
    pub residual: f64,
    pub source: PoleSource,
}

/// The `k -> infinity` limit of the rescaled root: the purely imaginary
/// solution of `tan(omega) = i / sqrt2`, in closed form
/// `i * artanh(1/sqrt2)`.
pub fn omega_star() -> C64 {
    C64::new(0.0, FRAC_1_SQRT_2.atanh())
}

/// Reduces `x` modulo `pi` to a value in `[-pi/2, pi/2)` with a two-part
/// (Cody-Waite) representation of `pi`, so that large arguments such as
/// `k / sqrt2` do not lose the digits the Newton iteration needs.
fn reduce_mod_pi(x: f64) -> f64 {
    const PI_HI: f64 = 3.141592653589793116;
    const PI_LO: f64 = 1.2246467991473532e-16;
    let n = (x / PI).round();
    (x - n * PI_HI) - n * PI_LO
}

/// The `m`-th wavenumber of the sharpness sequence, `k = 2 pi m sqrt2`.
pub fn sequence_k(m: usize) -> f64 {
    2.0 * PI * m as f64 * SQRT_2
}

/// Solves the resonance equation for the pole nearest `y = 0` at
/// wavenumber `k`.
///
/// Newton runs on `h(omega) = tan(c - omega) + i (1/sqrt2 - omega/k)` with
/// `c = k/sqrt2` (reduced modulo `pi`), starting from [`omega_star`].  On
/// the sequence `k = 2 pi m sqrt2` the reduction makes this exactly the
/// rescaled equation `tan(omega) = i (1/sqrt2 - omega/k)` up to the parity
/// of `tan`.  The root is rejected if it escapes the `k`-independent
/// neighbourhood `|omega - omega_star| <= 1` (other branches of `tan` are
/// out of scope).
pub fn solve_resonance(k: f64) -> Result<PoleEstimate> {
    let k_min = sequence_k(M_MIN);
    if k < k_min - 1e-9 {
        return Err(Error::Domain(format!(
            "k = {k} below the trusted range k >= 2 pi * {M_MIN} * sqrt2 = {k_min:.6}"
        )));
    }
    let c = reduce_mod_pi(k * FRAC_1_SQRT_2);
    let w0 = omega_star();
    let mut w = w0;
    let mut iters = 0;
    loop {
        let t = (C64::new(c, 0.0) - w).tan();
        let h = t + C64::new(0.0, 1.0) * (FRAC_1_SQRT_2 - w / k);
        if h.norm() <= NEWTON_TOL {
            break;
        }
        iters += 1;
        if iters > NEWTON_MAX {
            return Err(Error::Newton(format!(
                "no convergence after {NEWTON_MAX} iterations at k = {k} (|h| = {:.3e})",
                h.norm()
            )));
        }
        // h'(omega) = -(1 + tan^2) - i/k
        let dh = -(C64::new(1.0, 0.0) + t * t) - C64::new(0.0, 1.0 / k);
        w -= h / dh;
        if (w - w0).norm() > 1.0 {
            return Err(Error::Newton(format!(
                "root escaped the neighbourhood of omega_star at k = {k} (omega = {w})"
            )));
        }
    }
    // sqrt(1/2 - y) = 1/sqrt2 - omega/k  =>  y = sqrt2 omega/k - omega^2/k^2
    let y = SQRT_2 * w / k - w * w / (k * k);
    let s = (C64::new(0.5, 0.0) - y).sqrt();
    debug_assert!((s - (FRAC_1_SQRT_2 - w / k)).norm() <= 1e-14);
    let residual = ((k * s).tan() + C64::new(0.0, 1.0) * s).norm();
    Ok(PoleEstimate {
        k,
        y,
        omega: w,
        newton_iters: iters,
        residual,
        source: PoleSource::Transcendental,
    })
}

/// Poles of the discrete pencil `y -> A0 + y P1`: the reciprocals
/// `y = 1/mu` of the `count` largest-magnitude eigenvalues `mu` of
/// `A0^{-1} M1` (with `M1 = -P1` the mass matrix weighted by the mode),
/// sorted by `|y|` ascending.  Each candidate is certified by a
/// smallest-singular-value check `sigma_min(A0 + y P1) <= 1e-8 ||A0 + y
/// P1||_1`; uncertified candidates are dropped.
pub fn pencil_poles(
    op: &DiscreteOperator,
    pert: &PerturbationMatrix,
    count: usize,
) -> Result<Vec<C64>> {
    let n = op.system.dim();
    let lu = op.system.factor()?;
    let apply = |v: &[C64]| {
        let pv = pert.matrix.matvec(v);
        let neg: Vec<C64> = pv.iter().map(|z| -z).collect();
        lu.solve(&neg)
    };
    let krylov = (40 + 20 * count).min(n);
    let start: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0, (i as f64 * 0.7).sin()))
        .collect();
    let ritz = arnoldi_eigenvalues(apply, n, krylov, &start)?;
    let mu_max = ritz.first().map(|m| m.norm()).unwrap_or(0.0);
    if mu_max == 0.0 {
        return Err(Error::Eigen("pencil operator has zero spectrum".into()));
    }
    let mut poles = Vec::new();
    for mu in ritz.iter().take(2 * count + 4) {
        if mu.norm() <= 1e-8 * mu_max {
            continue;
        }
        let y = 1.0 / mu;
        // certify: A0 + y P1 must be (numerically) singular
        let shifted = op.system.add_scaled(y, &pert.matrix);
        let Ok(slu) = shifted.factor() else {
            // exactly singular: certainly a pole
            poles.push(y);
            continue;
        };
        let smin = slu.sigma_min_estimate(30);
        if smin <= 1e-8 * shifted.norm_1() {
            poles.push(y);
        }
        if poles.len() == count {
            break;
        }
    }
    poles.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    poles.truncate(count);
    Ok(poles)
}

/// One row of the sharpness-sequence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SequenceRow {
    pub m: usize,
    pub k: f64,
    pub y_transcendental: C64,
    pub y_pencil: Option<C64>,
    pub k_abs_y: f64,
    /// Relative disagreement `|y_pencil - y_trans| / |y_trans|`.
    pub agreement: Option<f64>,
    pub residual: f64,
}

/// Sharpness experiment along `k = 2 pi m sqrt2`.
#[derive(Debug, Clone, Serialize)]
pub struct SequenceReport {
    pub rows: Vec<SequenceRow>,
    pub min_k_abs_y: f64,
    pub max_k_abs_y: f64,
}

/// Runs [`solve_resonance`] for every `m` in `[m_lo, m_hi]` and, for
/// `m <= pencil_upto`, cross-checks against [`pencil_poles`] on a mesh with
/// the given resolution parameters.
pub fn k_sequence_experiment(
    m_lo: usize,
    m_hi: usize,
    pencil_upto: usize,
    ppw: f64,
    pollution_exp: f64,
) -> Result<SequenceReport> {
    if m_lo < M_MIN {
        return Err(Error::Domain(format!("m_lo must be >= {M_MIN}")));
    }
    if m_hi < m_lo {
        return Err(Error::Domain("empty m range".into()));
    }
    let rows: Vec<Result<SequenceRow>> = (m_lo..=m_hi)
        .into_par_iter()
        .map(|m| {
            let k = sequence_k(m);
            let trans = solve_resonance(k)?;
            let y_pencil = if m <= pencil_upto {
                let family_n0 = PiecewiseCoefficient::model_n0();
                let psi1 = PiecewiseCoefficient::model_psi1();
                let mesh = Mesh::build(k, ppw, pollution_exp, &[0.0, 1.0, 2.0])?;
                let op = assemble_a0(&mesh, &family_n0)?;
                let pert = assemble_perturbation(&mesh, &psi1, 0)?;
                pencil_poles(&op, &pert, 1)?.first().copied()
            } else {
                None
            };
            Ok(SequenceRow {
                m,
                k,
                y_transcendental: trans.y,
                y_pencil,
                k_abs_y: k * trans.y.norm(),
                agreement: y_pencil.map(|yp| (yp - trans.y).norm() / trans.y.norm()),
                residual: trans.residual,
            })
        })
        .collect();
    let rows: Vec<SequenceRow> = rows.into_iter().collect::<Result<_>>()?;
    let min_k_abs_y = rows.iter().map(|r| r.k_abs_y).fold(f64::INFINITY, f64::min);
    let max_k_abs_y = rows.iter().map(|r| r.k_abs_y).fold(0.0, f64::max);
    Ok(SequenceReport {
        rows,
        min_k_abs_y,
        max_k_abs_y,
    })
}

/// Discrete residual of the explicit candidate kernel function at `(k, y)`:
/// `u(x) = sin(k x sqrt(1/2 - y))` on `[0, 1]` continued by `B e^{ikx}`
/// with `B = sin(k sqrt(1/2 - y)) e^{-ik}`, interpolated on the mesh.
/// Returns the dual-norm ratio `sqrt(r^H M^{-1} r) / sqrt(u^H M u)` with
/// `r = (A0 + y P1) u`; at a genuine pole this vanishes up to
/// interpolation error of order `(hk)^2`.
pub fn kernel_residual(k: f64, y: C64, mesh: &Mesh) -> Result<f64> {
    if (mesh.k() - k).abs() > 1e-12 {
        return Err(Error::DimensionMismatch(format!(
            "mesh was built for k = {}, kernel asked for k = {k}",
            mesh.k()
        )));
    }
    let s = (C64::new(0.5, 0.0) - y).sqrt();
    let b_coef = (k * s).sin() * C64::new(0.0, -k).exp();
    let u_full = mesh.interpolate(|x| {
        if x <= 1.0 {
            (k * x * s).sin()
        } else {
            b_coef * C64::new(0.0, k * x).exp()
        }
    });
    let u = mesh.restrict(&u_full);
    let n0 = PiecewiseCoefficient::model_n0();
    let psi1 = PiecewiseCoefficient::model_psi1();
    let op = assemble_a0(mesh, &n0)?;
    let pert = assemble_perturbation(mesh, &psi1, 0)?;
    let shifted = op.system.add_scaled(y, &pert.matrix);
    let r = shifted.matvec(&u);
    // restrict the full mass matrix to dofs
    let mass = assemble_mass(mesh);
    let m_dof = crate::linalg::Tridiag {
        dl: mass.dl[1..].to_vec(),
        d: mass.d[1..].to_vec(),
        du: mass.du[1..].to_vec(),
    };
    let m_lu = m_dof.factor()?;
    let minv_r = m_lu.solve(&r);
    let r_dual: f64 = r
        .iter()
        .zip(&minv_r)
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        .max(0.0)
        .sqrt();
    let mu = m_dof.matvec(&u);
    let u_norm: f64 = u
        .iter()
        .zip(&mu)
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        .max(0.0)
        .sqrt();
    if u_norm == 0.0 {
        return Err(Error::Invalid("candidate kernel function is zero".into()));
    }
    Ok(r_dual / u_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn omega_star_defining_equation() {
        let w = omega_star();
        // closed form vs Newton on tan(omega) = i/sqrt2 from 0.9i
        let mut z = C64::new(0.0, 0.9);
        for _ in 0..50 {
            let h = z.tan() - C64::new(0.0, FRAC_1_SQRT_2);
            if h.norm() < 1e-15 {
                break;
            }
            z -= h / (C64::new(1.0, 0.0) + z.tan() * z.tan());
        }
        assert!((z - w).norm() < 1e-14);
        assert!((w.tan() - C64::new(0.0, FRAC_1_SQRT_2)).norm() <= 1e-14);
        assert_abs_diff_eq!(w.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w.im, 0.881373587019543, epsilon = 1e-12);
    }

    #[test]
    fn resonance_residual_and_branch() {
        for m in [5usize, 10, 40] {
            let k = sequence_k(m);
            let p = solve_resonance(k).unwrap();
            assert!(p.residual <= 1e-10, "m = {m}: residual {}", p.residual);
            // branch consistency of the substitution
            let s = (C64::new(0.5, 0.0) - p.y).sqrt();
            assert!((s - (FRAC_1_SQRT_2 - p.omega / k)).norm() <= 1e-14);
            assert!(s.re > 0.0);
            assert!(p.y.im > 0.0);
        }
    }

    #[test]
    fn resonance_asymptote() {
        // k |y| -> sqrt2 |omega_star| as k -> infinity along the lattice
        let p = solve_resonance(sequence_k(1_000_000)).unwrap();
        let limit = SQRT_2 * omega_star().norm();
        assert_abs_diff_eq!(p.k * p.y.norm(), limit, epsilon = 1e-5);
        assert_abs_diff_eq!(limit, 1.2464504802804512, epsilon = 1e-12);
    }

    #[test]
    fn below_range_rejected() {
        assert!(solve_resonance(1.0).is_err());
    }

    #[test]
    fn pencil_agrees_with_transcendental_m8() {
        let m = 8;
        let k = sequence_k(m);
        let trans = solve_resonance(k).unwrap();
        let mesh = Mesh::build(k, 40.0, 1.5, &[0.0, 1.0, 2.0]).unwrap();
        let op = assemble_a0(&mesh, &PiecewiseCoefficient::model_n0()).unwrap();
        let pert = assemble_perturbation(&mesh, &PiecewiseCoefficient::model_psi1(), 0).unwrap();
        let poles = pencil_poles(&op, &pert, 1).unwrap();
        assert_eq!(poles.len(), 1);
        let rel = (poles[0] - trans.y).norm() / trans.y.norm();
        assert!(rel <= 1e-3, "pencil/transcendental disagreement {rel}");
        assert!(poles[0].norm() > 0.0);
    }

    #[test]
    fn kernel_residual_small_at_pole_large_at_zero() {
        let m = 8;
        let k = sequence_k(m);
        let pole = solve_resonance(k).unwrap();
        // fine mesh: interpolation residual scales like (hk)^2
        let mesh = Mesh::build(k, 600.0, 1.0, &[0.0, 1.0, 2.0]).unwrap();
        let at_pole = kernel_residual(k, pole.y, &mesh).unwrap();
        assert!(at_pole <= 1e-4, "residual at pole {at_pole}");
        let away = kernel_residual(k, C64::new(0.0, 0.0), &mesh).unwrap();
        assert!(away > 1e-2, "residual at y = 0 unexpectedly small: {away}");
        // second-order decrease under refinement
        let coarse = Mesh::build(k, 150.0, 1.0, &[0.0, 1.0, 2.0]).unwrap();
        let fine = coarse.refined();
        let rc = kernel_residual(k, pole.y, &coarse).unwrap();
        let rf = kernel_residual(k, pole.y, &fine).unwrap();
        let order = (rc / rf).log2();
        assert!(
            (order - 2.0).abs() < 0.4,
            "refinement order {order} (coarse {rc}, fine {rf})"
        );
    }
}
