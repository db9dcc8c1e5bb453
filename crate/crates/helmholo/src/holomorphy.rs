//! Guaranteed polydisc regions of parametric holomorphy, resolvent
//! evaluation (direct and Neumann-series), the factor-2 resolvent bound,
//! and Cauchy-integral analyticity tests.
//!
//! The perturbation bound behind everything here: if
//! `||A0^{-1}(k)|| * ||n_p(y)||_{L^inf} <= 1/2` then `A(k, y)` is invertible
//! with `||A^{-1}(k, y)|| <= 2 ||A0^{-1}(k)||`, and `y -> A^{-1}(k, y)` is
//! holomorphic on the polydisc where the condition holds.

use crate::coeffs::{AffineFamily, ParamPoint};
use crate::linalg::Tridiag;
use crate::mesh::{
    assemble_load_fn, factor_checked, perturbed_system, DiscreteOperator, PerturbationMatrix,
};
use crate::opnorm::{perturbed_operator_norm, NormKind, OperatorNormEstimate};
use crate::{C64, Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Which sufficient condition produced a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionKind {
    /// `||A0^{-1}|| * ||n_p(y)||_{L^inf} <= 1/2` with the solution-operator
    /// norm measured `L2 -> H1k`.
    Part1,
    /// The same budget with the `L2 -> H2k` norm (radii are relative, not
    /// certified, since the elliptic-regularity constant is user-supplied).
    Part2,
}

/// How the aggregate budget `sum_j r_j ||psi_j||_inf = 1/(2 ||A0^{-1}||)`
/// is split across modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AllocationRule {
    /// Every mode gets the same share of the budget:
    /// `r_j = 1 / (2 N ||A0^{-1}|| ||psi_j||_inf)`.
    EqualBudget,
    /// Budget shares proportional to `1 / ||psi_j||_inf`, favouring weak
    /// modes: `r_j ∝ ||psi_j||_inf^{-2}`.
    InverseSupNorm,
}

/// A polydisc `{ y : |y_j| <= r_j }` on which the perturbed solution
/// operator is guaranteed to exist, be holomorphic in `y`, and satisfy the
/// factor-2 bound.
#[derive(Debug, Clone, Serialize)]
pub struct HolomorphyRegion {
    pub k: f64,
    pub per_mode_radii: Vec<f64>,
    pub condition_kind: ConditionKind,
    pub opnorm_used: OperatorNormEstimate,
}

impl HolomorphyRegion {
    /// Left-hand side of the sufficient condition at the worst polydisc
    /// corner: `||A0^{-1}|| * sum_j r_j ||psi_j||_inf` (modes with
    /// unbounded radius contribute zero sup-norm and are skipped).
    pub fn condition_lhs(&self, family: &AffineFamily) -> f64 {
        self.opnorm_used.value
            * self
                .per_mode_radii
                .iter()
                .zip(family.modes())
                .filter(|(r, _)| r.is_finite())
                .map(|(r, psi)| r * psi.sup_norm())
                .sum::<f64>()
    }

    /// Whether `y` lies in the closed polydisc.
    pub fn contains(&self, y: &ParamPoint) -> bool {
        y.y.len() == self.per_mode_radii.len()
            && y.y
                .iter()
                .zip(&self.per_mode_radii)
                .all(|(yj, r)| yj.norm() <= *r)
    }
}

fn radii_from_budget(
    opn_value: f64,
    family: &AffineFamily,
    rule: AllocationRule,
) -> Result<Vec<f64>> {
    if !(opn_value > 0.0) {
        return Err(Error::Invalid(format!(
            "operator-norm estimate must be positive (got {opn_value})"
        )));
    }
    let sups: Vec<f64> = family.modes().iter().map(|m| m.sup_norm()).collect();
    let budget = 1.0 / (2.0 * opn_value);
    let active: Vec<usize> = (0..sups.len()).filter(|&j| sups[j] > 0.0).collect();
    let mut radii = vec![f64::INFINITY; sups.len()];
    if active.is_empty() {
        return Ok(radii);
    }
    match rule {
        AllocationRule::EqualBudget => {
            let share = budget / active.len() as f64;
            for &j in &active {
                radii[j] = share / sups[j];
            }
        }
        AllocationRule::InverseSupNorm => {
            let total_weight: f64 = active.iter().map(|&j| 1.0 / sups[j]).sum();
            for &j in &active {
                radii[j] = (1.0 / sups[j]) / total_weight * budget / sups[j];
            }
        }
    }
    Ok(radii)
}

/// Guaranteed polydisc from the first sufficient condition, using a
/// measured `L2 -> H1k` (H-type) solution-operator norm at this `k`.
pub fn region_radius_part1(
    opn: &OperatorNormEstimate,
    family: &AffineFamily,
    rule: AllocationRule,
) -> Result<HolomorphyRegion> {
    if opn.target == NormKind::H2k {
        return Err(Error::Invalid(
            "part-1 regions use an H-type (L2 or H1k target) norm estimate".into(),
        ));
    }
    let region = HolomorphyRegion {
        k: opn.k,
        per_mode_radii: radii_from_budget(opn.value, family, rule)?,
        condition_kind: ConditionKind::Part1,
        opnorm_used: opn.clone(),
    };
    debug_assert!(region.condition_lhs(family) <= 0.5 + 1e-12);
    Ok(region)
}

/// Polydisc from the second (higher-regularity) condition, using a
/// measured `L2 -> H2k` norm.  For the refractive-index-only families
/// handled here the elliptic-regularity constant `c_elliptic` multiplies
/// only gradient-coefficient perturbations and is therefore unused; it is
/// accepted (default 1) and the radii are relative, not certified.
pub fn region_radius_part2(
    opn_h2: &OperatorNormEstimate,
    family: &AffineFamily,
    _c_elliptic: f64,
) -> Result<HolomorphyRegion> {
    if opn_h2.target != NormKind::H2k {
        return Err(Error::Invalid(
            "part-2 regions require an L2 -> H2k norm estimate".into(),
        ));
    }
    Ok(HolomorphyRegion {
        k: opn_h2.k,
        per_mode_radii: radii_from_budget(opn_h2.value, family, AllocationRule::EqualBudget)?,
        condition_kind: ConditionKind::Part2,
        opnorm_used: opn_h2.clone(),
    })
}

/// How to evaluate the perturbed resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResolventMethod {
    /// Factorized solve of the assembled system `A0 + sum_j y_j P_j`.
    Direct,
    /// Truncated Neumann series
    /// `u = sum_t A0^{-1} (-A_p A0^{-1})^t b`, stopping when the relative
    /// increment drops below `1e-10`.
    Neumann { max_terms: usize },
}

/// One evaluation of the perturbed resolvent at a parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct ResolventSample {
    pub y: Vec<(f64, f64)>,
    /// `||u||_{L2} / ||f||_{L2}` for the probe used.
    pub solve_norm: f64,
    pub target: NormKind,
    pub method: ResolventMethod,
    /// Direct: 1-norm condition estimate of the factorization; Neumann:
    /// last observed increment contraction ratio.
    pub condition_estimate: f64,
    pub terms_used: Option<usize>,
}

fn l2_norm(mass: &Tridiag, v: &[C64]) -> f64 {
    let mv = mass.matvec(v);
    v.iter()
        .zip(&mv)
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// Applies `A^{-1}(k, y)` to a nodal probe function `f` (given by its
/// dof values; the load is `M f`).  Returns the solution dofs and a sample
/// record.
pub fn resolvent_apply(
    op: &DiscreteOperator,
    perts: &[&PerturbationMatrix],
    y: &ParamPoint,
    f_dofs: &[C64],
    method: ResolventMethod,
) -> Result<(Vec<C64>, ResolventSample)> {
    if y.y.len() != perts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} parameters vs {} perturbation matrices",
            y.y.len(),
            perts.len()
        )));
    }
    let b = op.mass.matvec(f_dofs);
    let fnorm = l2_norm(&op.mass, f_dofs);
    let (u, condition_estimate, terms_used) = match method {
        ResolventMethod::Direct => {
            let pairs: Vec<(&PerturbationMatrix, C64)> =
                perts.iter().copied().zip(y.y.iter().copied()).collect();
            let system = perturbed_system(op, &pairs);
            let lu = factor_checked(&system)?;
            let cond = system.norm_1() * lu.inv_norm_1_estimate();
            (lu.solve(&b), cond, None)
        }
        ResolventMethod::Neumann { max_terms } => {
            let lu = factor_checked(&op.system)?;
            let mut term = lu.solve(&b);
            let mut sum = term.clone();
            let mut prev_inc = l2_norm(&op.mass, &term);
            let mut grew = 0usize;
            let mut ratio = 0.0f64;
            let mut used = max_terms;
            let mut converged = false;
            for t in 1..=max_terms {
                // next term = A0^{-1} (-(sum_j y_j P_j) term)
                let mut rhs = vec![C64::new(0.0, 0.0); term.len()];
                for (p, &yj) in perts.iter().zip(&y.y) {
                    let pv = p.matrix.matvec(&term);
                    for (r, v) in rhs.iter_mut().zip(&pv) {
                        *r -= yj * v;
                    }
                }
                term = lu.solve(&rhs);
                for (s, v) in sum.iter_mut().zip(&term) {
                    *s += v;
                }
                let inc = l2_norm(&op.mass, &term);
                ratio = if prev_inc > 0.0 { inc / prev_inc } else { 0.0 };
                if inc > prev_inc {
                    grew += 1;
                    if grew >= 5 {
                        return Err(Error::NeumannDivergence(grew));
                    }
                } else {
                    grew = 0;
                }
                prev_inc = inc;
                let sum_norm = l2_norm(&op.mass, &sum);
                if inc <= 1e-10 * sum_norm.max(f64::MIN_POSITIVE) {
                    used = t;
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence {
                    iters: max_terms,
                    last: prev_inc,
                    rel_change: ratio,
                });
            }
            (sum, ratio, Some(used))
        }
    };
    let unorm = l2_norm(&op.mass, &u);
    let sample = ResolventSample {
        y: y.y.iter().map(|z| (z.re, z.im)).collect(),
        solve_norm: if fnorm > 0.0 { unorm / fnorm } else { 0.0 },
        target: NormKind::L2,
        method,
        condition_estimate,
        terms_used,
    };
    Ok((u, sample))
}

/// Outcome of sampling the factor-2 bound over a region.
#[derive(Debug, Clone, Serialize)]
pub struct FactorTwoReport {
    pub k: f64,
    pub samples: usize,
    /// `||A0^{-1}||` in the norm the region was built from.
    pub base_norm: f64,
    /// Largest `||A^{-1}(k, y)|| / ||A0^{-1}(k)||` observed.
    pub max_ratio: f64,
    /// Samples violating `ratio <= 2 (1 + 1e-6)`.
    pub violations: usize,
    /// Largest relative L2 discrepancy between Neumann-series and direct
    /// resolvent applications across the samples.
    pub max_neumann_direct_rel: f64,
    pub all_within_factor_two: bool,
}

/// Samples `y` uniformly in angle on and inside the polydisc boundary
/// (even sample indices sit on the boundary, odd ones strictly inside),
/// measures `||A^{-1}(k, y)||` by `L2 -> H1k` power iteration, and checks
/// the factor-2 bound against the region's own base-norm estimate.  Each
/// sample also cross-checks the Neumann-series resolvent against the
/// direct solve on a fixed probe.
pub fn verify_factor_two(
    op: &DiscreteOperator,
    perts: &[&PerturbationMatrix],
    region: &HolomorphyRegion,
    samples: usize,
    seed: u64,
) -> Result<FactorTwoReport> {
    if region.condition_kind != ConditionKind::Part1 {
        return Err(Error::Invalid(
            "factor-2 verification applies to part-1 regions".into(),
        ));
    }
    let base = region.opnorm_used.value;
    let probe: Vec<C64> = vec![C64::new(1.0, 0.0); op.mass.dim()];
    let points: Vec<ParamPoint> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|s| {
                let y = region
                    .per_mode_radii
                    .iter()
                    .map(|&r| {
                        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                        let rho = if s % 2 == 0 { 1.0 } else { rng.gen::<f64>() };
                        C64::from_polar(r * rho, theta)
                    })
                    .collect();
                ParamPoint::new(y)
            })
            .collect()
    };
    let results: Vec<Result<(f64, f64)>> = points
        .par_iter()
        .map(|y| {
            let pairs: Vec<(&PerturbationMatrix, C64)> =
                perts.iter().copied().zip(y.y.iter().copied()).collect();
            let est = perturbed_operator_norm(op, &pairs, NormKind::L2, NormKind::H1k)?;
            let (ud, _) = resolvent_apply(op, perts, y, &probe, ResolventMethod::Direct)?;
            let (un, _) = resolvent_apply(
                op,
                perts,
                y,
                &probe,
                ResolventMethod::Neumann { max_terms: 200 },
            )?;
            let diff: Vec<C64> = ud.iter().zip(&un).map(|(a, b)| a - b).collect();
            let rel = l2_norm(&op.mass, &diff) / l2_norm(&op.mass, &ud);
            Ok((est.value / base, rel))
        })
        .collect();
    let mut max_ratio = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut violations = 0usize;
    for r in results {
        let (ratio, rel) = r?;
        max_ratio = max_ratio.max(ratio);
        max_rel = max_rel.max(rel);
        if ratio > 2.0 * (1.0 + 1e-6) {
            violations += 1;
        }
    }
    Ok(FactorTwoReport {
        k: op.k,
        samples,
        base_norm: base,
        max_ratio,
        violations,
        max_neumann_direct_rel: max_rel,
        all_within_factor_two: violations == 0,
    })
}

/// Relative Cauchy-integral residual
/// `|(1/2pi) sum_q F(c + r e^{i theta_q}) - F(c)| / |F(c)|`
/// of the scalar resolvent functional `F(y) = g^H u(y)` along mode `j`,
/// with trapezoid quadrature on `nodes` equispaced circle points.
///
/// `F` uses the fixed probes: load `f = 1` on the whole domain and `g` the
/// nodal-evaluation functional at the dof closest to `x = 0.5`.  When a
/// `region` is supplied the circle must stay inside it.
pub fn cauchy_residual(
    op: &DiscreteOperator,
    pert: &PerturbationMatrix,
    center: C64,
    radius: f64,
    nodes: usize,
    region: Option<&HolomorphyRegion>,
) -> Result<f64> {
    if nodes < 4 {
        return Err(Error::Invalid("need at least 4 quadrature nodes".into()));
    }
    if let Some(reg) = region {
        let r_mode = reg
            .per_mode_radii
            .get(pert.mode_index)
            .copied()
            .unwrap_or(f64::INFINITY);
        if center.norm() + radius > r_mode {
            return Err(Error::Domain(format!(
                "circle |y - {center}| = {radius} exits the guaranteed region (radius {r_mode})"
            )));
        }
    }
    let b = assemble_load_fn(&op.mesh, |_| C64::new(1.0, 0.0));
    let g_index = op
        .mesh
        .nodes()
        .iter()
        .skip(1)
        .enumerate()
        .min_by(|a, b| {
            (a.1 - 0.5)
                .abs()
                .partial_cmp(&(b.1 - 0.5).abs())
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    let eval_f = |y: C64| -> Result<C64> {
        let system = perturbed_system(op, &[(pert, y)]);
        let lu = factor_checked(&system)?;
        Ok(lu.solve(&b)[g_index])
    };
    let f_center = eval_f(center)?;
    if f_center.norm() == 0.0 {
        return Err(Error::Invalid(
            "probe functional vanishes at the circle center".into(),
        ));
    }
    let values: Vec<Result<C64>> = (0..nodes)
        .into_par_iter()
        .map(|q| {
            let theta = std::f64::consts::TAU * q as f64 / nodes as f64;
            eval_f(center + C64::from_polar(radius, theta))
        })
        .collect();
    let mut mean = C64::new(0.0, 0.0);
    for v in values {
        mean += v?;
    }
    mean /= nodes as f64;
    Ok((mean - f_center).norm() / f_center.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::PiecewiseCoefficient;
    use crate::mesh::{assemble_a0, assemble_perturbation, Mesh};
    use crate::opnorm::solution_operator_norm;
    use approx::assert_abs_diff_eq;

    fn setup(k: f64) -> (DiscreteOperator, PerturbationMatrix, AffineFamily) {
        let family = AffineFamily::model();
        let mesh = Mesh::build(k, 20.0, 1.5, &[0.0, 1.0, 2.0]).unwrap();
        let op = assemble_a0(&mesh, family.base()).unwrap();
        let pert = assemble_perturbation(&mesh, &family.modes()[0], 0).unwrap();
        (op, pert, family)
    }

    #[test]
    fn radius_formula_examples() {
        let family = AffineFamily::model();
        let opn = OperatorNormEstimate {
            value: 50.0,
            source: NormKind::L2,
            target: NormKind::H1k,
            k: 10.0,
            iterations: 1,
            rel_change: 0.0,
        };
        let region = region_radius_part1(&opn, &family, AllocationRule::EqualBudget).unwrap();
        assert_abs_diff_eq!(region.per_mode_radii[0], 0.01, epsilon = 1e-15);
        let mut opn2 = opn.clone();
        opn2.value = 100.0;
        let region2 = region_radius_part1(&opn2, &family, AllocationRule::EqualBudget).unwrap();
        assert_abs_diff_eq!(region2.per_mode_radii[0], 0.005, epsilon = 1e-15);
        assert!(region.condition_lhs(&family) <= 0.5 + 1e-12);
    }

    #[test]
    fn zero_mode_gets_unbounded_radius() {
        let zero = PiecewiseCoefficient::constant(C64::new(0.0, 0.0), 2.0);
        let family = AffineFamily::new(
            PiecewiseCoefficient::model_n0(),
            vec![PiecewiseCoefficient::model_psi1(), zero],
        )
        .unwrap();
        let opn = OperatorNormEstimate {
            value: 10.0,
            source: NormKind::L2,
            target: NormKind::H1k,
            k: 10.0,
            iterations: 1,
            rel_change: 0.0,
        };
        let region = region_radius_part1(&opn, &family, AllocationRule::EqualBudget).unwrap();
        assert!(region.per_mode_radii[1].is_infinite());
        // the live mode still gets the whole budget share it is due
        assert!(region.per_mode_radii[0] > 0.0);
    }

    #[test]
    fn part2_reduces_to_part1_shape() {
        let family = AffineFamily::model();
        let mk = |value: f64, target: NormKind| OperatorNormEstimate {
            value,
            source: NormKind::L2,
            target,
            k: 10.0,
            iterations: 1,
            rel_change: 0.0,
        };
        let r1 = region_radius_part1(&mk(10.0, NormKind::H1k), &family, AllocationRule::EqualBudget)
            .unwrap();
        let r2 = region_radius_part2(&mk(25.0, NormKind::H2k), &family, 1.0).unwrap();
        // ratio of radii equals the inverse ratio of the norms
        assert_abs_diff_eq!(
            r2.per_mode_radii[0] / r1.per_mode_radii[0],
            10.0 / 25.0,
            epsilon = 1e-14
        );
        assert!(region_radius_part2(&mk(10.0, NormKind::H1k), &family, 1.0).is_err());
    }

    #[test]
    fn resolvent_methods_agree_at_zero_and_inside() {
        let (op, pert, _) = setup(15.0);
        let probe: Vec<C64> = vec![C64::new(1.0, 0.0); op.mass.dim()];
        // y = 0: both methods are the base solve
        let y0 = ParamPoint::scalar(C64::new(0.0, 0.0));
        let (ud, _) = resolvent_apply(&op, &[&pert], &y0, &probe, ResolventMethod::Direct).unwrap();
        let (un, s) = resolvent_apply(
            &op,
            &[&pert],
            &y0,
            &probe,
            ResolventMethod::Neumann { max_terms: 50 },
        )
        .unwrap();
        for (a, b) in ud.iter().zip(&un) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(s.terms_used, Some(1));
        // small y inside any reasonable region
        let y = ParamPoint::scalar(C64::new(2e-3, 1e-3));
        let (ud, _) = resolvent_apply(&op, &[&pert], &y, &probe, ResolventMethod::Direct).unwrap();
        let (un, _) = resolvent_apply(
            &op,
            &[&pert],
            &y,
            &probe,
            ResolventMethod::Neumann { max_terms: 200 },
        )
        .unwrap();
        let diff: Vec<C64> = ud.iter().zip(&un).map(|(a, b)| a - b).collect();
        let rel = l2_norm(&op.mass, &diff) / l2_norm(&op.mass, &ud);
        assert!(rel < 1e-8, "neumann/direct relative difference {rel}");
    }

    #[test]
    fn neumann_diverges_far_outside() {
        let (op, pert, _) = setup(15.0);
        let probe: Vec<C64> = vec![C64::new(1.0, 0.0); op.mass.dim()];
        let y = ParamPoint::scalar(C64::new(5.0, 0.0));
        let err = resolvent_apply(
            &op,
            &[&pert],
            &y,
            &probe,
            ResolventMethod::Neumann { max_terms: 100 },
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NeumannDivergence(_) | Error::NoConvergence { .. }
        ));
    }

    #[test]
    fn cauchy_residual_small_inside_region() {
        let (op, pert, family) = setup(15.0);
        let opn = solution_operator_norm(&op, NormKind::L2, NormKind::H1k).unwrap();
        let region = region_radius_part1(&opn, &family, AllocationRule::EqualBudget).unwrap();
        let r = region.per_mode_radii[0];
        let res = cauchy_residual(
            &op,
            &pert,
            C64::new(0.0, 0.0),
            0.8 * r,
            64,
            Some(&region),
        )
        .unwrap();
        assert!(res <= 1e-8, "cauchy residual {res}");
        // circle exiting the region is rejected
        assert!(cauchy_residual(&op, &pert, C64::new(0.0, 0.0), 1.5 * r, 64, Some(&region))
            .is_err());
    }

    #[test]
    fn cauchy_residual_constant_functional() {
        // zero perturbation matrix: F is constant in y
        let (op, _, _) = setup(12.0);
        let zero = PerturbationMatrix {
            matrix: Tridiag::zeros(op.mass.dim()),
            mode_index: 0,
        };
        let res =
            cauchy_residual(&op, &zero, C64::new(0.0, 0.0), 0.3, 32, None).unwrap();
        assert!(res <= 1e-12, "residual {res}");
    }

    #[test]
    fn factor_two_holds_on_small_sample() {
        let (op, pert, family) = setup(20.0);
        let opn = solution_operator_norm(&op, NormKind::L2, NormKind::H1k).unwrap();
        let region = region_radius_part1(&opn, &family, AllocationRule::EqualBudget).unwrap();
        let report = verify_factor_two(&op, &[&pert], &region, 16, 7).unwrap();
        assert!(report.all_within_factor_two, "max ratio {}", report.max_ratio);
        assert!(report.max_ratio >= 1.0 - 1e-6);
        assert!(report.max_neumann_direct_rel <= 1e-8);
    }
}
