//! The reproduction suite: one runnable check per headline property of the
//! toolkit, with explicit numeric pass criteria.  The `acceptance`
//! integration test and the `repro-all` subcommand both run these.

use crate::coeffs::{AffineFamily, PiecewiseCoefficient};
use crate::dtn::{check_sign_properties, dtn_symbol, wronskian_residual};
use crate::holomorphy::{
    cauchy_residual, region_radius_part1, verify_factor_two, AllocationRule, HolomorphyRegion,
};
use crate::mesh::{assemble_a0, assemble_perturbation, DiscreteOperator, Mesh, PerturbationMatrix};
use crate::opnorm::{k_sweep, norm_relation_check, solution_operator_norm, NormKind};
use crate::poles::{k_sequence_experiment, pencil_poles, sequence_k, solve_resonance};
use crate::{C64, Result};
use serde::Serialize;

/// Default mesh resolution: points per wavelength.
pub const DEFAULT_PPW: f64 = 20.0;
/// Default pollution exponent of the mesh rule `h <= c k^{-pe}`.
pub const DEFAULT_PE: f64 = 1.5;
/// Asymptotic value of `k |y_pole|` along the sharpness sequence,
/// `sqrt2 * artanh(1/sqrt2)`.
pub const K_ABS_Y_LIMIT: f64 = 1.2464504802804512;

/// Outcome of one suite criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn outcome(id: usize, name: &'static str, pass: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        pass,
        detail,
    }
}

fn model_setup(k: f64, ppw: f64) -> Result<(DiscreteOperator, PerturbationMatrix, AffineFamily)> {
    let family = AffineFamily::model();
    let mesh = Mesh::build(k, ppw, DEFAULT_PE, &[0.0, 1.0, 2.0])?;
    let op = assemble_a0(&mesh, family.base())?;
    let pert = assemble_perturbation(&mesh, &family.modes()[0], 0)?;
    Ok((op, pert, family))
}

fn model_region(op: &DiscreteOperator, family: &AffineFamily) -> Result<HolomorphyRegion> {
    let opn = solution_operator_norm(op, NormKind::L2, NormKind::H1k)?;
    region_radius_part1(&opn, family, AllocationRule::EqualBudget)
}

/// 40 log-spaced points of `k` in `[10, 200]`.
pub fn sweep_wavenumbers() -> Vec<f64> {
    let (lo, hi, count) = (10.0f64, 200.0f64, 40usize);
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Criterion 1: the nontrapping base norm `||A0^{-1}(k)||_{L2 -> L2}` grows
/// like `k^1`: fitted log-log slope in `[0.85, 1.15]` over 40 log-spaced
/// `k` in `[10, 200]`, and `estimate / k` stays bounded away from zero.
pub fn criterion_nontrapping_slope() -> Result<CriterionOutcome> {
    let n0 = PiecewiseCoefficient::model_n0();
    let ks = sweep_wavenumbers();
    let table = k_sweep(&n0, &ks, (NormKind::L2, NormKind::L2), DEFAULT_PPW, DEFAULT_PE);
    if let Some(msg) = &table.aborted {
        return Ok(outcome(1, "nontrapping-slope", false, format!("sweep aborted: {msg}")));
    }
    let fit = table.fit.as_ref().expect("40-row sweep always has a fit");
    let min_ratio = table
        .rows
        .iter()
        .map(|r| r.value / r.k)
        .fold(f64::INFINITY, f64::min);
    let pass = table.rows.len() == ks.len()
        && (0.85..=1.15).contains(&fit.slope)
        && min_ratio > 1e-3;
    Ok(outcome(
        1,
        "nontrapping-slope",
        pass,
        format!(
            "slope {:.4} (target [0.85, 1.15]), min estimate/k {:.4e} over {} points",
            fit.slope,
            min_ratio,
            table.rows.len()
        ),
    ))
}

/// Criterion 2: transcendental sharpness sequence for `m` in `[5, 40]`:
/// `k |y|` in `[1.0, 1.5]`, resonance-equation residual `<= 1e-10`, and
/// `k |y|` within `0.01` of the asymptote `1.24645` at `m = 40`.
pub fn criterion_sharpness_sequence() -> Result<CriterionOutcome> {
    let report = k_sequence_experiment(5, 40, 0, DEFAULT_PPW, DEFAULT_PE)?;
    let max_residual = report
        .rows
        .iter()
        .map(|r| r.residual)
        .fold(0.0f64, f64::max);
    let last = report.rows.last().expect("nonempty range");
    let asym_err = (last.k_abs_y - K_ABS_Y_LIMIT).abs();
    let pass = report.min_k_abs_y >= 1.0
        && report.max_k_abs_y <= 1.5
        && max_residual <= 1e-10
        && asym_err <= 0.01;
    Ok(outcome(
        2,
        "sharpness-sequence",
        pass,
        format!(
            "k|y| in [{:.5}, {:.5}], max residual {:.2e}, |k|y|(m=40) - {K_ABS_Y_LIMIT:.5}| = {:.2e}",
            report.min_k_abs_y, report.max_k_abs_y, max_residual, asym_err
        ),
    ))
}

/// Criterion 3: transcendental and matrix-pencil poles agree to relative
/// `1e-3` for `m` in `[5, 20]` at `ppw = 40`, with the discrepancy shrinking
/// at order about 2 under one mesh refinement (checked at `m = 8`).
pub fn criterion_two_oracle_poles() -> Result<CriterionOutcome> {
    let report = k_sequence_experiment(5, 20, 20, 40.0, DEFAULT_PE)?;
    let max_agreement = report
        .rows
        .iter()
        .filter_map(|r| r.agreement)
        .fold(0.0f64, f64::max);
    let n_pencil = report.rows.iter().filter(|r| r.y_pencil.is_some()).count();
    // refinement order at m = 8
    let k = sequence_k(8);
    let trans = solve_resonance(k)?;
    let n0 = PiecewiseCoefficient::model_n0();
    let psi1 = PiecewiseCoefficient::model_psi1();
    let coarse = Mesh::build(k, 40.0, DEFAULT_PE, &[0.0, 1.0, 2.0])?;
    let fine = coarse.refined();
    let mut discrepancies = Vec::new();
    for mesh in [&coarse, &fine] {
        let op = assemble_a0(mesh, &n0)?;
        let pert = assemble_perturbation(mesh, &psi1, 0)?;
        let y = pencil_poles(&op, &pert, 1)?[0];
        discrepancies.push((y - trans.y).norm() / trans.y.norm());
    }
    let order = (discrepancies[0] / discrepancies[1]).log2();
    let pass = n_pencil == 16 && max_agreement <= 1e-3 && (1.5..=2.5).contains(&order);
    Ok(outcome(
        3,
        "two-oracle-poles",
        pass,
        format!(
            "max relative disagreement {:.2e} over {n_pencil} m-values, refinement order {:.2} ({:.2e} -> {:.2e})",
            max_agreement, order, discrepancies[0], discrepancies[1]
        ),
    ))
}

/// Criterion 4: at `k` in `{20, 40, 80}`, 200 random parameter samples in
/// the guaranteed polydisc all satisfy the factor-2 resolvent bound, and
/// Neumann-series and direct resolvents agree to relative `1e-8`.
pub fn criterion_region_soundness() -> Result<CriterionOutcome> {
    let mut details = Vec::new();
    let mut pass = true;
    for k in [20.0, 40.0, 80.0] {
        let (op, pert, family) = model_setup(k, DEFAULT_PPW)?;
        let region = model_region(&op, &family)?;
        let report = verify_factor_two(&op, &[&pert], &region, 200, 42)?;
        pass &= report.all_within_factor_two && report.max_neumann_direct_rel <= 1e-8;
        details.push(format!(
            "k={k}: max ratio {:.6}, max neumann/direct rel {:.2e}",
            report.max_ratio, report.max_neumann_direct_rel
        ));
    }
    Ok(outcome(4, "region-soundness", pass, details.join("; ")))
}

/// Criterion 5: at `k = 2 pi m sqrt2`, `m` in `{5, 10, 20, 40}`, the
/// guaranteed radius stays below the actual pole distance and both scale
/// like `k^{-1}` (each of `r1 k` and `|y_pole| k` varies by `< 20%`).
pub fn criterion_region_vs_pole() -> Result<CriterionOutcome> {
    let mut r1k = Vec::new();
    let mut yk = Vec::new();
    let mut ordered = true;
    for m in [5usize, 10, 20, 40] {
        let k = sequence_k(m);
        let (op, _, family) = model_setup(k, DEFAULT_PPW)?;
        let region = model_region(&op, &family)?;
        let r1 = region.per_mode_radii[0];
        let y = solve_resonance(k)?.y;
        ordered &= r1 < y.norm();
        r1k.push(r1 * k);
        yk.push(y.norm() * k);
    }
    let variation = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0f64, f64::max);
        hi / lo - 1.0
    };
    let (var_r, var_y) = (variation(&r1k), variation(&yk));
    let pass = ordered && var_r < 0.2 && var_y < 0.2;
    Ok(outcome(
        5,
        "region-vs-pole",
        pass,
        format!(
            "r1 < |y_pole| everywhere: {ordered}; r1*k in [{:.4}, {:.4}] (variation {:.1}%), |y|*k in [{:.4}, {:.4}] (variation {:.1}%)",
            r1k.iter().cloned().fold(f64::INFINITY, f64::min),
            r1k.iter().cloned().fold(0.0f64, f64::max),
            100.0 * var_r,
            yk.iter().cloned().fold(f64::INFINITY, f64::min),
            yk.iter().cloned().fold(0.0f64, f64::max),
            100.0 * var_y
        ),
    ))
}

/// Criterion 6: Cauchy-integral analyticity test at `m = 10`: residual
/// `<= 1e-8` on a 64-node circle inside the guaranteed region, `>= 1e-2`
/// on a circle enclosing the certified pole.
pub fn criterion_cauchy() -> Result<CriterionOutcome> {
    let k = sequence_k(10);
    let (op, pert, family) = model_setup(k, DEFAULT_PPW)?;
    let region = model_region(&op, &family)?;
    let r1 = region.per_mode_radii[0];
    let inside = cauchy_residual(&op, &pert, C64::new(0.0, 0.0), 0.8 * r1, 64, Some(&region))?;
    let pole = solve_resonance(k)?.y;
    let around = cauchy_residual(
        &op,
        &pert,
        pole + 0.15 * pole.norm(),
        0.5 * pole.norm(),
        64,
        None,
    )?;
    let pass = inside <= 1e-8 && around >= 1e-2;
    Ok(outcome(
        6,
        "cauchy-analyticity",
        pass,
        format!("in-region residual {inside:.2e} (<= 1e-8), around-pole residual {around:.2e} (>= 1e-2)"),
    ))
}

/// Criterion 7: DtN symbol signs (`Im > 0`, `Re <= 0`) for `|n| <= 50`,
/// `z` in `{1, 10, 100}`; Bessel Wronskian to `1e-10`; outgoing limit
/// `|symbol - i| <= 1e-3` at `n = 0`, `z = 1e3`.
pub fn criterion_dtn_signs() -> Result<CriterionOutcome> {
    let report = check_sign_properties(50, &[1.0, 10.0, 100.0])?;
    let mut max_wronskian = 0.0f64;
    for &z in &[1.0, 10.0, 100.0, 1e3] {
        for n in [0i64, 1, 5, 20, 50] {
            if (n as f64) > 1.2 * z + 20.0 {
                continue;
            }
            max_wronskian = max_wronskian.max(wronskian_residual(n, z)?);
        }
    }
    let outgoing = (dtn_symbol(0, 1e3)?.value - C64::new(0.0, 1.0)).norm();
    let pass = report.all_pass && max_wronskian <= 1e-10 && outgoing <= 1e-3;
    Ok(outcome(
        7,
        "dtn-sign-properties",
        pass,
        format!(
            "min Im {:.3e} (> 0), max Re {:.3e} (<= 0) over {} modes; max wronskian residual {:.2e}; |symbol(0, 1e3) - i| = {:.2e}",
            report.min_im, report.max_re, report.modes_checked, max_wronskian, outgoing
        ),
    ))
}

/// Criterion 8: both norm-relation inequalities hold with measured
/// discrete norms at `k` in `{20, 80}`.
pub fn criterion_norm_relations() -> Result<CriterionOutcome> {
    let n0 = PiecewiseCoefficient::model_n0();
    let mut details = Vec::new();
    let mut pass = true;
    for k in [20.0, 80.0] {
        let mesh = Mesh::build(k, DEFAULT_PPW, DEFAULT_PE, &[0.0, 1.0, 2.0])?;
        let op = assemble_a0(&mesh, &n0)?;
        let rep = norm_relation_check(&op)?;
        pass &= rep.ineq1_holds && rep.ineq2_holds;
        details.push(format!(
            "k={k}: {:.3} <= {:.3} ({}), {:.3} <= {:.3} ({})",
            rep.ineq1_lhs,
            rep.ineq1_rhs,
            rep.ineq1_holds,
            rep.ineq2_lhs,
            rep.ineq2_rhs,
            rep.ineq2_holds
        ));
    }
    Ok(outcome(8, "norm-relations", pass, details.join("; ")))
}

/// Runs all eight criteria in order; errors become failing outcomes.
pub fn run_all() -> Vec<CriterionOutcome> {
    let runners: Vec<(usize, &'static str, fn() -> Result<CriterionOutcome>)> = vec![
        (1, "nontrapping-slope", criterion_nontrapping_slope),
        (2, "sharpness-sequence", criterion_sharpness_sequence),
        (3, "two-oracle-poles", criterion_two_oracle_poles),
        (4, "region-soundness", criterion_region_soundness),
        (5, "region-vs-pole", criterion_region_vs_pole),
        (6, "cauchy-analyticity", criterion_cauchy),
        (7, "dtn-sign-properties", criterion_dtn_signs),
        (8, "norm-relations", criterion_norm_relations),
    ];
    runners
        .into_iter()
        .map(|(id, name, f)| match f() {
            Ok(o) => o,
            Err(e) => outcome(id, name, false, format!("error: {e}")),
        })
        .collect()
}
