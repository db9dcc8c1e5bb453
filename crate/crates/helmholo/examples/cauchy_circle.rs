//! Probe analyticity of `y -> A^{-1}(k, y)` with the Cauchy integral
//! theorem: the trapezoid-rule mean of a solution functional over a circle
//! equals its center value when the disc is pole-free, and picks up a
//! residue contribution when the circle encloses a pole.
//!
//! Run with: `cargo run --release --example cauchy_circle`

use helmholo::coeffs::AffineFamily;
use helmholo::holomorphy::{cauchy_residual, region_radius_part1, AllocationRule};
use helmholo::mesh::{assemble_a0, assemble_perturbation};
use helmholo::opnorm::{solution_operator_norm, NormKind};
use helmholo::poles::{sequence_k, solve_resonance};
use helmholo::suite::{DEFAULT_PE, DEFAULT_PPW};
use helmholo::{C64, Mesh};

fn main() {
    let m = 10;
    let k = sequence_k(m);
    let family = AffineFamily::model();
    let mesh = Mesh::build(k, DEFAULT_PPW, DEFAULT_PE, family.base().breakpoints()).unwrap();
    let op = assemble_a0(&mesh, family.base()).unwrap();
    let pert = assemble_perturbation(&mesh, &family.modes()[0], 0).unwrap();

    // circle well inside the guaranteed region, centered at y = 0
    let opn = solution_operator_norm(&op, NormKind::L2, NormKind::H1k).unwrap();
    let region = region_radius_part1(&opn, &family, AllocationRule::EqualBudget).unwrap();
    let r = 0.8 * region.per_mode_radii[0];
    let inside = cauchy_residual(&op, &pert, C64::new(0.0, 0.0), r, 64, Some(&region)).unwrap();
    println!("k = {k:.3} (m = {m})");
    println!("guaranteed radius r1 = {:.6}", region.per_mode_radii[0]);
    println!("Cauchy residual on |y| = {r:.6} (inside region): {inside:.3e}");

    // circle enclosing the certified pole: the mean no longer matches
    let pole = solve_resonance(k).unwrap();
    let center = pole.y + 0.15 * pole.y.norm();
    let around =
        cauchy_residual(&op, &pert, center, 0.5 * pole.y.norm(), 64, None).unwrap();
    println!(
        "pole at y = {:.5e}+{:.5e}i (|y| k = {:.5})",
        pole.y.re,
        pole.y.im,
        pole.y.norm() * k
    );
    println!("Cauchy residual on a circle around the pole: {around:.3e}");
    assert!(inside <= 1e-8 && around >= 1e-2);
    println!("\nanalytic inside the region, pole detected outside -- as expected");
}
