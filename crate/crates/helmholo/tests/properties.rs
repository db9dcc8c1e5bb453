//! Randomized structural invariants of the coefficient algebra, the mesh
//! rule, and the special-function kernels.

use helmholo::coeffs::{AffineFamily, ParamPoint, Piece, PiecewiseCoefficient};
use helmholo::dtn::wronskian_residual;
use helmholo::poles::{sequence_k, solve_resonance};
use helmholo::{C64, Mesh};
use proptest::prelude::*;

fn two_mode_family() -> AffineFamily {
    // psi_2 = x (1.5 - x) on [0, 1.5], zero on (1.5, 2]
    let psi2 = PiecewiseCoefficient::new(
        vec![0.0, 1.5, 2.0],
        vec![
            Piece::Poly(vec![
                C64::new(0.0, 0.0),
                C64::new(1.5, 0.0),
                C64::new(-1.0, 0.0),
            ]),
            Piece::Const(C64::new(0.0, 0.0)),
        ],
    )
    .unwrap();
    AffineFamily::new(
        PiecewiseCoefficient::model_n0(),
        vec![PiecewiseCoefficient::model_psi1(), psi2],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instantiate_is_affine_in_y(
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
        x in 0.0f64..2.0,
    ) {
        let family = AffineFamily::model();
        let y = C64::new(re, im);
        let n = family.instantiate(&ParamPoint::scalar(y)).unwrap();
        let expected = family.base().eval(x).unwrap()
            + y * family.modes()[0].eval(x).unwrap();
        prop_assert!((n.eval(x).unwrap() - expected).norm() <= 1e-12);
    }

    #[test]
    fn instantiate_at_zero_is_base(x in 0.0f64..2.0) {
        let family = two_mode_family();
        let n = family.instantiate(&ParamPoint::zero(2)).unwrap();
        prop_assert_eq!(n.eval(x).unwrap(), family.base().eval(x).unwrap());
    }

    #[test]
    fn sup_norm_is_absolutely_homogeneous(
        re in -5.0f64..5.0,
        im in -5.0f64..5.0,
    ) {
        let c = C64::new(re, im);
        for psi in two_mode_family().modes() {
            let scaled = psi.scale(c).sup_norm();
            let expected = c.norm() * psi.sup_norm();
            prop_assert!((scaled - expected).abs() <= 1e-10 * (1.0 + expected));
        }
    }

    #[test]
    fn sup_norm_satisfies_triangle_inequality(
        re1 in -2.0f64..2.0, im1 in -2.0f64..2.0,
        re2 in -2.0f64..2.0, im2 in -2.0f64..2.0,
    ) {
        let family = two_mode_family();
        let y = ParamPoint::new(vec![C64::new(re1, im1), C64::new(re2, im2)]);
        let n = family.instantiate(&y).unwrap();
        let bound = family.base().sup_norm()
            + C64::new(re1, im1).norm() * family.modes()[0].sup_norm()
            + C64::new(re2, im2).norm() * family.modes()[1].sup_norm();
        prop_assert!(n.sup_norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn mesh_rule_respects_resolution_targets(
        k in 10.0f64..150.0,
        ppw in 10.0f64..60.0,
        pe in 1.0f64..1.6,
    ) {
        let mesh = Mesh::build(k, ppw, pe, &[0.0, 1.0, 2.0]).unwrap();
        let tau = 2.0 * std::f64::consts::PI / ppw;
        let target = (tau / k).min(tau * k.powf(-pe));
        prop_assert!(mesh.h_max() <= target + 1e-12);
        prop_assert!(mesh.contains_node(1.0));
        let refined = mesh.refined();
        prop_assert_eq!(refined.n_elements(), 2 * mesh.n_elements());
        prop_assert!((refined.h_max() - 0.5 * mesh.h_max()).abs() <= 1e-12);
    }

    #[test]
    fn bessel_wronskian_holds_across_orders(
        n in 0i64..80,
        z in 0.01f64..9000.0,
    ) {
        prop_assert!(wronskian_residual(n, z).unwrap() <= 1e-9);
    }

    #[test]
    fn resonance_poles_stay_in_the_sharpness_strip(m in 5usize..200) {
        let k = sequence_k(m);
        let p = solve_resonance(k).unwrap();
        prop_assert!(p.residual <= 1e-10);
        prop_assert!(p.y.im > 0.0);
        let kays = k * p.y.norm();
        prop_assert!((1.0..=1.5).contains(&kays));
    }
}
