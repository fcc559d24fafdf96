//! Property tests for rotation algebra, groups, canonicalization and metrics.

use nalgebra::Vector3;
use proptest::prelude::*;
use std::f64::consts::PI;
use symcanon::*;

fn rotation() -> impl Strategy<Value = Rotation> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("quaternion near zero", |q| q.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|q| Rotation::from_quaternion(q[0], q[1], q[2], q[3]).unwrap())
}

fn axis() -> impl Strategy<Value = UnitAxis> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("axis near zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| UnitAxis::from_array(v).unwrap())
}

fn rz(a: f64) -> Rotation {
    Rotation::axis_angle(&UnitAxis::z(), a).unwrap()
}

fn discrete_groups() -> Vec<SymmetryGroup> {
    let mut out: Vec<SymmetryGroup> = [2u32, 3, 4, 6]
        .iter()
        .map(|&m| SymmetryGroup::realize(&SymmetrySpec::cyclic(UnitAxis::z(), m)).unwrap())
        .collect();
    out.push(
        SymmetryGroup::realize(&SymmetrySpec::multi_axis(&[
            (UnitAxis::z(), 2),
            (UnitAxis::x(), 2),
        ]))
        .unwrap(),
    );
    out
}

fn revolution() -> SymmetryGroup {
    SymmetryGroup::realize(&SymmetrySpec::Revolution { axis: UnitAxis::z() }).unwrap()
}

fn orthonormal(r: &Rotation) -> bool {
    let m = r.matrix();
    (m.transpose() * m - nalgebra::Matrix3::identity()).amax() <= 1e-9
        && (m.determinant() - 1.0).abs() <= 1e-9
}

proptest! {
    #[test]
    fn trace_identity(a in rotation(), b in rotation()) {
        let f = a.frobenius_dist_to(&b);
        prop_assert!((f * f + 2.0 * a.trace_dot(&b) - 6.0).abs() <= 1e-9);
    }

    #[test]
    fn geodesic_symmetric_and_triangle(a in rotation(), b in rotation(), c in rotation()) {
        prop_assert_eq!(a.geodesic_dist(&b), b.geodesic_dist(&a));
        prop_assert!(a.geodesic_dist(&c) <= a.geodesic_dist(&b) + b.geodesic_dist(&c) + 1e-9);
    }

    #[test]
    fn axis_angle_adds(u in axis(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
        let lhs = Rotation::axis_angle(&u, a).unwrap() * Rotation::axis_angle(&u, b).unwrap();
        let rhs = Rotation::axis_angle(&u, a + b).unwrap();
        prop_assert!(lhs.frobenius_dist_to(&rhs) <= 1e-9);
    }

    #[test]
    fn compose_stays_orthonormal(a in rotation(), b in rotation()) {
        prop_assert!(orthonormal(&a.compose(&b)));
    }

    #[test]
    fn log_exp_round_trip(r in rotation()) {
        prop_assert!(Rotation::exp(&r.log()).frobenius_dist_to(&r) <= 1e-9);
    }

    #[test]
    fn map_is_constant_on_orbits(r in rotation()) {
        for g in discrete_groups() {
            let base = map(&g, &r).canonical;
            for s in g.elements().unwrap() {
                prop_assert!(map(&g, &(s * &r)).canonical.frobenius_dist_to(&base) <= 1e-9);
            }
        }
    }

    #[test]
    fn map_revolution_constant_on_orbits(r in rotation(), alpha in -PI..PI) {
        let g = revolution();
        let a = map(&g, &r);
        prop_assume!(!a.degenerate);
        let b = map(&g, &(rz(alpha) * r));
        prop_assert!(a.canonical.frobenius_dist_to(&b.canonical) <= 1e-9);
    }

    #[test]
    fn map_factorizes_and_is_idempotent(r in rotation()) {
        let mut groups = discrete_groups();
        groups.push(revolution());
        groups.push(SymmetryGroup::realize(&SymmetrySpec::Sphere).unwrap());
        for g in groups {
            let c = map(&g, &r);
            prop_assert!((c.s_hat * c.canonical).frobenius_dist_to(&r) <= 1e-9);
            prop_assert!(g.contains(&c.s_hat, 1e-7));
            let again = map(&g, &c.canonical).canonical;
            prop_assert!(again.frobenius_dist_to(&c.canonical) <= 1e-9);
            prop_assert_eq!(quotient_rotation_dist(&g, &c.canonical, &r), 0.0);
        }
    }

    #[test]
    fn map_prime_is_constant_on_orbits(r in rotation()) {
        for g in discrete_groups() {
            let base = map_prime(&g, &r).unwrap();
            prop_assert!((base.s_hat * base.canonical).frobenius_dist_to(&r) <= 1e-9);
            for s in g.elements().unwrap() {
                let other = map_prime(&g, &(s * &r)).unwrap();
                prop_assert_eq!(other.delta, base.delta);
                prop_assert!(other.canonical.frobenius_dist_to(&base.canonical) <= 1e-9);
            }
        }
    }

    #[test]
    fn map_prime_same_s_hat_is_isometry(r in rotation(), w in prop::array::uniform3(-0.05f64..0.05)) {
        let g = SymmetryGroup::realize(&SymmetrySpec::cyclic(UnitAxis::z(), 2)).unwrap();
        let r2 = Rotation::exp(&Vector3::from(w)) * r;
        let a = map_prime(&g, &r).unwrap();
        let b = map_prime(&g, &r2).unwrap();
        prop_assume!(a.s_hat == b.s_hat);
        let d_in = r.geodesic_dist(&r2);
        let d_out = a.canonical.geodesic_dist(&b.canonical);
        prop_assert!((d_in - d_out).abs() <= 1e-12);
    }

    #[test]
    fn equivalence_relation_on_orbits(r in rotation(), i in 0usize..4, j in 0usize..4) {
        let g = SymmetryGroup::realize(&SymmetrySpec::cyclic(UnitAxis::z(), 4)).unwrap();
        let e = g.elements().unwrap();
        let (a, b, c) = (r, e[i] * r, e[j] * e[i] * r);
        prop_assert!(g.equivalent(&a, &a, 1e-6));
        prop_assert_eq!(g.equivalent(&a, &b, 1e-6), g.equivalent(&b, &a, 1e-6));
        prop_assert!(g.equivalent(&a, &b, 1e-6) && g.equivalent(&b, &c, 1e-6));
        prop_assert!(g.equivalent(&a, &c, 1e-6));
    }

    #[test]
    fn quotient_dist_zero_iff_equivalent(a in rotation(), b in rotation()) {
        for g in discrete_groups() {
            let d = quotient_rotation_dist(&g, &a, &b);
            prop_assert_eq!(d == 0.0, g.equivalent(&a, &b, 1e-6));
            prop_assert!((d - quotient_rotation_dist(&g, &b, &a)).abs() <= 1e-9);
            for s in g.elements().unwrap() {
                prop_assert_eq!(quotient_rotation_dist(&g, &(s * &b), &b), 0.0);
            }
        }
    }

    #[test]
    fn adi_ignores_point_order(r in rotation(), shift in prop::array::uniform3(-0.3f64..0.3), k in 1usize..7) {
        let pts: Vec<Vector3<f64>> = (0..7)
            .map(|i| Vector3::new(i as f64 * 0.3, (i * i) as f64 * 0.1, 1.0 - i as f64 * 0.2))
            .collect();
        let mut rotated = pts.clone();
        rotated.rotate_left(k);
        let a = ModelPoints::new(pts).unwrap();
        let b = ModelPoints::new(rotated).unwrap();
        let gt = RigidMotion::new(Rotation::identity(), Vector3::new(0.0, 0.0, 3.0));
        let est = RigidMotion::new(r, Vector3::new(shift[0], shift[1], 3.0 + shift[2]));
        prop_assert!((adi(&a, &est, &gt) - adi(&b, &est, &gt)).abs() <= 1e-12);
    }

    #[test]
    fn pnp_round_trip(r in rotation(), tx in -0.5f64..0.5, ty in -0.5f64..0.5, tz in 4.0f64..8.0) {
        let cam = Camera::new(800.0, 800.0, 320.0, 240.0).unwrap();
        let bx = Box3::new(0.5, 0.35, 0.2).unwrap();
        let pose = RigidMotion::new(r, Vector3::new(tx, ty, tz));
        let obs = project_corners(&cam, &bx, &pose).unwrap();
        let sol = pnp_solve_detailed(&cam, &bx, &obs).unwrap();
        prop_assert!(sol.pose.r.geodesic_dist(&r) <= 1e-6);
        prop_assert!(sol.final_residual <= sol.initial_residual);
        prop_assert!(sol.residual_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn cyclic_elements_are_well_separated() {
    for m in [2u32, 3, 4, 5, 6, 8] {
        let g = SymmetryGroup::realize(&SymmetrySpec::cyclic(UnitAxis::z(), m)).unwrap();
        let e = g.elements().unwrap();
        assert_eq!(e.len(), m as usize);
        let min_sep = (1..m)
            .map(|k| rz(2.0 * PI * k as f64 / m as f64).frobenius_dist_to(&Rotation::identity()))
            .fold(f64::INFINITY, f64::min);
        for i in 0..e.len() {
            for j in 0..i {
                assert!(e[i].frobenius_dist_to(&e[j]) >= min_sep - 1e-12);
            }
        }
    }
}

#[test]
fn groups_are_closed() {
    for g in discrete_groups() {
        let e = g.elements().unwrap();
        for a in e {
            for b in e {
                assert!(g.contains(&a.compose(b), 1e-7));
            }
        }
    }
}

#[test]
fn sqrt_anchors_contain_group() {
    for g in discrete_groups() {
        let sq = g.sqrt_group().unwrap();
        for s in g.elements().unwrap() {
            assert!(sq.anchors.iter().any(|a| a.frobenius_dist_to(s) <= 1e-9));
        }
    }
}

#[test]
fn long_compose_chain_stays_valid() {
    let step = Rotation::axis_angle(&UnitAxis::from_array([1.0, 2.0, 3.0]).unwrap(), 0.1).unwrap();
    let mut r = Rotation::identity();
    for _ in 0..100_000 {
        r = r.compose(&step);
    }
    assert!(orthonormal(&r));
}
