//! Checks against independent oracles: brute-force grids, quadrature, and
//! hand-listed group tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use symcanon::*;

fn rz(a: f64) -> Rotation {
    Rotation::axis_angle(&UnitAxis::z(), a).unwrap()
}

/// `E[(tr R)^k]` under Haar measure, from the class density `(1 − cos θ)/π` on `[0, π]`.
fn haar_trace_moment_quadrature(k: i32) -> f64 {
    let n = 20_000;
    let h = PI / n as f64;
    let f = |t: f64| (1.0 + 2.0 * t.cos()).powi(k) * (1.0 - t.cos()) / PI;
    // composite Simpson
    let mut s = f(0.0) + f(PI);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn haar_trace_moments_match_quadrature() {
    let m1 = haar_trace_moment_quadrature(1);
    let m2 = haar_trace_moment_quadrature(2);
    assert!(m1.abs() < 1e-9);
    assert!((m2 - 1.0).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let traces: Vec<f64> = (0..n).map(|_| random_rotation(&mut rng).trace()).collect();
    let mean = traces.iter().sum::<f64>() / n as f64;
    let second = traces.iter().map(|t| t * t).sum::<f64>() / n as f64;
    assert!((mean - m1).abs() <= 0.02, "mean trace {mean}");
    assert!((second - m2).abs() <= 0.02, "mean squared trace {second}");
}

#[test]
fn d2_closure_matches_hand_table() {
    // identity and the three half-turns about the coordinate axes
    let table: [[f64; 9]; 4] = [
        [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0],
        [-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
        [-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0],
    ];
    let g = SymmetryGroup::realize(&SymmetrySpec::multi_axis(&[
        (UnitAxis::z(), 2),
        (UnitAxis::x(), 2),
    ]))
    .unwrap();
    let e = g.elements().unwrap();
    assert_eq!(e.len(), 4);
    for row in &table {
        let r = Rotation::from_row_major(row).unwrap();
        assert!(e.iter().any(|s| s.frobenius_dist_to(&r) <= 1e-12));
    }
}

#[test]
fn d4_closure_matches_hand_table() {
    // D4 about z with a half-turn about x: 4 twists, 4 flips
    let g = SymmetryGroup::realize(&SymmetrySpec::multi_axis(&[
        (UnitAxis::z(), 4),
        (UnitAxis::x(), 2),
    ]))
    .unwrap();
    let e = g.elements().unwrap();
    assert_eq!(e.len(), 8);
    let mut table = Vec::new();
    for k in 0..4 {
        let a = PI / 2.0 * k as f64;
        table.push([a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0]);
        // R_z(a)·R_x(π)
        table.push([a.cos(), a.sin(), 0.0, a.sin(), -a.cos(), 0.0, 0.0, 0.0, -1.0]);
    }
    for row in &table {
        let r = Rotation::from_row_major(row).unwrap();
        assert!(e.iter().any(|s| s.frobenius_dist_to(&r) <= 1e-12), "{row:?} missing");
    }
}

#[test]
fn revolution_angle_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n_grid = 1_000_000;
    for _ in 0..20 {
        let r = random_rotation(&mut rng);
        let m = r.matrix();
        let (c, s) = (m[(0, 0)] + m[(1, 1)], m[(1, 0)] - m[(0, 1)]);
        if c.hypot(s) < 1e-2 {
            continue;
        }
        let objective = |a: f64| r.frobenius_dist_to(&rz(a)).powi(2);
        let (mut best_a, mut best_v) = (0.0, f64::INFINITY);
        for i in 0..n_grid {
            let a = -PI + 2.0 * PI * i as f64 / n_grid as f64;
            let v = objective(a);
            if v < best_v {
                best_v = v;
                best_a = a;
            }
        }
        let est = map_revolution_angle(&UnitAxis::z(), &r);
        assert!(!est.degenerate);
        assert!(wrap_angle(est.angle - best_a).abs() <= 1e-3);
        assert!(objective(est.angle) <= best_v + 1e-9);
    }
}

#[test]
fn revolution_examples_against_grid() {
    let z = UnitAxis::z();
    assert!((map_revolution_angle(&z, &rz(1.0)).angle - 1.0).abs() < 1e-12);
    let rx = Rotation::axis_angle(&UnitAxis::x(), 0.4).unwrap();
    assert!((map_revolution_angle(&z, &(rz(0.7) * rx)).angle - 0.7).abs() < 1e-12);
    let flip = Rotation::axis_angle(&UnitAxis::x(), PI).unwrap();
    let a = map_revolution_angle(&z, &flip);
    assert!(a.degenerate);
    assert_eq!(a.angle, 0.0);
}

#[test]
fn revolution_about_tilted_axis_matches_grid() {
    let u = UnitAxis::from_array([1.0, -2.0, 0.5]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let r = random_rotation(&mut rng);
        let est = map_revolution_angle(&u, &r);
        let obj = |a: f64| r.frobenius_dist_to(&Rotation::axis_angle(&u, a).unwrap()).powi(2);
        let best = (0..100_000)
            .map(|i| obj(-PI + 2.0 * PI * i as f64 / 100_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(obj(est.angle) <= best + 1e-9);
    }
}

#[test]
fn revolution_map_is_continuous_off_degenerate_set() {
    let g = SymmetryGroup::realize(&SymmetrySpec::Revolution { axis: UnitAxis::z() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 1000 {
        let r = random_rotation(&mut rng);
        let m = r.matrix();
        if (m[(0, 0)] + m[(1, 1)]).hypot(m[(1, 0)] - m[(0, 1)]) < 1e-2 {
            continue;
        }
        let w = nalgebra::Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize()
            * 1e-4;
        let r2 = Rotation::exp(&w) * r;
        let d = map(&g, &r).canonical.geodesic_dist(&map(&g, &r2).canonical);
        assert!(d <= 10.0 * 1e-4);
        checked += 1;
    }
}

#[test]
fn map_prime_region_shares_are_even() {
    // Each region of the C2 partition has Haar measure 1/2.
    let g = SymmetryGroup::realize(&SymmetrySpec::cyclic(UnitAxis::z(), 2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 20_000;
    let ones = (0..n)
        .filter(|_| map_prime(&g, &random_rotation(&mut rng)).unwrap().delta == Some(RegionIndex::Single(1)))
        .count();
    let share = ones as f64 / n as f64;
    assert!((share - 0.5).abs() <= 0.02, "share {share}");
}

#[test]
fn map_prime_two_axis_brute_force() {
    // region 2,1 and Ŝ = I for Rz(π/2 + 0.05)
    let g = SymmetryGroup::realize(&SymmetrySpec::multi_axis(&[
        (UnitAxis::z(), 2),
        (UnitAxis::x(), 2),
    ]))
    .unwrap();
    let r = rz(PI / 2.0 + 0.05);
    let c = map_prime(&g, &r).unwrap();
    assert_eq!(c.delta, Some(RegionIndex::Pair(2, 1)));
    assert_eq!(c.delta.unwrap().class_index(), 2);
    // brute force over the 4 elements against the Rz(π/2) anchor
    let anchor = rz(PI / 2.0);
    let best = g
        .elements()
        .unwrap()
        .iter()
        .min_by(|a, b| {
            let fa = (a.transpose() * r).frobenius_dist_to(&anchor);
            let fb = (b.transpose() * r).frobenius_dist_to(&anchor);
            fa.total_cmp(&fb)
        })
        .unwrap();
    assert!(best.frobenius_dist_to(&Rotation::identity()) < 1e-12);
    assert!(c.s_hat.frobenius_dist_to(best) < 1e-12);
}
