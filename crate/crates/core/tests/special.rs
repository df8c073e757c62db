mod common;

use std::f64::consts::PI;

use common::{bessel_quad, bisect, golden_max};
use proptest::prelude::*;
use thinmusic::special::{bessel_j, circular_moment0, circular_moment1, j0, j1, BesselOrder};
use thinmusic::{DirectionSet, Vec2, C64};

#[test]
fn grid_against_quadrature() {
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let x = 50.0 * k as f64 / 999.0;
        worst = worst.max((j0(x) - bessel_quad(0, x)).abs());
        worst = worst.max((j1(x) - bessel_quad(1, x)).abs());
    }
    assert!(worst <= 1e-10, "max deviation {worst:e}");
}

#[test]
fn wide_range_against_quadrature() {
    let mut worst: f64 = 0.0;
    for k in 0..=4000 {
        let x = -100.0 + 200.0 * k as f64 / 4000.0;
        worst = worst.max((j0(x) - bessel_quad(0, x)).abs());
        worst = worst.max((j1(x) - bessel_quad(1, x)).abs());
    }
    assert!(worst <= 1e-12, "max deviation {worst:e}");
}

#[test]
fn first_zero_of_j0() {
    let root = bisect(|x| bessel_quad(0, x), 2.0, 3.0, 1e-14);
    assert!((root - 2.404826).abs() < 1e-6);
    assert!(j0(root).abs() < 1e-12);
    assert!(bessel_j(BesselOrder::Zero, 2.404826).unwrap().abs() <= 1e-6);
}

#[test]
fn first_maximum_of_j1() {
    let arg = golden_max(|x| bessel_quad(1, x), 1.0, 3.0, 1e-10);
    assert!((arg - 1.841184).abs() < 1e-6, "{arg}");
    let peak = bessel_quad(1, arg);
    assert!((peak - 0.581865).abs() < 1e-6);
    assert!((j1(1.841184) - 0.581865).abs() < 1e-6);
    assert!((peak * peak - 0.3386).abs() < 1e-4);
}

#[test]
fn reference_values() {
    let dirs = DirectionSet::sample(128).unwrap();
    let omega = 5.0 * PI;
    let m0 = circular_moment0(&Vec2::new(0.5, 0.0), omega, &dirs);
    assert!((m0 - C64::from(bessel_quad(0, 2.5 * PI))).norm() < 1e-10);

    let x = Vec2::new(0.3, 0.4);
    let m1 = circular_moment1(&x, &(x / x.norm()), omega, &dirs).unwrap();
    assert!((m1 - C64::new(0.0, bessel_quad(1, 2.5 * PI))).norm() < 1e-10);
    let perp = Vec2::new(-0.8, 0.6);
    assert!(circular_moment1(&x, &perp, omega, &dirs).unwrap().norm() < 1e-10);

    let few = DirectionSet::sample(8).unwrap();
    let m = circular_moment0(&Vec2::new(1.0, 0.0), omega, &few);
    assert!((m - C64::from(bessel_quad(0, omega))).norm() > 0.1);
}

proptest! {
    /// With `N >= 2 w |x| + 16` directions the discrete moments reproduce
    /// their Bessel limits to 1e-8.
    #[test]
    fn aliasing_bound(r in 0.0..1.0f64, a in 0.0..(2.0 * PI), omega in 0.5..30.0f64, b in 0.0..(2.0 * PI)) {
        let x = Vec2::new(r * a.cos(), r * a.sin());
        let n = (2.0 * omega * r + 16.0).ceil() as usize;
        let dirs = DirectionSet::sample(n).unwrap();
        let m0 = circular_moment0(&x, omega, &dirs);
        prop_assert!((m0 - C64::from(bessel_quad(0, omega * r))).norm() <= 1e-8);
        let xi = Vec2::new(b.cos(), b.sin());
        let m1 = circular_moment1(&x, &xi, omega, &dirs).unwrap();
        let proj = if r > 0.0 { x.dot(&xi) / r } else { 0.0 };
        let limit = C64::new(0.0, proj * bessel_quad(1, omega * r));
        prop_assert!((m1 - limit).norm() <= 1e-8);
    }

    #[test]
    fn parity(x in -100.0..100.0f64) {
        prop_assert_eq!(j0(-x), j0(x));
        prop_assert_eq!(j1(-x), -j1(x));
    }
}
