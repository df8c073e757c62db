mod common;

use common::{gamma1_point, gamma1_speed, gamma2_point, gamma2_speed, simpson};
use proptest::prelude::*;
use thinmusic::geometry::rotate_left;
use thinmusic::{CurveSpec, Vec2};

#[test]
fn gamma1_length_and_segments() {
    let length = simpson(gamma1_speed, -0.5, 0.5, 20_000);
    assert!((length - 1.17).abs() < 0.01, "{length}");
    assert!((CurveSpec::Gamma1.length() - length).abs() < 1e-10);

    let geom = CurveSpec::Gamma1.discretize(0.2).unwrap();
    assert_eq!(geom.len(), 6);
    assert!((geom.spacing() - length / 6.0).abs() < 1e-10);
    // site m sits at arc length (m - 1/2) L / M from the start
    for (m, (&s, p)) in geom.parameters().iter().zip(geom.points()).enumerate() {
        let arc = simpson(gamma1_speed, -0.5, s, 20_000);
        assert!((arc - (m as f64 + 0.5) * length / 6.0).abs() < 1e-9, "site {m}");
        let q = gamma1_point(s);
        assert!((p - Vec2::new(q[0], q[1])).norm() < 1e-14);
    }
}

#[test]
fn gamma2_length_and_segments() {
    let length = simpson(gamma2_speed, -1.0, 1.0, 20_000);
    assert!((CurveSpec::Gamma2.length() - length).abs() < 1e-10);
    let geom = CurveSpec::Gamma2.discretize(0.2).unwrap();
    assert_eq!(geom.len(), (length / 0.2).round() as usize);
    assert_eq!(geom.len(), 12);
}

#[test]
fn discretization_errors() {
    assert!(CurveSpec::Gamma1.discretize(0.0).is_err());
    assert!(CurveSpec::Gamma1.discretize(-1.0).is_err());
    let degenerate = CurveSpec::Line {
        start: Vec2::new(1.0, 1.0),
        end: Vec2::new(1.0, 1.0),
    };
    assert!(degenerate.discretize(0.1).is_err());
    assert!(CurveSpec::Gamma1.eval(0.6).is_err());
}

fn frame_checks(curve: &CurveSpec, point: impl Fn(f64) -> [f64; 2], s: f64) -> Result<(), TestCaseError> {
    let f = curve.eval(s).unwrap();
    prop_assert!((f.tangent.norm() - 1.0).abs() < 1e-12);
    prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
    prop_assert!(f.tangent.dot(&f.normal).abs() < 1e-12);
    prop_assert!((f.normal - rotate_left(&f.tangent)).norm() < 1e-15);
    // tangent follows a central difference of the reference formula
    let h = 1e-6;
    let (a, b) = (point(s - h), point(s + h));
    let d = Vec2::new(b[0] - a[0], b[1] - a[1]).normalize();
    prop_assert!((d - f.tangent).norm() < 1e-8);
    let p = point(s);
    prop_assert!((f.point - Vec2::new(p[0], p[1])).norm() < 1e-14);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma1_frames(s in -0.4999..0.4999f64) {
        frame_checks(&CurveSpec::Gamma1, gamma1_point, s)?;
    }

    #[test]
    fn gamma2_frames(s in -0.9999..0.9999f64) {
        frame_checks(&CurveSpec::Gamma2, gamma2_point, s)?;
    }

    #[test]
    fn discretized_frames_are_orthonormal(spacing in 0.02..0.5f64) {
        for curve in [CurveSpec::Gamma1, CurveSpec::Gamma2] {
            let geom = curve.discretize(spacing).unwrap();
            let expected = ((curve.length() / spacing).round() as usize).max(1);
            prop_assert_eq!(geom.len(), expected);
            for f in geom.frames() {
                prop_assert!((f.tangent.norm() - 1.0).abs() < 1e-12);
                prop_assert!(f.tangent.dot(&f.normal).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polyline_arc_length(x in 0.1..2.0f64, y in 0.1..2.0f64) {
        let poly = CurveSpec::polyline(vec![Vec2::zeros(), Vec2::new(x, 0.0), Vec2::new(x, y)]).unwrap();
        prop_assert!((poly.length() - (x + y)).abs() < 1e-12);
        let mid = poly.eval(x + 0.5 * y).unwrap();
        prop_assert!((mid.point - Vec2::new(x, 0.5 * y)).norm() < 1e-12);
    }
}
