//! Independent reference computations for the integration tests. Nothing here
//! calls into the crate's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `J_p(x) = (1/2pi) int_{-pi}^{pi} cos(p t - x sin t) dt` by the trapezoid
/// rule, which converges geometrically for this periodic integrand. With
/// `n >= |x| + 64` nodes the aliasing terms `J_{n +- p}(x)` are below 1e-20.
pub fn bessel_quad(p: u32, x: f64) -> f64 {
    let n = 64 + 2 * x.abs().ceil() as usize;
    let h = 2.0 * PI / n as f64;
    let sum: f64 = (0..n)
        .map(|k| {
            let t = -PI + k as f64 * h;
            (p as f64 * t - x * t.sin()).cos()
        })
        .sum();
    sum / n as f64
}

pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximizer of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while b - a > tol {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// `|gamma1'(s)|` for `gamma1(s) = (s + 0.2, s^3 + s^2 - 0.3)`.
pub fn gamma1_speed(s: f64) -> f64 {
    (1.0 + (3.0 * s * s + 2.0 * s).powi(2)).sqrt()
}

pub fn gamma1_point(s: f64) -> [f64; 2] {
    [s + 0.2, s * s * s + s * s - 0.3]
}

/// `|Gamma2'(s)|` for `Gamma2(s) = (s, cos(a)/2 + sin(a)/5 - cos(3a)/10)`,
/// `a = s pi / 2`.
pub fn gamma2_speed(s: f64) -> f64 {
    let a = s * PI / 2.0;
    let dy = PI / 2.0 * (-0.5 * a.sin() + 0.2 * a.cos() + 0.3 * (3.0 * a).sin());
    (1.0 + dy * dy).sqrt()
}

pub fn gamma2_point(s: f64) -> [f64; 2] {
    let a = s * PI / 2.0;
    [s, 0.5 * a.cos() + 0.2 * a.sin() - 0.1 * (3.0 * a).cos()]
}

/// Distance from `z` to a densely sampled parametric curve.
pub fn curve_distance(point: impl Fn(f64) -> [f64; 2], lo: f64, hi: f64, z: [f64; 2]) -> f64 {
    let n = 20_000;
    (0..=n)
        .map(|k| {
            let p = point(lo + (hi - lo) * k as f64 / n as f64);
            ((p[0] - z[0]).powi(2) + (p[1] - z[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}
