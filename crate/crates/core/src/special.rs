//! Bessel functions of the first kind of orders 0 and 1, and the discrete
//! circular averages that approximate them.
//!
//! For `N` equispaced directions on the unit circle,
//!
//! ```text
//! (1/N) sum_n exp(i w theta_n . x)              -> J0(w |x|)
//! (1/N) sum_n (theta_n . xi) exp(i w theta_n . x) -> i (x/|x| . xi) J1(w |x|)
//! ```
//!
//! with aliasing error governed by `J_N(w |x|)`, which is negligible once
//! `N` exceeds `w |x|` by a margin.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::geometry::{DirectionSet, Vec2};
use crate::{Error, Result, C64};

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    pub fn as_u32(self) -> u32 {
        match self {
            BesselOrder::Zero => 0,
            BesselOrder::One => 1,
        }
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        match p {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            _ => Err(Error::invalid(format!("unsupported Bessel order {p}"))),
        }
    }
}

/// `J_p(x)` for `p` in `{0, 1}`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("Bessel argument {x} is not finite")));
    }
    Ok(match order {
        BesselOrder::Zero => j0(x),
        BesselOrder::One => j1(x),
    })
}

pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        series(0, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax).0
    } else {
        hankel(0, ax)
    }
}

pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        series(1, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax).1
    } else {
        hankel(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `sum_k (-1)^k (x/2)^(2k+p) / (k! (k+p)!)`.
fn series(p: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if p == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..200 {
        term *= -q / (k as f64 * (k + p) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Backward recurrence for `(J0(x), J1(x))`, normalized through
/// `J0 + 2 sum_k J_{2k} = 1`.
fn miller(x: f64) -> (f64, f64) {
    let start = {
        let n = (x + 15.0 + (60.0 * x).sqrt()) as usize;
        n + (n % 2)
    };
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-30; // J_n
    let mut norm = 0.0;
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for n in (1..=start).rev() {
        let prev = 2.0 * n as f64 / x * cur - next; // J_{n-1}
        next = cur;
        cur = prev;
        if n - 1 == 1 {
            j1 = cur;
        }
        if n - 1 == 0 {
            j0 = cur;
        }
        if (n - 1) % 2 == 0 && n - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

/// Large-argument expansion `sqrt(2/(pi x)) (P cos chi - Q sin chi)` with
/// `chi = x - (2p+1) pi / 4`.
fn hankel(p: u32, x: f64) -> f64 {
    let mu = 4.0 * (p * p) as f64;
    let mut big_p = 0.0;
    let mut big_q = 0.0;
    // a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! (8x)^k)
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60u32 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if a.abs() > last {
            break;
        }
        last = a.abs();
        let signed = if (k / 2) % 2 == 0 { a } else { -a };
        if k % 2 == 0 {
            big_p += signed;
        } else {
            big_q += signed;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    let (cos_chi, sin_chi) = if p == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    (2.0 / (PI * x)).sqrt() * (big_p * cos_chi - big_q * sin_chi)
}

/// `(1/N) sum_n exp(i omega theta_n . x)`, summed directly.
pub fn circular_moment0(x: &Vec2, omega: f64, dirs: &DirectionSet) -> C64 {
    let sum: C64 = dirs.iter().map(|t| C64::from_polar(1.0, omega * t.dot(x))).sum();
    sum / dirs.len() as f64
}

/// `(1/N) sum_n (theta_n . xi) exp(i omega theta_n . x)` for a unit vector `xi`.
pub fn circular_moment1(x: &Vec2, xi: &Vec2, omega: f64, dirs: &DirectionSet) -> Result<C64> {
    if (xi.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "projection direction must be a unit vector, |xi| = {}",
            xi.norm()
        )));
    }
    let sum: C64 = dirs.iter().map(|t| C64::from_polar(t.dot(xi), omega * t.dot(x))).sum();
    Ok(sum / dirs.len() as f64)
}

/// Continuum limit of [`circular_moment1`]: `i (x/|x| . xi) J1(omega |x|)`,
/// zero at the origin.
pub fn moment1_limit(x: &Vec2, xi: &Vec2, omega: f64) -> C64 {
    let r = x.norm();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    C64::new(0.0, x.dot(xi) / r * j1(omega * r))
}
