//! Numerical identity checks: discrete circular moments against their Bessel
//! limits, Gram structure of the model vectors, and the MUSIC / migration
//! identity `E^-2 / N + E_SM = 1`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{CurveSpec, DirectionSet, SceneGeometry, Vec2};
use crate::imaging::{migration_value, music_value, ImageGrid};
use crate::special::{circular_moment0, circular_moment1, j0, j1, moment1_limit};
use crate::subspace::SubspaceDecomposition;
use crate::{Result, C64};

/// Uniform random points in the disk of the given radius.
pub fn random_disk_points(count: usize, radius: f64, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let a = 2.0 * PI * rng.random::<f64>();
            Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Maximum deviations of the zeroth and first discrete moments from
/// `J0(w|x|)` and `i (xhat . xi) J1(w|x|)`; `xi` is drawn per point from
/// the same seed.
pub fn moment_deviations(points: &[Vec2], omega: f64, dirs: &DirectionSet, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut dev0: f64 = 0.0;
    let mut dev1: f64 = 0.0;
    for x in points {
        let m0 = circular_moment0(x, omega, dirs);
        dev0 = dev0.max((m0 - C64::from(j0(omega * x.norm()))).norm());
        let a = 2.0 * PI * rng.random::<f64>();
        let xi = Vec2::new(a.cos(), a.sin());
        let m1 = circular_moment1(x, &xi, omega, dirs)?;
        dev1 = dev1.max((m1 - moment1_limit(x, &xi, omega)).norm());
    }
    Ok((dev0, dev1))
}

/// Gram structure of unit model vectors `g_m = N^-1/2 [e^{i w theta_n . x_m}]`
/// over all site pairs of `geom`:
///
/// - `j0`: max `|<g_m, conj g_m'> - J0(w |x_m - x_m'|)|`
/// - `j1`: max over frame axes `xi, xi'` of
///   `|N^-1 sum (theta_n . (xi + xi')) e^{i w theta_n . (x_m - x_m')} - i (xhat . (xi + xi')) J1|`
pub fn gram_deviations(geom: &SceneGeometry, omega: f64, dirs: &DirectionSet) -> (f64, f64) {
    let n = dirs.len() as f64;
    let frames: Vec<_> = geom.frames().collect();
    let mut dev0: f64 = 0.0;
    let mut dev1: f64 = 0.0;
    for (i, a) in frames.iter().enumerate() {
        for (k, b) in frames.iter().enumerate() {
            if i == k {
                continue;
            }
            let d = a.point - b.point;
            let r = d.norm();
            let gram: C64 = dirs
                .iter()
                .map(|t| C64::from_polar(1.0, omega * t.dot(&d)))
                .sum::<C64>()
                / n;
            dev0 = dev0.max((gram - C64::from(j0(omega * r))).norm());
            for xi in [a.tangent, a.normal] {
                for eta in [b.tangent, b.normal] {
                    let s = xi + eta;
                    let sum: C64 = dirs
                        .iter()
                        .map(|t| C64::from_polar(t.dot(&s), omega * t.dot(&d)))
                        .sum::<C64>()
                        / n;
                    let limit = C64::new(0.0, (d / r).dot(&s) * j1(omega * r));
                    dev1 = dev1.max((sum - limit).norm());
                }
            }
        }
    }
    (dev0, dev1)
}

/// `|<g_1, conj g_2>|` for two sites half a wavelength apart.
pub fn half_wavelength_overlap(omega: f64, dirs: &DirectionSet) -> f64 {
    let d = Vec2::new(PI / omega, 0.0);
    circular_moment0(&d, omega, dirs).norm()
}

/// Maximum of `|E^-2 / N + E_SM - 1|` over pixels where the MUSIC value is
/// below the cap.
pub fn migration_identity_deviation(
    dec: &SubspaceDecomposition,
    omega: f64,
    dirs: &DirectionSet,
    grid: &ImageGrid,
    cap: f64,
) -> f64 {
    let n = dirs.len() as f64;
    (0..grid.len())
        .map(|i| grid.point(i))
        .filter_map(|z| {
            let e = music_value(dec, omega, dirs, &z, cap);
            (e < cap).then(|| (1.0 / (e * e * n) + migration_value(dec, omega, dirs, &z) - 1.0).abs())
        })
        .fold(0.0, f64::max)
}

/// Results of [`run_identities`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub moment0: f64,
    pub moment1: f64,
    pub gram_j0: f64,
    pub gram_j1: f64,
    pub half_wavelength_overlap: f64,
    pub migration: f64,
}

/// The standard identity battery: 128 directions, `w = 5 pi`, 100 random
/// points in the unit disk; Gram forms on the segmented `gamma1` curve at
/// wavelength 0.4; migration identity on a 64x64 permittivity image.
pub fn run_identities(seed: u64) -> Result<IdentityReport> {
    let dirs = DirectionSet::sample(128)?;
    let omega = 5.0 * PI;
    let points = random_disk_points(100, 1.0, seed);
    let (moment0, moment1) = moment_deviations(&points, omega, &dirs, seed)?;

    let wavelength = 0.4;
    let omega_scene = 2.0 * PI / wavelength;
    let geom = CurveSpec::Gamma1.discretize(0.5 * wavelength)?;
    let (gram_j0, gram_j1) = gram_deviations(&geom, omega_scene, &dirs);
    let half_wavelength_overlap = half_wavelength_overlap(omega_scene, &dirs);

    let scene_dirs = DirectionSet::sample(24)?;
    let contrast = crate::synth::MaterialContrast::new(5.0, 1.0, 0.02)?;
    let msr = crate::synth::msr_thin(&geom, &contrast, omega_scene, &scene_dirs)?;
    let dec = SubspaceDecomposition::new(&msr.k)?;
    let grid = ImageGrid::new((-1.0, 1.0), (-1.0, 1.0), 64, 64)?;
    let migration = migration_identity_deviation(&dec, omega_scene, &scene_dirs, &grid, crate::imaging::DEFAULT_CAP);

    Ok(IdentityReport {
        moment0,
        moment1,
        gram_j0,
        gram_j1,
        half_wavelength_overlap,
        migration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_is_j0_of_pi() {
        let dirs = DirectionSet::sample(128).unwrap();
        let v = half_wavelength_overlap(2.0 * PI / 0.4, &dirs);
        assert!((v - 0.30424217764409).abs() < 1e-10, "{v}");
    }

    #[test]
    fn random_points_stay_in_disk() {
        let pts = random_disk_points(200, 0.5, 3);
        assert!(pts.iter().all(|p| p.norm() <= 0.5));
        assert_eq!(pts, random_disk_points(200, 0.5, 3));
    }

    #[test]
    fn battery_is_tight() {
        let r = run_identities(0).unwrap();
        assert!(r.moment0 < 1e-8 && r.moment1 < 1e-8, "{r:?}");
        assert!(r.gram_j0 < 1e-6 && r.gram_j1 < 1e-6, "{r:?}");
        assert!(r.migration < 1e-8, "{r:?}");
    }
}
