//! Multistatic response (MSR) matrix synthesis.
//!
//! Observation directions coincide with incidence directions up to sign
//! (`v_j = -theta_j`), so every model below yields a complex symmetric
//! `N x N` matrix. Three scattering models are available:
//!
//! - thin penetrable inclusions, from the first-order thickness expansion,
//!   evaluated as an `M`-point sum along the discretized supporting curve;
//! - small inclusions, from the first-order diameter expansion with a
//!   polarization tensor per inclusion;
//! - perfectly conducting cracks, from the factorized form `sum_m s_m u_m u_m^T`
//!   with sound-soft or sound-hard model vectors.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector, Matrix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::{DirectionSet, SceneGeometry, Vec2};
use crate::{Error, Result, C64};

/// Background permittivity and permeability.
pub const EPS0: f64 = 1.0;
pub const MU0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Thin,
    Small,
    CrackSoft,
    CrackHard,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Thin => "thin",
            ModelKind::Small => "small",
            ModelKind::CrackSoft => "crack-soft",
            ModelKind::CrackHard => "crack-hard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Dirichlet, TM polarization.
    SoundSoft,
    /// Neumann, TE polarization.
    SoundHard,
}

/// Material parameters of a thin inclusion against a unit background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialContrast {
    pub eps: f64,
    pub mu: f64,
    /// Half-thickness `h`.
    pub thickness: f64,
}

impl MaterialContrast {
    pub fn new(eps: f64, mu: f64, thickness: f64) -> Result<Self> {
        for (name, v) in [("eps", eps), ("mu", mu), ("thickness", thickness)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { eps, mu, thickness })
    }

    pub fn has_permittivity_contrast(&self) -> bool {
        self.eps != EPS0
    }

    pub fn has_permeability_contrast(&self) -> bool {
        self.mu != MU0
    }

    /// Eigenvalues of the thin-inclusion tensor along tangent and normal.
    pub fn tensor_eigenvalues(&self) -> (f64, f64) {
        (2.0 * (1.0 / self.mu - 1.0), 2.0 * (1.0 - self.mu))
    }
}

/// A small inclusion `x_m + r B_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallInclusion {
    pub center: Vec2,
    pub radius: f64,
    /// Area of the reference shape `B_m`.
    pub area: f64,
    pub tensor: Matrix2<f64>,
    pub eps: f64,
}

impl SmallInclusion {
    pub fn new(center: Vec2, radius: f64, area: f64, tensor: Matrix2<f64>, eps: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {radius}")));
        }
        if !(area > 0.0) {
            return Err(Error::invalid(format!("area must be positive, got {area}")));
        }
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {eps}")));
        }
        let scale = tensor.abs().max().max(1.0);
        if (tensor[(0, 1)] - tensor[(1, 0)]).abs() > 1e-12 * scale {
            return Err(Error::invalid("polarization tensor must be symmetric"));
        }
        Ok(Self {
            center,
            radius,
            area,
            tensor,
            eps,
        })
    }

    /// Disk-shaped inclusion (unit-disk reference shape, area `pi`) with the
    /// tensor `2 |B| (mu - 1)/(mu + 1) I`.
    pub fn disk(center: Vec2, radius: f64, eps: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::invalid(format!("mu must be positive, got {mu}")));
        }
        let tensor = Matrix2::identity() * disk_tensor_scale(PI, mu);
        Self::new(center, radius, PI, tensor, eps)
    }
}

/// Coefficient `2 |B| (mu - 1)/(mu + 1)` of the isotropic disk tensor.
pub fn disk_tensor_scale(area: f64, mu: f64) -> f64 {
    2.0 * area * (mu - MU0) / (mu + MU0)
}

/// Provenance of an [`MsrMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct MsrMeta {
    /// Half-thickness `h` (thin) or diameter `r` (small); `None` for cracks.
    pub scale: Option<f64>,
    /// Number of scatterer sites `M`.
    pub sites: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsrMatrix {
    pub k: DMatrix<C64>,
    pub model: ModelKind,
    pub omega: f64,
    pub meta: MsrMeta,
}

impl MsrMatrix {
    pub fn size(&self) -> usize {
        self.k.nrows()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.k.norm()
    }

    /// `||K - K^T|| / ||K||` (unconjugated transpose).
    pub fn symmetry_defect(&self) -> f64 {
        let norm = self.k.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.k - self.k.transpose()).norm() / norm
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            k: &self.k * factor,
            ..self.clone()
        }
    }
}

/// Far-field prefactor `omega^2 (1 + i) / (4 sqrt(omega pi))`.
pub fn far_field_constant(omega: f64) -> C64 {
    C64::new(1.0, 1.0) * (omega * omega / (4.0 * (omega * PI).sqrt()))
}

fn projected(dirs: &DirectionSet, axis: &Vec2, phases: &DVector<C64>) -> DVector<C64> {
    DVector::from_iterator(dirs.len(), dirs.iter().zip(phases.iter()).map(|(t, p)| p * t.dot(axis)))
}

/// Adds `weight * a b^T` to `k`.
fn add_outer(k: &mut DMatrix<C64>, weight: C64, a: &DVector<C64>, b: &DVector<C64>) {
    if weight == C64::new(0.0, 0.0) {
        return;
    }
    k.ger(weight, a, b, C64::new(1.0, 0.0));
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid(format!("omega must be positive, got {omega}")));
    }
    Ok(())
}

/// Thin-inclusion MSR matrix,
///
/// ```text
/// K_jl = h C (L/M) sum_m [ 2(1/mu - 1)(theta_j.t)(theta_l.t)
///                        + 2(1 - mu)(theta_j.n)(theta_l.n) + (eps - 1) ]
///                      exp(i omega (theta_j + theta_l) . x_m)
/// ```
pub fn msr_thin(
    geom: &SceneGeometry,
    contrast: &MaterialContrast,
    omega: f64,
    dirs: &DirectionSet,
) -> Result<MsrMatrix> {
    check_omega(omega)?;
    if geom.is_empty() {
        return Err(Error::InvalidGeometry("empty scene".into()));
    }
    let n = dirs.len();
    let (tangential, normal) = contrast.tensor_eigenvalues();
    let dielectric = contrast.eps - EPS0;
    let mut k = DMatrix::<C64>::zeros(n, n);
    for frame in geom.frames() {
        let g = dirs.phases(&frame.point, omega);
        add_outer(&mut k, C64::from(dielectric), &g, &g);
        let gt = projected(dirs, &frame.tangent, &g);
        add_outer(&mut k, C64::from(tangential), &gt, &gt);
        let gn = projected(dirs, &frame.normal, &g);
        add_outer(&mut k, C64::from(normal), &gn, &gn);
    }
    let weight = far_field_constant(omega) * (contrast.thickness * geom.curve_length() / geom.len() as f64);
    k *= weight;
    Ok(MsrMatrix {
        k,
        model: ModelKind::Thin,
        omega,
        meta: MsrMeta {
            scale: Some(contrast.thickness),
            sites: geom.len(),
        },
    })
}

/// Small-inclusion MSR matrix,
///
/// ```text
/// K_jl = r^2 C sum_m |B_m| [ theta_j . A_m . theta_l + (eps_m - 1) ]
///                  exp(i omega (theta_j + theta_l) . x_m)
/// ```
///
/// All inclusions share the diameter of the first one in the `r^2` factor;
/// per-inclusion radii enter through their own `r_m^2`.
pub fn msr_small(inclusions: &[SmallInclusion], omega: f64, dirs: &DirectionSet) -> Result<MsrMatrix> {
    check_omega(omega)?;
    if inclusions.is_empty() {
        return Err(Error::invalid("no small inclusions given"));
    }
    let half_wavelength = PI / omega;
    for (i, a) in inclusions.iter().enumerate() {
        for b in &inclusions[i + 1..] {
            let d = (a.center - b.center).norm();
            if d < half_wavelength {
                warn!(
                    "small inclusions at {:?} and {:?} are {d:.4} apart, below half a wavelength",
                    a.center.as_slice(),
                    b.center.as_slice()
                );
            }
        }
    }
    let n = dirs.len();
    let c = far_field_constant(omega);
    let mut k = DMatrix::<C64>::zeros(n, n);
    for inc in inclusions {
        let g = dirs.phases(&inc.center, omega);
        let w = c * (inc.radius * inc.radius * inc.area);
        add_outer(&mut k, w * (inc.eps - EPS0), &g, &g);
        // theta_j . A . theta_l = sum over eigenpairs of the symmetric tensor
        let eig = inc.tensor.symmetric_eigen();
        for (lambda, axis) in eig.eigenvalues.iter().zip(eig.eigenvectors.column_iter()) {
            let axis = Vec2::new(axis[0], axis[1]);
            let ga = projected(dirs, &axis, &g);
            add_outer(&mut k, w * *lambda, &ga, &ga);
        }
    }
    Ok(MsrMatrix {
        k,
        model: ModelKind::Small,
        omega,
        meta: MsrMeta {
            scale: Some(inclusions[0].radius),
            sites: inclusions.len(),
        },
    })
}

/// Crack MSR matrix from the factorized model `K = sum_m s_m u_m u_m^T`,
/// with `u_m = [exp(i omega theta_n . x_m)]` (sound-soft) or
/// `u_m = [(theta_n . n(x_m)) exp(i omega theta_n . x_m)]` (sound-hard).
/// Empty `strengths` means unit strengths.
pub fn msr_crack(
    geom: &SceneGeometry,
    bc: BoundaryCondition,
    omega: f64,
    dirs: &DirectionSet,
    strengths: &[f64],
) -> Result<MsrMatrix> {
    check_omega(omega)?;
    if !strengths.is_empty() && strengths.len() != geom.len() {
        return Err(Error::invalid(format!(
            "{} strengths for {} crack points",
            strengths.len(),
            geom.len()
        )));
    }
    if strengths.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::invalid("crack strengths must be positive"));
    }
    let n = dirs.len();
    let mut k = DMatrix::<C64>::zeros(n, n);
    for (m, frame) in geom.frames().enumerate() {
        let s = strengths.get(m).copied().unwrap_or(1.0);
        let g = dirs.phases(&frame.point, omega);
        let u = match bc {
            BoundaryCondition::SoundSoft => g,
            BoundaryCondition::SoundHard => projected(dirs, &frame.normal, &g),
        };
        add_outer(&mut k, C64::from(s), &u, &u);
    }
    Ok(MsrMatrix {
        k,
        model: match bc {
            BoundaryCondition::SoundSoft => ModelKind::CrackSoft,
            BoundaryCondition::SoundHard => ModelKind::CrackHard,
        },
        omega,
        meta: MsrMeta {
            scale: None,
            sites: geom.len(),
        },
    })
}

/// `K + level ||K||_F / N * G` with `G` complex standard Gaussian
/// (unit variance per entry), symmetrized as `(X + X^T)/2`.
pub fn add_noise(msr: &MsrMatrix, level: f64, seed: u64) -> Result<MsrMatrix> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::invalid(format!("noise level must be non-negative, got {level}")));
    }
    if level == 0.0 {
        return Ok(msr.clone());
    }
    let n = msr.size();
    let amplitude = level * msr.frobenius_norm() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let noise = DMatrix::<C64>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im) * scale
    });
    let noisy = &msr.k + noise * C64::from(amplitude);
    let k = (&noisy + noisy.transpose()) * C64::from(0.5);
    Ok(MsrMatrix { k, ..msr.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin_point() -> SceneGeometry {
        SceneGeometry::from_points(vec![Vec2::zeros()], 0.2).unwrap()
    }

    #[test]
    fn thin_single_point_is_constant() {
        let omega = 5.0 * PI;
        let dirs = DirectionSet::sample(4).unwrap();
        let contrast = MaterialContrast::new(5.0, 1.0, 0.02).unwrap();
        let msr = msr_thin(&origin_point(), &contrast, omega, &dirs).unwrap();
        let expected = far_field_constant(omega) * (0.02 * 0.2 * 4.0);
        for v in msr.k.iter() {
            assert!((v - expected).norm() < 1e-14);
        }
        assert!((expected.norm() - 0.1987).abs() < 5e-4, "{}", expected.norm());
    }

    #[test]
    fn contrast_validation() {
        assert!(MaterialContrast::new(0.0, 1.0, 0.02).is_err());
        assert!(MaterialContrast::new(5.0, -1.0, 0.02).is_err());
        assert!(MaterialContrast::new(5.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn small_constant_matrix_at_origin() {
        let omega = 5.0 * PI;
        let dirs = DirectionSet::sample(12).unwrap();
        let inc = SmallInclusion::new(Vec2::zeros(), 0.1, PI, Matrix2::zeros(), 5.0).unwrap();
        let msr = msr_small(&[inc], omega, &dirs).unwrap();
        let expected = far_field_constant(omega) * (0.01 * PI * 4.0);
        for v in msr.k.iter() {
            assert!((v - expected).norm() < 1e-13);
        }
    }

    #[test]
    fn small_is_linear_in_inclusions() {
        let omega = 5.0 * PI;
        let dirs = DirectionSet::sample(16).unwrap();
        let a = SmallInclusion::disk(Vec2::new(-0.5, 0.0), 0.05, 3.0, 2.0).unwrap();
        let b = SmallInclusion::disk(Vec2::new(0.5, 0.0), 0.05, 3.0, 2.0).unwrap();
        let both = msr_small(&[a.clone(), b.clone()], omega, &dirs).unwrap();
        let sum = msr_small(&[a], omega, &dirs).unwrap().k + msr_small(&[b], omega, &dirs).unwrap().k;
        assert!((both.k - sum).norm() < 1e-13);
    }

    #[test]
    fn small_rejects_empty_and_asymmetric() {
        let dirs = DirectionSet::sample(8).unwrap();
        assert!(msr_small(&[], 1.0, &dirs).is_err());
        let asym = Matrix2::new(1.0, 0.5, 0.0, 1.0);
        assert!(SmallInclusion::new(Vec2::zeros(), 0.1, PI, asym, 2.0).is_err());
    }

    #[test]
    fn crack_strength_mismatch() {
        let dirs = DirectionSet::sample(8).unwrap();
        let err = msr_crack(&origin_point(), BoundaryCondition::SoundSoft, 2.0, &dirs, &[1.0, 2.0]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn crack_hard_at_origin() {
        let dirs = DirectionSet::sample(8).unwrap();
        let msr = msr_crack(&origin_point(), BoundaryCondition::SoundHard, 2.0, &dirs, &[]).unwrap();
        // normal is e2 for from_points
        for (j, a) in dirs.iter().enumerate() {
            for (l, b) in dirs.iter().enumerate() {
                assert!((msr.k[(j, l)] - C64::from(a.y * b.y)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let dirs = DirectionSet::sample(8).unwrap();
        let msr = msr_crack(&origin_point(), BoundaryCondition::SoundSoft, 2.0, &dirs, &[]).unwrap();
        assert_eq!(add_noise(&msr, 0.0, 7).unwrap(), msr);
        assert!(add_noise(&msr, -1.0, 7).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let dirs = DirectionSet::sample(8).unwrap();
        let msr = msr_crack(&origin_point(), BoundaryCondition::SoundSoft, 2.0, &dirs, &[]).unwrap();
        let a = add_noise(&msr, 0.1, 3).unwrap();
        let b = add_noise(&msr, 0.1, 3).unwrap();
        let c = add_noise(&msr, 0.1, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.symmetry_defect() < 1e-15);
    }
}
