//! Steering vectors, the MUSIC functional, subspace migration and the
//! closed-form Bessel predictors of the MUSIC map.
//!
//! With raw steering vectors `f(z) = [exp(i omega theta_n . z)]_n` the MUSIC
//! value is `E(z) = 1/|P_noise f(z)|`, capped at `cap`. Subspace migration uses
//! the unit-norm vector `f(z)/sqrt(N)` and sums its squared projections onto
//! the signal subspace, so that on every uncapped pixel
//!
//! ```text
//! E(z)^-2 / N + E_SM(z) = 1.
//! ```
//!
//! The predictors replace the singular vectors by their asymptotic model
//! vectors and sum Bessel terms over the scatterer sites `x_m`:
//!
//! ```text
//! E(z) ~ N^-1/2 (1 - sum_m J0(omega r_m)^2 - sum_m w_m(z) J1(omega r_m)^2)^-1/2
//! ```
//!
//! where `r_m = |z - x_m|` and the `J0` / `J1` terms are present according to
//! the contrast type.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{DirectionSet, SceneGeometry, Vec2};
use crate::special::{j0, j1};
use crate::subspace::SubspaceDecomposition;
use crate::{Error, Result, C64};

pub const DEFAULT_CAP: f64 = 1e6;

/// Rectangular grid of pixel centers, uniformly spaced and including the
/// range end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Default for ImageGrid {
    fn default() -> Self {
        Self {
            x_range: (-1.0, 1.0),
            y_range: (-1.0, 1.0),
            nx: 128,
            ny: 128,
        }
    }
}

impl ImageGrid {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::invalid(format!("grid needs at least 2x2 pixels, got {nx}x{ny}")));
        }
        for (lo, hi) in [x_range, y_range] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(format!("empty grid range [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            x_range,
            y_range,
            nx,
            ny,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / (self.ny - 1) as f64
    }

    pub fn pixel(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.x_range.0 + ix as f64 * self.dx(),
            self.y_range.0 + iy as f64 * self.dy(),
        )
    }

    /// Row-major position (`y` outer, `x` inner).
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn point(&self, index: usize) -> Vec2 {
        let (ix, iy) = self.coords(index);
        self.pixel(ix, iy)
    }

    /// Pixel whose center is closest to `z`, clamped to the grid.
    pub fn nearest(&self, z: &Vec2) -> (usize, usize) {
        let snap = |v: f64, lo: f64, step: f64, n: usize| ((v - lo) / step).round().clamp(0.0, (n - 1) as f64) as usize;
        (
            snap(z.x, self.x_range.0, self.dx(), self.nx),
            snap(z.y, self.y_range.0, self.dy(), self.ny),
        )
    }

    pub fn translated(&self, shift: &Vec2) -> Self {
        Self {
            x_range: (self.x_range.0 + shift.x, self.x_range.1 + shift.x),
            y_range: (self.y_range.0 + shift.y, self.y_range.1 + shift.y),
            ..*self
        }
    }

    fn evaluate(&self, f: impl Fn(Vec2) -> f64 + Sync) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| f(self.point(i))).collect()
    }
}

/// Which closed-form predictor to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictorKind {
    /// Thin inclusion, permittivity contrast only.
    Permittivity,
    /// Thin inclusion, permeability contrast only.
    Permeability,
    /// Thin inclusion, both contrasts.
    Both,
    /// Sound-soft crack (TM).
    SoundSoft,
    /// Sound-hard crack (TE).
    SoundHard,
    SmallPermittivity,
    SmallPermeability,
    SmallBoth,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 8] = [
        PredictorKind::Permittivity,
        PredictorKind::Permeability,
        PredictorKind::Both,
        PredictorKind::SoundSoft,
        PredictorKind::SoundHard,
        PredictorKind::SmallPermittivity,
        PredictorKind::SmallPermeability,
        PredictorKind::SmallBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Permittivity => "eps",
            PredictorKind::Permeability => "mu",
            PredictorKind::Both => "eps-mu",
            PredictorKind::SoundSoft => "tm",
            PredictorKind::SoundHard => "te",
            PredictorKind::SmallPermittivity => "small-eps",
            PredictorKind::SmallPermeability => "small-mu",
            PredictorKind::SmallBoth => "small-eps-mu",
        }
    }

    fn has_j0(self) -> bool {
        matches!(
            self,
            PredictorKind::Permittivity
                | PredictorKind::Both
                | PredictorKind::SoundSoft
                | PredictorKind::SmallPermittivity
                | PredictorKind::SmallBoth
        )
    }

    fn has_j1(self) -> bool {
        matches!(
            self,
            PredictorKind::Permeability
                | PredictorKind::Both
                | PredictorKind::SoundHard
                | PredictorKind::SmallPermeability
                | PredictorKind::SmallBoth
        )
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PredictorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown predictor kind `{s}`")))
    }
}

/// Reading of the `J1` weight for permeability-type predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictorVariant {
    /// `(zhat . (t + n))^2`.
    #[default]
    AsWritten,
    /// `(zhat . t)^2 + (zhat . n)^2`.
    FrameSum,
}

impl PredictorVariant {
    pub fn name(self) -> &'static str {
        match self {
            PredictorVariant::AsWritten => "as-written",
            PredictorVariant::FrameSum => "frame-sum",
        }
    }
}

impl FromStr for PredictorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(PredictorVariant::AsWritten),
            "frame-sum" => Ok(PredictorVariant::FrameSum),
            _ => Err(Error::invalid(format!("unknown predictor variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    Music,
    Migration,
    Predictor(PredictorKind),
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Music => f.write_str("music"),
            MapKind::Migration => f.write_str("migration"),
            MapKind::Predictor(k) => write!(f, "predictor-{}", k.name()),
        }
    }
}

/// Real-valued image over an [`ImageGrid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub grid: ImageGrid,
    pub values: Vec<f64>,
    pub kind: MapKind,
    pub cap: f64,
}

impl FieldMap {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest value (first on ties).
    pub fn argmax(&self) -> usize {
        argmax_where(&self.values, |_| true).unwrap_or(0)
    }

    /// Number of pixels at the cap.
    pub fn cap_hits(&self) -> usize {
        self.values.iter().filter(|&&v| v >= self.cap).count()
    }

    /// Pixels whose value is not exceeded anywhere in their 3x3 neighborhood
    /// and strictly exceeds at least one neighbor, sorted by decreasing value.
    pub fn local_maxima(&self) -> Vec<usize> {
        let g = &self.grid;
        let mut peaks: Vec<usize> = (0..g.len())
            .filter(|&i| {
                let (ix, iy) = g.coords(i);
                let v = self.values[i];
                let xs = ix.saturating_sub(1)..=(ix + 1).min(g.nx - 1);
                let mut strict = false;
                let dominates = xs
                    .flat_map(|jx| (iy.saturating_sub(1)..=(iy + 1).min(g.ny - 1)).map(move |jy| (jx, jy)))
                    .all(|(jx, jy)| {
                        let w = self.get(jx, jy);
                        strict |= w < v;
                        w <= v
                    });
                dominates && strict
            })
            .collect();
        peaks.sort_by(|&a, &b| self.values[b].partial_cmp(&self.values[a]).unwrap().then(a.cmp(&b)));
        peaks
    }
}

fn argmax_where(values: &[f64], keep: impl Fn(usize) -> bool) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Steering vector `f(z)`, raw (`||f|| = sqrt(N)`) or unit-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    values: DVector<C64>,
    normalized: bool,
}

impl SteeringVector {
    pub fn values(&self) -> &DVector<C64> {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.values
    }
}

pub fn steering(z: &Vec2, omega: f64, dirs: &DirectionSet, normalized: bool) -> SteeringVector {
    let mut values = dirs.phases(z, omega);
    if normalized {
        values /= C64::from((dirs.len() as f64).sqrt());
    }
    SteeringVector { values, normalized }
}

fn check_imaging(dec: &SubspaceDecomposition, dirs: &DirectionSet) -> Result<()> {
    if dec.size() != dirs.len() {
        return Err(Error::invalid(format!(
            "decomposition of size {} with {} directions",
            dec.size(),
            dirs.len()
        )));
    }
    if dec.signal_dim() >= dec.size() {
        return Err(Error::Degenerate(format!(
            "signal dimension {} leaves no noise subspace in {} dimensions",
            dec.signal_dim(),
            dec.size()
        )));
    }
    Ok(())
}

fn check_cap(cap: f64) -> Result<()> {
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(Error::invalid(format!("cap must be positive and finite, got {cap}")));
    }
    Ok(())
}

/// `1/|P_noise f(z)|` with raw steering, or `cap` once the projection norm
/// drops below `1/cap`.
pub fn music_value(dec: &SubspaceDecomposition, omega: f64, dirs: &DirectionSet, z: &Vec2, cap: f64) -> f64 {
    let f = dirs.phases(z, omega);
    let norm = dec.noise_norm_unchecked(&f);
    if norm * cap < 1.0 {
        cap
    } else {
        1.0 / norm
    }
}

pub fn music_map(
    dec: &SubspaceDecomposition,
    omega: f64,
    dirs: &DirectionSet,
    grid: &ImageGrid,
    cap: f64,
) -> Result<FieldMap> {
    check_imaging(dec, dirs)?;
    check_cap(cap)?;
    Ok(FieldMap {
        grid: *grid,
        values: grid.evaluate(|z| music_value(dec, omega, dirs, &z, cap)),
        kind: MapKind::Music,
        cap,
    })
}

/// `sum_{m <= dim} |U_m^* f(z)|^2` with unit-norm steering.
pub fn migration_value(dec: &SubspaceDecomposition, omega: f64, dirs: &DirectionSet, z: &Vec2) -> f64 {
    let f = steering(z, omega, dirs, true).into_inner();
    dec.signal_energy_unchecked(&f).clamp(0.0, 1.0)
}

pub fn migration_map(
    dec: &SubspaceDecomposition,
    omega: f64,
    dirs: &DirectionSet,
    grid: &ImageGrid,
) -> Result<FieldMap> {
    check_imaging(dec, dirs)?;
    Ok(FieldMap {
        grid: *grid,
        values: grid.evaluate(|z| migration_value(dec, omega, dirs, &z)),
        kind: MapKind::Migration,
        cap: 1.0,
    })
}

/// Squared `J1` weight for one site: `(zhat . axes-sum)^2` or the sum of the
/// individual squares.
fn j1_weight(kind: PredictorKind, variant: PredictorVariant, zhat: &Vec2, tangent: &Vec2, normal: &Vec2) -> f64 {
    let (a, b) = match kind {
        PredictorKind::SoundHard => return zhat.dot(normal).powi(2),
        PredictorKind::SmallPermeability | PredictorKind::SmallBoth => (Vec2::x(), Vec2::y()),
        _ => (*tangent, *normal),
    };
    match variant {
        PredictorVariant::AsWritten => zhat.dot(&(a + b)).powi(2),
        PredictorVariant::FrameSum => zhat.dot(&a).powi(2) + zhat.dot(&b).powi(2),
    }
}

/// Closed-form predictor value at `z`. The argument of `(.)^-1/2` is clamped
/// below at `1/(N cap^2)` so the result never exceeds `cap`.
pub fn predictor_value(
    kind: PredictorKind,
    geom: &SceneGeometry,
    omega: f64,
    n_dirs: usize,
    z: &Vec2,
    variant: PredictorVariant,
    cap: f64,
) -> f64 {
    let mut sum = 0.0;
    for frame in geom.frames() {
        let offset = z - frame.point;
        let r = offset.norm();
        if kind.has_j0() {
            sum += j0(omega * r).powi(2);
        }
        if kind.has_j1() && r > 0.0 {
            let zhat = offset / r;
            sum += j1_weight(kind, variant, &zhat, &frame.tangent, &frame.normal) * j1(omega * r).powi(2);
        }
    }
    let n = n_dirs as f64;
    let floor = 1.0 / (n * cap * cap);
    let arg = (1.0 - sum).max(floor);
    (1.0 / (n * arg).sqrt()).min(cap)
}

#[allow(clippy::too_many_arguments)]
pub fn predictor_map(
    kind: PredictorKind,
    geom: &SceneGeometry,
    omega: f64,
    n_dirs: usize,
    grid: &ImageGrid,
    variant: PredictorVariant,
    cap: f64,
) -> Result<FieldMap> {
    check_cap(cap)?;
    if n_dirs == 0 {
        return Err(Error::invalid("predictor needs at least one direction"));
    }
    if geom.is_empty() {
        return Err(Error::InvalidGeometry("empty scene".into()));
    }
    Ok(FieldMap {
        grid: *grid,
        values: grid.evaluate(|z| predictor_value(kind, geom, omega, n_dirs, &z, variant, cap)),
        kind: MapKind::Predictor(kind),
        cap,
    })
}

/// Pixelwise deviation statistics of `b` relative to `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapComparison {
    /// Median of `|b - a| / |a|` over kept pixels.
    pub median_relative: f64,
    pub max_relative: f64,
    pub mean_relative: f64,
    /// Distance between the argmax pixels of `a` and `b` over kept pixels.
    pub argmax_distance: f64,
    pub pixels: usize,
}

/// Compare two maps on identical grids over the pixels where `keep` holds.
pub fn compare_maps(a: &FieldMap, b: &FieldMap, keep: impl Fn(&Vec2) -> bool) -> Result<MapComparison> {
    if a.grid != b.grid {
        return Err(Error::invalid("maps live on different grids"));
    }
    let grid = &a.grid;
    let kept: Vec<usize> = (0..grid.len()).filter(|&i| keep(&grid.point(i))).collect();
    if kept.is_empty() {
        return Err(Error::invalid("mask excludes every pixel"));
    }
    let mut rel: Vec<f64> = kept
        .iter()
        .map(|&i| {
            let (x, y) = (a.values[i], b.values[i]);
            if x == y {
                0.0
            } else {
                (y - x).abs() / x.abs()
            }
        })
        .collect();
    rel.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mid = rel.len() / 2;
    let median_relative = if rel.len() % 2 == 1 {
        rel[mid]
    } else {
        0.5 * (rel[mid - 1] + rel[mid])
    };
    let in_mask = |i: usize| keep(&grid.point(i));
    let ia = argmax_where(&a.values, in_mask).unwrap();
    let ib = argmax_where(&b.values, in_mask).unwrap();
    Ok(MapComparison {
        median_relative,
        max_relative: *rel.last().unwrap(),
        mean_relative: rel.iter().sum::<f64>() / rel.len() as f64,
        argmax_distance: (grid.point(ia) - grid.point(ib)).norm(),
        pixels: kept.len(),
    })
}
