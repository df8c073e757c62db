//! Supporting curves, their arc-length discretization and the incident
//! direction set.
//!
//! Curves are parametrized on a closed interval `[a, b]`. Discretization splits
//! the curve into `M = max(1, round(L / spacing))` segments of equal arc length
//! and places one sample at the arc-length midpoint of each segment. Every
//! sample carries a unit tangent and the normal obtained by rotating the
//! tangent by +90 degrees.

use std::f64::consts::PI;

use nalgebra::{DVector, Vector2};

use crate::{Error, Result, C64};

pub type Vec2 = Vector2<f64>;

/// Relative tolerance for arc-length quadrature.
const ARC_REL_TOL: f64 = 1e-12;
const FRAME_TOL: f64 = 1e-12;

/// Rotate a vector by +90 degrees.
#[inline]
pub fn rotate_left(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Point on a curve with its local orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub point: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
}

/// Dense open polyline, parametrized by arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Vec2>,
    cumulative: Vec<f64>,
    vertex_tangents: Vec<Vec2>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidGeometry("polyline needs at least two vertices".into()));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite polyline vertex".into()));
        }
        let mut cumulative = Vec::with_capacity(vertices.len());
        cumulative.push(0.0);
        for w in vertices.windows(2) {
            let seg = (w[1] - w[0]).norm();
            if seg == 0.0 {
                return Err(Error::InvalidGeometry(
                    "polyline has repeated consecutive vertices".into(),
                ));
            }
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        // Central differences inside, one-sided at the two ends.
        let last = vertices.len() - 1;
        let vertex_tangents = (0..vertices.len())
            .map(|i| {
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(last);
                (vertices[hi] - vertices[lo]).normalize()
            })
            .collect();
        Ok(Self {
            vertices,
            cumulative,
            vertex_tangents,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let i = match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.vertices.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.vertices.len() - 2),
        };
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        (i, ((s - self.cumulative[i]) / seg).clamp(0.0, 1.0))
    }

    fn frame(&self, s: f64) -> Result<Frame> {
        let (i, u) = self.locate(s);
        let point = self.vertices[i] * (1.0 - u) + self.vertices[i + 1] * u;
        let blend = self.vertex_tangents[i] * (1.0 - u) + self.vertex_tangents[i + 1] * u;
        let norm = blend.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidGeometry("polyline folds back on itself".into()));
        }
        let tangent = blend / norm;
        Ok(Frame {
            point,
            tangent,
            normal: rotate_left(&tangent),
        })
    }
}

/// A parametrized open supporting curve.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    /// `[s + 0.2, s^3 + s^2 - 0.3]` for `s` in `[-0.5, 0.5]`.
    Gamma1,
    /// `[s, cos(s pi/2)/2 + sin(s pi/2)/5 - cos(3 s pi/2)/10]` for `s` in `[-1, 1]`.
    Gamma2,
    /// Straight segment, `s` in `[0, 1]`.
    Line { start: Vec2, end: Vec2 },
    /// Polyline parametrized by arc length, `s` in `[0, length]`.
    Polyline(Polyline),
}

impl CurveSpec {
    /// Look up a preset by name: `gamma1`, `gamma2` or `line` (unit segment
    /// from the origin along `x`).
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "gamma1" => Some(CurveSpec::Gamma1),
            "gamma2" => Some(CurveSpec::Gamma2),
            "line" => Some(CurveSpec::Line {
                start: Vec2::zeros(),
                end: Vec2::new(1.0, 0.0),
            }),
            _ => None,
        }
    }

    pub fn polyline(vertices: Vec<Vec2>) -> Result<Self> {
        Polyline::new(vertices).map(CurveSpec::Polyline)
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            CurveSpec::Gamma1 => (-0.5, 0.5),
            CurveSpec::Gamma2 => (-1.0, 1.0),
            CurveSpec::Line { .. } => (0.0, 1.0),
            CurveSpec::Polyline(p) => (0.0, p.length()),
        }
    }

    fn point_unchecked(&self, s: f64) -> Vec2 {
        match self {
            CurveSpec::Gamma1 => Vec2::new(s + 0.2, s * s * s + s * s - 0.3),
            CurveSpec::Gamma2 => {
                let a = s * PI / 2.0;
                Vec2::new(s, 0.5 * a.cos() + 0.2 * a.sin() - 0.1 * (3.0 * a).cos())
            }
            CurveSpec::Line { start, end } => start + (end - start) * s,
            CurveSpec::Polyline(p) => {
                let (i, u) = p.locate(s);
                p.vertices[i] * (1.0 - u) + p.vertices[i + 1] * u
            }
        }
    }

    /// Velocity with respect to the curve parameter. Polylines are
    /// arc-length parametrized and report their blended unit tangent.
    fn velocity(&self, s: f64) -> Vec2 {
        match self {
            CurveSpec::Gamma1 => Vec2::new(1.0, 3.0 * s * s + 2.0 * s),
            CurveSpec::Gamma2 => {
                let a = s * PI / 2.0;
                Vec2::new(
                    1.0,
                    -0.25 * PI * a.sin() + 0.1 * PI * a.cos() + 0.15 * PI * (3.0 * a).sin(),
                )
            }
            CurveSpec::Line { start, end } => end - start,
            CurveSpec::Polyline(p) => p.frame(s).map(|f| f.tangent).unwrap_or_else(|_| Vec2::zeros()),
        }
    }

    fn speed(&self, s: f64) -> f64 {
        match self {
            CurveSpec::Polyline(_) => 1.0,
            _ => self.velocity(s).norm(),
        }
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&s) {
            return Err(Error::Domain { value: s, lo, hi });
        }
        Ok(())
    }

    /// Point, unit tangent and left normal at parameter `s`.
    pub fn eval(&self, s: f64) -> Result<Frame> {
        self.check_domain(s)?;
        if let CurveSpec::Polyline(p) = self {
            return p.frame(s);
        }
        let v = self.velocity(s);
        let speed = v.norm();
        if !(speed > 0.0) {
            return Err(Error::InvalidGeometry(format!("curve has zero speed at s = {s}")));
        }
        let tangent = v / speed;
        Ok(Frame {
            point: self.point_unchecked(s),
            tangent,
            normal: rotate_left(&tangent),
        })
    }

    /// Arc length between two parameters `lo <= hi` inside the domain.
    pub fn arc_length_between(&self, lo: f64, hi: f64) -> Result<f64> {
        self.check_domain(lo)?;
        self.check_domain(hi)?;
        Ok(self.arc_unchecked(lo, hi))
    }

    fn arc_unchecked(&self, lo: f64, hi: f64) -> f64 {
        match self {
            CurveSpec::Line { start, end } => (end - start).norm() * (hi - lo),
            CurveSpec::Polyline(_) => hi - lo,
            _ => adaptive_simpson(&|s| self.speed(s), lo, hi, ARC_REL_TOL),
        }
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.domain();
        self.arc_unchecked(a, b)
    }

    /// Parameter at which the arc length measured from the start of the
    /// domain equals `target`. Newton iteration safeguarded by bisection.
    fn parameter_at_arc(&self, target: f64, total: f64) -> f64 {
        let (a, b) = self.domain();
        match self {
            CurveSpec::Line { .. } => return a + (b - a) * target / total,
            CurveSpec::Polyline(_) => return target,
            _ => {}
        }
        let (mut lo, mut hi) = (a, b);
        let mut s = a + (b - a) * target / total;
        for _ in 0..100 {
            let residual = self.arc_unchecked(a, s) - target;
            if residual.abs() <= 1e-14 * total {
                break;
            }
            if residual > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let newton = s - residual / self.speed(s);
            s = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        s
    }

    /// Split the curve into segments of roughly `spacing` arc length and
    /// sample one framed point per segment at its arc-length midpoint.
    pub fn discretize(&self, spacing: f64) -> Result<SceneGeometry> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
        }
        let total = self.length();
        if !(total > 0.0) {
            return Err(Error::InvalidGeometry("curve has zero length".into()));
        }
        let count = ((total / spacing).round() as usize).max(1);
        let segment = total / count as f64;
        let mut points = Vec::with_capacity(count);
        let mut tangents = Vec::with_capacity(count);
        let mut normals = Vec::with_capacity(count);
        let mut parameters = Vec::with_capacity(count);
        for m in 0..count {
            let s = self.parameter_at_arc((m as f64 + 0.5) * segment, total);
            let frame = self.eval(s)?;
            parameters.push(s);
            points.push(frame.point);
            tangents.push(frame.tangent);
            normals.push(frame.normal);
        }
        Ok(SceneGeometry {
            points,
            tangents,
            normals,
            parameters,
            curve_length: total,
            spacing: segment,
        })
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = (rel_tol * whole.abs()).max(f64::EPSILON * 16.0);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Discretized supporting curve: sample points with orthonormal frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    points: Vec<Vec2>,
    tangents: Vec<Vec2>,
    normals: Vec<Vec2>,
    parameters: Vec<f64>,
    curve_length: f64,
    spacing: f64,
}

impl SceneGeometry {
    /// Build a point set with explicit frames, e.g. the centers of small
    /// inclusions. `segment_length` is the quadrature weight attached to each
    /// point; the nominal curve length is `segment_length * M`.
    pub fn from_parts(points: Vec<Vec2>, tangents: Vec<Vec2>, normals: Vec<Vec2>, segment_length: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGeometry("no points".into()));
        }
        if tangents.len() != points.len() || normals.len() != points.len() {
            return Err(Error::InvalidGeometry(
                "points, tangents and normals differ in length".into(),
            ));
        }
        if !(segment_length > 0.0) {
            return Err(Error::InvalidGeometry("segment length must be positive".into()));
        }
        for (t, n) in tangents.iter().zip(&normals) {
            if (t.norm() - 1.0).abs() > FRAME_TOL || (n.norm() - 1.0).abs() > FRAME_TOL || t.dot(n).abs() > FRAME_TOL {
                return Err(Error::InvalidGeometry("frame is not orthonormal".into()));
            }
        }
        let count = points.len();
        Ok(Self {
            points,
            tangents,
            normals,
            parameters: (0..count).map(|i| i as f64).collect(),
            curve_length: segment_length * count as f64,
            spacing: segment_length,
        })
    }

    /// Points with the standard basis `e1`, `e2` as tangent and normal.
    pub fn from_points(points: Vec<Vec2>, segment_length: f64) -> Result<Self> {
        let count = points.len();
        Self::from_parts(points, vec![Vec2::x(); count], vec![Vec2::y(); count], segment_length)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn tangents(&self) -> &[Vec2] {
        &self.tangents
    }

    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    /// Curve parameters of the samples (indices for point sets).
    pub fn parameters(&self) -> &[f64] {
        &self.parameters
    }

    pub fn curve_length(&self) -> f64 {
        self.curve_length
    }

    /// Realized segment length `L / M`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn frames(&self) -> impl Iterator<Item = Frame> + '_ {
        self.points
            .iter()
            .zip(&self.tangents)
            .zip(&self.normals)
            .map(|((&point, &tangent), &normal)| Frame { point, tangent, normal })
    }

    /// Smallest distance from `z` to any sample point.
    pub fn distance_to(&self, z: &Vec2) -> f64 {
        self.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Smallest pairwise distance between sample points (infinite for M = 1).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.min((p - q).norm());
            }
        }
        best
    }

    pub fn translated(&self, shift: &Vec2) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            *p += shift;
        }
        out
    }
}

/// Equispaced unit directions `theta_n = (cos 2 n pi / N, sin 2 n pi / N)`,
/// `n = 1..N`, used both for incidence and observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    vectors: Vec<Vec2>,
}

impl DirectionSet {
    pub fn sample(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid(format!("need at least 2 directions, got {count}")));
        }
        let vectors = (1..=count)
            .map(|n| {
                let (sin, cos) = (2.0 * PI * n as f64 / count as f64).sin_cos();
                Vec2::new(cos, sin)
            })
            .collect();
        Ok(Self { vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec2] {
        &self.vectors
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec2> {
        self.vectors.iter()
    }

    /// Plane-wave phase vector `[exp(i omega theta_n . z)]_n`.
    pub fn phases(&self, z: &Vec2, omega: f64) -> DVector<C64> {
        DVector::from_iterator(
            self.len(),
            self.vectors.iter().map(|t| C64::from_polar(1.0, omega * t.dot(z))),
        )
    }
}
