//! Scene documents and the end-to-end imaging pipeline.
//!
//! A scene is a TOML document with flat top-level keys and a few nested
//! blocks:
//!
//! ```toml
//! preset = "gamma1-eps"     # optional base scene, overridden key by key
//! model = "thin"            # thin | small | crack-soft | crack-hard
//! wavelength = 0.4          # omega = 2 pi / wavelength
//! directions = 24
//! eps = 5.0                 # thin model only
//! mu = 1.0
//! thickness = 0.02
//! spacing = 0.2             # curve segmentation, default wavelength / 2
//! strengths = []            # crack model, one per segment or empty
//! tau = 0.01                # relative signal-dimension threshold
//! signal_dim = 6            # overrides tau when present
//! noise = 0.0
//! seed = 0
//! cap = 1e6
//! variant = "as-written"    # or "frame-sum"
//!
//! [geometry]                # exactly one of [geometry] / [[inclusions]]
//! curve = "gamma1"          # gamma1 | gamma2 | line | polyline
//! start = [0.0, 0.0]        # line
//! end = [1.0, 0.0]          # line
//! points = [[0.0, 0.0], [0.5, 0.1]]   # polyline
//!
//! [[inclusions]]
//! center = [0.0, 0.0]
//! radius = 0.05
//! eps = 5.0                 # default 1
//! mu = 1.0                  # default 1, gives the disk tensor
//! area = 3.141592653589793  # default pi (unit disk)
//! tensor = [[1.0, 0.0], [0.0, 1.0]]   # overrides the disk tensor
//!
//! [grid]
//! x = [-1.0, 1.0]
//! y = [-1.0, 1.0]
//! nx = 128
//! ny = 128
//!
//! [output]
//! dir = "out"
//! formats = ["csv", "pgm"]
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use log::{info, warn};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::export::{export_map, ExportFormat};
use crate::geometry::{CurveSpec, DirectionSet, SceneGeometry, Vec2};
use crate::imaging::{
    compare_maps, migration_map, music_map, predictor_map, FieldMap, ImageGrid, MapComparison, PredictorKind,
    PredictorVariant, DEFAULT_CAP,
};
use crate::subspace::{SubspaceDecomposition, DEFAULT_TAU};
use crate::synth::{
    add_noise, msr_crack, msr_small, msr_thin, BoundaryCondition, MaterialContrast, ModelKind, MsrMatrix,
    SmallInclusion, EPS0,
};
use crate::{Error, Result};

pub const DEFAULT_WAVELENGTH: f64 = 0.4;
pub const DEFAULT_DIRECTIONS: usize = 24;
pub const DEFAULT_THICKNESS: f64 = 0.02;

const GAMMA1: &str = r#"
model = "thin"
wavelength = 0.4
directions = 24
thickness = 0.02
[geometry]
curve = "gamma1"
"#;

const GAMMA2: &str = r#"
wavelength = 0.4
directions = 40
[geometry]
curve = "gamma2"
"#;

const SMALL: &str = r#"
model = "small"
wavelength = 0.4
directions = 24
[[inclusions]]
center = [-0.65, -0.45]
radius = 0.05
[[inclusions]]
center = [0.65, -0.45]
radius = 0.05
[[inclusions]]
center = [0.0, 0.7]
radius = 0.05
"#;

/// Named base scenes.
pub const PRESETS: &[&str] = &[
    "gamma1-eps",
    "gamma1-mu",
    "gamma1-eps-mu",
    "gamma2-soft",
    "gamma2-hard",
    "small-eps",
    "small-mu",
];

fn preset_table(name: &str) -> Option<Table> {
    let (base, extra) = match name {
        "gamma1-eps" => (GAMMA1, "eps = 5.0\nmu = 1.0\n"),
        "gamma1-mu" => (GAMMA1, "eps = 1.0\nmu = 5.0\n"),
        "gamma1-eps-mu" => (GAMMA1, "eps = 5.0\nmu = 5.0\n"),
        "gamma2-soft" => (GAMMA2, "model = \"crack-soft\"\n"),
        "gamma2-hard" => (GAMMA2, "model = \"crack-hard\"\n"),
        "small-eps" | "small-mu" => (SMALL, ""),
        _ => return None,
    };
    let mut table: Table = format!("{extra}{base}").parse().expect("preset is valid toml");
    if name.starts_with("small-") {
        let (eps, mu) = if name == "small-eps" { (5.0, 1.0) } else { (1.0, 5.0) };
        if let Some(Value::Array(list)) = table.get_mut("inclusions") {
            for inc in list.iter_mut().filter_map(Value::as_table_mut) {
                inc.insert("eps".into(), Value::Float(eps));
                inc.insert("mu".into(), Value::Float(mu));
            }
        }
    }
    Some(table)
}

/// Where the scatterers come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySource {
    Curve(CurveSpec),
    Inclusions(Vec<SmallInclusion>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub formats: Vec<ExportFormat>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec![ExportFormat::Csv, ExportFormat::Pgm],
        }
    }
}

/// Validated scene with all defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub preset: Option<String>,
    pub model: ModelKind,
    pub geometry: GeometrySource,
    /// Thin-inclusion material; `None` for other models.
    pub contrast: Option<MaterialContrast>,
    pub wavelength: f64,
    pub directions: usize,
    pub spacing: Option<f64>,
    pub strengths: Vec<f64>,
    pub grid: ImageGrid,
    pub signal_dim: Option<usize>,
    pub tau: f64,
    pub noise: f64,
    pub seed: u64,
    pub cap: f64,
    pub variant: PredictorVariant,
    pub output: OutputSpec,
}

impl SceneConfig {
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Segment length used to discretize curves: `spacing` or half a
    /// wavelength.
    pub fn segment_spacing(&self) -> f64 {
        self.spacing.unwrap_or(0.5 * self.wavelength)
    }

    pub fn preset(name: &str) -> Result<Self> {
        parse_scene_with_preset("", Some(name))
    }

    /// Predictor matching the model and contrast.
    pub fn predictor_kind(&self) -> PredictorKind {
        match (&self.model, &self.geometry) {
            (ModelKind::CrackSoft, _) => PredictorKind::SoundSoft,
            (ModelKind::CrackHard, _) => PredictorKind::SoundHard,
            (ModelKind::Small, GeometrySource::Inclusions(list)) => {
                let eps = list.iter().any(|i| i.eps != EPS0);
                let mu = list.iter().any(|i| i.tensor.iter().any(|&a| a != 0.0));
                match (eps, mu) {
                    (false, true) => PredictorKind::SmallPermeability,
                    (true, true) => PredictorKind::SmallBoth,
                    _ => PredictorKind::SmallPermittivity,
                }
            }
            _ => match self.contrast {
                Some(c) if !c.has_permittivity_contrast() && c.has_permeability_contrast() => {
                    PredictorKind::Permeability
                }
                Some(c) if c.has_permittivity_contrast() && c.has_permeability_contrast() => PredictorKind::Both,
                _ => PredictorKind::Permittivity,
            },
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "preset",
    "model",
    "wavelength",
    "directions",
    "eps",
    "mu",
    "thickness",
    "spacing",
    "strengths",
    "tau",
    "signal_dim",
    "noise",
    "seed",
    "cap",
    "variant",
    "geometry",
    "inclusions",
    "grid",
    "output",
];
const GEOMETRY_KEYS: &[&str] = &["curve", "start", "end", "points"];
const INCLUSION_KEYS: &[&str] = &["center", "radius", "eps", "mu", "area", "tensor"];
const GRID_KEYS: &[&str] = &["x", "y", "nx", "ny"];
const OUTPUT_KEYS: &[&str] = &["dir", "formats"];

fn check_keys(table: &Table, allowed: &[&str], prefix: &str) -> Result<()> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::parse(format!("{prefix}{key}"), "unknown key"));
        }
    }
    Ok(())
}

fn validate_keys(doc: &Table) -> Result<()> {
    check_keys(doc, TOP_KEYS, "")?;
    for (name, allowed) in [
        ("geometry", GEOMETRY_KEYS),
        ("grid", GRID_KEYS),
        ("output", OUTPUT_KEYS),
    ] {
        match doc.get(name) {
            None => {}
            Some(Value::Table(t)) => check_keys(t, allowed, &format!("{name}."))?,
            Some(_) => return Err(Error::parse(name, "expected a table")),
        }
    }
    match doc.get("inclusions") {
        None => {}
        Some(Value::Array(list)) => {
            for (i, item) in list.iter().enumerate() {
                let t = item
                    .as_table()
                    .ok_or_else(|| Error::parse(format!("inclusions[{i}]"), "expected a table"))?;
                check_keys(t, INCLUSION_KEYS, &format!("inclusions[{i}]."))?;
            }
        }
        Some(_) => return Err(Error::parse("inclusions", "expected an array of tables")),
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct RawScene {
    model: Option<ModelKind>,
    wavelength: Option<f64>,
    directions: Option<i64>,
    eps: Option<f64>,
    mu: Option<f64>,
    thickness: Option<f64>,
    spacing: Option<f64>,
    #[serde(default)]
    strengths: Vec<f64>,
    tau: Option<f64>,
    signal_dim: Option<i64>,
    noise: Option<f64>,
    seed: Option<i64>,
    cap: Option<f64>,
    variant: Option<PredictorVariant>,
    geometry: Option<RawGeometry>,
    inclusions: Option<Vec<RawInclusion>>,
    grid: Option<RawGrid>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
struct RawGeometry {
    curve: String,
    start: Option<[f64; 2]>,
    end: Option<[f64; 2]>,
    points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
struct RawInclusion {
    center: [f64; 2],
    radius: f64,
    eps: Option<f64>,
    mu: Option<f64>,
    area: Option<f64>,
    tensor: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Deserialize)]
struct RawGrid {
    x: Option<[f64; 2]>,
    y: Option<[f64; 2]>,
    nx: Option<i64>,
    ny: Option<i64>,
}

#[derive(Debug, Deserialize)]
struct RawOutput {
    dir: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

/// Parse a scene document. A `preset` key seeds the scene before the
/// document's own keys are applied.
pub fn parse_scene(text: &str) -> Result<SceneConfig> {
    parse_scene_with_preset(text, None)
}

/// Like [`parse_scene`], with an explicit preset taking precedence over the
/// document's `preset` key.
pub fn parse_scene_with_preset(text: &str, preset: Option<&str>) -> Result<SceneConfig> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::parse("<document>", e.message().to_string()))?;
    validate_keys(&doc)?;
    let preset_name = match (preset, doc.get("preset")) {
        (Some(name), _) => Some(name.to_string()),
        (None, Some(Value::String(name))) => Some(name.clone()),
        (None, Some(_)) => return Err(Error::parse("preset", "expected a string")),
        (None, None) => None,
    };
    let mut merged = match &preset_name {
        Some(name) => preset_table(name).ok_or_else(|| {
            Error::parse(
                "preset",
                format!("unknown preset `{name}`, expected one of {PRESETS:?}"),
            )
        })?,
        None => Table::new(),
    };
    for (key, value) in doc {
        if key == "preset" {
            continue;
        }
        // switching geometry source drops the preset's other source
        match key.as_str() {
            "geometry" => {
                merged.remove("inclusions");
            }
            "inclusions" => {
                merged.remove("geometry");
            }
            _ => {}
        }
        merged.insert(key, value);
    }
    let raw: RawScene = serde_path_to_error::deserialize(Value::Table(merged)).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().message().to_string();
        match path.as_str() {
            // missing fields are reported at their parent table
            "." => Error::parse("<document>", message),
            _ => Error::parse(path, message),
        }
    })?;
    build_config(raw, preset_name)
}

fn positive(key: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::parse(key, format!("must be positive, got {value}")))
    }
}

fn vec2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

fn build_config(raw: RawScene, preset: Option<String>) -> Result<SceneConfig> {
    let model = raw.model.unwrap_or(ModelKind::Thin);
    let wavelength = positive("wavelength", raw.wavelength.unwrap_or(DEFAULT_WAVELENGTH))?;
    let directions = raw.directions.unwrap_or(DEFAULT_DIRECTIONS as i64);
    if directions < 2 {
        return Err(Error::parse("directions", format!("need at least 2, got {directions}")));
    }
    let directions = directions as usize;

    let geometry = match (raw.geometry, raw.inclusions) {
        (Some(_), Some(_)) => {
            return Err(Error::parse(
                "geometry",
                "give either [geometry] or [[inclusions]], not both",
            ))
        }
        (None, None) => return Err(Error::parse("geometry", "missing geometry")),
        (Some(g), None) => GeometrySource::Curve(build_curve(g)?),
        (None, Some(list)) => GeometrySource::Inclusions(build_inclusions(list)?),
    };
    match (&model, &geometry) {
        (ModelKind::Small, GeometrySource::Curve(_)) => {
            return Err(Error::parse("inclusions", "small model needs [[inclusions]]"))
        }
        (ModelKind::Thin | ModelKind::CrackSoft | ModelKind::CrackHard, GeometrySource::Inclusions(_)) => {
            return Err(Error::parse(
                "geometry",
                format!("{} model needs a [geometry] curve", model.name()),
            ))
        }
        _ => {}
    }

    let contrast = if model == ModelKind::Thin {
        let eps = positive("eps", raw.eps.unwrap_or(1.0))?;
        let mu = positive("mu", raw.mu.unwrap_or(1.0))?;
        let thickness = positive("thickness", raw.thickness.unwrap_or(DEFAULT_THICKNESS))?;
        if eps == 1.0 && mu == 1.0 {
            return Err(Error::parse("eps", "thin inclusion has no material contrast"));
        }
        Some(MaterialContrast::new(eps, mu, thickness).map_err(|e| Error::parse("eps", e.to_string()))?)
    } else {
        None
    };

    let spacing = raw.spacing.map(|s| positive("spacing", s)).transpose()?;
    if raw.strengths.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::parse("strengths", "must all be positive"));
    }
    let tau = raw.tau.unwrap_or(DEFAULT_TAU);
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::parse("tau", format!("must lie in (0, 1), got {tau}")));
    }
    let signal_dim = match raw.signal_dim {
        Some(d) if d < 0 || d as usize >= directions => {
            return Err(Error::parse(
                "signal_dim",
                format!("must lie in [0, {directions}), got {d}"),
            ))
        }
        Some(d) => Some(d as usize),
        None => None,
    };
    let noise = raw.noise.unwrap_or(0.0);
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::parse("noise", format!("must be non-negative, got {noise}")));
    }
    let seed = raw.seed.unwrap_or(0);
    if seed < 0 {
        return Err(Error::parse("seed", "must be non-negative"));
    }
    let cap = positive("cap", raw.cap.unwrap_or(DEFAULT_CAP))?;

    let grid = match raw.grid {
        None => ImageGrid::default(),
        Some(g) => {
            let d = ImageGrid::default();
            let nx = g.nx.unwrap_or(d.nx as i64);
            let ny = g.ny.unwrap_or(d.ny as i64);
            if nx < 2 {
                return Err(Error::parse("grid.nx", "must be at least 2"));
            }
            if ny < 2 {
                return Err(Error::parse("grid.ny", "must be at least 2"));
            }
            let x = g.x.map(|r| (r[0], r[1])).unwrap_or(d.x_range);
            let y = g.y.map(|r| (r[0], r[1])).unwrap_or(d.y_range);
            if !(x.0 < x.1) {
                return Err(Error::parse("grid.x", "empty range"));
            }
            if !(y.0 < y.1) {
                return Err(Error::parse("grid.y", "empty range"));
            }
            ImageGrid::new(x, y, nx as usize, ny as usize).map_err(|e| Error::parse("grid", e.to_string()))?
        }
    };

    let output = match raw.output {
        None => OutputSpec::default(),
        Some(o) => OutputSpec {
            dir: o.dir,
            formats: match o.formats {
                None => OutputSpec::default().formats,
                Some(list) => list
                    .iter()
                    .map(|f| {
                        f.parse()
                            .map_err(|_| Error::parse("output.formats", format!("unknown format `{f}`")))
                    })
                    .collect::<Result<_>>()?,
            },
        },
    };

    Ok(SceneConfig {
        preset,
        model,
        geometry,
        contrast,
        wavelength,
        directions,
        spacing,
        strengths: raw.strengths,
        grid,
        signal_dim,
        tau,
        noise,
        seed: seed as u64,
        cap,
        variant: raw.variant.unwrap_or_default(),
        output,
    })
}

fn build_curve(g: RawGeometry) -> Result<CurveSpec> {
    match g.curve.as_str() {
        "gamma1" => Ok(CurveSpec::Gamma1),
        "gamma2" => Ok(CurveSpec::Gamma2),
        "line" => {
            let start = g.start.map(vec2).unwrap_or_else(Vec2::zeros);
            let end = g.end.map(vec2).unwrap_or_else(|| Vec2::new(1.0, 0.0));
            if start == end {
                return Err(Error::parse("geometry.end", "line has zero length"));
            }
            Ok(CurveSpec::Line { start, end })
        }
        "polyline" => {
            let points = g
                .points
                .ok_or_else(|| Error::parse("geometry.points", "polyline needs points"))?;
            CurveSpec::polyline(points.into_iter().map(vec2).collect())
                .map_err(|e| Error::parse("geometry.points", e.to_string()))
        }
        other => Err(Error::parse("geometry.curve", format!("unknown curve `{other}`"))),
    }
}

fn build_inclusions(list: Vec<RawInclusion>) -> Result<Vec<SmallInclusion>> {
    if list.is_empty() {
        return Err(Error::parse("inclusions", "empty inclusion list"));
    }
    list.into_iter()
        .enumerate()
        .map(|(i, raw)| {
            let key = |k: &str| format!("inclusions[{i}].{k}");
            let radius = positive(&key("radius"), raw.radius)?;
            let eps = positive(&key("eps"), raw.eps.unwrap_or(1.0))?;
            let mu = positive(&key("mu"), raw.mu.unwrap_or(1.0))?;
            let area = positive(&key("area"), raw.area.unwrap_or(PI))?;
            let tensor = match raw.tensor {
                Some(t) => Matrix2::new(t[0][0], t[0][1], t[1][0], t[1][1]),
                None => Matrix2::identity() * crate::synth::disk_tensor_scale(area, mu),
            };
            SmallInclusion::new(vec2(raw.center), radius, area, tensor, eps)
                .map_err(|e| Error::parse(key("tensor"), e.to_string()))
        })
        .collect()
}

/// Summary of a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub preset: Option<String>,
    pub model: ModelKind,
    pub wavelength: f64,
    pub omega: f64,
    pub directions: usize,
    pub sites: usize,
    pub site_positions: Vec<[f64; 2]>,
    pub curve_length: Option<f64>,
    pub singular_values: Vec<f64>,
    pub signal_dim: usize,
    pub predictor: String,
    pub variant: String,
    pub comparison: MapComparison,
    pub music_max: f64,
    pub music_cap_hits: usize,
    /// Strongest local maxima of the MUSIC map, at most `sites` of them.
    pub music_peaks: Vec<[f64; 2]>,
    pub warnings: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

/// Everything produced by [`run_scene`].
#[derive(Debug, Clone)]
pub struct SceneRun {
    pub report: RunReport,
    pub geometry: SceneGeometry,
    pub msr: MsrMatrix,
    pub decomposition: SubspaceDecomposition,
    pub music: FieldMap,
    pub migration: FieldMap,
    pub predictor: FieldMap,
}

fn context(stage: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{stage}: {m}")),
        Error::InvalidGeometry(m) => Error::InvalidGeometry(format!("{stage}: {m}")),
        Error::Degenerate(m) => Error::Degenerate(format!("{stage}: {m}")),
        other => other,
    }
}

/// Scene geometry: discretized curve or inclusion centers.
pub fn scene_geometry(cfg: &SceneConfig) -> Result<SceneGeometry> {
    match &cfg.geometry {
        GeometrySource::Curve(curve) => curve.discretize(cfg.segment_spacing()),
        GeometrySource::Inclusions(list) => {
            SceneGeometry::from_points(list.iter().map(|i| i.center).collect(), 0.5 * cfg.wavelength)
        }
    }
}

/// Synthesize the (possibly noisy) MSR matrix for a scene.
pub fn synthesize(cfg: &SceneConfig, geom: &SceneGeometry, dirs: &DirectionSet) -> Result<MsrMatrix> {
    let omega = cfg.omega();
    let msr = match (&cfg.model, &cfg.geometry) {
        (ModelKind::Thin, _) => {
            let contrast = cfg
                .contrast
                .ok_or_else(|| Error::invalid("thin model without material contrast"))?;
            msr_thin(geom, &contrast, omega, dirs)?
        }
        (ModelKind::Small, GeometrySource::Inclusions(list)) => msr_small(list, omega, dirs)?,
        (ModelKind::Small, _) => return Err(Error::invalid("small model without inclusions")),
        (ModelKind::CrackSoft, _) => msr_crack(geom, BoundaryCondition::SoundSoft, omega, dirs, &cfg.strengths)?,
        (ModelKind::CrackHard, _) => msr_crack(geom, BoundaryCondition::SoundHard, omega, dirs, &cfg.strengths)?,
    };
    add_noise(&msr, cfg.noise, cfg.seed)
}

fn hypothesis_warnings(cfg: &SceneConfig, geom: &SceneGeometry) -> Vec<String> {
    let m = geom.len();
    let factor = match cfg.predictor_kind() {
        PredictorKind::Both | PredictorKind::SmallBoth => 3,
        PredictorKind::Permeability | PredictorKind::SmallPermeability => 2,
        _ => 1,
    };
    let mut out = Vec::new();
    if cfg.directions <= factor * m {
        out.push(format!(
            "{} directions do not exceed {factor} x {m} scatterer sites",
            cfg.directions
        ));
    }
    let min_sep = geom.min_separation();
    if min_sep.is_finite() && min_sep < 0.5 * cfg.wavelength * 0.9 {
        out.push(format!("sites only {min_sep:.4} apart, below half a wavelength"));
    }
    out
}

/// Run the full pipeline: synthesize, decompose, image, compare and write
/// the configured artifacts.
pub fn run_scene(cfg: &SceneConfig) -> Result<SceneRun> {
    let omega = cfg.omega();
    let dirs = DirectionSet::sample(cfg.directions).map_err(context("directions"))?;
    let geometry = scene_geometry(cfg).map_err(context("geometry"))?;
    let msr = synthesize(cfg, &geometry, &dirs).map_err(context("synthesis"))?;
    let mut decomposition = SubspaceDecomposition::new(&msr.k).map_err(context("svd"))?;
    decomposition = match cfg.signal_dim {
        Some(d) => decomposition.with_signal_dim(d),
        None => decomposition.with_threshold(cfg.tau),
    }
    .map_err(context("signal dimension"))?;
    info!(
        "{} sites, signal dimension {} of {}",
        geometry.len(),
        decomposition.signal_dim(),
        decomposition.size()
    );

    let warnings = hypothesis_warnings(cfg, &geometry);
    for w in &warnings {
        warn!("{w}");
    }

    let music = music_map(&decomposition, omega, &dirs, &cfg.grid, cfg.cap).map_err(context("music"))?;
    let migration = migration_map(&decomposition, omega, &dirs, &cfg.grid).map_err(context("migration"))?;
    let kind = cfg.predictor_kind();
    let predictor = predictor_map(kind, &geometry, omega, cfg.directions, &cfg.grid, cfg.variant, cfg.cap)
        .map_err(context("predictor"))?;
    let guard = 0.25 * cfg.wavelength;
    let comparison =
        compare_maps(&music, &predictor, |z| geometry.distance_to(z) >= guard).map_err(context("comparison"))?;

    let music_peaks = music
        .local_maxima()
        .into_iter()
        .take(geometry.len())
        .map(|i| {
            let z = cfg.grid.point(i);
            [z.x, z.y]
        })
        .collect();

    let outputs = match &cfg.output.dir {
        Some(dir) => write_artifacts(dir, &cfg.output.formats, [&music, &migration, &predictor])?,
        None => Vec::new(),
    };

    let report = RunReport {
        preset: cfg.preset.clone(),
        model: cfg.model,
        wavelength: cfg.wavelength,
        omega,
        directions: cfg.directions,
        sites: geometry.len(),
        site_positions: geometry.points().iter().map(|p| [p.x, p.y]).collect(),
        curve_length: matches!(cfg.geometry, GeometrySource::Curve(_)).then(|| geometry.curve_length()),
        singular_values: decomposition.singular_values().to_vec(),
        signal_dim: decomposition.signal_dim(),
        predictor: kind.name().to_string(),
        variant: cfg.variant.name().to_string(),
        comparison,
        music_max: music.max(),
        music_cap_hits: music.cap_hits(),
        music_peaks,
        warnings,
        outputs,
    };
    Ok(SceneRun {
        report,
        geometry,
        msr,
        decomposition,
        music,
        migration,
        predictor,
    })
}

fn write_artifacts(dir: &Path, formats: &[ExportFormat], maps: [&FieldMap; 3]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for map in maps {
        for &format in formats {
            let path = dir.join(format!("{}.{}", map.kind, format.extension()));
            export_map(map, &path, format)?;
            written.push(path);
        }
    }
    Ok(written)
}
