//! MUSIC-type imaging of thin electromagnetic inclusions, perfectly conducting
//! cracks and small inclusions in two dimensions.
//!
//! The crate synthesizes multistatic response (MSR) matrices from asymptotic
//! far-field models, extracts the signal subspace by SVD, and evaluates the
//! MUSIC functional `E(z) = 1/|P_noise f(z)|` together with the closed-form
//! Bessel-function predictors that describe its structure.
//!
//! Module layout:
//!
//! - [`geometry`]: supporting curves, arc-length discretization, direction sets
//! - [`special`]: Bessel functions `J0`, `J1` and discrete circular averages
//! - [`synth`]: MSR matrix synthesis (thin, small, crack) and additive noise
//! - [`subspace`]: SVD, signal-dimension selection, noise-subspace projection
//! - [`imaging`]: steering vectors, MUSIC / migration maps, Bessel predictors
//! - [`scene`]: scene configuration documents and the end-to-end pipeline
//! - [`export`]: CSV and PGM writers for field maps
//! - [`diagnostics`]: numerical identity checks behind the `identities` command

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod export;
pub mod geometry;
pub mod imaging;
pub mod scene;
pub mod special;
pub mod subspace;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{CurveSpec, DirectionSet, SceneGeometry, Vec2};
pub use imaging::{FieldMap, ImageGrid, MapKind, PredictorKind, PredictorVariant};
pub use scene::{RunReport, SceneConfig};
pub use subspace::SubspaceDecomposition;
pub use synth::{MaterialContrast, ModelKind, MsrMatrix, SmallInclusion};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
