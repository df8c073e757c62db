//! Benchmark fixtures shared by the criterion targets in `benches/`.

use thinmusic::geometry::{CurveSpec, DirectionSet, SceneGeometry};
use thinmusic::synth::{msr_thin, MaterialContrast, MsrMatrix};

pub const WAVELENGTH: f64 = 0.4;

pub fn omega() -> f64 {
    2.0 * std::f64::consts::PI / WAVELENGTH
}

/// Permittivity scene on `gamma1` with `n` directions.
pub fn gamma1_eps(n: usize) -> (SceneGeometry, DirectionSet, MsrMatrix) {
    let geom = CurveSpec::Gamma1
        .discretize(0.5 * WAVELENGTH)
        .expect("gamma1 discretizes");
    let dirs = DirectionSet::sample(n).expect("n >= 2");
    let contrast = MaterialContrast::new(5.0, 1.0, 0.02).expect("valid contrast");
    let msr = msr_thin(&geom, &contrast, omega(), &dirs).expect("valid scene");
    (geom, dirs, msr)
}
