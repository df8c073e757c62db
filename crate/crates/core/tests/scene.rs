mod common;

use std::f64::consts::PI;

use common::{curve_distance, gamma1_point};
use thinmusic::export::parse_csv;
use thinmusic::scene::{parse_scene, parse_scene_with_preset, run_scene, PRESETS};
use thinmusic::{ImageGrid, PredictorKind, SceneConfig, Vec2};

fn coarse(mut cfg: SceneConfig) -> SceneConfig {
    cfg.grid = ImageGrid::new((-1.0, 1.0), (-1.0, 1.0), 48, 48).unwrap();
    cfg
}

#[test]
fn gamma1_eps_end_to_end() {
    let run = run_scene(&coarse(SceneConfig::preset("gamma1-eps").unwrap())).unwrap();
    let r = &run.report;
    assert!((r.omega - 2.0 * PI / 0.4).abs() < 1e-12);
    assert!((r.omega - 15.70796).abs() < 1e-5);
    assert_eq!((r.sites, r.signal_dim), (6, 6));
    assert_eq!(r.predictor, "eps");
    assert_eq!(r.music_cap_hits, 0);
    assert_eq!(r.music_peaks.len(), 6);
    for p in &r.music_peaks {
        assert!(curve_distance(gamma1_point, -0.5, 0.5, *p) <= 0.1, "{p:?}");
    }
    assert!(r.comparison.median_relative <= 0.1, "{}", r.comparison.median_relative);
    assert!(r.outputs.is_empty());
}

#[test]
fn gamma1_mu_is_finite() {
    let cfg = coarse(parse_scene_with_preset("variant = \"frame-sum\"", Some("gamma1-mu")).unwrap());
    let run = run_scene(&cfg).unwrap();
    assert_eq!(run.report.predictor, "mu");
    assert!(run.music.values.iter().all(|v| v.is_finite()));
    assert_eq!(run.report.music_cap_hits, 0);
    assert_eq!(run.predictor.cap_hits(), 0);
}

#[test]
fn every_preset_runs() {
    for name in PRESETS {
        let cfg = coarse(SceneConfig::preset(name).unwrap());
        let run = run_scene(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(
            run.report.signal_dim >= 1 && run.report.signal_dim < cfg.directions,
            "{name}"
        );
        assert_eq!(run.music.values.len(), 48 * 48);
    }
}

#[test]
fn crack_presets_pick_their_predictors() {
    let soft = SceneConfig::preset("gamma2-soft").unwrap();
    let hard = SceneConfig::preset("gamma2-hard").unwrap();
    assert_eq!(soft.predictor_kind(), PredictorKind::SoundSoft);
    assert_eq!(hard.predictor_kind(), PredictorKind::SoundHard);
    assert_eq!(soft.directions, 40);
}

#[test]
fn reruns_are_identical() {
    let cfg = coarse(parse_scene_with_preset("noise = 0.01\nseed = 7\n", Some("gamma1-eps")).unwrap());
    let a = run_scene(&cfg).unwrap();
    let b = run_scene(&cfg).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.music.values, b.music.values);
    let other = run_scene(&SceneConfig { seed: 8, ..cfg }).unwrap();
    assert_ne!(a.music.values, other.music.values);
}

#[test]
fn artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = coarse(SceneConfig::preset("small-eps").unwrap());
    cfg.output.dir = Some(dir.path().to_path_buf());
    let run = run_scene(&cfg).unwrap();
    assert_eq!(run.report.outputs.len(), 6);
    for path in &run.report.outputs {
        assert!(path.exists(), "{path:?}");
    }
    let csv = std::fs::read_to_string(dir.path().join("music.csv")).unwrap();
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), 48 * 48);
    for (row, (i, v)) in rows.iter().zip(run.music.values.iter().enumerate()) {
        let z = cfg.grid.point(i);
        assert_eq!([row[0], row[1], row[2]], [z.x, z.y, *v]);
    }
}

#[test]
fn custom_line_scene() {
    let text = r#"
model = "thin"
eps = 3.0
directions = 32
[geometry]
curve = "line"
start = [-0.3, 0.1]
end = [0.3, 0.1]
[grid]
x = [-0.5, 0.5]
y = [-0.5, 0.5]
nx = 40
ny = 40
"#;
    let cfg = parse_scene(text).unwrap();
    let run = run_scene(&cfg).unwrap();
    assert_eq!(run.report.sites, 3);
    assert_eq!(run.report.signal_dim, 3);
    let peak = run.music.argmax();
    assert!((cfg.grid.point(peak) - Vec2::new(0.0, 0.1)).norm() <= 0.35);
}

#[test]
fn parse_errors_name_keys() {
    let cases = [
        ("wavelength = -1.0", "wavelength"),
        ("directions = \"many\"", "directions"),
        ("[grid]\nnz = 3", "grid.nz"),
        ("tau = 1.5", "tau"),
        ("signal_dim = 24", "signal_dim"),
    ];
    for (text, key) in cases {
        let err = parse_scene_with_preset(text, Some("gamma1-eps")).unwrap_err();
        assert!(err.is_parse(), "{text}");
        assert!(err.to_string().contains(key), "{text}: {err}");
    }
    assert!(parse_scene("model = \"thin\"\n[geometry]\ncurve = \"gamma1\"\n")
        .unwrap_err()
        .is_parse());
    assert!(SceneConfig::preset("nope").is_err());
}
