//! `thinmusic` command-line driver.
//!
//! Exit codes: 0 success, 1 IO failure, 2 scene or argument error,
//! 3 numerical failure (degenerate subspace, identity check out of tolerance).

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use thinmusic::diagnostics::run_identities;
use thinmusic::scene::{parse_scene_with_preset, run_scene, PRESETS};
use thinmusic::{Error, PredictorVariant, SceneConfig};

#[derive(Parser, Debug)]
#[command(
    name = "thinmusic",
    version,
    about = "MUSIC imaging of thin inclusions, cracks and small inclusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize data for a scene, image it and write the maps.
    Run(RunArgs),
    /// Check the circular-moment, Gram and MUSIC/migration identities.
    Identities {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the built-in scene presets.
    Presets,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Scene file (TOML). May be omitted when --preset is given.
    scene: Option<PathBuf>,
    /// Output directory for maps and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base preset; keys in the scene file override it.
    #[arg(long)]
    preset: Option<String>,
    /// Fixed signal-subspace dimension.
    #[arg(long)]
    signal_dim: Option<usize>,
    /// Relative singular-value threshold; drops a signal_dim set in the scene file.
    #[arg(long)]
    tau: Option<f64>,
    /// Permeability predictor weight: as-written or frame-sum.
    #[arg(long)]
    variant: Option<PredictorVariant>,
    /// Relative noise level added to the MSR matrix.
    #[arg(long)]
    noise: Option<f64>,
    /// Noise seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 2,
        Error::Io { .. } => 1,
        _ => 3,
    }
}

fn load(args: &RunArgs) -> Result<SceneConfig, Error> {
    let text = match &args.scene {
        Some(path) => fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None if args.preset.is_some() => String::new(),
        None => {
            return Err(Error::Parse {
                key: "<arguments>".into(),
                message: "give a scene file or --preset".into(),
            })
        }
    };
    let mut cfg = parse_scene_with_preset(&text, args.preset.as_deref())?;
    let arg_err = |key: &str, message: String| Error::Parse {
        key: key.into(),
        message,
    };
    if let Some(dim) = args.signal_dim {
        if dim >= cfg.directions {
            return Err(arg_err(
                "--signal-dim",
                format!("must be below {} directions", cfg.directions),
            ));
        }
        cfg.signal_dim = Some(dim);
    }
    if let Some(tau) = args.tau {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(arg_err("--tau", format!("must lie in (0, 1), got {tau}")));
        }
        cfg.tau = tau;
        cfg.signal_dim = args.signal_dim;
    }
    if let Some(variant) = args.variant {
        cfg.variant = variant;
    }
    if let Some(noise) = args.noise {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(arg_err("--noise", format!("must be non-negative, got {noise}")));
        }
        cfg.noise = noise;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = Some(out.clone());
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let cfg = load(&args)?;
    let result = run_scene(&cfg)?;
    let json = serde_json::to_string_pretty(&result.report).expect("report serializes");
    if let Some(dir) = &cfg.output.dir {
        let path = dir.join("report.json");
        fs::write(&path, format!("{json}\n")).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        info!("wrote {}", path.display());
    }
    // a closed pipe on stdout is not an error for the run itself
    let _ = writeln!(io::stdout().lock(), "{json}");
    Ok(())
}

fn identities(seed: u64) -> Result<(), Error> {
    let r = run_identities(seed)?;
    let checks = [
        ("circular moment J0", r.moment0, 1e-8),
        ("circular moment J1", r.moment1, 1e-8),
        ("gram J0", r.gram_j0, 1e-6),
        ("gram J1", r.gram_j1, 1e-6),
        ("music/migration", r.migration, 1e-8),
    ];
    let mut failed = Vec::new();
    for (name, dev, tol) in checks {
        let status = if dev <= tol { "ok" } else { "FAIL" };
        println!("{name:<20} max deviation {dev:.3e} (tol {tol:.0e}) {status}");
        if dev > tol {
            failed.push(name);
        }
    }
    println!("half-wavelength overlap |J0(pi)| = {:.6}", r.half_wavelength_overlap);
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Degenerate(format!(
            "identity checks out of tolerance: {}",
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Identities { seed } => identities(seed),
        Command::Presets => {
            for name in PRESETS {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
