//! The `crackdsm` command line: simulate far-field data, image it, evaluate
//! the closed-form predictions, and compare or inspect the resulting maps.
//!
//! Every file-producing command also writes `<out>.manifest.json`, which
//! records the argument list and the resolved parameters; `crackdsm replay`
//! re-runs it.

pub mod files;
pub mod noise;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotic::{self, Order, Truncation};
use crate::error::{invalid, DsmError, Result};
use crate::forward::{self, AcquisitionConfig, FarFieldTensor, QuadratureSpec, DEFAULT_NODES_PER_CRACK};
use crate::imaging::{self, io as map_io, ImagingGrid, IndicatorMap};
use crate::scene::{direction, reject_hard_violations, validate_scene, Scene, Severity};

use files::{format_scene, format_tensor, parse_scene, parse_tensor, read_text, write_atomic};

#[derive(Debug, Parser)]
#[command(name = "crackdsm", version, about = "Direct sampling imaging of small cracks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Full,
    Order1,
    Order2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Single,
    If,
    Aif,
    Mif,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    S1,
    S2,
    Aif,
    Mif,
}

#[derive(Debug, Clone, clap::Args)]
pub struct WaveArgs {
    /// Single wavelength; k = 2π/λ.
    #[arg(long, conflicts_with = "lambda_range")]
    pub lambda: Option<f64>,
    /// "λ_min,λ_max,F": F wavelengths uniformly spaced in λ.
    #[arg(long)]
    pub lambda_range: Option<String>,
    /// L incident directions at angles 2πl/L, l = 1..L.
    #[arg(long, conflicts_with = "incident_deg")]
    pub n_incident: Option<usize>,
    /// Comma-separated incident angles in degrees (default 90, i.e. d = [0, 1]).
    #[arg(long, allow_hyphen_values = true)]
    pub incident_deg: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a far-field tensor file for a scene.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 30)]
        n_obs: usize,
        #[arg(long, value_enum, default_value_t = Generator::Full)]
        generator: Generator,
        #[arg(long, default_value_t = DEFAULT_NODES_PER_CRACK)]
        quad_nodes: usize,
        /// Add complex white noise at this SNR (dB).
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
        /// Seed for the noise stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate an indicator function on a tensor file; writes CSV and PGM.
    Image {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value = "-1,1,-1,1,201,201", allow_hyphen_values = true)]
        grid: String,
        /// Frequency index for single/if/aif.
        #[arg(long, default_value_t = 0)]
        freq_index: usize,
        /// Incident index for single/mif.
        #[arg(long, default_value_t = 0)]
        incident_index: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a closed-form map prediction; writes CSV and PGM.
    Predict {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value = "-1,1,-1,1,201,201", allow_hyphen_values = true)]
        grid: String,
        /// Jacobi–Anger truncation order (default ⌈z⌉ + 25 per point).
        #[arg(long)]
        series_trunc: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the max and root-mean-square difference of two map files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report grid-local maxima of a map file.
    Peaks {
        map: PathBuf,
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        floor: f64,
        #[arg(long, default_value_t = 0.2)]
        separation: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Write to this output path instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// What a run leaves behind next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub parameters: Value,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| DsmError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }
}

/// Runs one invocation; `args` excludes the program name. Text meant for
/// standard output is returned.
pub fn run<I, S>(args: I) -> Result<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(std::iter::once("crackdsm".to_string()).chain(args.iter().cloned()))
        .map_err(|e| DsmError::InvalidInput(e.to_string()))?;
    execute(cli.command, &args)
}

/// Runs an already-parsed command; `args` is recorded in manifests.
pub fn execute(command: Command, args: &[String]) -> Result<String> {
    match command {
        Command::Simulate {
            scene,
            wave,
            n_obs,
            generator,
            quad_nodes,
            snr_db,
            seed,
            out,
        } => cmd_simulate(&scene, &wave, n_obs, generator, quad_nodes, snr_db, seed, &out, args),
        Command::Image {
            tensor,
            method,
            grid,
            freq_index,
            incident_index,
            out,
        } => cmd_image(&tensor, method, &grid, freq_index, incident_index, &out, args),
        Command::Predict {
            scene,
            theorem,
            wave,
            grid,
            series_trunc,
            out,
        } => cmd_predict(&scene, theorem, &wave, &grid, series_trunc, &out, args),
        Command::Compare { a, b, out } => cmd_compare(&a, &b, out.as_deref(), args),
        Command::Peaks {
            map,
            scene,
            floor,
            separation,
            out,
        } => cmd_peaks(&map, scene.as_deref(), floor, separation, out.as_deref(), args),
        Command::Replay { manifest, out } => cmd_replay(&manifest, out.as_deref()),
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| DsmError::InvalidInput(format!("{what}: not a number: {t:?}")))
        })
        .collect()
}

/// `"xmin,xmax,ymin,ymax,nx,ny"`.
pub fn parse_grid(text: &str) -> Result<ImagingGrid> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return invalid(format!("--grid needs xmin,xmax,ymin,ymax,nx,ny, got {text:?}"));
    }
    let b = parse_list(&parts[..4].join(","), "--grid")?;
    let n = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| DsmError::InvalidInput(format!("--grid: not a point count: {t:?}")))
    };
    ImagingGrid::new(b[0], b[1], b[2], b[3], n(parts[4])?, n(parts[5])?)
}

fn wavenumbers(wave: &WaveArgs) -> Result<Vec<f64>> {
    match (&wave.lambda, &wave.lambda_range) {
        (Some(l), None) => {
            if !(*l > 0.0 && l.is_finite()) {
                return invalid(format!("--lambda must be positive, got {l}"));
            }
            Ok(vec![2.0 * PI / l])
        }
        (None, Some(r)) => {
            let parts: Vec<&str> = r.split(',').collect();
            if parts.len() != 3 {
                return invalid(format!("--lambda-range needs min,max,F, got {r:?}"));
            }
            let b = parse_list(&parts[..2].join(","), "--lambda-range")?;
            let f: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| DsmError::InvalidInput(format!("--lambda-range: bad count {:?}", parts[2])))?;
            if !(b[0] > 0.0 && b[1] > b[0]) || f < 2 {
                return invalid("--lambda-range needs 0 < min < max and F >= 2");
            }
            Ok(AcquisitionConfig::wavenumbers_from_wavelengths(b[0], b[1], f))
        }
        (None, None) => invalid("give --lambda or --lambda-range"),
        (Some(_), Some(_)) => invalid("--lambda and --lambda-range are exclusive"),
    }
}

fn incident_angles(wave: &WaveArgs) -> Result<Vec<f64>> {
    match (&wave.n_incident, &wave.incident_deg) {
        (Some(0), _) => invalid("--n-incident must be at least 1"),
        (Some(l), _) => Ok(AcquisitionConfig::uniform_incident_angles(*l)),
        (None, Some(list)) => Ok(parse_list(list, "--incident-deg")?
            .into_iter()
            .map(f64::to_radians)
            .collect()),
        (None, None) => Ok(vec![PI / 2.0]),
    }
}

fn load_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read_text(path)?, &path.display().to_string())
}

fn load_tensor(path: &Path) -> Result<FarFieldTensor> {
    parse_tensor(&read_text(path)?, &path.display().to_string())
}

fn load_map(path: &Path) -> Result<IndicatorMap> {
    let text = read_text(path)?;
    map_io::read_csv(BufReader::new(text.as_bytes()), &path.display().to_string())
}

fn grid_json(g: &ImagingGrid) -> Value {
    json!([g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny])
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn write_manifest(
    out: &Path,
    command: &str,
    args: &[String],
    inputs: &[&Path],
    outputs: &[&Path],
    parameters: Value,
) -> Result<()> {
    let m = RunManifest {
        tool: "crackdsm".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        args: args.to_vec(),
        inputs: inputs.iter().map(|p| path_string(p)).collect(),
        outputs: outputs.iter().map(|p| path_string(p)).collect(),
        parameters,
    };
    let mut text = serde_json::to_string_pretty(&m).map_err(|e| DsmError::InvalidInput(e.to_string()))?;
    text.push('\n');
    write_atomic(&RunManifest::path_for(out), text.as_bytes())
}

fn warnings_for(scene: &Scene, ks: &[f64]) -> Result<String> {
    let mut msg = String::new();
    for &k in ks {
        for v in validate_scene(scene, k)? {
            if v.severity() == Severity::Warning {
                let _ = writeln!(msg, "warning (k = {k}): {v}");
            }
        }
    }
    Ok(msg)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    scene_path: &Path,
    wave: &WaveArgs,
    n_obs: usize,
    generator: Generator,
    quad_nodes: usize,
    snr_db: Option<f64>,
    seed: u64,
    out: &Path,
    args: &[String],
) -> Result<String> {
    let scene = load_scene(scene_path)?;
    let ks = wavenumbers(wave)?;
    let config = AcquisitionConfig::new(ks.clone(), n_obs, incident_angles(wave)?)?;
    let quad = QuadratureSpec::new(quad_nodes)?;
    for &k in &ks {
        reject_hard_violations(&scene, k)?;
    }
    let report = warnings_for(&scene, &ks)?;
    let mut tensor = match generator {
        Generator::Full => forward::simulate(&scene, &config, quad)?,
        Generator::Order1 => asymptotic::simulate_asymptotic(&scene, &config, Order::First)?,
        Generator::Order2 => asymptotic::simulate_asymptotic(&scene, &config, Order::Second)?,
    };
    if let Some(snr) = snr_db {
        tensor = noise::add_noise(&tensor, snr, seed)?;
    }
    write_atomic(out, format_tensor(&tensor).as_bytes())?;
    write_manifest(
        out,
        "simulate",
        args,
        &[scene_path],
        &[out],
        json!({
            "scene": format_scene(&scene),
            "wavenumbers": ks,
            "observations": n_obs,
            "incident_angles": config.incident_angles(),
            "generator": generator,
            "quad_nodes": quad_nodes,
            "snr_db": snr_db,
            "seed": seed,
        }),
    )?;
    Ok(format!(
        "{report}wrote {} ({} x {} x {})\n",
        out.display(),
        config.frequency_count(),
        config.incident_count(),
        n_obs
    ))
}

fn pgm_path(out: &Path) -> PathBuf {
    out.with_extension("pgm")
}

fn write_map(map: &IndicatorMap, out: &Path) -> Result<PathBuf> {
    let mut csv = Vec::new();
    map_io::write_csv(map, &mut csv)?;
    write_atomic(out, &csv)?;
    let pgm = pgm_path(out);
    if pgm == out {
        return invalid("--out must not end in .pgm; the PGM is written alongside the CSV");
    }
    let mut bytes = Vec::new();
    map_io::write_pgm(map, &mut bytes)?;
    write_atomic(&pgm, &bytes)?;
    Ok(pgm)
}

fn map_summary(map: &IndicatorMap, out: &Path) -> String {
    let (p, _) = map.argmax();
    let mut s = String::new();
    if map.is_zero_map() {
        s.push_str("warning: the map is identically zero\n");
    }
    let _ = writeln!(s, "wrote {} (max at {} {})", out.display(), p[0], p[1]);
    s
}

fn cmd_image(
    tensor_path: &Path,
    method: Method,
    grid: &str,
    f: usize,
    l: usize,
    out: &Path,
    args: &[String],
) -> Result<String> {
    let tensor = load_tensor(tensor_path)?;
    let grid = parse_grid(grid)?;
    let cfg = tensor.config();
    if method == Method::Mif && cfg.frequency_count() < 2 {
        return invalid(format!(
            "method mif needs a tensor with at least 2 wavenumbers; {} has {}",
            tensor_path.display(),
            cfg.frequency_count()
        ));
    }
    let map = match method {
        Method::Single => imaging::indicator_single(&tensor, f, l, &grid)?,
        Method::If => imaging::indicator_if(&tensor, f, &grid)?,
        Method::Aif => imaging::indicator_aif(&tensor, f, &grid)?,
        Method::Mif => imaging::indicator_mif(&tensor, l, &grid)?,
    };
    let pgm = write_map(&map, out)?;
    write_manifest(
        out,
        "image",
        args,
        &[tensor_path],
        &[out, &pgm],
        json!({
            "method": method,
            "grid": grid_json(&grid),
            "freq_index": f,
            "incident_index": l,
            "wavenumbers": cfg.wavenumbers(),
            "observations": cfg.observation_count(),
            "incident_angles": cfg.incident_angles(),
        }),
    )?;
    Ok(map_summary(&map, out))
}

fn cmd_predict(
    scene_path: &Path,
    theorem: Theorem,
    wave: &WaveArgs,
    grid: &str,
    series_trunc: Option<usize>,
    out: &Path,
    args: &[String],
) -> Result<String> {
    let scene = load_scene(scene_path)?;
    let grid = parse_grid(grid)?;
    let ks = wavenumbers(wave)?;
    let angles = incident_angles(wave)?;
    let truncation = series_trunc.map_or(Truncation::Auto, Truncation::Fixed);
    let single_k = || -> Result<f64> {
        if ks.len() != 1 {
            return invalid(format!("theorem {theorem:?} needs a single --lambda"));
        }
        Ok(ks[0])
    };
    let single_angle = || -> Result<f64> {
        if angles.len() != 1 {
            return invalid(format!("theorem {theorem:?} takes one incident direction"));
        }
        Ok(angles[0])
    };
    let report = warnings_for(&scene, &ks)?;
    let map = match theorem {
        Theorem::S1 => asymptotic::predict_structure1(&scene, single_k()?, &grid)?,
        Theorem::S2 => asymptotic::predict_structure2(&scene, single_k()?, direction(single_angle()?), &grid)?,
        Theorem::Aif => asymptotic::predict_aif(&scene, single_k()?, &angles, &grid, truncation)?,
        Theorem::Mif => {
            if ks.len() < 2 {
                return invalid("theorem mif needs --lambda-range");
            }
            asymptotic::predict_mif(&scene, &ks, single_angle()?, &grid, truncation)?
        }
    };
    let pgm = write_map(&map, out)?;
    write_manifest(
        out,
        "predict",
        args,
        &[scene_path],
        &[out, &pgm],
        json!({
            "theorem": theorem,
            "scene": format_scene(&scene),
            "grid": grid_json(&grid),
            "wavenumbers": ks,
            "incident_angles": angles,
            "series_trunc": series_trunc,
        }),
    )?;
    Ok(format!("{report}{}", map_summary(&map, out)))
}

fn cmd_compare(a: &Path, b: &Path, out: Option<&Path>, args: &[String]) -> Result<String> {
    let (ma, mb) = (load_map(a)?, load_map(b)?);
    let (linf, l2) = imaging::map_distance(&ma, &mb)
        .map_err(|_| DsmError::InvalidInput(format!("{} and {} use different grids", a.display(), b.display())))?;
    let text = format!("linf {linf}\nl2 {l2}\n");
    if let Some(out) = out {
        write_atomic(out, text.as_bytes())?;
        write_manifest(out, "compare", args, &[a, b], &[out], json!({}))?;
    }
    Ok(text)
}

/// Structured text for a [`imaging::PeakReport`].
pub fn format_peaks(report: &imaging::PeakReport, floor: f64, separation: f64) -> String {
    let mut s = String::from("# crackdsm peaks v1\n");
    let _ = writeln!(s, "floor {floor}\nseparation {separation}\npeaks {}", report.peaks.len());
    for p in &report.peaks {
        let _ = writeln!(s, "peak {} {} {}", p.position[0], p.position[1], p.value);
    }
    for c in &report.cracks {
        match c.nearest {
            Some((d, v)) => {
                let _ = writeln!(s, "crack {} {} {} {} {}", c.crack, c.center[0], c.center[1], d, v);
            }
            None => {
                let _ = writeln!(s, "crack {} {} {} none", c.crack, c.center[0], c.center[1]);
            }
        }
    }
    s
}

fn cmd_peaks(
    map_path: &Path,
    scene_path: Option<&Path>,
    floor: f64,
    separation: f64,
    out: Option<&Path>,
    args: &[String],
) -> Result<String> {
    if !(0.0..=1.0).contains(&floor) {
        return invalid(format!("--floor must lie in [0, 1], got {floor}"));
    }
    let map = load_map(map_path)?;
    let mut report = imaging::find_local_maxima(&map, separation, floor)?;
    let mut inputs = vec![map_path];
    if let Some(sp) = scene_path {
        report = report.with_scene(&load_scene(sp)?);
        inputs.push(sp);
    }
    let text = format_peaks(&report, floor, separation);
    if let Some(out) = out {
        write_atomic(out, text.as_bytes())?;
        write_manifest(
            out,
            "peaks",
            args,
            &inputs,
            &[out],
            json!({"floor": floor, "separation": separation}),
        )?;
    }
    Ok(text)
}

fn cmd_replay(manifest: &Path, out: Option<&Path>) -> Result<String> {
    let m = RunManifest::read(manifest)?;
    if m.tool != "crackdsm" {
        return invalid(format!("{} is not a crackdsm manifest", manifest.display()));
    }
    let mut args = m.args.clone();
    if let Some(out) = out {
        match args.iter().position(|a| a == "--out") {
            Some(i) if i + 1 < args.len() => args[i + 1] = path_string(out),
            _ => {
                if let Some(i) = args.iter().position(|a| a.starts_with("--out=")) {
                    args[i] = format!("--out={}", path_string(out));
                } else {
                    args.push("--out".into());
                    args.push(path_string(out));
                }
            }
        }
    }
    if args.first().map(String::as_str) == Some("replay") {
        return invalid("a manifest cannot replay another replay");
    }
    run(args)
}
