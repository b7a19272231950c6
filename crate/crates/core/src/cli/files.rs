//! Text formats for scenes and far-field tensors, and atomic file output.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! reading a file and writing it again reproduces it byte for byte.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{DsmError, Result};
use crate::forward::{AcquisitionConfig, FarFieldTensor};
use crate::scene::{Crack, Scene};

const SCENE_MAGIC: &str = "# crackdsm scene v1";
const TENSOR_MAGIC: &str = "# crackdsm far-field tensor v1";

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| DsmError::InvalidInput(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| {
        DsmError::Io(std::io::Error::new(
            e.kind(),
            format!("cannot write {}: {e}", path.display()),
        ))
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        DsmError::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read {}: {e}", path.display()),
        ))
    })
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> DsmError {
    DsmError::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

fn numbers(source: &str, line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| parse_err(source, line, format!("not a number: {t:?}")))
        })
        .collect()
}

/// One crack per line: `center_x center_y half_length rotation_radians`.
/// Lines starting with `#` and blank lines are ignored.
pub fn parse_scene(text: &str, source: &str) -> Result<Scene> {
    let mut cracks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = numbers(source, i + 1, line)?;
        if v.len() != 4 {
            return Err(parse_err(
                source,
                i + 1,
                format!("expected 4 columns (center_x center_y half_length rotation), found {}", v.len()),
            ));
        }
        let crack = Crack::new([v[0], v[1]], v[2], v[3]).map_err(|e| parse_err(source, i + 1, e.to_string()))?;
        cracks.push(crack);
    }
    Scene::new(cracks).map_err(|e| parse_err(source, 0, e.to_string()))
}

pub fn format_scene(scene: &Scene) -> String {
    let mut s = format!("{SCENE_MAGIC}\n# center_x center_y half_length rotation_radians\n");
    for c in &scene.cracks {
        s.push_str(&format!(
            "{} {} {} {}\n",
            c.center[0], c.center[1], c.half_length, c.rotation
        ));
    }
    s
}

pub fn format_tensor(t: &FarFieldTensor) -> String {
    let c = t.config();
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = String::with_capacity(64 * t.values().len() + 256);
    s.push_str(TENSOR_MAGIC);
    s.push('\n');
    s.push_str(&format!("frequencies {}\n", c.frequency_count()));
    s.push_str(&format!("incident {}\n", c.incident_count()));
    s.push_str(&format!("observations {}\n", c.observation_count()));
    s.push_str(&format!("wavenumbers {}\n", join(c.wavenumbers())));
    s.push_str(&format!("incident_angles {}\n", join(c.incident_angles())));
    s.push_str("# f l n re im\n");
    for f in 0..c.frequency_count() {
        for l in 0..c.incident_count() {
            for (n, v) in t.row(f, l).iter().enumerate() {
                s.push_str(&format!("{f} {l} {n} {} {}\n", v.re, v.im));
            }
        }
    }
    s
}

pub fn parse_tensor(text: &str, source: &str) -> Result<FarFieldTensor> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == TENSOR_MAGIC => {}
        _ => return Err(parse_err(source, 1, "not a far-field tensor file")),
    }
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| parse_err(source, 0, format!("missing {key} line")))?;
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| parse_err(source, i + 1, format!("expected {key}")))?;
        Ok((i + 1, rest.trim().to_string()))
    };
    let count = |(line, v): (usize, String)| {
        v.parse::<usize>()
            .map_err(|_| parse_err(source, line, format!("not a count: {v:?}")))
    };
    let f_count = count(header("frequencies")?)?;
    let l_count = count(header("incident")?)?;
    let n_count = count(header("observations")?)?;
    let (kl, ks) = header("wavenumbers")?;
    let ks = numbers(source, kl, &ks)?;
    let (al, angles) = header("incident_angles")?;
    let angles = numbers(source, al, &angles)?;
    if ks.len() != f_count || angles.len() != l_count {
        return Err(parse_err(source, kl, "header counts disagree with the listed values"));
    }
    let config = AcquisitionConfig::new(ks, n_count, angles).map_err(|e| parse_err(source, kl, e.to_string()))?;
    let mut values = Vec::with_capacity(f_count * l_count * n_count);
    let mut expected = (0usize, 0usize, 0usize);
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_err(source, i + 1, "expected `f l n re im`"));
        }
        let idx: Vec<usize> = fields[..3]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(source, i + 1, format!("bad index {t:?}"))))
            .collect::<Result<_>>()?;
        if (idx[0], idx[1], idx[2]) != expected {
            return Err(parse_err(
                source,
                i + 1,
                format!("expected entry {:?}, found {:?}", expected, (idx[0], idx[1], idx[2])),
            ));
        }
        let re_im = numbers(source, i + 1, &fields[3..].join(" "))?;
        values.push(Complex64::new(re_im[0], re_im[1]));
        expected.2 += 1;
        if expected.2 == n_count {
            expected.2 = 0;
            expected.1 += 1;
            if expected.1 == l_count {
                expected.1 = 0;
                expected.0 += 1;
            }
        }
    }
    FarFieldTensor::from_values(config, values).map_err(|e| parse_err(source, 0, e.to_string()))
}
