//! `key = value` configuration files with `[section]` headers.
//!
//! ```text
//! [model]
//! a = 0.75
//! alpha = 0.5
//! n = 64
//! dt = 1e-3
//! t_final = 0.5
//! forcing = F1
//!
//! [initial]
//! theta = random_bandlimited(7, 4, 0.5)
//! d = harmonic_geodesic_d
//!
//! [diagnostics]
//! cadence = 10
//! p_list = 2, 4
//!
//! [output]
//! dir = out
//! ```
//!
//! `#` starts a comment.  Every key must be known; relative paths are
//! resolved against the directory of the configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::IoError;
use crate::dynamics::{ForcingMode, ModelParams};

/// Initial temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaPreset {
    Zero,
    GaussianVortex { amplitude: f64, width: f64 },
    RandomBandlimited { seed: u64, kmax: u32, amplitude: f64 },
    FromSnapshot(PathBuf),
}

/// Initial director.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectorPreset {
    HarmonicGeodesic,
    Constant([f64; 3]),
    RandomBandlimited { seed: u64, kmax: u32, amplitude: f64 },
    FromSnapshot(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub theta: ThetaPreset,
    pub d: DirectorPreset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams<f64>,
    pub initial: InitialSpec,
    /// Diagnostics are recorded every `cadence` steps.
    pub cadence: u64,
    pub p_list: Vec<f64>,
    pub output_dir: PathBuf,
    /// Write a snapshot every this many steps (a multiple of `cadence`); 0 writes only the initial and final states.
    pub snapshot_every: u64,
    pub seed: u64,
    /// Configuration text as read, for provenance.
    pub source: String,
}

const KEYS: &[(&str, &[&str])] = &[
    ("model", &["a", "alpha", "nu", "lambda", "gamma", "forcing", "epsilon", "dt", "t_final", "n"]),
    ("initial", &["theta", "d", "seed"]),
    ("diagnostics", &["cadence", "p_list"]),
    ("output", &["dir", "snapshot_every"]),
];

struct Entry {
    line: usize,
    value: String,
}

pub fn load_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Parses and validates configuration text; `base` anchors relative paths.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, IoError> {
    let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            if !KEYS.iter().any(|(sec, _)| *sec == name) {
                return Err(parse_err(line, name, "unknown section"));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = s.split_once('=') else {
            return Err(parse_err(line, s, "expected `key = value`"));
        };
        let key = key.trim();
        let Some(sec) = &section else {
            return Err(parse_err(line, key, "key outside of a section"));
        };
        let known = KEYS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !known.contains(&key) {
            return Err(parse_err(line, key, &format!("unknown key in [{sec}]")));
        }
        let slot = (sec.clone(), key.to_string());
        if entries.contains_key(&slot) {
            return Err(parse_err(line, key, "duplicate key"));
        }
        entries.insert(
            slot,
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }
    let cfg = Fields { entries: &entries };

    let mut params = ModelParams::new(
        cfg.required("model", "a")?,
        cfg.required("model", "alpha")?,
        cfg.required("model", "n")?,
        cfg.required("model", "dt")?,
        cfg.required("model", "t_final")?,
    );
    params.nu = cfg.optional("model", "nu")?.unwrap_or(1.0);
    params.lambda = cfg.optional("model", "lambda")?.unwrap_or(1.0);
    params.gamma = cfg.optional("model", "gamma")?.unwrap_or(1.0);
    params.epsilon = cfg.optional("model", "epsilon")?;
    if let Some(e) = cfg.get("model", "forcing") {
        params.forcing = match e.value.to_ascii_lowercase().as_str() {
            "f1" => ForcingMode::F1,
            "f2" => ForcingMode::F2,
            "none" => ForcingMode::None,
            _ => return Err(parse_err(e.line, "forcing", "expected F1, F2 or none")),
        };
    }
    params
        .validate()
        .map_err(|e| IoError::Validation(e.to_string()))?;

    let seed: u64 = cfg.optional("initial", "seed")?.unwrap_or(0);
    let theta = match cfg.get("initial", "theta") {
        None => ThetaPreset::Zero,
        Some(e) => parse_theta(e, seed, base)?,
    };
    let d = match cfg.get("initial", "d") {
        None => DirectorPreset::HarmonicGeodesic,
        Some(e) => parse_director(e, seed, base)?,
    };

    let cadence: u64 = cfg.optional("diagnostics", "cadence")?.unwrap_or(1);
    if cadence == 0 {
        return Err(IoError::Validation("cadence must be at least 1".into()));
    }
    let p_list = match cfg.get("diagnostics", "p_list") {
        None => vec![2.0],
        Some(e) => e
            .value
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| parse_err(e.line, "p_list", "expected numbers")))
            .collect::<Result<Vec<_>, _>>()?,
    };
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
        return Err(IoError::Validation(format!("p_list entry {p} must be a finite number at least 1")));
    }
    let output_dir = base.join(cfg.get("output", "dir").map(|e| e.value.as_str()).unwrap_or("."));
    let snapshot_every: u64 = cfg.optional("output", "snapshot_every")?.unwrap_or(0);
    if snapshot_every % cadence != 0 {
        return Err(IoError::Validation(format!(
            "snapshot_every = {snapshot_every} must be a multiple of cadence = {cadence}"
        )));
    }

    Ok(RunConfig {
        params,
        initial: InitialSpec { theta, d },
        cadence,
        p_list,
        output_dir,
        snapshot_every,
        seed,
        source: text.to_string(),
    })
}

fn parse_err(line: usize, key: &str, message: &str) -> IoError {
    IoError::Parse {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

struct Fields<'a> {
    entries: &'a BTreeMap<(String, String), Entry>,
}

impl Fields<'_> {
    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn optional<V: std::str::FromStr>(&self, sec: &str, key: &str) -> Result<Option<V>, IoError> {
        match self.get(sec, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| parse_err(e.line, key, &format!("cannot parse `{}`", e.value))),
        }
    }

    fn required<V: std::str::FromStr>(&self, sec: &str, key: &str) -> Result<V, IoError> {
        self.optional(sec, key)?
            .ok_or_else(|| IoError::Validation(format!("missing required key `{key}` in [{sec}]")))
    }
}

/// Splits `name(arg, …)` into the name and its arguments.
fn call(e: &Entry, key: &str) -> Result<(String, Vec<String>), IoError> {
    let v = e.value.trim();
    match v.split_once('(') {
        None => Ok((v.to_string(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| parse_err(e.line, key, "missing `)`"))?;
            let args = inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            Ok((name.trim().to_string(), args))
        }
    }
}

fn num<V: std::str::FromStr>(e: &Entry, key: &str, s: &str) -> Result<V, IoError> {
    s.parse().map_err(|_| parse_err(e.line, key, &format!("cannot parse argument `{s}`")))
}

fn random_args(e: &Entry, key: &str, args: &[String], seed: u64) -> Result<(u64, u32, f64), IoError> {
    let (seed, kmax, amp): (u64, u32, f64) = match args.len() {
        2 => (seed, num(e, key, &args[0])?, num(e, key, &args[1])?),
        3 => (num(e, key, &args[0])?, num(e, key, &args[1])?, num(e, key, &args[2])?),
        _ => return Err(parse_err(e.line, key, "random_bandlimited takes (seed, kmax, amplitude) or (kmax, amplitude)")),
    };
    if kmax == 0 || !amp.is_finite() {
        return Err(IoError::Validation(format!("random_bandlimited needs kmax >= 1 and a finite amplitude ({key})")));
    }
    Ok((seed, kmax, amp))
}

fn snapshot_path(e: &Entry, key: &str, args: &[String], base: &Path) -> Result<PathBuf, IoError> {
    let [p] = args else {
        return Err(parse_err(e.line, key, "from_snapshot takes one path"));
    };
    let path = base.join(p);
    if !path.is_file() {
        return Err(IoError::Validation(format!("snapshot `{}` does not exist", path.display())));
    }
    Ok(path)
}

fn parse_theta(e: &Entry, seed: u64, base: &Path) -> Result<ThetaPreset, IoError> {
    let (name, args) = call(e, "theta")?;
    match name.as_str() {
        "zero" if args.is_empty() => Ok(ThetaPreset::Zero),
        "gaussian_vortex_theta" => {
            let (amplitude, width) = match args.len() {
                0 => (1.0, 0.5),
                2 => (num(e, "theta", &args[0])?, num(e, "theta", &args[1])?),
                _ => return Err(parse_err(e.line, "theta", "gaussian_vortex_theta takes (amplitude, width)")),
            };
            if !(width > 0.0) {
                return Err(IoError::Validation("gaussian_vortex_theta width must be positive".into()));
            }
            Ok(ThetaPreset::GaussianVortex { amplitude, width })
        }
        "random_bandlimited" => {
            let (seed, kmax, amplitude) = random_args(e, "theta", &args, seed)?;
            Ok(ThetaPreset::RandomBandlimited { seed, kmax, amplitude })
        }
        "from_snapshot" => Ok(ThetaPreset::FromSnapshot(snapshot_path(e, "theta", &args, base)?)),
        _ => Err(parse_err(e.line, "theta", &format!("unknown preset `{name}`"))),
    }
}

fn parse_director(e: &Entry, seed: u64, base: &Path) -> Result<DirectorPreset, IoError> {
    let (name, args) = call(e, "d")?;
    match name.as_str() {
        "harmonic_geodesic_d" if args.is_empty() => Ok(DirectorPreset::HarmonicGeodesic),
        "constant" => {
            let [x, y, z] = args.as_slice() else {
                return Err(parse_err(e.line, "d", "constant takes three components"));
            };
            Ok(DirectorPreset::Constant([num(e, "d", x)?, num(e, "d", y)?, num(e, "d", z)?]))
        }
        "random_bandlimited" => {
            let (seed, kmax, amplitude) = random_args(e, "d", &args, seed)?;
            Ok(DirectorPreset::RandomBandlimited { seed, kmax, amplitude })
        }
        "from_snapshot" => Ok(DirectorPreset::FromSnapshot(snapshot_path(e, "d", &args, base)?)),
        _ => Err(parse_err(e.line, "d", &format!("unknown preset `{name}`"))),
    }
}
