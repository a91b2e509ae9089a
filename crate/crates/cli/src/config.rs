//! Run configuration: TOML file, scenario defaults and command-line
//! overrides, resolved into one [`RunConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wgchain_core::model::{ChainSpec, Disorder, PhysParams, SegmentRole, SegmentSpec};

use crate::scenario::Scenario;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{file}:{line}:{col}: {msg}")]
    At {
        file: String,
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{file}: {msg}")]
    File { file: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Markovian,
    Spectral,
    #[default]
    Auto,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    pub left_mirror: Option<SegmentSection>,
    pub emitter: Option<SegmentSection>,
    pub right_mirror: Option<SegmentSection>,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub time: TimeSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub scenario: Option<String>,
    pub method: Option<Method>,
    pub scale: Option<f64>,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Edge-to-edge gap between segments, in guided wavelengths.
    pub gap: Option<f64>,
    pub free_space: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub gamma_ext: Option<f64>,
    pub v_g: Option<f64>,
    pub lambda_wg: Option<f64>,
    pub lambda_0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    pub count: usize,
    pub spacing: Option<f64>,
    /// Atoms per half guided wavelength; presence makes the segment disordered.
    pub disorder_density: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    pub n_points: Option<usize>,
    pub half_width: Option<f64>,
    pub taper: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_max: Option<f64>,
    pub t_first: Option<f64>,
    pub samples: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub method: Option<Method>,
    pub scale: Option<f64>,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Fully resolved run description; echoed into summary.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub chain: ChainSpec,
    pub params: PhysParams,
    pub method: Method,
    pub scale: f64,
    pub seed: u64,
    pub ensemble: usize,
    pub free_space: bool,
    pub spectral: SpectralSection,
    pub time: TimeSection,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Named scenario with everything else at its default.
    pub fn scenario(name: &str, scale: f64) -> Result<Self, ConfigError> {
        resolve(ConfigFile::default(), &Overrides {
            scenario: Some(name.into()),
            scale: Some(scale),
            ..Default::default()
        })
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// Line of `key` inside `[section]`, or of the section header itself.
fn locate(text: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some(k) = key {
                if line.split('=').next().map(str::trim) == Some(k) {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

pub fn parse_config(text: &str, file: &str) -> Result<ConfigFile, ConfigError> {
    toml::from_str(text).map_err(|e| match e.span() {
        Some(span) => {
            let (line, col) = line_col(text, span.start);
            ConfigError::At {
                file: file.into(),
                line,
                col,
                msg: e.message().trim().to_string(),
            }
        }
        None => ConfigError::File {
            file: file.into(),
            msg: e.message().trim().to_string(),
        },
    })
}

/// Reads, parses and resolves a config file, reporting semantic errors at
/// the offending line.
pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        file: file.clone(),
        msg: e.to_string(),
    })?;
    let parsed = parse_config(&text, &file)?;
    resolve_checked(parsed, overrides, &text, &file)
}

struct Invalid {
    section: &'static str,
    key: Option<&'static str>,
    msg: String,
}

fn check(ok: bool, section: &'static str, key: &'static str, msg: impl Into<String>) -> Result<(), Invalid> {
    if ok {
        Ok(())
    } else {
        Err(Invalid {
            section,
            key: Some(key),
            msg: msg.into(),
        })
    }
}

fn resolve_checked(
    file: ConfigFile,
    overrides: &Overrides,
    text: &str,
    name: &str,
) -> Result<RunConfig, ConfigError> {
    resolve_inner(file, overrides).map_err(|e| match locate(text, e.section, e.key) {
        Some(line) => ConfigError::At {
            file: name.into(),
            line,
            col: 1,
            msg: e.msg,
        },
        None => ConfigError::Invalid(e.msg),
    })
}

/// Resolution without a source text (command line only).
pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    resolve_inner(file, overrides).map_err(|e| match e.key {
        Some(k) => ConfigError::Invalid(format!("{}.{}: {}", e.section, k, e.msg)),
        None => ConfigError::Invalid(format!("{}: {}", e.section, e.msg)),
    })
}

fn positive(x: Option<f64>) -> bool {
    x.is_none_or(|v| v > 0.0 && v.is_finite())
}

fn resolve_inner(file: ConfigFile, ov: &Overrides) -> Result<RunConfig, Invalid> {
    let run = &file.run;
    let ph = &file.physics;
    check(positive(ph.gamma), "physics", "gamma", "must be positive")?;
    check(ph.beta.is_none_or(|b| (0.0..=1.0).contains(&b)), "physics", "beta", "must lie in [0, 1]")?;
    check(ph.gamma_ext.is_none_or(|g| g >= 0.0 && g.is_finite()), "physics", "gamma_ext", "must be non-negative")?;
    check(positive(ph.v_g), "physics", "v_g", "must be positive")?;
    check(positive(ph.lambda_wg), "physics", "lambda_wg", "must be positive")?;
    check(positive(ph.lambda_0), "physics", "lambda_0", "must be positive")?;
    let d = PhysParams::default();
    let params = PhysParams {
        gamma: ph.gamma.unwrap_or(d.gamma),
        beta: ph.beta.unwrap_or(d.beta),
        gamma_ext: ph.gamma_ext.unwrap_or(d.gamma_ext),
        v_g: ph.v_g.unwrap_or(d.v_g),
        lambda_wg: ph.lambda_wg.unwrap_or(d.lambda_wg),
        lambda_0: ph.lambda_0.unwrap_or(d.lambda_0),
    };

    let scale = ov.scale.or(run.scale).unwrap_or(1.0);
    let scale_key = if ov.scale.is_some() { None } else { Some("scale") };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Invalid {
            section: "run",
            key: scale_key,
            msg: format!("scale must be positive, got {scale}"),
        });
    }
    let seed = ov.seed.or(run.seed).unwrap_or(0);
    let ensemble = ov.ensemble.or(run.ensemble).unwrap_or(1);
    check(ensemble >= 1, "run", "ensemble", "must be at least 1")?;
    let workers = ov.workers.or(run.workers);
    check(workers != Some(0), "run", "workers", "must be at least 1")?;
    check(positive(run.gap), "run", "gap", "must be positive")?;

    let scenario_name = ov.scenario.clone().or_else(|| run.scenario.clone());
    let explicit = file.emitter.is_some() || file.left_mirror.is_some() || file.right_mirror.is_some();
    let mut chain = match &scenario_name {
        Some(name) => {
            let sc = Scenario::parse(name).ok_or_else(|| Invalid {
                section: "run",
                key: Some("scenario"),
                msg: format!("unknown scenario `{name}` (known: {})", Scenario::NAMES.join(", ")),
            })?;
            if explicit && sc != Scenario::Bare {
                return Err(Invalid {
                    section: "run",
                    key: Some("scenario"),
                    msg: "segment sections cannot be combined with a named scenario".into(),
                });
            }
            let n_bare = file.emitter.as_ref().map(|e| e.count);
            sc.chain(scale, &params, n_bare)
        }
        None => {
            let Some(_) = file.emitter else {
                return Err(Invalid {
                    section: "run",
                    key: None,
                    msg: "no scenario given and no [emitter] section".into(),
                });
            };
            let mut segments = Vec::new();
            for (sec, role, name) in [
                (&file.left_mirror, SegmentRole::LeftMirror, "left_mirror"),
                (&file.emitter, SegmentRole::Emitter, "emitter"),
                (&file.right_mirror, SegmentRole::RightMirror, "right_mirror"),
            ] {
                let Some(s) = sec else { continue };
                let err = |key, msg: &str| Invalid {
                    section: name,
                    key: Some(key),
                    msg: msg.into(),
                };
                if !positive(s.spacing) {
                    return Err(err("spacing", "must be positive"));
                }
                if !positive(s.disorder_density) {
                    return Err(err("disorder_density", "must be positive"));
                }
                if role == SegmentRole::Emitter && s.count == 0 {
                    return Err(err("count", "emitter needs at least one atom"));
                }
                let count = scaled(s.count, scale);
                segments.push(SegmentSpec {
                    role,
                    count,
                    spacing: s.spacing.unwrap_or(0.5 * params.lambda_wg),
                    disorder: s.disorder_density.map(|density| Disorder { density }),
                });
            }
            ChainSpec {
                segments,
                gap_d0: 0.5 * params.lambda_wg,
                rng_seed: 0,
            }
        }
    };
    if let Some(g) = run.gap {
        chain.gap_d0 = g;
    }
    chain.rng_seed = seed;

    let sp = file.spectral;
    check(sp.n_points.is_none_or(|n| n >= 4 && n.is_power_of_two()), "spectral", "n_points", "must be a power of two, at least 4")?;
    check(positive(sp.half_width), "spectral", "half_width", "must be positive")?;
    check(sp.taper.is_none_or(|f| (0.0..0.5).contains(&f)), "spectral", "taper", "must lie in [0, 0.5)")?;
    let tm = file.time;
    check(positive(tm.t_max), "time", "t_max", "must be positive")?;
    check(positive(tm.t_first), "time", "t_first", "must be positive")?;
    check(tm.samples.is_none_or(|n| n >= 8), "time", "samples", "must be at least 8")?;

    Ok(RunConfig {
        scenario: scenario_name,
        chain,
        params,
        method: ov.method.or(run.method).unwrap_or_default(),
        scale,
        seed,
        ensemble,
        free_space: run.free_space.unwrap_or(false),
        spectral: sp,
        time: tm,
        out: ov.out.clone().or_else(|| run.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
        workers,
    })
}

/// Segment count after scaling; a non-empty segment keeps at least one atom.
pub fn scaled(count: usize, scale: f64) -> usize {
    if count == 0 {
        0
    } else {
        ((count as f64 * scale).round() as usize).max(1)
    }
}
