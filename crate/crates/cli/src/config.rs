//! Config files, flag merging and resolved (hashable) run parameters.

use std::path::{Path, PathBuf};

use collapse_core::{preset, CslParams, DpParams, ModelParams, AMU_KG};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::{HamiltonianKind, InitialKind, MassArgs, ModelArgs, OUT_DIR_ENV};
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Every field a config file may set. Field names mirror the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema_version: Option<u32>,
    pub preset: Option<String>,
    pub lambda: Option<f64>,
    pub rc_m: Option<f64>,
    pub r0_m: Option<f64>,
    pub mass_kg: Option<f64>,
    pub mass_amu: Option<f64>,
    pub time_s: Option<f64>,
    pub separation_m: Option<f64>,
    pub steps: Option<usize>,
    pub grid_points: Option<usize>,
    pub dx_m: Option<f64>,
    pub hamiltonian: Option<HamiltonianKind>,
    pub initial: Option<InitialKind>,
    pub width_m: Option<f64>,
    pub trajectories: Option<usize>,
    pub seed: Option<u64>,
    pub stride: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub rc_min_m: Option<f64>,
    pub rc_max_m: Option<f64>,
    pub rc_points: Option<usize>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: FileConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::config(format!(
                "{}: invalid config at line {} column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        if let Some(v) = cfg.schema_version {
            if v != SCHEMA_VERSION {
                return Err(CliError::config(format!(
                    "{}: /schema_version: unsupported value {v} (expected {SCHEMA_VERSION})",
                    path.display()
                )));
            }
        }
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Paths in a config file are relative to the file.
    pub fn path(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| if p.is_relative() { self.base_dir.join(p) } else { p.clone() })
    }

    fn model_args(&self) -> ModelArgs {
        ModelArgs {
            preset: self.preset.clone(),
            lambda: self.lambda,
            rc_m: self.rc_m,
            r0_m: self.r0_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ResolvedModel {
    Csl {
        preset: Option<String>,
        lambda: f64,
        rc_m: f64,
    },
    Dp {
        preset: Option<String>,
        r0_m: f64,
    },
}

impl ResolvedModel {
    pub fn params(&self) -> ModelParams {
        match *self {
            ResolvedModel::Csl { lambda, rc_m, .. } => ModelParams::Csl(CslParams { lambda, r_c: rc_m }),
            ResolvedModel::Dp { r0_m, .. } => ModelParams::Dp(DpParams { r0: r0_m }),
        }
    }

    pub fn csl(&self) -> CliResult<CslParams> {
        match self.params() {
            ModelParams::Csl(p) => Ok(p),
            ModelParams::Dp(_) => Err(CliError::config("this prediction is defined for CSL parameters only")),
        }
    }
}

/// Flags win over the file; the model block is taken as a whole from
/// whichever source names one.
pub fn resolve_model(flags: &ModelArgs, file: &FileConfig) -> CliResult<ResolvedModel> {
    let from_file = flags.is_empty();
    let m = if from_file { file.model_args() } else { flags.clone() };
    let origin = if from_file { "config file" } else { "flags" };
    let resolved = match (&m.preset, m.lambda, m.rc_m, m.r0_m) {
        (Some(name), None, None, None) => match preset(name)?.params {
            ModelParams::Csl(p) => ResolvedModel::Csl {
                preset: Some(name.clone()),
                lambda: p.lambda,
                rc_m: p.r_c,
            },
            ModelParams::Dp(p) => ResolvedModel::Dp {
                preset: Some(name.clone()),
                r0_m: p.r0,
            },
        },
        (Some(_), ..) => {
            return Err(CliError::config(format!(
                "{origin}: preset cannot be combined with explicit model parameters"
            )))
        }
        (None, Some(lambda), Some(rc_m), None) => ResolvedModel::Csl {
            preset: None,
            lambda,
            rc_m,
        },
        (None, None, None, Some(r0_m)) => ResolvedModel::Dp { preset: None, r0_m },
        (None, Some(_), None, None) => return Err(CliError::config(format!("{origin}: lambda requires rc_m (--rc-m)"))),
        (None, None, Some(_), None) => return Err(CliError::config(format!("{origin}: rc_m requires lambda (--lambda)"))),
        (None, None, None, None) => {
            return Err(CliError::config(
                "no model given: use --preset, --lambda with --rc-m, or --r0-m",
            ))
        }
        _ => {
            return Err(CliError::config(format!(
                "{origin}: CSL (lambda, rc_m) and DP (r0_m) parameters are mutually exclusive"
            )))
        }
    };
    resolved.params().validate()?;
    Ok(resolved)
}

/// Mass in kg; exactly one of kg / amu must be given.
pub fn resolve_mass(flags: &MassArgs, file: &FileConfig) -> CliResult<f64> {
    let (kg, amu) = if flags.mass_kg.is_some() || flags.mass_amu.is_some() {
        (flags.mass_kg, flags.mass_amu)
    } else {
        (file.mass_kg, file.mass_amu)
    };
    let mass = match (kg, amu) {
        (Some(kg), None) => kg,
        (None, Some(amu)) => amu * AMU_KG,
        (Some(_), Some(_)) => return Err(CliError::config("mass given both in kg and in amu; pass exactly one")),
        (None, None) => return Err(CliError::config("mass is required: --mass-kg or --mass-amu")),
    };
    if !(mass.is_finite() && mass > 0.0) {
        return Err(CliError::config(format!("mass must be positive, got {mass} kg")));
    }
    Ok(mass)
}

/// Flag, then config file, then `$COLLAPSE_OUT_DIR`. The directory must exist.
pub fn resolve_out_dir(flag: &Option<PathBuf>, file: &FileConfig) -> CliResult<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| file.path(&file.out_dir))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| CliError::config(format!("no output directory: pass --out-dir or set {OUT_DIR_ENV}")))?;
    if !dir.is_dir() {
        return Err(CliError::config(format!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    Ok(dir)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Canonical form: compact JSON with object keys sorted.
pub fn canonical_json(value: &Value) -> String {
    serde_json::to_string(value).expect("JSON values always serialize")
}

pub fn config_hash(value: &Value) -> String {
    sha256_hex(canonical_json(value).as_bytes())
}
