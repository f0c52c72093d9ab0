//! `key = value` run configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::bifurcation::{DEFAULT_SCAN_MU_MAX, DEFAULT_TOL};
use crate::control::{ControlRegistry, ControlVariant};
use crate::dynamics::{DEFAULT_DT, DEFAULT_TRANSIENT_FRACTION, DEFAULT_T_END};
use crate::error::ModelError;
use crate::params::CardioParams;

pub const DEFAULT_SWEEP_MU_MIN: f64 = 1.0;
pub const DEFAULT_SWEEP_MU_MAX: f64 = 100.0;
pub const DEFAULT_SWEEP_STEPS: usize = 100;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config: variant is required")]
    MissingVariant,
    #[error("config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter { name, reason } => ConfigError::Invalid { key: name, reason },
            other => ConfigError::invalid("variant", other.to_string()),
        }
    }
}

/// Parsed configuration with defaults filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: CardioParams,
    pub variant: ControlVariant,
    pub mu: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub transient_fraction: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub steps: usize,
    pub mu_max_scan: f64,
    pub tol: f64,
    pub allow_unnormalized: bool,
    /// Keys and raw values as written in the file, in file order.
    pub snapshot: Vec<(String, String)>,
}

impl RunConfig {
    /// Defaults for everything, with the given control law.
    pub fn with_variant(variant: ControlVariant) -> Self {
        RunConfig {
            params: CardioParams::default(),
            variant,
            mu: None,
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            transient_fraction: DEFAULT_TRANSIENT_FRACTION,
            mu_min: DEFAULT_SWEEP_MU_MIN,
            mu_max: DEFAULT_SWEEP_MU_MAX,
            steps: DEFAULT_SWEEP_STEPS,
            mu_max_scan: DEFAULT_SCAN_MU_MAX,
            tol: DEFAULT_TOL,
            allow_unnormalized: false,
            snapshot: Vec::new(),
        }
    }
}

const SETTING_KEYS: &[&str] = &[
    "variant",
    "mu",
    "dt",
    "t_end",
    "transient_fraction",
    "mu_min",
    "mu_max",
    "steps",
    "mu_max_scan",
    "tol",
    "allow_unnormalized",
];

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let registry = ControlRegistry::builtin();
    let param_keys: Vec<&str> = CardioParams::default().fields().iter().map(|(k, _)| *k).collect();
    let law_keys = registry.all_constant_keys();

    let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut snapshot = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let known = SETTING_KEYS.contains(&key) || param_keys.contains(&key) || law_keys.contains(&key);
        if !known {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("key `{key}` has no value"),
            });
        }
        if raw.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
        snapshot.push((key.to_string(), value.to_string()));
    }

    let number = |key: &str| -> Result<Option<f64>, ConfigError> {
        raw.get(key)
            .map(|(line, v)| {
                v.parse::<f64>().map_err(|_| ConfigError::Syntax {
                    line: *line,
                    message: format!("`{key}` expects a number, got `{v}`"),
                })
            })
            .transpose()
    };

    let mut params = CardioParams::default();
    for key in &param_keys {
        if let Some(v) = number(key)? {
            let slot = match *key {
                "c_sa" => &mut params.c_sa,
                "c_pa" => &mut params.c_pa,
                "c_pv" => &mut params.c_pv,
                "c_sv" => &mut params.c_sv_base,
                "c_l" => &mut params.c_l,
                "c_r" => &mut params.c_r,
                "r_s" => &mut params.r_s_base,
                "r_p" => &mut params.r_p,
                "f" => &mut params.f_base,
                "v_o" => &mut params.v_o,
                "v_c" => &mut params.v_c,
                "v_d" => &mut params.v_d_base,
                _ => unreachable!("every parameter key has a field"),
            };
            *slot = v;
        }
    }
    params.validate()?;

    let (_, variant_name) = raw.get("variant").ok_or(ConfigError::MissingVariant)?;
    let mut constants = BTreeMap::new();
    for key in &law_keys {
        if let Some(v) = number(key)? {
            constants.insert(key.to_string(), v);
        }
    }
    let variant = registry.build(variant_name, &constants)?;

    let allow_unnormalized = match raw.get("allow_unnormalized") {
        None => false,
        Some((line, v)) => v.parse::<bool>().map_err(|_| ConfigError::Syntax {
            line: *line,
            message: format!("`allow_unnormalized` expects true or false, got `{v}`"),
        })?,
    };
    if !allow_unnormalized {
        variant.check_normalized(&params)?;
    }

    let mut cfg = RunConfig::with_variant(variant);
    cfg.params = params;
    cfg.allow_unnormalized = allow_unnormalized;
    cfg.snapshot = snapshot;

    if let Some(mu) = number("mu")? {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ConfigError::invalid("mu", format!("must be positive, got {mu}")));
        }
        cfg.mu = Some(mu);
    }
    let positive = |key: &str, slot: &mut f64| -> Result<(), ConfigError> {
        if let Some(v) = number(key)? {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(key, format!("must be positive, got {v}")));
            }
            *slot = v;
        }
        Ok(())
    };
    positive("dt", &mut cfg.dt)?;
    positive("t_end", &mut cfg.t_end)?;
    positive("mu_min", &mut cfg.mu_min)?;
    positive("mu_max", &mut cfg.mu_max)?;
    positive("mu_max_scan", &mut cfg.mu_max_scan)?;
    positive("tol", &mut cfg.tol)?;

    if let Some(v) = number("transient_fraction")? {
        if !(0.0..1.0).contains(&v) {
            return Err(ConfigError::invalid(
                "transient_fraction",
                format!("must lie in [0, 1), got {v}"),
            ));
        }
        cfg.transient_fraction = v;
    }
    if let Some((line, v)) = raw.get("steps") {
        cfg.steps = v.parse::<usize>().map_err(|_| ConfigError::Syntax {
            line: *line,
            message: format!("`steps` expects a non-negative integer, got `{v}`"),
        })?;
        if cfg.steps < 2 {
            return Err(ConfigError::invalid("steps", "a sweep needs at least 2 points"));
        }
    }
    if cfg.mu_min >= cfg.mu_max {
        return Err(ConfigError::invalid(
            "mu_max",
            format!("must exceed mu_min = {}", cfg.mu_min),
        ));
    }
    if cfg.t_end < 100.0 * cfg.dt {
        return Err(ConfigError::invalid(
            "t_end",
            format!("must be at least 100·dt = {}", 100.0 * cfg.dt),
        ));
    }
    Ok(cfg)
}
