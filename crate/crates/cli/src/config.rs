//! Parameter overrides. Precedence is defaults, then a config file, then
//! command-line flags.

use chromaharmony::HarmonyParams;
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const PARAMS_ENV: &str = "CHROMAHARMONY_PARAMS";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad config {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error(transparent)]
    Invalid(#[from] chromaharmony::HarmonyError),
}

/// Partial parameter set. Every field is optional so the same type works for
/// config files, flags and request bodies.
#[derive(Debug, Default, Clone, Copy, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[arg(long)]
    pub k_h: Option<f64>,
    #[arg(long)]
    pub k_n: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub k_c: Option<f64>,
    #[arg(long)]
    pub k_l: Option<f64>,
    #[arg(long)]
    pub hue_db_threshold: Option<f64>,
    #[arg(long)]
    pub ambiguity_db_threshold: Option<f64>,
    #[arg(long)]
    pub t_line: Option<f64>,
    #[arg(long)]
    pub maha_threshold: Option<f64>,
    #[arg(long)]
    pub min_sep: Option<f64>,
}

impl ParamOverrides {
    /// Fields set in `other` win.
    pub fn merged(self, other: ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            k_h: other.k_h.or(self.k_h),
            k_n: other.k_n.or(self.k_n),
            gamma: other.gamma.or(self.gamma),
            k_c: other.k_c.or(self.k_c),
            k_l: other.k_l.or(self.k_l),
            hue_db_threshold: other.hue_db_threshold.or(self.hue_db_threshold),
            ambiguity_db_threshold: other.ambiguity_db_threshold.or(self.ambiguity_db_threshold),
            t_line: other.t_line.or(self.t_line),
            maha_threshold: other.maha_threshold.or(self.maha_threshold),
            min_sep: other.min_sep.or(self.min_sep),
        }
    }

    pub fn apply(&self, base: HarmonyParams) -> Result<HarmonyParams, ConfigError> {
        let mut p = base;
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.k_h, self.k_h);
        set(&mut p.k_n, self.k_n);
        set(&mut p.gamma, self.gamma);
        set(&mut p.k_c, self.k_c);
        set(&mut p.k_l, self.k_l);
        set(&mut p.hue_db_threshold, self.hue_db_threshold);
        set(&mut p.ambiguity_db_threshold, self.ambiguity_db_threshold);
        set(&mut p.t_line, self.t_line);
        set(&mut p.maha_threshold, self.maha_threshold);
        set(&mut p.min_sep, self.min_sep);
        p.validate()?;
        Ok(p)
    }

    pub fn from_toml(text: &str, path: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_string(),
            source,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: shown.clone(),
            source,
        })?;
        Self::from_toml(&text, &shown)
    }
}

impl From<&HarmonyParams> for ParamOverrides {
    fn from(p: &HarmonyParams) -> Self {
        ParamOverrides {
            k_h: Some(p.k_h),
            k_n: Some(p.k_n),
            gamma: Some(p.gamma),
            k_c: Some(p.k_c),
            k_l: Some(p.k_l),
            hue_db_threshold: Some(p.hue_db_threshold),
            ambiguity_db_threshold: Some(p.ambiguity_db_threshold),
            t_line: Some(p.t_line),
            maha_threshold: Some(p.maha_threshold),
            min_sep: Some(p.min_sep),
        }
    }
}

/// Resolves the effective parameters. `config` takes priority over the
/// environment variable.
pub fn resolve_params(
    config: Option<&Path>,
    env_config: Option<&Path>,
    flags: &ParamOverrides,
) -> Result<HarmonyParams, ConfigError> {
    let file = match config.or(env_config) {
        Some(path) => ParamOverrides::from_file(path)?,
        None => ParamOverrides::default(),
    };
    file.merged(*flags).apply(HarmonyParams::default())
}
