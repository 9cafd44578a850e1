//! Configuration resolution: command-line flags override the optional JSON
//! config file, which overrides built-in defaults. The fully resolved
//! configuration is echoed to `config.json` in every run directory so any
//! artifact can be reproduced from its own record.

use std::path::Path;

use serde::{Deserialize, Serialize};

use scaledrive_core::{Error, Result};

/// Optional values accepted in a `--config` JSON file. Keys mirror the flag
/// spellings (`omegaF`, `gammaF`, `tF`) with underscores for multi-word
/// flags (`grid_points`, `box_length`, `output_stride`, `tF_list`).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub omega0: Option<f64>,
    #[serde(rename = "omegaF")]
    pub omega_f: Option<f64>,
    #[serde(rename = "gammaF")]
    pub gamma_f: Option<f64>,
    #[serde(rename = "tF")]
    pub t_final: Option<f64>,
    #[serde(rename = "tF_list")]
    pub t_final_list: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub dim: Option<u32>,
    pub alpha: Option<f64>,
    pub g0: Option<f64>,
    pub regime: Option<String>,
    pub drive: Option<String>,
    pub grid_points: Option<usize>,
    pub box_length: Option<f64>,
    pub dt: Option<f64>,
    pub output_stride: Option<usize>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    /// Load a config file, or the empty default when no path was given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            std::io::Error::new(e.kind(), format!("config file {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            Error::InvalidParameter(format!("config file {}: {e}", path.display()))
        })
    }
}

/// Flag value, then config-file value, then default.
pub fn resolve<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// The resolved frequency endpoints: exactly one of `omegaF` / `gammaF` may
/// be specified per source; they are linked by gammaF = sqrt(omega0/omegaF).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedRamp {
    pub omega0: f64,
    #[serde(rename = "omegaF")]
    pub omega_f: f64,
    #[serde(rename = "gammaF")]
    pub gamma_f: f64,
    #[serde(rename = "tF")]
    pub t_final: f64,
}

/// Default target scaling factor when neither endpoint flag is given.
pub const DEFAULT_GAMMA_F: f64 = 2.0;
/// Default expansion duration (1/omega0).
pub const DEFAULT_T_FINAL: f64 = 5.0;

pub fn resolve_ramp(
    omega0_flag: Option<f64>,
    omega_f_flag: Option<f64>,
    gamma_f_flag: Option<f64>,
    t_final_flag: Option<f64>,
    file: &FileConfig,
) -> Result<ResolvedRamp> {
    let omega0 = resolve(omega0_flag, file.omega0, 1.0);
    if !(omega0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "omega0 must be positive, got {omega0}"
        )));
    }
    // Flags win as a pair: a flag-level endpoint suppresses both file-level
    // endpoints, otherwise a file gammaF could fight a flag omegaF.
    let (omega_f, gamma_f) = match (omega_f_flag, gamma_f_flag) {
        (Some(omega_f), None) => (Some(omega_f), None),
        (None, Some(gamma_f)) => (None, Some(gamma_f)),
        (None, None) => {
            if file.omega_f.is_some() && file.gamma_f.is_some() {
                return Err(Error::InvalidParameter(
                    "config file sets both omegaF and gammaF; they are mutually exclusive"
                        .into(),
                ));
            }
            (file.omega_f, file.gamma_f)
        }
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let (omega_f, gamma_f) = match (omega_f, gamma_f) {
        (Some(omega_f), _) => {
            if !(omega_f > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "omegaF must be positive, got {omega_f}"
                )));
            }
            (omega_f, (omega0 / omega_f).sqrt())
        }
        (None, gamma_f) => {
            let gamma_f = gamma_f.unwrap_or(DEFAULT_GAMMA_F);
            if !(gamma_f > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "gammaF must be positive, got {gamma_f}"
                )));
            }
            (omega0 / (gamma_f * gamma_f), gamma_f)
        }
    };
    let t_final = resolve(t_final_flag, file.t_final, DEFAULT_T_FINAL);
    Ok(ResolvedRamp {
        omega0,
        omega_f,
        gamma_f,
        t_final,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let file = FileConfig {
            t_final: Some(2.0),
            samples: Some(501),
            ..FileConfig::default()
        };
        assert_eq!(resolve(Some(1.0), file.t_final, 5.0), 1.0);
        assert_eq!(resolve(None, file.t_final, 5.0), 2.0);
        assert_eq!(resolve(None::<usize>, None, 7), 7);
    }

    #[test]
    fn ramp_resolution_links_endpoints() {
        let file = FileConfig::default();
        let r = resolve_ramp(None, None, None, None, &file).unwrap();
        assert_eq!(r.gamma_f, 2.0);
        assert_eq!(r.omega_f, 0.25);
        let r = resolve_ramp(None, Some(0.0625), None, None, &file).unwrap();
        assert_eq!(r.gamma_f, 4.0);
        let bad = FileConfig {
            omega_f: Some(0.25),
            gamma_f: Some(2.0),
            ..FileConfig::default()
        };
        assert!(resolve_ramp(None, None, None, None, &bad).is_err());
        // A flag endpoint suppresses the conflicting file pair.
        assert!(resolve_ramp(None, None, Some(3.0), None, &bad).is_ok());
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let parsed: std::result::Result<FileConfig, _> =
            serde_json::from_str(r#"{"omega_final": 1.0}"#);
        assert!(parsed.is_err());
    }
}
