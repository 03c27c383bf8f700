//! Config documents for the single-shot commands.
//!
//! Every command-line option has a field here. Flags given on the command
//! line override the `--config` file, which overrides the built-in defaults;
//! `--dump-config` prints the fully resolved document.

use std::path::Path;

use fblsec_core::experiments::{
    DesignMode, OutputMethod, ParamOverrides, ParamSet, DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED,
    SCHEMA_VERSION,
};
use fblsec_core::leakage::DEFAULT_ABS_TOL;
use fblsec_core::McMode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::report::Format;
use crate::CliError;

pub const DEFAULT_LAMBDA_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleModel {
    Approx,
    Exact,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<OutputMethod>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_mode: Option<McMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<DesignMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_model: Option<OracleModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Which fields a command reads; the rest are dropped from its resolved form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Ail,
    Optimize,
    Pareto,
    Mc,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        match cfg.schema_version {
            None | Some(SCHEMA_VERSION) => Ok(cfg),
            Some(v) => Err(CliError::Usage(format!(
                "{}: schema_version: unsupported version {v} (expected {SCHEMA_VERSION})",
                path.display()
            ))),
        }
    }

    /// Field-wise `self`, falling back to `base`.
    pub fn or(self, base: RunConfig) -> RunConfig {
        RunConfig {
            schema_version: self.schema_version.or(base.schema_version),
            params: self.params.or(base.params),
            methods: self.methods.or(base.methods),
            exact_abs_tol: self.exact_abs_tol.or(base.exact_abs_tol),
            samples: self.samples.or(base.samples),
            seed: self.seed.or(base.seed),
            mc_mode: self.mc_mode.or(base.mc_mode),
            workers: self.workers.or(base.workers),
            mode: self.mode.or(base.mode),
            oracle: self.oracle.or(base.oracle),
            oracle_model: self.oracle_model.or(base.oracle_model),
            lambda_points: self.lambda_points.or(base.lambda_points),
            format: self.format.or(base.format),
        }
    }

    /// Every field the command reads, with defaults filled in.
    pub fn resolve(self, kind: CommandKind) -> RunConfig {
        let params = ParamOverrides::full(&self.params.apply(ParamSet::default()));
        let mut out = RunConfig {
            schema_version: Some(SCHEMA_VERSION),
            params,
            format: Some(self.format.unwrap_or(Format::Kv)),
            ..RunConfig::default()
        };
        let mc = |out: &mut RunConfig| {
            out.samples = Some(self.samples.unwrap_or(DEFAULT_MC_SAMPLES));
            out.seed = Some(self.seed.unwrap_or(DEFAULT_MC_SEED));
        };
        match kind {
            CommandKind::Ail => {
                let methods = self
                    .methods
                    .clone()
                    .unwrap_or_else(|| vec![OutputMethod::Approx, OutputMethod::Exact]);
                if methods.contains(&OutputMethod::Mc) {
                    mc(&mut out);
                }
                if methods.contains(&OutputMethod::Exact) {
                    out.exact_abs_tol = Some(self.exact_abs_tol.unwrap_or(DEFAULT_ABS_TOL));
                }
                out.methods = Some(methods);
            }
            CommandKind::Optimize => {
                out.mode = Some(self.mode.unwrap_or(DesignMode::Constrained));
                let oracle = self.oracle.unwrap_or(false);
                out.oracle = Some(oracle);
                if oracle {
                    let model = self.oracle_model.unwrap_or(OracleModel::Approx);
                    out.oracle_model = Some(model);
                    if model == OracleModel::Exact {
                        out.exact_abs_tol = Some(self.exact_abs_tol.unwrap_or(DEFAULT_ABS_TOL));
                    }
                }
            }
            CommandKind::Pareto => {
                out.lambda_points = Some(self.lambda_points.unwrap_or(DEFAULT_LAMBDA_POINTS));
                out.format = None;
            }
            CommandKind::Mc => {
                mc(&mut out);
                out.mc_mode = Some(self.mc_mode.unwrap_or(McMode::Conditional));
                out.workers = self.workers;
            }
        }
        out
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Parses a command-line word with the same spelling as the config file.
pub fn parse_word<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}
