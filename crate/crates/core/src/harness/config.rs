use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessError;
use crate::aprr::AprrConfig;
use crate::cpdr::CpdrConfig;
use crate::distributions::RangeDistribution;
use crate::oned::FrontOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cpdr,
    Aprr,
    OnedP1,
    OnedThinned,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cpdr => "cpdr",
            ModelKind::Aprr => "aprr",
            ModelKind::OnedP1 => "oned_p1",
            ModelKind::OnedThinned => "oned_thinned",
        }
    }
}

/// One swept parameter. `param` is a dotted path into `params`, e.g.
/// `"lambda"` or `"dist.beta"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

/// Rows `(i, exp(-beta H_i))` for `i = 1..=max_i`, written to `cutting.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuttingTable {
    pub beta: f64,
    pub max_i: u64,
}

/// One experiment, read from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub runs: u64,
    pub master_seed: u64,
    /// Model parameters; the schema depends on `model`.
    pub params: Value,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the `wall_ms` column. Off by default because timings make
    /// `runs.csv` depend on the machine.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub cutting_table: Option<CuttingTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnedP1Params {
    pub dist: RangeDistribution,
    #[serde(flatten)]
    pub options: FrontOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnedThinnedParams {
    pub p: f64,
    pub dist: RangeDistribution,
    #[serde(flatten)]
    pub options: FrontOptions,
}

/// Typed, validated parameters for one sweep value.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Cpdr(CpdrConfig),
    Aprr(AprrConfig),
    OnedP1(OnedP1Params),
    OnedThinned(OnedThinnedParams),
}

fn invalid(msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::InvalidConfig(msg.to_string())
}

fn typed<T: DeserializeOwned>(v: Value) -> Result<T, HarnessError> {
    serde_json::from_value(v).map_err(invalid)
}

/// Integral values become JSON integers so they fit integer fields.
fn json_number(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        if x >= 0.0 {
            Value::from(x as u64)
        } else {
            Value::from(x as i64)
        }
    } else {
        Value::from(x)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(invalid)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs == 0 {
            return Err(invalid("runs must be at least 1"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(invalid("sweep values must be nonempty"));
            }
            if s.param.is_empty() {
                return Err(invalid("sweep param must be named"));
            }
        }
        if let Some(t) = &self.cutting_table {
            if t.beta.is_nan() || t.beta <= 0.0 || t.max_i == 0 {
                return Err(invalid("cutting_table needs beta > 0 and max_i >= 1"));
            }
        }
        for v in self.sweep_values() {
            self.resolve(v)?;
        }
        Ok(())
    }

    /// The sweep values, or a single `None` when nothing is swept.
    pub fn sweep_values(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    pub fn sweep_param(&self) -> &str {
        self.sweep.as_ref().map_or("", |s| s.param.as_str())
    }

    /// Parameters with the sweep value (if any) substituted, typed and validated.
    pub fn resolve(&self, sweep_value: Option<f64>) -> Result<ModelParams, HarnessError> {
        let mut params = self.params.clone();
        if let (Some(s), Some(v)) = (&self.sweep, sweep_value) {
            let mut slot = &mut params;
            for key in s.param.split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|o| o.get_mut(key))
                    .ok_or_else(|| invalid(format!("sweep param `{}` not found in params", s.param)))?;
            }
            *slot = json_number(v);
        }
        let resolved = match self.model {
            ModelKind::Cpdr => {
                let c: CpdrConfig = typed(params)?;
                c.validate().map_err(invalid)?;
                ModelParams::Cpdr(c)
            }
            ModelKind::Aprr => {
                let mut c: AprrConfig = typed(params)?;
                c.runs = self.runs;
                c.validate().map_err(invalid)?;
                ModelParams::Aprr(c)
            }
            ModelKind::OnedP1 => {
                let c: OnedP1Params = typed(params)?;
                if c.options.step_cap == 0 {
                    return Err(invalid("step_cap must be at least 1"));
                }
                ModelParams::OnedP1(c)
            }
            ModelKind::OnedThinned => {
                let c: OnedThinnedParams = typed(params)?;
                if !(c.p > 0.0 && c.p <= 1.0) {
                    return Err(invalid(format!("p must lie in (0, 1], got {}", c.p)));
                }
                if c.options.step_cap == 0 {
                    return Err(invalid("step_cap must be at least 1"));
                }
                ModelParams::OnedThinned(c)
            }
        };
        Ok(resolved)
    }
}

/// Inputs for the `bounds` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub dist: RangeDistribution,
    pub dimension: u32,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub block_sizes: Vec<u64>,
}

impl BoundsConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: BoundsConfig = serde_json::from_str(text).map_err(invalid)?;
        if cfg.dimension == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if cfg.lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return Err(invalid("lambdas must be nonnegative"));
        }
        if cfg.block_sizes.contains(&0) {
            return Err(invalid("block sizes must be positive"));
        }
        Ok(cfg)
    }
}
