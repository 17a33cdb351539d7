//! JSON surface descriptions.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use magspec::{CuspEnd, End, FunnelEnd, ModeOptions, RadialField, SurfaceEnds, WeylOptions};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub schema_version: u32,
    pub ends: Vec<EndConfig>,
    #[serde(default)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EndConfig {
    Funnel(FunnelConfig),
    Cusp(CuspConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunnelConfig {
    pub tau: f64,
    pub t0: f64,
    #[serde(default)]
    pub xi: f64,
    pub field: FieldConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuspConfig {
    #[serde(rename = "L")]
    pub l: f64,
    pub t0: f64,
    #[serde(default)]
    pub xi: f64,
    pub field: FieldConfig,
}

/// Top level as read from disk; ends are decoded one by one so that errors
/// inside an end keep their path.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    ends: Vec<serde_json::Value>,
    #[serde(default)]
    numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKindConfig {
    #[serde(rename = "cosh-poly")]
    CoshPoly,
    #[serde(rename = "y-poly")]
    YPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: FieldKindConfig,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub grid_n: usize,
    pub t_max: f64,
    pub quad_tol: f64,
    pub delta: f64,
    #[serde(rename = "bracket_C")]
    pub bracket_c: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let mode = ModeOptions::default();
        let weyl = WeylOptions::default();
        Self {
            grid_n: mode.grid_n,
            t_max: mode.t_max,
            quad_tol: weyl.quad_tol,
            delta: weyl.delta,
            bracket_c: weyl.bracket_c,
        }
    }
}

/// A checked configuration, ready for the library.
#[derive(Debug, Clone)]
pub struct Surface {
    pub ends: SurfaceEnds,
    pub mode: ModeOptions,
    pub weyl: WeylOptions,
}

impl Surface {
    pub fn end(&self, index: usize) -> Result<&End> {
        self.ends.ends().get(index).ok_or_else(|| {
            anyhow!(
                "--end: index {index} is out of range; the config has {} end(s), numbered from 0",
                self.ends.ends().len()
            )
        })
    }
}

fn core_error(prefix: &str, err: magspec::Error) -> anyhow::Error {
    match err {
        magspec::Error::InvalidParameter { name, reason } => {
            let name = if name == "coeffs" { "field.coeffs" } else { name };
            anyhow!("{prefix}{name}: {reason}")
        }
        other => anyhow!("{prefix}{other}"),
    }
}

fn with_path<'de, T, D>(prefix: &str, de: D) -> Result<T>
where
    T: Deserialize<'de>,
    D: serde::Deserializer<'de>,
    D::Error: std::fmt::Display,
{
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match (prefix.is_empty(), path.as_str()) {
            (true, ".") => anyhow!("{inner}"),
            (true, _) => anyhow!("{path}: {inner}"),
            (false, ".") => anyhow!("{prefix}: {inner}"),
            (false, _) => anyhow!("{prefix}.{path}: {inner}"),
        }
    })
}

fn parse_end(index: usize, value: serde_json::Value) -> Result<EndConfig> {
    let prefix = format!("ends[{index}]");
    let serde_json::Value::Object(mut map) = value else {
        bail!("{prefix}: expected an object");
    };
    let kind = match map.remove("type") {
        Some(serde_json::Value::String(kind)) => kind,
        Some(other) => bail!("{prefix}.type: expected \"funnel\" or \"cusp\", got {other}"),
        None => bail!("{prefix}.type: missing; expected \"funnel\" or \"cusp\""),
    };
    let body = serde_json::Value::Object(map);
    match kind.as_str() {
        "funnel" => Ok(EndConfig::Funnel(with_path(&prefix, body)?)),
        "cusp" => Ok(EndConfig::Cusp(with_path(&prefix, body)?)),
        other => bail!("{prefix}.type: unknown end type {other:?}; expected \"funnel\" or \"cusp\""),
    }
}

impl SurfaceConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawConfig = with_path("", &mut de)?;
        de.end().map_err(|e| anyhow!("{e}"))?;
        let ends = raw
            .ends
            .into_iter()
            .enumerate()
            .map(|(i, value)| parse_end(i, value))
            .collect::<Result<_>>()?;
        Ok(Self {
            schema_version: raw.schema_version,
            ends,
            numerics: raw.numerics,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("--config: cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("--config: invalid surface description in {}", path.display()))
    }

    pub fn validate(&self) -> Result<Surface> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        if self.ends.is_empty() {
            bail!("ends: at least one end is required");
        }
        let mut ends = Vec::with_capacity(self.ends.len());
        for (i, end) in self.ends.iter().enumerate() {
            let prefix = format!("ends[{i}].");
            let built: End = match end {
                EndConfig::Funnel(FunnelConfig { tau, t0, xi, field }) => {
                    if field.kind != FieldKindConfig::CoshPoly {
                        bail!("{prefix}field.kind: funnel ends take \"cosh-poly\"");
                    }
                    let f = RadialField::funnel(field.coeffs.clone()).map_err(|e| core_error(&prefix, e))?;
                    FunnelEnd::new(*tau, *t0, f, *xi)
                        .map_err(|e| core_error(&prefix, e))?
                        .into()
                }
                EndConfig::Cusp(CuspConfig { l, t0, xi, field }) => {
                    if field.kind != FieldKindConfig::YPoly {
                        bail!("{prefix}field.kind: cusp ends take \"y-poly\"");
                    }
                    let f = RadialField::cusp(field.coeffs.clone()).map_err(|e| core_error(&prefix, e))?;
                    CuspEnd::new(*l, *t0, f, *xi)
                        .map_err(|e| core_error(&prefix, e))?
                        .into()
                }
            };
            ends.push(built);
        }
        let n = &self.numerics;
        if n.grid_n < 2 {
            bail!("numerics.grid_n: must be at least 2, got {}", n.grid_n);
        }
        if !(n.t_max > 0.0 && n.t_max.is_finite()) {
            bail!("numerics.t_max: must be positive and finite, got {}", n.t_max);
        }
        let weyl = WeylOptions {
            delta: n.delta,
            bracket_c: n.bracket_c,
            quad_tol: n.quad_tol,
        };
        weyl.validate().map_err(|e| core_error("numerics.", e))?;
        let mode = ModeOptions {
            grid_n: n.grid_n,
            t_max: n.t_max,
            ..ModeOptions::default()
        };
        Ok(Surface {
            ends: SurfaceEnds::new(ends).map_err(|e| core_error("", e))?,
            mode,
            weyl,
        })
    }
}
