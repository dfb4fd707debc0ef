use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use gradcode::{MdsPoints, Scheme, StragglerParams};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub cluster: Cluster,
    pub straggler: StragglerParams,
    pub simulate: Simulate,
    pub analyze: Analyze,
    pub gd: Gd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cluster {
    pub blocks: usize,
    pub workers: usize,
    pub load: usize,
    pub mds_points: MdsPoints,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulate {
    pub trials: usize,
    pub seed: u64,
    pub tolerance_grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// 0 uses every available core.
    pub threads: usize,
    /// Also write per-trial outcomes.
    pub trace: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyze {
    pub blocks: usize,
    pub workers: usize,
    pub load: usize,
    pub t_max: f64,
    pub t_points: usize,
    pub thresholds: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gd {
    pub samples: usize,
    pub features: usize,
    pub iterations: usize,
    /// 0 picks `1/λ̂` from a power iteration.
    pub eta: f64,
    pub noise: f64,
    pub tolerance: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub data_seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            cluster: Cluster {
                blocks: 20,
                workers: 20,
                load: 3,
                mds_points: MdsPoints::default(),
            },
            straggler: StragglerParams::default(),
            simulate: Simulate {
                trials: 10_000,
                seed: 2020,
                tolerance_grid: vec![0.0, 0.05, 0.10, 0.15],
                schemes: Scheme::ALL.to_vec(),
                threads: 0,
                trace: false,
            },
            analyze: Analyze {
                blocks: 4,
                workers: 4,
                load: 2,
                t_max: 0.5,
                t_points: 50,
                thresholds: vec![4, 3],
            },
            gd: Gd {
                samples: 200,
                features: 40,
                iterations: 50,
                eta: 0.0,
                noise: 0.1,
                tolerance: 0.05,
                scheme: Scheme::Cpgc,
                seed: 2020,
                data_seed: 1,
            },
        }
    }
}

impl Config {
    pub fn to_table(&self) -> Table {
        Table::try_from(self).expect("config serializes to a table")
    }
}

/// Section holding run metadata in a manifest; ignored when loading.
pub const RUN_SECTION: &str = "run";

fn type_name(v: &Value) -> String {
    match v {
        Value::String(_) => "string".into(),
        Value::Integer(_) => "integer".into(),
        Value::Float(_) => "float".into(),
        Value::Boolean(_) => "boolean".into(),
        Value::Datetime(_) => "datetime".into(),
        Value::Array(a) => match a.first() {
            Some(x) => format!("array of {}s", type_name(x)),
            None => "array".into(),
        },
        Value::Table(_) => "table".into(),
    }
}

/// `found` converted to the shape of `expected`, or `None` if the types
/// are incompatible. Integers are accepted where floats are expected.
fn coerce(found: &Value, expected: &Value) -> Option<Value> {
    match (found, expected) {
        (Value::Integer(i), Value::Float(_)) => Some(Value::Float(*i as f64)),
        (Value::Array(items), Value::Array(proto)) => match proto.first() {
            Some(p) => items.iter().map(|x| coerce(x, p)).collect::<Option<Vec<_>>>().map(Value::Array),
            None => Some(found.clone()),
        },
        _ if std::mem::discriminant(found) == std::mem::discriminant(expected) => Some(found.clone()),
        _ => None,
    }
}

fn checked(key: &str, found: &Value, expected: &Value) -> Result<Value> {
    coerce(found, expected).ok_or_else(|| {
        anyhow!(
            "key `{key}` has type {} (expected {})",
            type_name(found),
            type_name(expected)
        )
    })
}

/// Resolves the configuration: defaults, then the file (which must hold every
/// key of `required` sections), then `key=value` overrides in order.
pub fn resolve(file: Option<&Path>, required: &[&str], overrides: &[(String, String)]) -> Result<Config> {
    let defaults = Config::default().to_table();
    let mut merged = defaults.clone();

    if let Some(path) = file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut given: Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        given.remove(RUN_SECTION);
        for (section, body) in &given {
            let Some(Value::Table(proto)) = defaults.get(section) else {
                bail!("unknown section `[{section}]` in {}", path.display());
            };
            let Value::Table(body) = body else {
                bail!("`{section}` must be a table");
            };
            for key in body.keys() {
                if !proto.contains_key(key) {
                    bail!("unknown key `{section}.{key}` in {}", path.display());
                }
            }
        }
        for section in required {
            let Some(Value::Table(proto)) = defaults.get(*section) else {
                unreachable!("required section `{section}` has defaults");
            };
            for (key, expected) in proto {
                let found = given
                    .get(*section)
                    .and_then(|b| b.get(key))
                    .ok_or_else(|| {
                        anyhow!(
                            "missing key `{section}.{key}` in {} (expected {})",
                            path.display(),
                            type_name(expected)
                        )
                    })?;
                checked(&format!("{section}.{key}"), found, expected)?;
            }
        }
        for (section, body) in given {
            let Value::Table(body) = body else { unreachable!() };
            for (key, found) in body {
                set(&mut merged, &defaults, &format!("{section}.{key}"), &found)?;
            }
        }
    }

    for (key, raw) in overrides {
        let value = parse_value(raw);
        set(&mut merged, &defaults, key, &value)?;
    }

    Value::Table(merged)
        .try_into::<Config>()
        .map_err(|e| anyhow!("invalid configuration: {e}"))
}

fn set(merged: &mut Table, defaults: &Table, key: &str, value: &Value) -> Result<()> {
    let Some((section, field)) = key.split_once('.') else {
        bail!("override `{key}` must have the form section.key");
    };
    let expected = defaults
        .get(section)
        .and_then(|s| s.get(field))
        .ok_or_else(|| anyhow!("unknown key `{key}`"))?;
    let value = checked(key, value, expected)?;
    let Some(Value::Table(body)) = merged.get_mut(section) else { unreachable!() };
    body.insert(field.to_string(), value);
    Ok(())
}

/// A TOML literal if `raw` parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}
