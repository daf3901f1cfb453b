//! Experiment configuration: a JSON file merged with command-line flags.
//!
//! The file holds `command`, an optional `graph` descriptor, `params` keyed
//! by the snake_case flag names, `replicas`, `seed`, `output`, `format` and
//! `tol`. Flags win over the file; unknown keys anywhere are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use spider_bm::spider::GraphDescriptor;

use crate::args::{Format, TolOverride};
use crate::error::{CliError, CliResult};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON experiment file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file. Defaults to `$SPIDERBM_OUTPUT_DIR/<command>.<ext>` when
    /// that variable is set, standard output otherwise.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<TolOverride>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub graph: Option<GraphDescriptor>,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub replicas: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub tol: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Which graph fields a command takes from the `graph` descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKeys {
    None,
    NLegs,
    Lengths,
    Both,
}

/// Parameters, output and tolerances after merging.
#[derive(Debug, Clone)]
pub struct Resolved<P> {
    pub params: P,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tol: Tolerances,
}

/// Merges `flags` over the config file named in `common`.
pub fn resolve<P>(command: &str, flags: &P, common: &Common, graph: GraphKeys, tol_names: &[&'static str]) -> CliResult<Resolved<P>>
where
    P: Serialize + DeserializeOwned,
{
    let cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != command {
            return Err(CliError::Usage(format!("config is for `{c}`, not `{command}`")));
        }
    }
    let mut merged = cfg.params.clone();
    if let Some(r) = cfg.replicas {
        merged.insert("replicas".into(), r.into());
    }
    if let Some(s) = cfg.seed {
        merged.insert("seed".into(), s.into());
    }
    if let Some(g) = &cfg.graph {
        if matches!(graph, GraphKeys::NLegs | GraphKeys::Both) {
            merged.insert("n_legs".into(), g.n_legs.into());
        }
        if matches!(graph, GraphKeys::Lengths | GraphKeys::Both) {
            merged.insert("lengths".into(), serde_json::to_value(&g.lengths)?);
        }
        if graph == GraphKeys::None {
            return Err(CliError::Usage(format!("`{command}` takes no graph")));
        }
    }
    if let Value::Object(flag_map) = serde_json::to_value(flags)? {
        for (k, v) in flag_map {
            let given = match &v {
                Value::Null | Value::Bool(false) => false,
                Value::Array(a) => !a.is_empty(),
                _ => true,
            };
            if given {
                merged.insert(k, v);
            }
        }
    }
    let params = serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("parameters: {e}")))?;
    let mut tol = cfg.tol.clone();
    for t in &common.tol {
        tol.insert(t.name.clone(), t.value);
    }
    Ok(Resolved {
        params,
        output: common.output.clone().or(cfg.output),
        format: common.format.or(cfg.format).unwrap_or(Format::Csv),
        tol: Tolerances::new(tol, tol_names)?,
    })
}

/// Tolerance overrides, restricted to the names a command understands.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    pub fn new(map: BTreeMap<String, f64>, allowed: &[&'static str]) -> CliResult<Self> {
        for (k, v) in &map {
            if !allowed.contains(&k.as_str()) {
                let known = if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") };
                return Err(CliError::Usage(format!("unknown tolerance `{k}` (accepted: {known})")));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(CliError::Usage(format!("tolerance `{k}` must be finite and > 0")));
            }
        }
        Ok(Tolerances(map))
    }

    pub fn get(&self, name: &str, default: f64) -> f64 {
        self.0.get(name).copied().unwrap_or(default)
    }
}

/// Fails with a usage error naming the missing flag.
pub fn required<T: Clone>(v: &Option<T>, flag: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct P {
        n_legs: Option<usize>,
        t: Vec<f64>,
        seed: Option<u64>,
        quick: bool,
    }

    fn write_config(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn flags_override_the_file() {
        let f = write_config(r#"{"command": "x", "graph": {"n_legs": 4, "lengths": ["inf", "inf", "inf", "inf"]}, "params": {"t": [1.0, 2.0]}, "seed": 7, "tol": {"quad": 1e-9}}"#);
        let common = Common {
            config: Some(f.path().to_path_buf()),
            ..Common::default()
        };
        let flags = P {
            n_legs: Some(3),
            ..P::default()
        };
        let r = resolve("x", &flags, &common, GraphKeys::NLegs, &["quad"]).unwrap();
        assert_eq!(r.params.n_legs, Some(3));
        assert_eq!(r.params.t, vec![1.0, 2.0]);
        assert_eq!(r.params.seed, Some(7));
        assert!(!r.params.quick);
        assert_eq!(r.tol.get("quad", 1.0), 1e-9);
        assert_eq!(r.format, Format::Csv);
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let common = |f: &tempfile::NamedTempFile| Common {
            config: Some(f.path().to_path_buf()),
            ..Common::default()
        };
        for text in [
            r#"{"params": {"bogus": 1}}"#,
            r#"{"extra": 1}"#,
            r#"{"command": "other"}"#,
            r#"{"tol": {"nope": 1e-3}}"#,
            r#"{"replicas": 5}"#,
            "not json",
        ] {
            let f = write_config(text);
            let e = resolve("x", &P::default(), &common(&f), GraphKeys::NLegs, &["quad"]).unwrap_err();
            assert!(matches!(e, CliError::Usage(_)), "{text}");
        }
    }
}
