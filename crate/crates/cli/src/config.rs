//! Experiment configuration files.
//!
//! ```text
//! # comments and blank lines are ignored
//! n = 8
//! m = 4
//! sweep_variable = sigma_u
//! sweep_values = 0.3, 0.6, 1.0, 1.2, 1.5
//! T_values = 250, 500, 1000
//! ```
//!
//! Keys are the [`ExperimentConfig`] field names. Missing keys keep their
//! defaults; `rhok` defaults to `1/m`. Unknown or repeated keys are errors.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use bilinear_sysid::experiment::{ExperimentConfig, SweepVariable};

use crate::{parse_error, Result};

pub const KEYS: [&str; 11] = [
    "n",
    "m",
    "rho0",
    "rhok",
    "sweep_variable",
    "sweep_values",
    "fixed_sigma",
    "T_values",
    "repetitions",
    "base_seed",
    "delta",
];

fn scalar<T: FromStr>(path: &str, line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| parse_error(path, line, format!("bad value {value:?} for {key}")))
}

fn list<T: FromStr>(path: &str, line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|item| scalar(path, line, key, item.trim()))
        .collect()
}

/// Parse configuration text. `path` only labels error messages.
pub fn parse_config(text: &str, path: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut rhok = None;
    let mut seen: Vec<&str> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(path, line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(parse_error(path, line, format!("unknown key {key:?}")));
        };
        if seen.contains(&known) {
            return Err(parse_error(path, line, format!("duplicate key {key:?}")));
        }
        seen.push(known);

        match known {
            "n" => cfg.n = scalar(path, line, key, value)?,
            "m" => cfg.m = scalar(path, line, key, value)?,
            "rho0" => cfg.rho0 = scalar(path, line, key, value)?,
            "rhok" => rhok = Some(scalar(path, line, key, value)?),
            "sweep_variable" => {
                cfg.sweep_variable = SweepVariable::parse(value).ok_or_else(|| {
                    parse_error(path, line, "sweep_variable must be sigma_u or sigma_w")
                })?
            }
            "sweep_values" => cfg.sweep_values = list(path, line, key, value)?,
            "fixed_sigma" => cfg.fixed_sigma = scalar(path, line, key, value)?,
            "T_values" => cfg.t_values = list(path, line, key, value)?,
            "repetitions" => cfg.repetitions = scalar(path, line, key, value)?,
            "base_seed" => cfg.base_seed = scalar(path, line, key, value)?,
            "delta" => cfg.delta = scalar(path, line, key, value)?,
            _ => unreachable!(),
        }
    }
    cfg.rhok = rhok.unwrap_or(1.0 / cfg.m.max(1) as f64);
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

/// Render a configuration that [`parse_config`] reads back unchanged.
pub fn format_config(cfg: &ExperimentConfig) -> String {
    let join = |items: Vec<String>| items.join(", ");
    let mut out = String::new();
    let _ = writeln!(out, "n = {}", cfg.n);
    let _ = writeln!(out, "m = {}", cfg.m);
    let _ = writeln!(out, "rho0 = {:?}", cfg.rho0);
    let _ = writeln!(out, "rhok = {:?}", cfg.rhok);
    let _ = writeln!(out, "sweep_variable = {}", cfg.sweep_variable.name());
    let _ = writeln!(
        out,
        "sweep_values = {}",
        join(cfg.sweep_values.iter().map(|v| format!("{v:?}")).collect())
    );
    let _ = writeln!(out, "fixed_sigma = {:?}", cfg.fixed_sigma);
    let _ = writeln!(
        out,
        "T_values = {}",
        join(cfg.t_values.iter().map(|t| t.to_string()).collect())
    );
    let _ = writeln!(out, "repetitions = {}", cfg.repetitions);
    let _ = writeln!(out, "base_seed = {}", cfg.base_seed);
    let _ = writeln!(out, "delta = {:?}", cfg.delta);
    out
}
