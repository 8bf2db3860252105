//! `key = value` settings files. Blank lines and `#` comments are ignored;
//! command-line flags take precedence over file values.

use std::path::PathBuf;

use photosub::sweep::{AcceptedMeasurement, LambdaGrid};

use crate::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub cp: Option<f64>,
    pub cs: Option<f64>,
    pub cm: Option<f64>,
    pub grid: Option<LambdaGrid>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub accepted_meas: Option<AcceptedMeasurement>,
    pub diagnostics: Option<bool>,
    pub compact: Option<bool>,
}

impl Settings {
    /// Fills every field unset in `self` from `base`.
    pub fn or(self, base: Settings) -> Settings {
        Settings {
            eta: self.eta.or(base.eta),
            epsilon: self.epsilon.or(base.epsilon),
            cp: self.cp.or(base.cp),
            cs: self.cs.or(base.cs),
            cm: self.cm.or(base.cm),
            grid: self.grid.or(base.grid),
            out: self.out.or(base.out),
            seed: self.seed.or(base.seed),
            trials: self.trials.or(base.trials),
            accepted_meas: self.accepted_meas.or(base.accepted_meas),
            diagnostics: self.diagnostics.or(base.diagnostics),
            compact: self.compact.or(base.compact),
        }
    }
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {msg}"))
}

fn number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| bad(line, format!("invalid value '{v}' for {key}")))
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(line, format!("invalid boolean '{v}' for {key}"))),
    }
}

pub fn parse(text: &str) -> Result<Settings> {
    let mut s = Settings::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| bad(line, format!("expected key = value, got '{content}'")))?;
        let (key, v) = (key.trim(), value.trim());
        match key {
            "eta" => s.eta = Some(number(line, key, v)?),
            "epsilon" => s.epsilon = Some(number(line, key, v)?),
            "cp" => s.cp = Some(number(line, key, v)?),
            "cs" => s.cs = Some(number(line, key, v)?),
            "cm" => s.cm = Some(number(line, key, v)?),
            "grid" => s.grid = Some(v.parse().map_err(|e| bad(line, e))?),
            "out" => s.out = Some(PathBuf::from(v)),
            "seed" => s.seed = Some(number(line, key, v)?),
            "trials" => s.trials = Some(number(line, key, v)?),
            "accepted-meas" | "accepted_meas" => {
                s.accepted_meas = Some(v.parse().map_err(|e| bad(line, e))?)
            }
            "diagnostics" => s.diagnostics = Some(boolean(line, key, v)?),
            "compact" => s.compact = Some(boolean(line, key, v)?),
            _ => return Err(bad(line, format!("unknown key '{key}'"))),
        }
    }
    Ok(s)
}
