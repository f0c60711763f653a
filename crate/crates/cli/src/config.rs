//! Scenario configuration: defaults, line-oriented `key = value` config
//! files, CLI overrides, and model-aware validation.
//!
//! Config keys are the long flag names with '-' replaced by '_'
//! (e.g. `--omega-d` <-> `omega_d`). Unknown keys are hard errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adiab_core::angular_from_hz;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Lz,
    Deutsch,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "lz" => Ok(Model::Lz),
            "deutsch" => Ok(Model::Deutsch),
            other => Err(ConfigError(format!("unknown model '{other}' (expected lz|deutsch)"))),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Tomography settings; present only when the protocol is enabled.
#[derive(Debug, Clone, Copy)]
pub struct TomoSettings {
    pub shots: usize,
    pub repeats: usize,
    pub readout_error: f64,
}

impl Default for TomoSettings {
    fn default() -> Self {
        Self { shots: 2000, repeats: 10, readout_error: 0.006 }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub model: Model,
    // Oscillating Landau-Zener parameters (rad/s).
    pub omega0: f64,
    pub omegax: f64,
    pub omega: f64,
    // Deutsch parameters.
    pub omega_d: f64,
    pub f0: u8,
    pub f1: u8,
    pub tau: f64,
    // Shared.
    pub gamma: f64,
    pub samples: usize,
    pub tmax: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub tomo: Option<TomoSettings>,
    // Command-specific.
    pub pairs: Vec<(usize, usize)>,
    pub taus: Vec<f64>,
    pub gammas: Vec<f64>,
    pub window_threshold: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let omega0 = angular_from_hz(1.0e6);
        Self {
            model: Model::Lz,
            omega0,
            omegax: angular_from_hz(2.0e4),
            omega: omega0,
            omega_d: angular_from_hz(1.0e4),
            f0: 0,
            f1: 1,
            tau: 1.0e-3,
            gamma: 1256.0,
            samples: 1501,
            tmax: None,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            seed: 0,
            out: None,
            tomo: None,
            pairs: vec![(2, 1), (3, 1)],
            taus: Vec::new(),
            gammas: Vec::new(),
            window_threshold: 0.95,
        }
    }
}

impl ScenarioConfig {
    /// Evolution horizon: explicit tmax, else tau for the Deutsch model and
    /// 3 ms for the Landau-Zener one.
    pub fn horizon(&self) -> f64 {
        self.tmax.unwrap_or(match self.model {
            Model::Lz => 3.0e-3,
            Model::Deutsch => self.tau,
        })
    }

    /// Apply `key = value` entries from a config file (before CLI overrides);
    /// returns the keys that were set.
    pub fn apply_file(&mut self, path: &Path) -> Result<Vec<String>, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let entries = parse_key_values(&text)?;
        let mut touched = Vec::with_capacity(entries.len());
        for (key, value) in entries {
            self.apply_entry(&key, &value)?;
            touched.push(key);
        }
        Ok(touched)
    }

    pub fn apply_entry(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |what: &str| ConfigError(format!("invalid {what} value '{value}' for key {key}"));
        match key {
            "model" => self.model = Model::parse(value)?,
            "omega0" => self.omega0 = parse_f64(value).ok_or_else(|| bad("float"))?,
            "omegax" => self.omegax = parse_f64(value).ok_or_else(|| bad("float"))?,
            "omega" => self.omega = parse_f64(value).ok_or_else(|| bad("float"))?,
            "omega_d" => self.omega_d = parse_f64(value).ok_or_else(|| bad("float"))?,
            "f0" => self.f0 = parse_bit(value).ok_or_else(|| bad("bit"))?,
            "f1" => self.f1 = parse_bit(value).ok_or_else(|| bad("bit"))?,
            "tau" => self.tau = parse_f64(value).ok_or_else(|| bad("float"))?,
            "gamma" => self.gamma = parse_f64(value).ok_or_else(|| bad("float"))?,
            "samples" => {
                self.samples = value.parse().map_err(|_| bad("positive integer"))?;
            }
            "tmax" => self.tmax = Some(parse_f64(value).ok_or_else(|| bad("float"))?),
            "rel_tol" => self.rel_tol = parse_f64(value).ok_or_else(|| bad("float"))?,
            "abs_tol" => self.abs_tol = parse_f64(value).ok_or_else(|| bad("float"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("u64"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "shots" => self.tomo_mut().shots = value.parse().map_err(|_| bad("count"))?,
            "repeats" => self.tomo_mut().repeats = value.parse().map_err(|_| bad("count"))?,
            "readout_error" => {
                self.tomo_mut().readout_error = parse_f64(value).ok_or_else(|| bad("float"))?
            }
            "pairs" => self.pairs = parse_pairs(value)?,
            "taus" => self.taus = parse_float_list(value).ok_or_else(|| bad("float list"))?,
            "gammas" => self.gammas = parse_float_list(value).ok_or_else(|| bad("float list"))?,
            "window_threshold" => {
                self.window_threshold = parse_f64(value).ok_or_else(|| bad("float"))?
            }
            other => return Err(ConfigError(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn tomo_mut(&mut self) -> &mut TomoSettings {
        self.tomo.get_or_insert_with(TomoSettings::default)
    }

    /// Model-aware validation: keys belonging to the other model must not
    /// have been touched, and basic ranges hold.
    pub fn validate(&self, touched: &[String]) -> Result<(), ConfigError> {
        let lz_only = ["omega0", "omegax", "omega"];
        let deutsch_only = ["omega_d", "f0", "f1", "tau"];
        let foreign: Vec<&str> = match self.model {
            Model::Lz => deutsch_only.iter(),
            Model::Deutsch => lz_only.iter(),
        }
        .copied()
        .filter(|k| touched.iter().any(|t| t == k))
        .collect();
        if !foreign.is_empty() {
            return Err(ConfigError(format!(
                "keys {foreign:?} do not apply to model {:?}",
                self.model
            )));
        }
        if self.samples < 2 {
            return Err(ConfigError("samples must be at least 2".into()));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(ConfigError("tolerances must be positive".into()));
        }
        if self.gamma < 0.0 {
            return Err(ConfigError("gamma must be nonnegative".into()));
        }
        if let Some(t) = self.tmax {
            if !(t > 0.0) {
                return Err(ConfigError("tmax must be positive".into()));
            }
        }
        if self.model == Model::Deutsch && !(self.tau > 0.0) {
            return Err(ConfigError("tau must be positive".into()));
        }
        if let Some(tomo) = &self.tomo {
            if tomo.shots == 0 || tomo.repeats == 0 {
                return Err(ConfigError("shots and repeats must be >= 1".into()));
            }
            if !(0.0..=0.5).contains(&tomo.readout_error) {
                return Err(ConfigError("readout_error must lie in [0, 0.5]".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.window_threshold) {
            return Err(ConfigError("window_threshold must lie in [0, 1]".into()));
        }
        for &(b, a) in &self.pairs {
            if b > 3 || a > 3 || a == b {
                return Err(ConfigError(format!("invalid label pair ({b},{a})")));
            }
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_bit(s: &str) -> Option<u8> {
    match s {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

fn parse_float_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|part| parse_f64(part.trim())).collect()
}

/// Comma-separated two-digit label pairs, e.g. "21,31" -> [(2,1), (3,1)].
pub fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>, ConfigError> {
    let mut pairs = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let digits: Vec<usize> = part
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| ConfigError(format!("pair '{part}' is not two digits")))?;
        if digits.len() != 2 {
            return Err(ConfigError(format!("pair '{part}' is not two digits")));
        }
        pairs.push((digits[0], digits[1]));
    }
    if pairs.is_empty() {
        return Err(ConfigError("empty pair list".into()));
    }
    Ok(pairs)
}

fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}
