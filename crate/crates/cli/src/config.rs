//! Run configuration: flags and JSON files share one flat key set, parsed
//! through the same string representation so both report errors by field.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use qpulse_core::{
    EvalMode, Family, OffsetBounds, PresetName, PresetParams, PulseSetup, SubsetKind,
};
use serde_json::Value;

use crate::CliError;

/// Largest accepted base photon number.
pub const MAX_PHOTONS: u32 = 1_000_000;
/// Largest accepted grid size.
pub const MAX_POINTS: usize = 1_000_000;

pub const KEYS: [&str; 15] = [
    "command", "preset", "n", "theta", "vartheta", "mode", "nbar", "coeffs", "subsets", "tau3",
    "bounds", "points", "out", "seed", "count",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Visibility,
    Fringe,
    Scan,
    Optimize,
    Selftest,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Visibility => "visibility",
            Command::Fringe => "fringe",
            Command::Scan => "scan",
            Command::Optimize => "optimize",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw `key → value` strings before validation.
pub type RawConfig = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub preset: PresetName,
    pub n: [u32; 3],
    pub theta: [f64; 3],
    pub vartheta: [f64; 3],
    pub mode: EvalMode,
    pub nbar: Option<[f64; 3]>,
    pub coeffs: Option<Vec<f64>>,
    pub subsets: SubsetKind,
    /// τ₃ targets; `None` means the preset's own coefficients.
    pub tau3: Option<Vec<f64>>,
    pub bounds: OffsetBounds,
    pub points: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub count: usize,
}

fn config_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Flattens a JSON config object into raw strings.
pub fn raw_from_json(text: &str) -> Result<RawConfig, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| config_err("config", e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(config_err("config", "expected a JSON object"));
    };
    let mut raw = RawConfig::new();
    for (key, v) in map {
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(&key, "unknown key"));
        }
        let scalar = |v: &Value| -> Result<String, CliError> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                Value::Bool(b) => Ok(b.to_string()),
                _ => Err(config_err(
                    &key,
                    "expected a string, number or list of them",
                )),
            }
        };
        let s = match &v {
            Value::Null => continue,
            Value::Array(items) => items
                .iter()
                .map(scalar)
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            other => scalar(other)?,
        };
        raw.insert(key, s);
    }
    Ok(raw)
}

fn parse_f64(field: &str, s: &str) -> Result<f64, CliError> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| config_err(field, format!("`{s}` is not a number")))?;
    if !x.is_finite() {
        return Err(config_err(field, format!("`{s}` is not finite")));
    }
    Ok(x)
}

fn parse_list(field: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|p| parse_f64(field, p)).collect()
}

fn parse_triple(field: &str, s: &str) -> Result<[f64; 3], CliError> {
    let v = parse_list(field, s)?;
    v.try_into().map_err(|v: Vec<f64>| {
        config_err(
            field,
            format!("expected 3 comma-separated values, got {}", v.len()),
        )
    })
}

fn parse_int<T: std::str::FromStr>(field: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| config_err(field, format!("`{s}` is not a valid integer")))
}

/// `start:stop:step` (inclusive), a single value, or a comma-separated list.
pub fn parse_grid(field: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => parse_list(field, s),
        3 => {
            let (start, stop, step) = (
                parse_f64(field, parts[0])?,
                parse_f64(field, parts[1])?,
                parse_f64(field, parts[2])?,
            );
            if step <= 0.0 || stop < start {
                return Err(config_err(field, "range needs step > 0 and start <= stop"));
            }
            let count = ((stop - start) / step + 1e-9).floor();
            if count >= MAX_POINTS as f64 {
                return Err(config_err(
                    field,
                    format!("range has more than {MAX_POINTS} points"),
                ));
            }
            let count = count as usize;
            let mut grid: Vec<f64> = (0..=count).map(|i| start + i as f64 * step).collect();
            if let Some(last) = grid.last_mut() {
                if (*last - stop).abs() <= 1e-9 * step {
                    *last = stop;
                }
            }
            Ok(grid)
        }
        _ => Err(config_err(
            field,
            "expected start:stop:step, a value, or a comma-separated list",
        )),
    }
}

fn parse_bounds(s: &str) -> Result<OffsetBounds, CliError> {
    let parts: Vec<&str> = s.split([':', ',']).collect();
    let (lo, hi) = match parts.as_slice() {
        [k] => {
            let k: i32 = parse_int("bounds", k)?;
            (-k.abs(), k.abs())
        }
        [lo, hi] => (parse_int("bounds", lo)?, parse_int("bounds", hi)?),
        _ => {
            return Err(config_err(
                "bounds",
                "expected lo:hi or a single half-width",
            ))
        }
    };
    if lo.unsigned_abs() > 64 || hi.unsigned_abs() > 64 {
        return Err(config_err("bounds", "offsets are limited to [-64, 64]"));
    }
    OffsetBounds::new(lo, hi).map_err(|e| config_err("bounds", e.to_string()))
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let get = |k: &str| raw.get(k).map(String::as_str);
        let command = match get("command") {
            None => {
                return Err(config_err(
                    "command",
                    "missing (visibility, fringe, scan, optimize or selftest)",
                ))
            }
            Some("visibility") => Command::Visibility,
            Some("fringe") => Command::Fringe,
            Some("scan") => Command::Scan,
            Some("optimize") => Command::Optimize,
            Some("selftest") => Command::Selftest,
            Some(other) => return Err(config_err("command", format!("unknown command `{other}`"))),
        };
        let preset: PresetName = match get("preset") {
            None => PresetName::GhzFock,
            Some(s) => s.parse().map_err(|e: String| config_err("preset", e))?,
        };
        let n = match get("n") {
            None => [10; 3],
            Some(s) => {
                let v: Vec<u32> = s
                    .split(',')
                    .map(|p| parse_int("n", p))
                    .collect::<Result<_, _>>()?;
                let n: [u32; 3] = v.try_into().map_err(|v: Vec<u32>| {
                    config_err("n", format!("expected 3 photon numbers, got {}", v.len()))
                })?;
                if n.iter().any(|&x| x > MAX_PHOTONS) {
                    return Err(config_err(
                        "n",
                        format!("photon numbers are limited to {MAX_PHOTONS}"),
                    ));
                }
                n
            }
        };
        let theta = get("theta")
            .map(|s| parse_triple("theta", s))
            .transpose()?
            .unwrap_or([0.0; 3]);
        let vartheta = match get("vartheta") {
            None => [0.0; 3],
            Some(s) => match parse_list("vartheta", s)?.as_slice() {
                [v] => [*v, 0.0, 0.0],
                [a, b, c] => [*a, *b, *c],
                v => {
                    return Err(config_err(
                        "vartheta",
                        format!("expected 1 or 3 values, got {}", v.len()),
                    ))
                }
            },
        };
        let mode = match get("mode") {
            None | Some("ideal") => EvalMode::IdealLimit,
            Some("finite") => EvalMode::FiniteN,
            Some(other) => {
                return Err(config_err(
                    "mode",
                    format!("unknown mode `{other}` (expected ideal or finite)"),
                ))
            }
        };
        let nbar = get("nbar").map(|s| parse_triple("nbar", s)).transpose()?;
        if let Some(nb) = nbar {
            if nb.iter().any(|&x| x <= 0.0) {
                return Err(config_err(
                    "nbar",
                    "reference photon numbers must be positive",
                ));
            }
        }
        let coeffs = get("coeffs").map(|s| parse_list("coeffs", s)).transpose()?;
        if let Some(c) = &coeffs {
            if c.iter().any(|&x| x < 0.0) {
                return Err(config_err("coeffs", "weights must be non-negative"));
            }
        }
        let subsets = match get("subsets") {
            None => SubsetKind::Fock,
            Some(s) => s.parse().map_err(|e: String| config_err("subsets", e))?,
        };
        let tau3 = get("tau3").map(|s| parse_grid("tau3", s)).transpose()?;
        if let Some(t) = &tau3 {
            if let Some(x) = t.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(config_err("tau3", format!("value {x} outside [0, 1]")));
            }
            if t.windows(2).any(|w| w[1] <= w[0]) {
                return Err(config_err("tau3", "values must be strictly increasing"));
            }
        }
        let bounds = get("bounds")
            .map(parse_bounds)
            .transpose()?
            .unwrap_or(OffsetBounds::symmetric(4));
        let points = get("points")
            .map(|s| parse_int::<usize>("points", s))
            .transpose()?
            .unwrap_or(64);
        if points == 0 || points > MAX_POINTS {
            return Err(config_err(
                "points",
                format!("must be between 1 and {MAX_POINTS}"),
            ));
        }
        let out = get("out").map(PathBuf::from);
        let seed = get("seed")
            .map(|s| parse_int("seed", s))
            .transpose()?
            .unwrap_or(0);
        let count = get("count")
            .map(|s| parse_int::<usize>("count", s))
            .transpose()?
            .unwrap_or(1000);
        if count > MAX_POINTS {
            return Err(config_err("count", format!("limited to {MAX_POINTS}")));
        }

        let cfg = RunConfig {
            command,
            preset,
            n,
            theta,
            vartheta,
            mode,
            nbar,
            coeffs,
            subsets,
            tau3,
            bounds,
            points,
            out,
            seed,
            count,
        };
        cfg.check_combination()?;
        Ok(cfg)
    }

    fn check_combination(&self) -> Result<(), CliError> {
        match self.command {
            Command::Visibility | Command::Fringe => {
                if self.coeffs.is_some() && self.tau3.is_some() {
                    return Err(config_err("coeffs", "cannot be combined with tau3"));
                }
                if self.tau3.as_ref().is_some_and(|t| t.len() != 1) {
                    return Err(config_err(
                        "tau3",
                        format!("{} takes a single value", self.command),
                    ));
                }
            }
            Command::Scan | Command::Optimize => {
                if self.coeffs.is_some() {
                    return Err(config_err(
                        "coeffs",
                        format!("{} sets the coefficients from tau3", self.command),
                    ));
                }
            }
            Command::Selftest => {
                if self.out.is_some() {
                    return Err(config_err("out", "selftest writes no files"));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        Family::new(self.preset).with_subsets(self.subsets)
    }

    pub fn preset_params(&self) -> PresetParams {
        PresetParams {
            n: self.n,
            vartheta: self.vartheta,
            weights: self.coeffs.clone(),
            w_phases: [0.0; 3],
            subsets: self.subsets,
        }
    }

    pub fn pulse_setup(&self) -> PulseSetup {
        PulseSetup {
            eval_mode: self.mode,
            coupling_phases: self.theta,
            nbar: self.nbar,
        }
    }

    /// τ₃ grid for scans; W and separable presets only reach 0.
    pub fn scan_grid(&self) -> Vec<f64> {
        match &self.tau3 {
            Some(t) => t.clone(),
            None if self.preset.is_w() || self.preset == PresetName::Separable => vec![0.0],
            None => parse_grid("tau3", "0:1:0.05").expect("default grid"),
        }
    }

    /// Phase grid `2πk/points`, `k = 0..points`.
    pub fn fringe_grid(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| 2.0 * PI * k as f64 / self.points as f64)
            .collect()
    }

    /// Canonical flat JSON form; feeding it back through `--config`
    /// reproduces the run.
    pub fn to_json(&self) -> Value {
        let list = |v: &[f64]| Value::Array(v.iter().map(|x| Value::from(*x)).collect());
        let mut m = serde_json::Map::new();
        m.insert("command".into(), self.command.as_str().into());
        m.insert("preset".into(), self.preset.as_str().into());
        m.insert(
            "n".into(),
            Value::Array(self.n.iter().map(|x| Value::from(*x)).collect()),
        );
        m.insert("theta".into(), list(&self.theta));
        m.insert("vartheta".into(), list(&self.vartheta));
        let mode = match self.mode {
            EvalMode::IdealLimit => "ideal",
            EvalMode::FiniteN => "finite",
        };
        m.insert("mode".into(), mode.into());
        if let Some(nb) = &self.nbar {
            m.insert("nbar".into(), list(nb));
        }
        if let Some(c) = &self.coeffs {
            m.insert("coeffs".into(), list(c));
        }
        m.insert("subsets".into(), self.subsets.as_str().into());
        if let Some(t) = &self.tau3 {
            m.insert("tau3".into(), list(t));
        }
        m.insert(
            "bounds".into(),
            format!("{}:{}", self.bounds.lo, self.bounds.hi).into(),
        );
        m.insert("points".into(), self.points.into());
        if let Some(o) = &self.out {
            m.insert("out".into(), o.display().to_string().into());
        }
        m.insert("seed".into(), self.seed.into());
        m.insert("count".into(), self.count.into());
        Value::Object(m)
    }
}
