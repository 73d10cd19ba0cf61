//! CSV tables and `.meta.json` run records.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SCAN_HEADER: &str = "tau3,visibility,phase,amplitude";
pub const FRINGE_HEADER: &str = "vartheta,intensity";

/// `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn fmt_g12(x: f64) -> String {
    const PREC: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..PREC).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (PREC - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header plus one line per row, `\n` terminated.
pub fn csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = String::with_capacity(32 * (rows.len() + 1));
    s.push_str(header);
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| fmt_g12(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// `dir/name.csv` → `dir/name.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.meta.json"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Derived {
    pub tau3: f64,
    pub visibility: f64,
    pub phase: f64,
    pub amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_offsets: Option<[Vec<i32>; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset_visibility: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub engine: &'static str,
    pub engine_version: &'static str,
    pub config: Value,
    pub delta_theta: f64,
    pub nbar: Option<[f64; 3]>,
    pub inversion_path: Option<&'static str>,
    pub derived: Vec<Derived>,
    pub wall_seconds: f64,
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

pub fn write_outputs(out: &Path, table: &str, record: &RunRecord) -> Result<(), CliError> {
    write_file(out, table)?;
    let json = serde_json::to_string_pretty(record).expect("record serializes");
    write_file(&meta_path(out), &(json + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_c() {
        let cases = [
            (0.5, "0.5"),
            (-0.0, "0"),
            (1.0, "1"),
            (0.1 + 0.2, "0.3"),
            (std::f64::consts::PI, "3.14159265359"),
            (1e-5, "1e-05"),
            (1.5e-4, "0.00015"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (9.99999999999951, "10"),
            (-2.5e-10, "-2.5e-10"),
            (0.35355339059327373, "0.353553390593"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g12(x), s, "{x:e}");
        }
    }

    #[test]
    fn csv_layout() {
        let s = csv(SCAN_HEADER, &[vec![0.0, 0.5, -0.0, 1.0]]);
        assert_eq!(s, "tau3,visibility,phase,amplitude\n0,0.5,0,1\n");
    }

    #[test]
    fn meta_sidecar_name() {
        assert_eq!(
            meta_path(Path::new("out/curve.csv")),
            PathBuf::from("out/curve.meta.json")
        );
        assert_eq!(
            meta_path(Path::new("curve")),
            PathBuf::from("curve.meta.json")
        );
    }
}
