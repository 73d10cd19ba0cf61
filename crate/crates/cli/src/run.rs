use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use qpulse_core::interferometer::evaluate;
use qpulse_core::{
    fringe_scan, optimize_offsets, preset, selftest, tau3, tau3_scan, PresetParams, ScanSpec,
    SignalResult,
};

use crate::config::{raw_from_json, Command, RawConfig, RunConfig};
use crate::output::{csv, write_outputs, Derived, RunRecord, FRINGE_HEADER, SCAN_HEADER};
use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "qpulse",
    version,
    about = "Atom interferometer with quantized light pulses"
)]
struct Cli {
    /// visibility | fringe | scan | optimize | selftest
    command: Option<String>,
    /// JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// ghz_fock, w_fock, ghz_superposed, w_superposed, class_2_1, class_2_2, class_2_3, separable
    #[arg(long)]
    preset: Option<String>,
    /// Base photon numbers n0,n1,n2
    #[arg(long)]
    n: Option<String>,
    /// Coupling phases theta0,theta1,theta2 (radians)
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// State phase: one value (added to mode 0) or vartheta0,vartheta1,vartheta2
    #[arg(long, allow_hyphen_values = true)]
    vartheta: Option<String>,
    /// ideal | finite
    #[arg(long)]
    mode: Option<String>,
    /// Reference photon numbers for finite mode (default: mean photon numbers)
    #[arg(long)]
    nbar: Option<String>,
    /// Coefficient weights, normalized on use
    #[arg(long)]
    coeffs: Option<String>,
    /// fock | superposed (separable and class presets)
    #[arg(long)]
    subsets: Option<String>,
    /// start:stop:step, a single value, or a comma-separated list
    #[arg(long)]
    tau3: Option<String>,
    /// Offset range lo:hi for optimize (default -4:4)
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Fringe points over [0, 2pi)
    #[arg(long)]
    points: Option<String>,
    /// Output CSV path; a .meta.json record is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
    /// Selftest seed
    #[arg(long)]
    seed: Option<String>,
    /// Selftest cases
    #[arg(long)]
    count: Option<String>,
}

impl Cli {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let s = |k: &'static str, v: &Option<String>| v.clone().map(|v| (k, v));
        [
            s("command", &self.command),
            s("preset", &self.preset),
            s("n", &self.n),
            s("theta", &self.theta),
            s("vartheta", &self.vartheta),
            s("mode", &self.mode),
            s("nbar", &self.nbar),
            s("coeffs", &self.coeffs),
            s("subsets", &self.subsets),
            s("tau3", &self.tau3),
            s("bounds", &self.bounds),
            s("points", &self.points),
            self.out.as_ref().map(|p| ("out", p.display().to_string())),
            s("seed", &self.seed),
            s("count", &self.count),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config {
                field: "config".into(),
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            raw_from_json(&text)?
        }
        None => RawConfig::new(),
    };
    for (k, v) in cli.flags() {
        raw.insert(k.to_string(), v);
    }
    RunConfig::from_raw(&raw)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let start = Instant::now();
    match cfg.command {
        Command::Visibility => visibility(&cfg, start),
        Command::Fringe => fringe(&cfg, start),
        Command::Scan => scan(&cfg, start),
        Command::Optimize => optimize(&cfg, start),
        Command::Selftest => self_test(&cfg),
    }
}

fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn derived(tau3: f64, s: &SignalResult) -> Derived {
    Derived {
        tau3,
        visibility: s.visibility,
        phase: s.phase,
        amplitude: s.amplitude,
        best_offsets: None,
        preset_visibility: None,
        evaluations: None,
    }
}

fn record(
    cfg: &RunConfig,
    nbar: Option<[f64; 3]>,
    derived: Vec<Derived>,
    start: Instant,
) -> RunRecord {
    let inversion = matches!(cfg.command, Command::Scan | Command::Optimize) || cfg.tau3.is_some();
    RunRecord {
        engine: "qpulse",
        engine_version: qpulse_core::VERSION,
        config: cfg.to_json(),
        delta_theta: cfg.theta[0] - 2.0 * cfg.theta[1] + cfg.theta[2],
        nbar,
        inversion_path: inversion.then(|| cfg.family().inversion_path()),
        derived,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Writes the table and record to `--out`, or prints the table.
fn emit(cfg: &RunConfig, table: &str, rec: &RunRecord) -> Result<(), CliError> {
    match &cfg.out {
        Some(out) => write_outputs(out, table, rec),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

/// Preset parameters at the single configured τ₃, if any.
fn single_point_params(cfg: &RunConfig) -> Result<PresetParams, CliError> {
    let base = cfg.preset_params();
    match cfg.tau3.as_deref() {
        Some([t]) => Ok(cfg.family().params_for_tau3(&base, *t)?),
        _ => Ok(base),
    }
}

fn visibility(cfg: &RunConfig, start: Instant) -> Result<(), CliError> {
    let params = single_point_params(cfg)?;
    let p = preset(cfg.preset, &params)?;
    let psi = p.state()?;
    let pulses = cfg.pulse_setup().build(&psi)?;
    let s = evaluate(&psi, &pulses)?;
    let t = tau3(&p.coefficients);
    println!(
        "tau3={}, V={}, Phi={}, A={}",
        fmt6(t),
        fmt6(s.visibility),
        fmt6(s.phase),
        fmt6(s.amplitude)
    );
    if let Some(out) = &cfg.out {
        let table = csv(SCAN_HEADER, &[vec![t, s.visibility, s.phase, s.amplitude]]);
        let nbar = pulses.pulses().map(|p| p.nbar());
        write_outputs(
            out,
            &table,
            &record(cfg, Some(nbar), vec![derived(t, &s)], start),
        )?;
    }
    Ok(())
}

fn fringe(cfg: &RunConfig, start: Instant) -> Result<(), CliError> {
    let params = single_point_params(cfg)?;
    let p = preset(cfg.preset, &params)?;
    let psi = p.state()?;
    let pulses = cfg.pulse_setup().build(&psi)?;
    let s = evaluate(&psi, &pulses)?;
    let pts = fringe_scan(cfg.preset, &params, &cfg.pulse_setup(), &cfg.fringe_grid())?;
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.vartheta, p.intensity]).collect();
    let table = csv(FRINGE_HEADER, &rows);
    let nbar = pulses.pulses().map(|p| p.nbar());
    emit(
        cfg,
        &table,
        &record(
            cfg,
            Some(nbar),
            vec![derived(tau3(&p.coefficients), &s)],
            start,
        ),
    )
}

fn scan(cfg: &RunConfig, start: Instant) -> Result<(), CliError> {
    let spec = ScanSpec {
        family: cfg.family(),
        base: cfg.preset_params(),
        grid: cfg.scan_grid(),
        pulses: cfg.pulse_setup(),
    };
    let pts = tau3_scan(&spec)?;
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| {
            vec![
                p.tau3,
                p.signal.visibility,
                p.signal.phase,
                p.signal.amplitude,
            ]
        })
        .collect();
    let table = csv(SCAN_HEADER, &rows);
    let derived = pts
        .iter()
        .map(|p| derived(p.tau3_measured, &p.signal))
        .collect();
    emit(cfg, &table, &record(cfg, None, derived, start))
}

fn optimize(cfg: &RunConfig, start: Instant) -> Result<(), CliError> {
    let family = cfg.family();
    let base = cfg.preset_params();
    let mut rows = Vec::new();
    let mut ds = Vec::new();
    for t in cfg.scan_grid() {
        let r = optimize_offsets(&family, &base, t, cfg.bounds, &cfg.pulse_setup())?;
        rows.push(vec![
            t,
            r.best_visibility,
            r.signal.phase,
            r.signal.amplitude,
        ]);
        let mut d = derived(r.tau3, &r.signal);
        d.best_offsets = Some(r.best_offsets);
        d.preset_visibility = r.preset_visibility;
        d.evaluations = Some(r.evaluations);
        ds.push(d);
    }
    let table = csv(SCAN_HEADER, &rows);
    emit(cfg, &table, &record(cfg, None, ds, start))
}

fn self_test(cfg: &RunConfig) -> Result<(), CliError> {
    let r = selftest::run(cfg.seed, cfg.count);
    println!(
        "selftest seed={} cases={} max_backend_deviation={:.3e} max_unitarity_deviation={:.3e} failures={}",
        r.seed, r.cases, r.max_backend_deviation, r.max_unitarity_deviation, r.failures
    );
    if r.passed() {
        println!("selftest passed");
        Ok(())
    } else {
        Err(CliError::SelfTest(format!(
            "{} of {} cases out of tolerance",
            r.failures, r.cases
        )))
    }
}
