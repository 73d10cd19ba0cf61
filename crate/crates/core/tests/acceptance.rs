//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qpulse_core::interferometer::evaluate;
use qpulse_core::selftest::{column_unitarity_deviation, random_pulses, random_state};
use qpulse_core::{
    fringe_scan, optimize_offsets, overlap_via_branches, overlap_via_products, preset, tau3,
    tau3_scan, ClassCoefficients, EntanglementClass, EvalMode, Family, OffsetBounds, PresetName,
    PresetParams, PulseSetup, ScanSpec, SignalResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

fn base() -> PresetParams {
    PresetParams::new([10, 10, 10])
}

fn ideal() -> PulseSetup {
    PulseSetup::ideal([0.0; 3])
}

fn run(
    name: PresetName,
    params: &PresetParams,
    setup: &PulseSetup,
) -> Result<SignalResult, String> {
    let p = preset(name, params).map_err(|e| e.to_string())?;
    let psi = p.state().map_err(|e| e.to_string())?;
    let pulses = setup.build(&psi).map_err(|e| e.to_string())?;
    evaluate(&psi, &pulses).map_err(|e| e.to_string())
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn c1_ghz_fock() -> Check {
    let v = run(PresetName::GhzFock, &base(), &ideal())?.visibility;
    Ok((
        (v - 0.5).abs() <= 1e-12,
        format!("V = {v:.15} (target 0.5 ± 1e-12)"),
    ))
}

fn c2_separable() -> Check {
    let v = run(PresetName::Separable, &base(), &ideal())?.visibility;
    Ok((v.abs() <= 1e-12, format!("V = {v:.3e} (target 0 ± 1e-12)")))
}

fn c3_w_fock() -> Check {
    let p = preset(PresetName::WFock, &base()).map_err(|e| e.to_string())?;
    let psi = p.state().map_err(|e| e.to_string())?;
    let pulses = ideal().build(&psi).map_err(|e| e.to_string())?;
    let ov = overlap_via_branches(&psi, &pulses).map_err(|e| e.to_string())?;
    let v = evaluate(&psi, &pulses)
        .map_err(|e| e.to_string())?
        .visibility;
    let ok = ov.o_lu.norm() <= 1e-12 && v.abs() <= 1e-12;
    Ok((
        ok,
        format!(
            "|o_lu| = {:.3e}, V = {v:.3e} (target 0 ± 1e-12)",
            ov.o_lu.norm()
        ),
    ))
}

fn c4_square_root_law() -> Check {
    let grid: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    let mut worst: f64 = 0.0;
    for name in [
        PresetName::GhzFock,
        PresetName::Class21,
        PresetName::Class22,
        PresetName::Class23,
    ] {
        let spec = ScanSpec {
            family: Family::new(name),
            base: base(),
            grid: grid.clone(),
            pulses: ideal(),
        };
        for p in tau3_scan(&spec).map_err(|e| e.to_string())? {
            worst = worst.max((p.signal.visibility - p.tau3.sqrt() / 2.0).abs());
        }
    }
    Ok((
        worst <= 1e-12,
        format!("max |V - sqrt(tau3)/2| = {worst:.3e} over 4 families x 11 points (tol 1e-12)"),
    ))
}

fn c5a_ghz_superposed() -> Check {
    let v = run(PresetName::GhzSuperposed, &base(), &ideal())?.visibility;
    Ok((
        (v - 9.0 / 16.0).abs() <= 1e-12,
        format!("V = {v:.15} (target 9/16 ± 1e-12)"),
    ))
}

fn c5b_w_superposed() -> Check {
    let v = run(PresetName::WSuperposed, &base(), &ideal())?.visibility;
    Ok((
        (v - 0.25).abs() <= 1e-12,
        format!("V = {v:.15} (target 1/4 ± 1e-12)"),
    ))
}

fn c5c_separable_limit() -> Check {
    let grid = vec![1e-8, 1e-6, 1e-4];
    let spec = ScanSpec {
        family: Family::new(PresetName::GhzSuperposed),
        base: base(),
        grid,
        pulses: ideal(),
    };
    let pts = tau3_scan(&spec).map_err(|e| e.to_string())?;
    let v = pts[0].signal.visibility;
    let series: Vec<String> = pts
        .iter()
        .map(|p| format!("V({:.0e}) = {:.6e}", p.tau3, p.signal.visibility))
        .collect();
    Ok((
        (v - 0.125).abs() <= 1e-9,
        format!("{} (target 1/8 ± 1e-9 as tau3 -> 0)", series.join(", ")),
    ))
}

fn c6_phase_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let theta: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-PI..PI));
        let vartheta: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-PI..PI));
        let (name, vt) = if case % 2 == 0 {
            (PresetName::GhzFock, [vartheta[0], 0.0, 0.0])
        } else {
            (PresetName::GhzSuperposed, vartheta)
        };
        let mut params = base();
        params.vartheta = vt;
        let s = run(name, &params, &PulseSetup::ideal(theta))?;
        let expect = theta[0] - 2.0 * theta[1] + theta[2] + vt.iter().sum::<f64>();
        worst = worst.max(angle_diff(s.phase, expect));
    }
    Ok((
        worst <= 1e-9,
        format!("max |Phi - (dtheta + vartheta)| = {worst:.3e} over 100 draws (tol 1e-9)"),
    ))
}

fn c7_backend_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let psi = random_state(&mut rng);
        let pulses = random_pulses(&mut rng).map_err(|e| e.to_string())?;
        let a = overlap_via_branches(&psi, &pulses).map_err(|e| e.to_string())?;
        let b = overlap_via_products(&psi, &pulses).map_err(|e| e.to_string())?;
        worst = worst.max(a.max_deviation(&b));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-12 && secs < 10.0;
    Ok((
        ok,
        format!(
            "max deviation = {worst:.3e} over 1000 states (tol 1e-12), {secs:.2} s (limit 10 s)"
        ),
    ))
}

fn c8_unitarity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let psi = random_state(&mut rng);
        let pulses = random_pulses(&mut rng).map_err(|e| e.to_string())?;
        for p in pulses.pulses() {
            worst = worst.max(
                column_unitarity_deviation(&psi, p, EvalMode::FiniteN)
                    .map_err(|e| e.to_string())?,
            );
        }
    }
    Ok((
        worst <= 1e-12,
        format!("max column-unitarity violation = {worst:.3e} over 1000 states (tol 1e-12)"),
    ))
}

fn c9_tau3_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut in_range = true;
    let classes = [
        EntanglementClass::Ghz,
        EntanglementClass::TwoOne,
        EntanglementClass::TwoTwo,
        EntanglementClass::WLike,
    ];
    for class in classes {
        for _ in 0..200 {
            let k = class.components().len();
            let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
            let c = ClassCoefficients::class_state(class, &w, rng.gen_range(-PI..PI))
                .map_err(|e| e.to_string())?;
            let t = tau3(&c);
            in_range &= (-1e-12..=1.0 + 1e-12).contains(&t);
            let expect = 4.0 * (c.alpha() * c.beta()).powi(2);
            worst = worst.max((t - expect).abs());
        }
    }
    for _ in 0..200 {
        let w = [
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        ];
        let ph = [
            rng.gen_range(-PI..PI),
            rng.gen_range(-PI..PI),
            rng.gen_range(-PI..PI),
        ];
        let t = tau3(&ClassCoefficients::w(w, ph).map_err(|e| e.to_string())?);
        in_range &= (-1e-12..=1.0 + 1e-12).contains(&t);
    }
    Ok((
        worst <= 1e-12 && in_range,
        format!("max |tau3 - 4|ab|^2| = {worst:.3e} over 4 classes x 200 draws (tol 1e-12), all in [0,1]: {in_range}"),
    ))
}

fn c10_optimizer() -> Check {
    let family = Family::new(PresetName::GhzSuperposed);
    let start = Instant::now();
    let mut dominance = true;
    let mut ends = (0.0, 0.0);
    for i in 0..=20 {
        let t = f64::from(i) / 20.0;
        let r = optimize_offsets(&family, &base(), t, OffsetBounds::symmetric(4), &ideal())
            .map_err(|e| e.to_string())?;
        let preset_v = r
            .preset_visibility
            .ok_or("preset configuration not admissible")?;
        dominance &= r.best_visibility >= preset_v - 1e-12;
        if i == 0 {
            ends.0 = r.best_visibility;
        }
        if i == 20 {
            ends.1 = r.best_visibility;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = dominance && ends.1 >= 9.0 / 16.0 - 1e-12 && ends.0 >= 0.125 - 1e-12 && secs < 60.0;
    Ok((
        ok,
        format!(
            "dominance: {dominance}, V(0) = {:.12}, V(1) = {:.12} (>= 1/8, >= 9/16), {secs:.2} s for 21 points at +-4 (limit 60 s)",
            ends.0, ends.1
        ),
    ))
}

/// Least-squares fit of `a + b cos x + c sin x`.
fn fit_fringe(rows: &[(f64, f64)]) -> (f64, f64) {
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(x, y) in rows {
        let f = [1.0, x.cos(), x.sin()];
        for i in 0..3 {
            atb[i] += f[i] * y;
            for j in 0..3 {
                ata[i][j] += f[i] * f[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
            .unwrap();
        ata.swap(col, piv);
        atb.swap(col, piv);
        for r in col + 1..3 {
            let m = ata[r][col] / ata[col][col];
            let pivot_row = ata[col];
            for (x, p) in ata[r].iter_mut().zip(pivot_row).skip(col) {
                *x -= m * p;
            }
            atb[r] -= m * atb[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        x[r] = (atb[r] - (r + 1..3).map(|c| ata[r][c] * x[c]).sum::<f64>()) / ata[r][r];
    }
    let (a, b, c) = (x[0], x[1], x[2]);
    ((b * b + c * c).sqrt() / a, (-c).atan2(b))
}

fn c11_fringe_fit() -> Check {
    let grid: Vec<f64> = (0..64).map(|i| 2.0 * PI * f64::from(i) / 64.0).collect();
    let mut worst_v: f64 = 0.0;
    let mut worst_phi: f64 = 0.0;
    let cases = [
        (PresetName::GhzFock, PulseSetup::ideal([0.3, -0.2, 0.5])),
        (
            PresetName::GhzSuperposed,
            PulseSetup::ideal([PI / 3.0, 0.0, 0.0]),
        ),
        (
            PresetName::GhzFock,
            PulseSetup::finite([0.1, 0.4, -0.9], None),
        ),
        (PresetName::Class22, PulseSetup::ideal([1.0, 0.2, 0.0])),
    ];
    for (name, setup) in cases {
        let mut params = base();
        params.vartheta = [0.25, 0.0, 0.0];
        let engine = run(name, &params, &setup)?;
        let rows: Vec<(f64, f64)> = fringe_scan(name, &params, &setup, &grid)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|p| (p.vartheta, p.intensity))
            .collect();
        let (v, phi) = fit_fringe(&rows);
        worst_v = worst_v.max((v - engine.visibility).abs());
        worst_phi = worst_phi.max(angle_diff(phi, engine.phase));
    }
    Ok((
        worst_v <= 1e-9 && worst_phi <= 1e-9,
        format!("max |V_fit - V| = {worst_v:.3e}, max |Phi_fit - Phi| = {worst_phi:.3e} over 4 scans x 64 points (tol 1e-9)"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("1", "GHZ-Fock visibility", c1_ghz_fock),
        ("2", "separable Fock visibility", c2_separable),
        ("3", "W-Fock overlap", c3_w_fock),
        ("4", "square-root law", c4_square_root_law),
        ("5a", "GHZ superposed visibility", c5a_ghz_superposed),
        ("5b", "W superposed visibility", c5b_w_superposed),
        ("5c", "separable-superposition limit", c5c_separable_limit),
        ("6", "phase law", c6_phase_law),
        ("7", "backend equivalence", c7_backend_equivalence),
        ("8", "unitarity", c8_unitarity),
        ("9", "tau3 consistency", c9_tau3_consistency),
        ("10", "optimizer dominance", c10_optimizer),
        ("11", "fringe fit", c11_fringe_fit),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{id:>3}] {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
