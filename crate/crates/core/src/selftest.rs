//! Seeded randomized consistency checks: the two overlap backends must
//! agree and every pulse must act as a unitary on the atom-field space.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fock::{FieldState, FockLabel, Mode};
use crate::interferometer::{overlap_via_branches, overlap_via_products};
use crate::pulses::{scattering_element, EvalMode, PulseParams, PulseTriple, ScatteringElement};
use crate::EXACT_TOL;

/// Largest photon number drawn for random states.
pub const MAX_PHOTONS: u32 = 12;

/// Normalized sparse state with 1 to 6 terms and photon numbers up to
/// [`MAX_PHOTONS`].
pub fn random_state<R: Rng>(rng: &mut R) -> FieldState {
    loop {
        let count = rng.gen_range(1..=6);
        let terms: Vec<_> = (0..count)
            .map(|_| {
                let label = FockLabel(std::array::from_fn(|_| rng.gen_range(0..=MAX_PHOTONS)));
                let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                (label, amp)
            })
            .collect();
        if let Ok(s) = FieldState::from_terms(terms).normalized() {
            return s;
        }
    }
}

/// Random pulse triple: half the draws use the ideal limit, the others
/// finite photon numbers with arbitrary areas and reference photon numbers.
pub fn random_pulses<R: Rng>(rng: &mut R) -> Result<PulseTriple> {
    let theta: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-PI..PI));
    if rng.gen_bool(0.5) {
        return PulseTriple::standard(EvalMode::IdealLimit, [1.0; 3], theta);
    }
    let mut pulses = Vec::with_capacity(3);
    for (i, mode) in Mode::ALL.into_iter().enumerate() {
        let area = rng.gen_range(0.1..2.0 * PI);
        let nbar = rng.gen_range(0.5..2.0 * f64::from(MAX_PHOTONS));
        pulses.push(PulseParams::new(mode, area, nbar, theta[i])?);
    }
    PulseTriple::new([pulses[0], pulses[1], pulses[2]], EvalMode::FiniteN)
}

/// Largest violation of the column-unitarity identities of one pulse on `psi`:
///
/// ```text
/// ‖S_gg ψ‖² + ‖S_eg ψ‖² = ‖ψ‖²
/// ‖S_ge ψ‖² + ‖S_ee ψ‖² = ‖ψ‖²
/// ⟨S_gg ψ|S_ge ψ⟩ + ⟨S_eg ψ|S_ee ψ⟩ = 0
/// ```
///
/// The ideal-limit factors satisfy them only away from the vacuum.
pub fn column_unitarity_deviation(
    psi: &FieldState,
    p: &PulseParams,
    eval: EvalMode,
) -> Result<f64> {
    let apply = |e| scattering_element(e, p, psi, eval);
    let gg = apply(ScatteringElement::Gg)?;
    let ge = apply(ScatteringElement::Ge)?;
    let eg = apply(ScatteringElement::Eg)?;
    let ee = apply(ScatteringElement::Ee)?;
    let norm = psi.norm_sqr();
    let g_col = (gg.norm_sqr() + eg.norm_sqr() - norm).abs();
    let e_col = (ge.norm_sqr() + ee.norm_sqr() - norm).abs();
    let cross = (gg.inner(&ge) + eg.inner(&ee)).norm();
    Ok(g_col.max(e_col).max(cross))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfTestReport {
    pub seed: u64,
    pub cases: usize,
    pub max_backend_deviation: f64,
    pub max_unitarity_deviation: f64,
    /// Cases exceeding the tolerance or returning an error.
    pub failures: usize,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Runs `count` random cases from `seed`.
pub fn run(seed: u64, count: usize) -> SelfTestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SelfTestReport {
        seed,
        cases: count,
        max_backend_deviation: 0.0,
        max_unitarity_deviation: 0.0,
        failures: 0,
    };
    for _ in 0..count {
        let psi = random_state(&mut rng);
        let case = random_pulses(&mut rng).and_then(|pulses| {
            let a = overlap_via_branches(&psi, &pulses)?;
            let b = overlap_via_products(&psi, &pulses)?;
            let mut unit: f64 = 0.0;
            for p in pulses.pulses() {
                unit = unit.max(column_unitarity_deviation(&psi, p, EvalMode::FiniteN)?);
            }
            Ok((a.max_deviation(&b), unit))
        });
        match case {
            Ok((backend, unit)) => {
                report.max_backend_deviation = report.max_backend_deviation.max(backend);
                report.max_unitarity_deviation = report.max_unitarity_deviation.max(unit);
                if backend > EXACT_TOL || unit > EXACT_TOL {
                    report.failures += 1;
                }
            }
            Err(_) => report.failures += 1,
        }
    }
    report
}
