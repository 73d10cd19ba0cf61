//! Field-space matrix elements of the resonant Jaynes-Cummings scattering
//! operator, one per pulse.
//!
//! For a pulse on mode ℓ with area Θ, reference photon number n̄ and coupling
//! phase θ, the four atomic matrix elements act on the field as
//!
//! ```text
//! gg: |n⟩ → c_n |n⟩                      ee: |n⟩ → c_{n+1} |n⟩
//! eg: |n⟩ → −i e^{+iθ} s_n |n−1⟩          ge: |n⟩ → −i e^{−iθ} s_{n+1} |n+1⟩
//! ```
//!
//! with `c_n = cos(Θ/2 · √(n/n̄))` and `s_n = sin(Θ/2 · √(n/n̄))`. In the ideal
//! (high photon number) limit the trigonometric factors are replaced by the
//! constants of a beam splitter (`c = s = 1/√2`) or a mirror (`c = 0`, `s = 1`).
//!
//! The momentum kick `e^{±ikẑ}` is not represented; for a closed interferometer
//! it only contributes the phase Δθ, which the coupling phases already carry.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{apply_ladder, apply_number_diagonal, FieldState, Ladder, Mode};

const AREA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalMode {
    /// Exact trigonometric factors at each photon number.
    FiniteN,
    /// Pulse-role constants of the high photon number limit.
    IdealLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    Cos,
    Sin,
}

/// Parameters of a single pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    mode: Mode,
    pulse_area: f64,
    nbar: f64,
    coupling_phase: f64,
}

impl PulseParams {
    pub fn new(mode: Mode, pulse_area: f64, nbar: f64, coupling_phase: f64) -> Result<Self> {
        if !(pulse_area.is_finite() && pulse_area > 0.0) {
            return Err(Error::InvalidPulse {
                field: "pulse_area",
                value: pulse_area,
            });
        }
        if !(nbar.is_finite() && nbar > 0.0) {
            return Err(Error::InvalidPulse {
                field: "nbar",
                value: nbar,
            });
        }
        if !coupling_phase.is_finite() {
            return Err(Error::InvalidPulse {
                field: "coupling_phase",
                value: coupling_phase,
            });
        }
        Ok(PulseParams {
            mode,
            pulse_area,
            nbar,
            coupling_phase,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn pulse_area(&self) -> f64 {
        self.pulse_area
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn coupling_phase(&self) -> f64 {
        self.coupling_phase
    }

    pub fn with_coupling_phase(mut self, theta: f64) -> Self {
        self.coupling_phase = theta;
        self
    }

    fn argument(&self, n: u32) -> f64 {
        0.5 * self.pulse_area * (f64::from(n) / self.nbar).sqrt()
    }

    /// `(c, s)` of the ideal limit for this pulse's area.
    fn ideal_constants(&self) -> Result<(f64, f64)> {
        if (self.pulse_area - FRAC_PI_2).abs() <= AREA_TOL {
            Ok((FRAC_1_SQRT_2, FRAC_1_SQRT_2))
        } else if (self.pulse_area - PI).abs() <= AREA_TOL {
            Ok((0.0, 1.0))
        } else {
            Err(Error::NonIdealPulseArea {
                mode: self.mode.index(),
                area: self.pulse_area,
            })
        }
    }

    /// `ŝ_n / √n` evaluated at `n`. At `n = 0` the analytic limit
    /// `(Θ/2)/√n̄` is used; it always sits next to a ladder operator that
    /// removes the vacuum term, so the value never reaches an observable.
    pub(crate) fn sin_over_sqrt(&self, n: u32, eval: EvalMode) -> Result<f64> {
        match eval {
            EvalMode::FiniteN => {
                if n == 0 {
                    Ok(0.5 * self.pulse_area / self.nbar.sqrt())
                } else {
                    Ok(self.argument(n).sin() / f64::from(n).sqrt())
                }
            }
            EvalMode::IdealLimit => {
                let (_, s) = self.ideal_constants()?;
                if n == 0 {
                    Ok(s)
                } else {
                    Ok(s / f64::from(n).sqrt())
                }
            }
        }
    }
}

/// `c_n` or `s_n` for a pulse.
pub fn trig_factor(kind: TrigKind, n: u32, p: &PulseParams, eval: EvalMode) -> Result<f64> {
    match eval {
        EvalMode::FiniteN => {
            let x = p.argument(n);
            Ok(match kind {
                TrigKind::Cos => x.cos(),
                TrigKind::Sin => x.sin(),
            })
        }
        EvalMode::IdealLimit => {
            let (c, s) = p.ideal_constants()?;
            Ok(match kind {
                TrigKind::Cos => c,
                TrigKind::Sin => s,
            })
        }
    }
}

/// Atomic matrix element `⟨i| Ŝ |j⟩`, named `ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScatteringElement {
    Gg,
    Ge,
    Eg,
    Ee,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Applies the field part of one scattering-operator element to `state`.
pub fn scattering_element(
    elem: ScatteringElement,
    p: &PulseParams,
    state: &FieldState,
    eval: EvalMode,
) -> Result<FieldState> {
    if eval == EvalMode::IdealLimit {
        p.ideal_constants()?;
    }
    let mode = p.mode;
    let trig = |kind, n| trig_factor(kind, n, p, eval).ok().map(real);
    let sin_over_sqrt = |n| p.sin_over_sqrt(n, eval).ok();
    match elem {
        ScatteringElement::Gg => apply_number_diagonal(state, mode, |n| trig(TrigKind::Cos, n)),
        ScatteringElement::Ee => apply_number_diagonal(state, mode, |n| trig(TrigKind::Cos, n + 1)),
        ScatteringElement::Eg => {
            // −i e^{iθ} â ŝ/√n̂
            let phase = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, p.coupling_phase);
            let weighted =
                apply_number_diagonal(state, mode, |n| sin_over_sqrt(n).map(|v| phase * v))?;
            Ok(apply_ladder(&weighted, mode, Ladder::Lower))
        }
        ScatteringElement::Ge => {
            // −i e^{−iθ} ŝ/√n̂ â†
            let phase = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -p.coupling_phase);
            let raised = apply_ladder(state, mode, Ladder::Raise);
            apply_number_diagonal(&raised, mode, |n| sin_over_sqrt(n).map(|v| phase * v))
        }
    }
}

/// The three pulses of the interferometer: beam splitter, mirror, beam
/// splitter on modes 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTriple {
    pulses: [PulseParams; 3],
    eval_mode: EvalMode,
}

impl PulseTriple {
    pub fn new(pulses: [PulseParams; 3], eval_mode: EvalMode) -> Result<Self> {
        if pulses.iter().enumerate().any(|(i, p)| p.mode.index() != i) {
            return Err(Error::PulseModes);
        }
        Ok(PulseTriple { pulses, eval_mode })
    }

    /// Areas π/2, π, π/2 with the given reference photon numbers and
    /// coupling phases.
    pub fn standard(
        eval_mode: EvalMode,
        nbar: [f64; 3],
        coupling_phases: [f64; 3],
    ) -> Result<Self> {
        let areas = [FRAC_PI_2, PI, FRAC_PI_2];
        let mut pulses = Vec::with_capacity(3);
        for (i, mode) in Mode::ALL.into_iter().enumerate() {
            pulses.push(PulseParams::new(
                mode,
                areas[i],
                nbar[i],
                coupling_phases[i],
            )?);
        }
        Self::new([pulses[0], pulses[1], pulses[2]], eval_mode)
    }

    pub fn pulse(&self, mode: Mode) -> &PulseParams {
        &self.pulses[mode.index()]
    }

    pub fn pulses(&self) -> &[PulseParams; 3] {
        &self.pulses
    }

    pub fn eval_mode(&self) -> EvalMode {
        self.eval_mode
    }

    /// `Δθ = θ₀ − 2θ₁ + θ₂`.
    pub fn delta_theta(&self) -> f64 {
        self.pulses[0].coupling_phase - 2.0 * self.pulses[1].coupling_phase
            + self.pulses[2].coupling_phase
    }

    /// Applies element `elem` of the pulse acting on `mode`.
    pub fn apply(
        &self,
        mode: Mode,
        elem: ScatteringElement,
        state: &FieldState,
    ) -> Result<FieldState> {
        scattering_element(elem, self.pulse(mode), state, self.eval_mode)
    }
}

/// Recipe for building a [`PulseTriple`] for a given initial field state.
///
/// When `nbar` is `None`, each pulse uses the mean photon number of its mode
/// in the initial state as reference photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSetup {
    pub eval_mode: EvalMode,
    pub coupling_phases: [f64; 3],
    pub nbar: Option<[f64; 3]>,
}

impl PulseSetup {
    pub fn ideal(coupling_phases: [f64; 3]) -> Self {
        PulseSetup {
            eval_mode: EvalMode::IdealLimit,
            coupling_phases,
            nbar: None,
        }
    }

    pub fn finite(coupling_phases: [f64; 3], nbar: Option<[f64; 3]>) -> Self {
        PulseSetup {
            eval_mode: EvalMode::FiniteN,
            coupling_phases,
            nbar,
        }
    }

    pub fn build(&self, psi: &FieldState) -> Result<PulseTriple> {
        let nbar = match self.nbar {
            Some(n) => n,
            None => self.default_nbar(|m| psi.mean_photon_number(m))?,
        };
        PulseTriple::standard(self.eval_mode, nbar, self.coupling_phases)
    }

    /// Resolves the reference photon numbers given a per-mode mean.
    pub(crate) fn default_nbar<F>(&self, mean: F) -> Result<[f64; 3]>
    where
        F: Fn(Mode) -> Result<f64>,
    {
        if let Some(n) = self.nbar {
            return Ok(n);
        }
        match self.eval_mode {
            // unused by the ideal factors but must be a valid parameter
            EvalMode::IdealLimit => Ok([1.0; 3]),
            EvalMode::FiniteN => Ok([mean(Mode::Zero)?, mean(Mode::One)?, mean(Mode::Two)?]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockLabel;

    fn bs(nbar: f64) -> PulseParams {
        PulseParams::new(Mode::Zero, FRAC_PI_2, nbar, 0.3).unwrap()
    }

    fn mirror(nbar: f64, theta: f64) -> PulseParams {
        PulseParams::new(Mode::One, PI, nbar, theta).unwrap()
    }

    #[test]
    fn trig_examples() {
        let m = mirror(7.0, 0.0);
        assert!(
            trig_factor(TrigKind::Cos, 7, &m, EvalMode::FiniteN)
                .unwrap()
                .abs()
                < 1e-15
        );
        let b = bs(5.0);
        let s = trig_factor(TrigKind::Sin, 5, &b, EvalMode::FiniteN).unwrap();
        assert!((s - FRAC_1_SQRT_2).abs() < 1e-15);
        for n in [0, 1, 10, 1000] {
            assert_eq!(
                trig_factor(TrigKind::Sin, n, &m, EvalMode::IdealLimit).unwrap(),
                1.0
            );
            assert_eq!(
                trig_factor(TrigKind::Cos, n, &m, EvalMode::IdealLimit).unwrap(),
                0.0
            );
            assert_eq!(
                trig_factor(TrigKind::Cos, n, &b, EvalMode::IdealLimit).unwrap(),
                FRAC_1_SQRT_2
            );
        }
    }

    #[test]
    fn ideal_limit_rejects_other_areas() {
        let p = PulseParams::new(Mode::Two, 1.0, 3.0, 0.0).unwrap();
        assert_eq!(
            trig_factor(TrigKind::Sin, 2, &p, EvalMode::IdealLimit),
            Err(Error::NonIdealPulseArea { mode: 2, area: 1.0 })
        );
        let s = FieldState::fock(FockLabel::new(0, 0, 4));
        assert!(scattering_element(ScatteringElement::Ge, &p, &s, EvalMode::IdealLimit).is_err());
        assert!(scattering_element(ScatteringElement::Gg, &p, &s, EvalMode::IdealLimit).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(PulseParams::new(Mode::Zero, 0.0, 1.0, 0.0).is_err());
        assert!(PulseParams::new(Mode::Zero, 1.0, 0.0, 0.0).is_err());
        assert!(PulseParams::new(Mode::Zero, 1.0, f64::NAN, 0.0).is_err());
        let p = bs(1.0);
        assert_eq!(
            PulseTriple::new([p, p, p], EvalMode::FiniteN),
            Err(Error::PulseModes)
        );
    }

    #[test]
    fn absorption_on_vacuum_vanishes() {
        let s = FieldState::fock(FockLabel::new(0, 3, 3));
        for eval in [EvalMode::FiniteN, EvalMode::IdealLimit] {
            assert!(
                scattering_element(ScatteringElement::Eg, &bs(4.0), &s, eval)
                    .unwrap()
                    .is_empty()
            );
        }
    }

    #[test]
    fn mirror_emission_matches_hand_composition() {
        let n1 = 8;
        let theta1 = 0.7;
        let s = FieldState::fock(FockLabel::new(2, n1, 5));
        let expected = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -theta1);
        let target = FockLabel::new(2, n1 + 1, 5);

        let ideal = scattering_element(
            ScatteringElement::Ge,
            &mirror(3.0, theta1),
            &s,
            EvalMode::IdealLimit,
        )
        .unwrap();
        assert_eq!(ideal.len(), 1);
        assert!((ideal.amplitude(&target) - expected).norm() < 1e-14);

        // on resonance at n̄ = n₁+1 the finite factor is exactly sin(π/2)
        let finite = scattering_element(
            ScatteringElement::Ge,
            &mirror(f64::from(n1 + 1), theta1),
            &s,
            EvalMode::FiniteN,
        )
        .unwrap();
        assert!((finite.amplitude(&target) - expected).norm() < 1e-14);
    }

    #[test]
    fn ideal_constants_are_the_large_n_limit() {
        let n = 10_000u32;
        let b = PulseParams::new(Mode::Zero, FRAC_PI_2, f64::from(n), 0.0).unwrap();
        let m = PulseParams::new(Mode::One, PI, f64::from(n), 0.0).unwrap();
        for k in 0..4u32 {
            for kind in [TrigKind::Cos, TrigKind::Sin] {
                for p in [&b, &m] {
                    let fin = trig_factor(kind, n + k, p, EvalMode::FiniteN).unwrap();
                    let ideal = trig_factor(kind, n + k, p, EvalMode::IdealLimit).unwrap();
                    assert!(
                        (fin - ideal).abs() < 1e-3,
                        "{kind:?} k={k}: {fin} vs {ideal}"
                    );
                }
            }
        }
    }

    #[test]
    fn default_nbar_is_mean_photon_number() {
        let psi = FieldState::from_terms([
            (
                FockLabel::new(10, 10, 10),
                Complex64::new(FRAC_1_SQRT_2, 0.0),
            ),
            (FockLabel::new(9, 12, 9), Complex64::new(FRAC_1_SQRT_2, 0.0)),
        ]);
        let t = PulseSetup::finite([0.0; 3], None).build(&psi).unwrap();
        assert!((t.pulse(Mode::Zero).nbar() - 9.5).abs() < 1e-12);
        assert!((t.pulse(Mode::One).nbar() - 11.0).abs() < 1e-12);
        let t = PulseSetup::finite([0.1, 0.2, 0.3], Some([4.0, 5.0, 6.0]))
            .build(&psi)
            .unwrap();
        assert_eq!(t.pulse(Mode::Two).nbar(), 6.0);
        assert!((t.delta_theta() - (0.1 - 0.4 + 0.3)).abs() < 1e-15);
    }
}
