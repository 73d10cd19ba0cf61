//! Branch operators of the Mach-Zehnder sequence and the interference signal.
//!
//! Postselecting the atom in the ground state leaves two interfering paths,
//!
//! ```text
//! lower: S²_ge S¹_eg S⁰_gg      upper: S²_gg S¹_ge S⁰_eg
//! ```
//!
//! and the signal `I = (A/2)(1 + V cos Φ)` follows from the three overlaps
//! `⟨O_l†O_l⟩`, `⟨O_u†O_u⟩` and `⟨O_l†O_u⟩`. They are computed by two
//! independent routes: composing the branch states ([`overlap_via_branches`])
//! or applying the closed-form operator products ([`overlap_via_products`]).
//!
//! Free evolution between pulses is the identity here. On resonance the
//! excitation number is conserved, so the atomic and photonic phases are the
//! same on both paths and cancel in every overlap.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{apply_ladder, apply_number_diagonal, inner_product, FieldState, Ladder, Mode};
use crate::pulses::{trig_factor, PulseTriple, ScatteringElement, TrigKind};
use crate::EXACT_TOL;

/// Element applied by pulse ℓ on the lower path.
pub const LOWER_PATH: [ScatteringElement; 3] = [
    ScatteringElement::Gg,
    ScatteringElement::Eg,
    ScatteringElement::Ge,
];

/// Element applied by pulse ℓ on the upper path.
pub const UPPER_PATH: [ScatteringElement; 3] = [
    ScatteringElement::Eg,
    ScatteringElement::Ge,
    ScatteringElement::Gg,
];

#[derive(Debug, Clone, PartialEq)]
pub struct BranchStates {
    pub lower: FieldState,
    pub upper: FieldState,
}

/// Field states left behind by the lower and upper interfering paths.
pub fn branch_states(psi: &FieldState, pulses: &PulseTriple) -> Result<BranchStates> {
    let run = |path: &[ScatteringElement; 3]| -> Result<FieldState> {
        let mut s = psi.clone();
        for mode in Mode::ALL {
            s = pulses.apply(mode, path[mode.index()], &s)?;
        }
        Ok(s)
    };
    Ok(BranchStates {
        lower: run(&LOWER_PATH)?,
        upper: run(&UPPER_PATH)?,
    })
}

/// `⟨O_l†O_l⟩`, `⟨O_u†O_u⟩` and `⟨O_l†O_u⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapTriple {
    pub o_ll: f64,
    pub o_uu: f64,
    pub o_lu: Complex64,
}

impl OverlapTriple {
    pub const ZERO: OverlapTriple = OverlapTriple {
        o_ll: 0.0,
        o_uu: 0.0,
        o_lu: Complex64::new(0.0, 0.0),
    };

    /// Non-negative norms and the Cauchy-Schwarz bound, to [`EXACT_TOL`].
    pub fn is_consistent(&self) -> bool {
        self.o_ll >= -EXACT_TOL
            && self.o_uu >= -EXACT_TOL
            && self.o_lu.norm() <= (self.o_ll.max(0.0) * self.o_uu.max(0.0)).sqrt() + EXACT_TOL
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_deviation(&self, other: &OverlapTriple) -> f64 {
        (self.o_ll - other.o_ll)
            .abs()
            .max((self.o_uu - other.o_uu).abs())
            .max((self.o_lu - other.o_lu).norm())
    }
}

pub fn overlap_via_branches(psi: &FieldState, pulses: &PulseTriple) -> Result<OverlapTriple> {
    let b = branch_states(psi, pulses)?;
    Ok(OverlapTriple {
        o_ll: b.lower.norm_sqr(),
        o_uu: b.upper.norm_sqr(),
        o_lu: inner_product(&b.lower, &b.upper),
    })
}

/// Evaluates the overlaps from the operator products
///
/// ```text
/// O_u†O_u = c²_{n₂} ⊗ s²_{n₁+1} ⊗ s²_{n₀}
/// O_l†O_l = s²_{n₂+1} ⊗ s²_{n₁} ⊗ c²_{n₀}
/// O_l†O_u = e^{iΔθ} â₂ (ŝĉ/√n̂)₂ ⊗ ((ŝ/√n̂)₁ â₁†)² ⊗ ĉ₀ â₀ (ŝ/√n̂)₀
/// ```
///
/// The factors `s²_{n₀}` and `s²_{n₁}` come from `(ŝ/√n̂) â†â (ŝ/√n̂)` and
/// carry the vacuum projector of `â†â`; this only matters in the ideal limit,
/// where the constant `s` does not vanish at `n = 0` by itself.
pub fn overlap_via_products(psi: &FieldState, pulses: &PulseTriple) -> Result<OverlapTriple> {
    let eval = pulses.eval_mode();
    let p0 = pulses.pulse(Mode::Zero);
    let p1 = pulses.pulse(Mode::One);
    let p2 = pulses.pulse(Mode::Two);
    // validate the ideal-limit areas up front so closures below cannot fail
    for p in pulses.pulses() {
        trig_factor(TrigKind::Sin, 0, p, eval)?;
    }
    let c = |p, n| trig_factor(TrigKind::Cos, n, p, eval).ok();
    let s = |p, n| trig_factor(TrigKind::Sin, n, p, eval).ok();
    let sq = |x: f64| Complex64::new(x * x, 0.0);
    let nonvacuum = |n: u32| if n == 0 { 0.0 } else { 1.0 };

    let o_uu = {
        let t = apply_number_diagonal(psi, Mode::Two, |n| c(p2, n).map(sq))?;
        let t = apply_number_diagonal(&t, Mode::One, |n| s(p1, n + 1).map(sq))?;
        let t = apply_number_diagonal(&t, Mode::Zero, |n| s(p0, n).map(|v| sq(v) * nonvacuum(n)))?;
        inner_product(psi, &t).re
    };
    let o_ll = {
        let t = apply_number_diagonal(psi, Mode::Two, |n| s(p2, n + 1).map(sq))?;
        let t = apply_number_diagonal(&t, Mode::One, |n| s(p1, n).map(|v| sq(v) * nonvacuum(n)))?;
        let t = apply_number_diagonal(&t, Mode::Zero, |n| c(p0, n).map(sq))?;
        inner_product(psi, &t).re
    };
    let o_lu = {
        let real = |x: f64| Complex64::new(x, 0.0);
        let sos = |p: &crate::pulses::PulseParams, n| p.sin_over_sqrt(n, eval).ok();
        // mode 0: ĉ â ŝ/√n̂
        let t = apply_number_diagonal(psi, Mode::Zero, |n| sos(p0, n).map(real))?;
        let t = apply_ladder(&t, Mode::Zero, Ladder::Lower);
        let t = apply_number_diagonal(&t, Mode::Zero, |n| c(p0, n).map(real))?;
        // mode 1: (ŝ/√n̂ â†)²
        let mut t = t;
        for _ in 0..2 {
            t = apply_ladder(&t, Mode::One, Ladder::Raise);
            t = apply_number_diagonal(&t, Mode::One, |n| sos(p1, n).map(real))?;
        }
        // mode 2: â ŝĉ/√n̂
        let t = apply_number_diagonal(&t, Mode::Two, |n| {
            sos(p2, n).zip(c(p2, n)).map(|(a, b)| real(a * b))
        })?;
        let t = apply_ladder(&t, Mode::Two, Ladder::Lower);
        Complex64::from_polar(1.0, pulses.delta_theta()) * inner_product(psi, &t)
    };
    Ok(OverlapTriple { o_ll, o_uu, o_lu })
}

/// Visibility, phase and amplitude of the ground-state fringe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalResult {
    /// `V ∈ [0, 1]`; the sign of the trigonometric products is folded into
    /// the phase.
    pub visibility: f64,
    /// `Φ ∈ (−π, π]`.
    pub phase: f64,
    /// `A = 2(⟨O_l†O_l⟩ + ⟨O_u†O_u⟩)`.
    pub amplitude: f64,
    /// `Δθ = θ₀ − 2θ₁ + θ₂` of the pulses that produced the overlaps.
    pub delta_theta: f64,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

pub fn signal(ov: &OverlapTriple, delta_theta: f64) -> Result<SignalResult> {
    let total = ov.o_ll + ov.o_uu;
    if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::NoSurvivingPopulation);
    }
    let visibility = 2.0 * ov.o_lu.norm() / total;
    debug_assert!(
        visibility <= 1.0 + 1e-9,
        "visibility {visibility} exceeds unity"
    );
    let phase = if ov.o_lu.norm() == 0.0 {
        0.0
    } else {
        wrap_phase(ov.o_lu.arg())
    };
    Ok(SignalResult {
        visibility,
        phase,
        amplitude: 2.0 * total,
        delta_theta,
    })
}

/// Runs the branch backend and extracts the signal.
pub fn evaluate(psi: &FieldState, pulses: &PulseTriple) -> Result<SignalResult> {
    signal(&overlap_via_branches(psi, pulses)?, pulses.delta_theta())
}

impl SignalResult {
    /// `I = (A/2)(1 + V cos(Φ + ϑ))` for an additional phase offset `ϑ`.
    pub fn intensity(&self, offset: f64) -> f64 {
        0.5 * self.amplitude * (1.0 + self.visibility * (self.phase + offset).cos())
    }
}

/// Fringe `I(ϑ)` over a grid of phase offsets.
pub fn fringe(res: &SignalResult, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("fringe grid is empty".into()));
    }
    Ok(grid.iter().map(|&t| (t, res.intensity(t))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockLabel;
    use crate::pulses::{EvalMode, PulseSetup};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ideal(theta: [f64; 3]) -> PulseTriple {
        PulseTriple::standard(EvalMode::IdealLimit, [1.0; 3], theta).unwrap()
    }

    #[test]
    fn fock_branches_match_hand_composition() {
        let (n0, n1, n2) = (6, 4, 9);
        let theta = [0.4, -1.1, 2.3];
        let psi = FieldState::fock(FockLabel::new(n0, n1, n2));
        let b = branch_states(&psi, &ideal(theta)).unwrap();

        let up = -Complex64::from_polar(0.5, theta[0] - theta[1]);
        assert_eq!(b.upper.len(), 1);
        assert!((b.upper.amplitude(&FockLabel::new(n0 - 1, n1 + 1, n2)) - up).norm() < 1e-14);

        let low = -Complex64::from_polar(0.5, theta[1] - theta[2]);
        assert_eq!(b.lower.len(), 1);
        assert!((b.lower.amplitude(&FockLabel::new(n0, n1 - 1, n2 + 1)) - low).norm() < 1e-14);
    }

    #[test]
    fn empty_first_mode_kills_upper_branch() {
        let psi = FieldState::fock(FockLabel::new(0, 0, 5));
        let b = branch_states(&psi, &ideal([0.0; 3])).unwrap();
        assert!(b.upper.is_empty());
    }

    #[test]
    fn separable_fock_has_no_overlap() {
        let psi = FieldState::fock(FockLabel::new(10, 10, 10));
        for ov in [
            overlap_via_branches(&psi, &ideal([0.0; 3])).unwrap(),
            overlap_via_products(&psi, &ideal([0.0; 3])).unwrap(),
        ] {
            assert!((ov.o_ll - 0.25).abs() < 1e-14);
            assert!((ov.o_uu - 0.25).abs() < 1e-14);
            assert_eq!(ov.o_lu.norm(), 0.0);
        }
        let sig = evaluate(&psi, &ideal([0.0; 3])).unwrap();
        assert_eq!(sig.visibility, 0.0);
        assert!((sig.amplitude - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_state_gives_zero_overlaps() {
        let z = FieldState::zero();
        assert_eq!(
            overlap_via_branches(&z, &ideal([0.0; 3])).unwrap(),
            OverlapTriple::ZERO
        );
        let p = overlap_via_products(&z, &ideal([0.0; 3])).unwrap();
        assert_eq!(p.max_deviation(&OverlapTriple::ZERO), 0.0);
        assert_eq!(signal(&p, 0.0), Err(Error::NoSurvivingPopulation));
    }

    fn ghz_fock(n: [u32; 3], vartheta: f64) -> FieldState {
        let a = Complex64::from_polar(FRAC_1_SQRT_2, vartheta / 2.0);
        FieldState::from_terms([
            (FockLabel(n), a),
            (FockLabel::new(n[0] - 1, n[1] + 2, n[2] - 1), a.conj()),
        ])
    }

    #[test]
    fn ghz_fock_overlap_is_one_eighth() {
        let psi = ghz_fock([10, 10, 10], 0.0);
        let ov = overlap_via_branches(&psi, &ideal([0.0; 3])).unwrap();
        assert!((ov.o_lu.norm() - 0.125).abs() < 1e-14);
        let sig = signal(&ov, 0.0).unwrap();
        assert!((sig.visibility - 0.5).abs() < 1e-14);
        assert!((sig.amplitude - 1.0).abs() < 1e-14);
        // fringe minimum at ϑ = π: (1/2)(1 − 1/2)
        let f = fringe(&sig, &[PI]).unwrap();
        assert!((f[0].1 - 0.25).abs() < 1e-14);
    }

    #[test]
    fn ghz_fock_finite_overlap_matches_closed_form() {
        // o_lu = e^{i(Δθ+ϑ)} αβ c_{n₂}s_{n₂} s_{n₁+2}s_{n₁+1} c_{n₀−1}s_{n₀}
        let n = [7u32, 5, 9];
        let theta = [0.2, 0.9, -0.4];
        let vartheta = 1.3;
        let psi = ghz_fock(n, vartheta);
        let pulses = PulseSetup::finite(theta, None).build(&psi).unwrap();
        let ov = overlap_via_products(&psi, &pulses).unwrap();
        let tf = |kind, mode: Mode, k: u32| {
            trig_factor(kind, k, pulses.pulse(mode), EvalMode::FiniteN).unwrap()
        };
        let magnitude = 0.5
            * tf(TrigKind::Cos, Mode::Two, n[2])
            * tf(TrigKind::Sin, Mode::Two, n[2])
            * tf(TrigKind::Sin, Mode::One, n[1] + 2)
            * tf(TrigKind::Sin, Mode::One, n[1] + 1)
            * tf(TrigKind::Cos, Mode::Zero, n[0] - 1)
            * tf(TrigKind::Sin, Mode::Zero, n[0]);
        let expected = Complex64::from_polar(magnitude, pulses.delta_theta() + vartheta);
        assert!(
            (ov.o_lu - expected).norm() < 1e-14,
            "{} vs {}",
            ov.o_lu,
            expected
        );
        let via_branches = overlap_via_branches(&psi, &pulses).unwrap();
        assert!(ov.max_deviation(&via_branches) < 1e-14);
    }

    #[test]
    fn fringe_examples() {
        let flat = SignalResult {
            visibility: 0.0,
            phase: 0.3,
            amplitude: 0.8,
            delta_theta: 0.0,
        };
        for (_, i) in fringe(&flat, &[0.0, 1.0, 2.0]).unwrap() {
            assert!((i - 0.4).abs() < 1e-15);
        }
        let r = SignalResult {
            visibility: 0.5,
            phase: 0.7,
            amplitude: 1.0,
            delta_theta: 0.0,
        };
        let f = fringe(&r, &[-0.7]).unwrap();
        assert!((f[0].1 - 0.75).abs() < 1e-15);
        assert!(fringe(&r, &[]).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }
}
