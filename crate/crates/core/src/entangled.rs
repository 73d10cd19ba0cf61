//! Two-state subsets, tripartite class states and the three-tangle.
//!
//! Each mode ℓ carries an orthonormal pair `{|↓_ℓ⟩, |↑_ℓ⟩}` of finite Fock
//! superpositions and the field state is `Σ a_ijk |i₀ j₁ k₂⟩`. Components are
//! indexed `4i + 2j + k` with `↓ = 0`, `↑ = 1`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FieldState, FockLabel, Mode};
use crate::EXACT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Down = 0,
    Up = 1,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Down, Spin::Up];
}

pub const fn component_index(i: Spin, j: Spin, k: Spin) -> usize {
    4 * i as usize + 2 * j as usize + k as usize
}

pub const COMPONENT_NAMES: [&str; 8] = ["↓↓↓", "↓↓↑", "↓↑↓", "↓↑↑", "↑↓↓", "↑↓↑", "↑↑↓", "↑↑↑"];

const DDD: usize = 0;
const DDU: usize = 1;
const DUD: usize = 2;
const UDD: usize = 4;
const UDU: usize = 5;
const UUD: usize = 6;
const UUU: usize = 7;

/// Single-mode Fock superposition, `(photon number, amplitude)` pairs.
pub type ModeVector = Vec<(u32, Complex64)>;

fn merge(v: ModeVector) -> BTreeMap<u32, Complex64> {
    let mut m = BTreeMap::new();
    for (n, a) in v {
        *m.entry(n).or_insert(Complex64::new(0.0, 0.0)) += a;
    }
    m.retain(|_, a| *a != Complex64::new(0.0, 0.0));
    m
}

fn mode_inner(a: &BTreeMap<u32, Complex64>, b: &BTreeMap<u32, Complex64>) -> Complex64 {
    a.iter()
        .filter_map(|(n, x)| b.get(n).map(|y| x.conj() * y))
        .sum()
}

/// Orthonormal pair `{|↓⟩, |↑⟩}` for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSubset {
    mode: Mode,
    down: BTreeMap<u32, Complex64>,
    up: BTreeMap<u32, Complex64>,
}

impl ModeSubset {
    pub fn new(mode: Mode, down: ModeVector, up: ModeVector) -> Result<Self> {
        let s = ModeSubset {
            mode,
            down: merge(down),
            up: merge(up),
        };
        s.validate()?;
        Ok(s)
    }

    /// Plain Fock pair `{|down⟩, |up⟩}`.
    pub fn fock(mode: Mode, down: u32, up: u32) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::new(mode, vec![(down, one)], vec![(up, one)])
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.mode.index();
        for (which, v) in [("down", &self.down), ("up", &self.up)] {
            let norm = mode_inner(v, v).re;
            if (norm - 1.0).abs() > EXACT_TOL {
                return Err(Error::SubsetNotNormalized {
                    mode: m,
                    which,
                    norm,
                });
            }
        }
        let overlap = mode_inner(&self.down, &self.up).norm();
        if overlap > EXACT_TOL {
            return Err(Error::SubsetNotOrthogonal { mode: m, overlap });
        }
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn get(&self, spin: Spin) -> &BTreeMap<u32, Complex64> {
        match spin {
            Spin::Down => &self.down,
            Spin::Up => &self.up,
        }
    }

    /// `⟨spin| n̂ |spin⟩`.
    pub fn mean_photon_number(&self, spin: Spin) -> f64 {
        self.get(spin)
            .iter()
            .map(|(n, a)| f64::from(*n) * a.norm_sqr())
            .sum()
    }

    /// Photon numbers present in either state.
    pub fn labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.down.keys().chain(self.up.keys()).copied()
    }
}

/// Tripartite entanglement class, named by how many single-mode partial
/// traces leave the remaining pair entangled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntanglementClass {
    Separable,
    /// 2-0, GHZ-like.
    Ghz,
    /// 2-1: GHZ-like plus `ξ|↑↓↓⟩`.
    TwoOne,
    /// 2-2: additionally `ζ|↑↑↓⟩`.
    TwoTwo,
    /// 2-3, W-like: additionally `χ|↑↓↑⟩`; also tags the W state itself.
    WLike,
}

impl EntanglementClass {
    pub fn tag(self) -> &'static str {
        match self {
            EntanglementClass::Separable => "separable",
            EntanglementClass::Ghz => "2-0",
            EntanglementClass::TwoOne => "2-1",
            EntanglementClass::TwoTwo => "2-2",
            EntanglementClass::WLike => "2-3",
        }
    }

    /// Components of the class example state, in coefficient order
    /// `α, β, ξ, ζ, χ`.
    pub fn components(self) -> &'static [usize] {
        match self {
            EntanglementClass::Separable => &[DDD],
            EntanglementClass::Ghz => &[DDD, UUU],
            EntanglementClass::TwoOne => &[DDD, UUU, UDD],
            EntanglementClass::TwoTwo => &[DDD, UUU, UDD, UUD],
            EntanglementClass::WLike => &[DDD, UUU, UDD, UUD, UDU],
        }
    }

    fn allows(self, idx: usize) -> bool {
        self.components().contains(&idx)
            || (self == EntanglementClass::WLike && [DDU, DUD, UDD].contains(&idx))
    }
}

impl fmt::Display for EntanglementClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The eight amplitudes `a_ijk` with a class tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassCoefficients {
    amps: [Complex64; 8],
    class: EntanglementClass,
}

impl ClassCoefficients {
    pub fn new(amps: [Complex64; 8], class: EntanglementClass) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::CoefficientsNotNormalized { norm });
        }
        for (idx, a) in amps.iter().enumerate() {
            if *a != Complex64::new(0.0, 0.0) && !class.allows(idx) {
                return Err(Error::ClassSupport {
                    class: class.tag(),
                    component: COMPONENT_NAMES[idx],
                });
            }
        }
        Ok(ClassCoefficients { amps, class })
    }

    /// Class example state `α e^{iϑ/2}|↓↓↓⟩ + β e^{−iϑ/2}|↑↑↑⟩ + ξ|↑↓↓⟩ + …`
    /// from non-negative weights `[α, β, ξ, ζ, χ]` (as many as the class has
    /// components). The weights are normalized.
    pub fn class_state(class: EntanglementClass, weights: &[f64], vartheta: f64) -> Result<Self> {
        let comps = class.components();
        if weights.len() != comps.len() {
            return Err(Error::InvalidCoefficients(format!(
                "class {} takes {} coefficients, got {}",
                class,
                comps.len(),
                weights.len()
            )));
        }
        let norm = normalizer(weights)?;
        let mut amps = [Complex64::new(0.0, 0.0); 8];
        for (k, (&idx, &w)) in comps.iter().zip(weights).enumerate() {
            let phase = match (class, k) {
                (EntanglementClass::Separable, _) => 0.0,
                (_, 0) => vartheta / 2.0,
                (_, 1) => -vartheta / 2.0,
                _ => 0.0,
            };
            amps[idx] = Complex64::from_polar(w / norm, phase);
        }
        Self::new(amps, class)
    }

    /// `w₀ e^{iφ₀}|↓↓↑⟩ + w₁ e^{iφ₁}|↓↑↓⟩ + w₂ e^{iφ₂}|↑↓↓⟩`, normalized.
    pub fn w(weights: [f64; 3], phases: [f64; 3]) -> Result<Self> {
        let norm = normalizer(&weights)?;
        let mut amps = [Complex64::new(0.0, 0.0); 8];
        for ((idx, w), ph) in [DDU, DUD, UDD].into_iter().zip(weights).zip(phases) {
            amps[idx] = Complex64::from_polar(w / norm, ph);
        }
        Self::new(amps, EntanglementClass::WLike)
    }

    pub fn amplitudes(&self) -> &[Complex64; 8] {
        &self.amps
    }

    pub fn get(&self, i: Spin, j: Spin, k: Spin) -> Complex64 {
        self.amps[component_index(i, j, k)]
    }

    pub fn class(&self) -> EntanglementClass {
        self.class
    }

    /// `|a_↓↓↓|`.
    pub fn alpha(&self) -> f64 {
        self.amps[DDD].norm()
    }

    /// `|a_↑↑↑|`.
    pub fn beta(&self) -> f64 {
        self.amps[UUU].norm()
    }

    /// Probability of `spin` in `mode` (reduced single-mode population).
    pub fn marginal(&self, mode: Mode, spin: Spin) -> f64 {
        let bit = 2 - mode.index();
        self.amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx >> bit) & 1 == spin as usize)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

fn normalizer(weights: &[f64]) -> Result<f64> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidCoefficients(
            "weights must be finite and non-negative".into(),
        ));
    }
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidCoefficients("all weights are zero".into()));
    }
    Ok(norm)
}

/// `Σ a_ijk |i₀⟩⊗|j₁⟩⊗|k₂⟩`.
pub fn expand_state(c: &ClassCoefficients, subsets: &[ModeSubset; 3]) -> Result<FieldState> {
    for (i, s) in subsets.iter().enumerate() {
        if s.mode.index() != i {
            return Err(Error::InvalidCoefficients(format!(
                "subset {i} belongs to mode {}",
                s.mode
            )));
        }
        s.validate()?;
    }
    let mut terms = Vec::new();
    for i in Spin::BOTH {
        for j in Spin::BOTH {
            for k in Spin::BOTH {
                let a = c.get(i, j, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (n0, b0) in subsets[0].get(i) {
                    for (n1, b1) in subsets[1].get(j) {
                        for (n2, b2) in subsets[2].get(k) {
                            terms.push((FockLabel::new(*n0, *n1, *n2), a * b0 * b1 * b2));
                        }
                    }
                }
            }
        }
    }
    Ok(FieldState::from_terms(terms))
}

/// Three-tangle from the full Levi-Civita contraction
///
/// ```text
/// τ₃ = 2 |Σ a_ijk a_i'j'm a_npk' a_n'p'm' ε_ii' ε_jj' ε_kk' ε_mm' ε_nn' ε_pp'|
/// ```
pub fn tau3(c: &ClassCoefficients) -> f64 {
    let a = |i: usize, j: usize, k: usize| c.amps[4 * i + 2 * j + k];
    // ε_{x,1−x}: +1 for x = ↓, −1 for x = ↑; all other entries vanish
    let eps = |x: usize| if x == 0 { 1.0 } else { -1.0 };
    let mut sum = Complex64::new(0.0, 0.0);
    for idx in 0..64usize {
        let [i, j, k, m, n, p] = std::array::from_fn(|b| (idx >> b) & 1);
        let term = a(i, j, k) * a(1 - i, 1 - j, m) * a(n, p, 1 - k) * a(1 - n, 1 - p, 1 - m);
        sum += term * (eps(i) * eps(j) * eps(k) * eps(m) * eps(n) * eps(p));
    }
    2.0 * sum.norm()
}

/// `τ₃ = 4|αβ|²` for the class example states.
pub fn tau3_class(alpha: f64, beta: f64) -> f64 {
    4.0 * (alpha * beta).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Separable,
    GhzFock,
    WFock,
    GhzSuperposed,
    WSuperposed,
    Class21,
    Class22,
    Class23,
}

impl PresetName {
    pub const ALL: [PresetName; 8] = [
        PresetName::Separable,
        PresetName::GhzFock,
        PresetName::WFock,
        PresetName::GhzSuperposed,
        PresetName::WSuperposed,
        PresetName::Class21,
        PresetName::Class22,
        PresetName::Class23,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Separable => "separable",
            PresetName::GhzFock => "ghz_fock",
            PresetName::WFock => "w_fock",
            PresetName::GhzSuperposed => "ghz_superposed",
            PresetName::WSuperposed => "w_superposed",
            PresetName::Class21 => "class_2_1",
            PresetName::Class22 => "class_2_2",
            PresetName::Class23 => "class_2_3",
        }
    }

    pub fn class(self) -> EntanglementClass {
        match self {
            PresetName::Separable => EntanglementClass::Separable,
            PresetName::GhzFock | PresetName::GhzSuperposed => EntanglementClass::Ghz,
            PresetName::Class21 => EntanglementClass::TwoOne,
            PresetName::Class22 => EntanglementClass::TwoTwo,
            PresetName::Class23 | PresetName::WFock | PresetName::WSuperposed => {
                EntanglementClass::WLike
            }
        }
    }

    pub fn is_w(self) -> bool {
        matches!(self, PresetName::WFock | PresetName::WSuperposed)
    }

    /// Subset family used by this preset given the requested kind.
    pub fn subset_kind(self, requested: SubsetKind) -> SubsetKind {
        match self {
            PresetName::GhzFock | PresetName::WFock => SubsetKind::Fock,
            PresetName::GhzSuperposed => SubsetKind::Superposed,
            PresetName::WSuperposed => SubsetKind::WSuperposed,
            _ => requested,
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PresetName::ALL.iter().map(|p| p.as_str()).collect();
                format!(
                    "unknown preset `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Which two-state subset the Fock numbers are arranged in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubsetKind {
    /// `|↓_ℓ⟩ = |n_ℓ⟩`, `|↑_ℓ⟩ = |m_ℓ⟩` with `m = (n₀−1, n₁+2, n₂−1)`.
    Fock,
    /// Two-Fock superpositions arranged for the GHZ state.
    Superposed,
    /// Two-Fock superpositions arranged for the W state.
    WSuperposed,
}

impl SubsetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SubsetKind::Fock => "fock",
            SubsetKind::Superposed => "superposed",
            SubsetKind::WSuperposed => "w_superposed",
        }
    }
}

impl FromStr for SubsetKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fock" => Ok(SubsetKind::Fock),
            "superposed" => Ok(SubsetKind::Superposed),
            "w_superposed" => Ok(SubsetKind::WSuperposed),
            _ => Err(format!(
                "unknown subset kind `{s}` (expected fock, superposed or w_superposed)"
            )),
        }
    }
}

/// Inputs to [`preset`].
#[derive(Debug, Clone, PartialEq)]
pub struct PresetParams {
    /// Base photon numbers `n₀, n₁, n₂`.
    pub n: [u32; 3],
    /// Per-mode state phases `ϑ₀, ϑ₁, ϑ₂`; the interferometer sees their sum.
    pub vartheta: [f64; 3],
    /// Raw class weights `[α, β, ξ, ζ, χ]` (W presets: the three W weights).
    /// `None` selects equal weights. Normalized on use.
    pub weights: Option<Vec<f64>>,
    /// Component phases of the W-Fock state.
    pub w_phases: [f64; 3],
    /// Subset family for the separable and class presets.
    pub subsets: SubsetKind,
}

impl PresetParams {
    pub fn new(n: [u32; 3]) -> Self {
        PresetParams {
            n,
            vartheta: [0.0; 3],
            weights: None,
            w_phases: [0.0; 3],
            subsets: SubsetKind::Fock,
        }
    }

    pub fn total_vartheta(&self) -> f64 {
        self.vartheta.iter().sum()
    }
}

/// Subset recipe before photon-number offsets are applied: per mode, the
/// down and up states as `(photon number, amplitude)` with signed labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTemplate {
    pub modes: [ModeTemplate; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeTemplate {
    pub down: Vec<(i64, Complex64)>,
    pub up: Vec<(i64, Complex64)>,
}

impl ModeTemplate {
    pub fn label_count(&self) -> usize {
        self.down.len() + self.up.len()
    }

    /// Subset with `offsets[k]` added to the k-th label (down labels first).
    pub fn instantiate(&self, mode: Mode, offsets: &[i32]) -> Result<ModeSubset> {
        if offsets.len() != self.label_count() {
            return Err(Error::InvalidCoefficients(format!(
                "mode {mode} expects {} offsets, got {}",
                self.label_count(),
                offsets.len()
            )));
        }
        let shift = |v: &[(i64, Complex64)], offs: &[i32]| -> Result<ModeVector> {
            v.iter()
                .zip(offs)
                .map(|((n, a), o)| {
                    let label = n + i64::from(*o);
                    u32::try_from(label)
                        .map(|l| (l, *a))
                        .map_err(|_| Error::PhotonUnderflow {
                            mode: mode.index(),
                            label,
                        })
                })
                .collect()
        };
        let (od, ou) = offsets.split_at(self.down.len());
        ModeSubset::new(mode, shift(&self.down, od)?, shift(&self.up, ou)?)
    }
}

impl SubsetTemplate {
    pub fn build(kind: SubsetKind, n: [u32; 3], vartheta: [f64; 3]) -> Self {
        let n = n.map(i64::from);
        let h = FRAC_1_SQRT_2;
        let one = Complex64::new(1.0, 0.0);
        let p = |mag: f64, phase: f64| Complex64::from_polar(mag, phase);
        let modes = match kind {
            SubsetKind::Fock => {
                let m = [n[0] - 1, n[1] + 2, n[2] - 1];
                std::array::from_fn(|l| ModeTemplate {
                    down: vec![(n[l], one)],
                    up: vec![(m[l], one)],
                })
            }
            SubsetKind::Superposed => {
                // (down labels, up labels) relative to n_ℓ; second term carries e^{2iϑ_ℓ}
                let rel: [([i64; 2], [i64; 2]); 3] =
                    [([0, 2], [-1, 1]), ([0, -4], [2, -2]), ([0, 2], [-1, 1])];
                std::array::from_fn(|l| {
                    let (d, u) = rel[l];
                    let ph = 2.0 * vartheta[l];
                    ModeTemplate {
                        down: vec![(n[l] + d[0], p(h, 0.0)), (n[l] + d[1], p(h, ph))],
                        up: vec![(n[l] + u[0], p(h, 0.0)), (n[l] + u[1], p(h, ph))],
                    }
                })
            }
            SubsetKind::WSuperposed => {
                let rel: [([i64; 2], [i64; 2]); 3] =
                    [([0, -1], [1, -2]), ([0, 2], [-2, 4]), ([0, -1], [1, -2])];
                std::array::from_fn(|l| {
                    let (d, u) = rel[l];
                    let t = vartheta[l];
                    ModeTemplate {
                        down: vec![(n[l] + d[0], p(h, t / 2.0)), (n[l] + d[1], p(h, -t / 2.0))],
                        up: vec![(n[l] + u[0], p(h, 1.5 * t)), (n[l] + u[1], p(h, -1.5 * t))],
                    }
                })
            }
        };
        SubsetTemplate { modes }
    }

    pub fn label_counts(&self) -> [usize; 3] {
        std::array::from_fn(|l| self.modes[l].label_count())
    }

    pub fn instantiate(&self, offsets: &[Vec<i32>; 3]) -> Result<[ModeSubset; 3]> {
        let s0 = self.modes[0].instantiate(Mode::Zero, &offsets[0])?;
        let s1 = self.modes[1].instantiate(Mode::One, &offsets[1])?;
        let s2 = self.modes[2].instantiate(Mode::Two, &offsets[2])?;
        Ok([s0, s1, s2])
    }

    pub fn zero_offsets(&self) -> [Vec<i32>; 3] {
        std::array::from_fn(|l| vec![0; self.modes[l].label_count()])
    }
}

/// A fully specified initial field state.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub coefficients: ClassCoefficients,
    pub template: SubsetTemplate,
    pub subsets: [ModeSubset; 3],
}

impl Preset {
    pub fn state(&self) -> Result<FieldState> {
        expand_state(&self.coefficients, &self.subsets)
    }
}

/// Coefficients of a preset (without building subsets).
pub fn preset_coefficients(name: PresetName, params: &PresetParams) -> Result<ClassCoefficients> {
    let class = name.class();
    if name.is_w() {
        let w = match &params.weights {
            None => [1.0; 3],
            Some(v) if v.len() == 3 => [v[0], v[1], v[2]],
            Some(v) => {
                return Err(Error::InvalidCoefficients(format!(
                    "{name} takes 3 weights, got {}",
                    v.len()
                )))
            }
        };
        let phases = if name == PresetName::WFock {
            params.w_phases
        } else {
            [0.0; 3]
        };
        return ClassCoefficients::w(w, phases);
    }
    let count = class.components().len();
    let weights = params.weights.clone().unwrap_or_else(|| vec![1.0; count]);
    ClassCoefficients::class_state(class, &weights, params.total_vartheta())
}

pub fn preset(name: PresetName, params: &PresetParams) -> Result<Preset> {
    let coefficients = preset_coefficients(name, params)?;
    let template =
        SubsetTemplate::build(name.subset_kind(params.subsets), params.n, params.vartheta);
    let subsets = template.instantiate(&template.zero_offsets())?;
    Ok(Preset {
        name,
        coefficients,
        template,
        subsets,
    })
}
