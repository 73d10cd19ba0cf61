//! Exact sparse linear algebra over finite superpositions of three-mode Fock
//! states.
//!
//! A [`FieldState`] is a finite map from photon-number labels `|n0, n1, n2⟩`
//! to complex amplitudes. Every operator used by the interferometer shifts a
//! photon number by at most one per application, so finite inputs always give
//! finite outputs and no cutoff is ever applied.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::EXACT_TOL;

/// One of the three light-field modes, in pulse order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Zero,
    One,
    Two,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Zero, Mode::One, Mode::Two];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Mode> {
        Mode::ALL.get(i).copied()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Photon numbers of the three modes. Ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockLabel(pub [u32; 3]);

impl FockLabel {
    pub const fn new(n0: u32, n1: u32, n2: u32) -> Self {
        FockLabel([n0, n1, n2])
    }

    pub fn get(&self, mode: Mode) -> u32 {
        self.0[mode.index()]
    }

    pub fn with(mut self, mode: Mode, n: u32) -> Self {
        self.0[mode.index()] = n;
        self
    }
}

impl fmt::Display for FockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}⟩", self.0[0], self.0[1], self.0[2])
    }
}

/// Direction of a ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// `â`: `|n⟩ → √n |n−1⟩`.
    Lower,
    /// `â†`: `|n⟩ → √(n+1) |n+1⟩`.
    Raise,
}

/// Finite superposition of three-mode Fock states.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    terms: BTreeMap<FockLabel, Complex64>,
    prune_threshold: f64,
}

impl Default for FieldState {
    fn default() -> Self {
        Self::zero()
    }
}

impl FieldState {
    pub fn zero() -> Self {
        FieldState {
            terms: BTreeMap::new(),
            prune_threshold: 0.0,
        }
    }

    /// Single Fock state with unit amplitude.
    pub fn fock(label: FockLabel) -> Self {
        let mut s = Self::zero();
        s.accumulate(label, Complex64::new(1.0, 0.0));
        s
    }

    /// Builds a state by summing the given terms; repeated labels add up.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (FockLabel, Complex64)>,
    {
        let mut s = Self::zero();
        for (label, amp) in terms {
            s.accumulate(label, amp);
        }
        s
    }

    /// Drops every stored amplitude with magnitude at or below `threshold`,
    /// and keeps doing so for all states derived from this one.
    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold.max(0.0);
        let t = self.prune_threshold;
        self.terms.retain(|_, a| !Self::is_negligible(*a, t));
        self
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    fn is_negligible(a: Complex64, threshold: f64) -> bool {
        a == Complex64::new(0.0, 0.0) || a.norm() < threshold
    }

    fn empty_like(&self) -> Self {
        FieldState {
            terms: BTreeMap::new(),
            prune_threshold: self.prune_threshold,
        }
    }

    fn accumulate(&mut self, label: FockLabel, amp: Complex64) {
        let entry = self.terms.entry(label).or_insert(Complex64::new(0.0, 0.0));
        *entry += amp;
        if Self::is_negligible(*entry, self.prune_threshold) {
            self.terms.remove(&label);
        }
    }

    pub fn amplitude(&self, label: &FockLabel) -> Complex64 {
        self.terms.get(label).copied().unwrap_or_default()
    }

    /// Terms in canonical (lexicographic) label order.
    pub fn terms(&self) -> impl Iterator<Item = (&FockLabel, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= EXACT_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.empty_like();
        for (l, a) in &self.terms {
            out.accumulate(*l, a * c);
        }
        out
    }

    /// `⟨ψ| n̂_mode |ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn mean_photon_number(&self, mode: Mode) -> Result<f64> {
        let norm = self.norm_sqr();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let weighted: f64 = self
            .terms
            .iter()
            .map(|(l, a)| a.norm_sqr() * f64::from(l.get(mode)))
            .sum();
        Ok(weighted / norm)
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FieldState) -> Complex64 {
        inner_product(self, other)
    }
}

impl Add<&FieldState> for &FieldState {
    type Output = FieldState;

    fn add(self, rhs: &FieldState) -> FieldState {
        let mut out = self.clone();
        for (l, a) in &rhs.terms {
            out.accumulate(*l, *a);
        }
        out
    }
}

impl Sub<&FieldState> for &FieldState {
    type Output = FieldState;

    fn sub(self, rhs: &FieldState) -> FieldState {
        let mut out = self.clone();
        for (l, a) in &rhs.terms {
            out.accumulate(*l, -*a);
        }
        out
    }
}

impl Neg for &FieldState {
    type Output = FieldState;

    fn neg(self) -> FieldState {
        self.scaled(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &FieldState {
    type Output = FieldState;

    fn mul(self, rhs: Complex64) -> FieldState {
        self.scaled(rhs)
    }
}

impl fmt::Display for FieldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (l, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, l)?;
        }
        Ok(())
    }
}

/// `Σ conj(a[k]) · b[k]` over shared labels.
pub fn inner_product(a: &FieldState, b: &FieldState) -> Complex64 {
    // iterate the smaller map, look up in the larger
    let (small, large, conj_small) = if a.terms.len() <= b.terms.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    small
        .terms
        .iter()
        .filter_map(|(l, s)| {
            large.terms.get(l).map(|t| {
                if conj_small {
                    s.conj() * t
                } else {
                    t.conj() * s
                }
            })
        })
        .sum()
}

pub fn apply_ladder(state: &FieldState, mode: Mode, dir: Ladder) -> FieldState {
    let mut out = state.empty_like();
    for (l, a) in &state.terms {
        let n = l.get(mode);
        match dir {
            Ladder::Lower => {
                if n == 0 {
                    continue;
                }
                out.accumulate(l.with(mode, n - 1), a * f64::from(n).sqrt());
            }
            Ladder::Raise => {
                let up = n.checked_add(1).expect("photon number overflow");
                out.accumulate(l.with(mode, up), a * f64::from(up).sqrt());
            }
        }
    }
    out
}

/// Multiplies each amplitude by `f(n_mode)`. `f` returning `None` marks a
/// photon number outside its domain.
pub fn apply_number_diagonal<F>(state: &FieldState, mode: Mode, f: F) -> Result<FieldState>
where
    F: Fn(u32) -> Option<Complex64>,
{
    let mut out = state.empty_like();
    for (l, a) in &state.terms {
        let n = l.get(mode);
        let factor = f(n).ok_or(Error::UndefinedFactor {
            mode: mode.index(),
            n,
        })?;
        out.accumulate(*l, a * factor);
    }
    Ok(out)
}
