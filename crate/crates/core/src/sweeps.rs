//! Residual-entanglement scans, photon-offset optimization and fringe scans.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::entangled::{
    expand_state, preset, preset_coefficients, tau3, ClassCoefficients, EntanglementClass,
    ModeSubset, PresetName, PresetParams, SubsetKind, SubsetTemplate,
};
use crate::error::{Error, Result};
use crate::fock::{FieldState, FockLabel, Mode};
use crate::interferometer::{
    evaluate, signal, OverlapTriple, SignalResult, LOWER_PATH, UPPER_PATH,
};
use crate::pulses::{PulseSetup, PulseTriple};
use crate::EXACT_TOL;

/// Largest number of deduplicated offset combinations the optimizer will
/// evaluate.
pub const MAX_COMBINATIONS: u128 = 50_000_000;

const CHUNK: usize = 1 << 14;

/// A preset whose coefficients are tuned continuously along τ₃.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Family {
    pub preset: PresetName,
    /// Subset kind requested for the separable and class presets.
    pub subsets: SubsetKind,
}

impl Family {
    pub fn new(preset: PresetName) -> Self {
        Family {
            preset,
            subsets: SubsetKind::Fock,
        }
    }

    pub fn with_subsets(mut self, subsets: SubsetKind) -> Self {
        self.subsets = subsets;
        self
    }

    pub fn subset_kind(&self) -> SubsetKind {
        self.preset.subset_kind(self.subsets)
    }

    /// Description of the τ₃ → coefficient inversion.
    pub fn inversion_path(&self) -> &'static str {
        match self.preset.class() {
            EntanglementClass::Ghz => "beta^2 = (1 - sqrt(1 - tau3))/2, alpha^2 = 1 - beta^2",
            EntanglementClass::TwoOne | EntanglementClass::TwoTwo => {
                "alpha = beta = (sqrt(tau3)/2)^(1/2), remaining k coefficients equal with gamma^2 = (1 - sqrt(tau3))/k"
            }
            EntanglementClass::WLike if !self.preset.is_w() => {
                "alpha = beta = (sqrt(tau3)/2)^(1/2), remaining k coefficients equal with gamma^2 = (1 - sqrt(tau3))/k"
            }
            _ => "fixed coefficients, tau3 = 0 only",
        }
    }

    /// Coefficient weights reaching `tau3`; `None` keeps the preset default.
    pub fn weights_for_tau3(&self, tau3: f64) -> Result<Option<Vec<f64>>> {
        let unreachable = || Error::UnreachableTau3 {
            family: self.preset.to_string(),
            tau3,
        };
        if !(0.0..=1.0).contains(&tau3) {
            return Err(unreachable());
        }
        let class = self.preset.class();
        if self.preset.is_w() || class == EntanglementClass::Separable {
            return if tau3.abs() <= EXACT_TOL {
                Ok(None)
            } else {
                Err(unreachable())
            };
        }
        if class == EntanglementClass::Ghz {
            let beta2 = 0.5 * (1.0 - (1.0 - tau3).sqrt());
            return Ok(Some(vec![(1.0 - beta2).sqrt(), beta2.sqrt()]));
        }
        let k = (class.components().len() - 2) as f64;
        let ab = (0.5 * tau3.sqrt()).sqrt();
        let gamma = ((1.0 - tau3.sqrt()) / k).max(0.0).sqrt();
        let mut w = vec![ab, ab];
        w.resize(class.components().len(), gamma);
        Ok(Some(w))
    }

    /// `base` with the coefficients for `tau3`.
    pub fn params_for_tau3(&self, base: &PresetParams, tau3: f64) -> Result<PresetParams> {
        let mut p = base.clone();
        p.subsets = self.subsets;
        if let Some(w) = self.weights_for_tau3(tau3)? {
            p.weights = Some(w);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub family: Family,
    /// Photon numbers and state phases; the weights are overwritten per point.
    pub base: PresetParams,
    /// Target τ₃ values, strictly increasing in `[0, 1]`.
    pub grid: Vec<f64>,
    pub pulses: PulseSetup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    /// Requested τ₃.
    pub tau3: f64,
    /// τ₃ of the coefficients actually built.
    pub tau3_measured: f64,
    pub signal: SignalResult,
}

fn check_tau3_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("tau3 grid is empty".into()));
    }
    if let Some(t) = grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidGrid(format!("tau3 value {t} outside [0, 1]")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(
            "tau3 grid is not strictly increasing".into(),
        ));
    }
    Ok(())
}

fn run_preset(
    name: PresetName,
    params: &PresetParams,
    setup: &PulseSetup,
) -> Result<(ClassCoefficients, SignalResult)> {
    let p = preset(name, params)?;
    let psi = p.state()?;
    let pulses = setup.build(&psi)?;
    Ok((p.coefficients, evaluate(&psi, &pulses)?))
}

pub fn tau3_scan(spec: &ScanSpec) -> Result<Vec<ScanPoint>> {
    check_tau3_grid(&spec.grid)?;
    spec.grid
        .par_iter()
        .map(|&t| {
            let params = spec.family.params_for_tau3(&spec.base, t)?;
            let (c, signal) = run_preset(spec.family.preset, &params, &spec.pulses)?;
            Ok(ScanPoint {
                tau3: t,
                tau3_measured: tau3(&c),
                signal,
            })
        })
        .collect()
}

/// Inclusive integer range applied to every subset Fock label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OffsetBounds {
    pub lo: i32,
    pub hi: i32,
}

impl OffsetBounds {
    pub fn new(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi || lo > 0 || hi < 0 {
            return Err(Error::InvalidGrid(format!(
                "offset bounds {lo}:{hi} must satisfy lo <= 0 <= hi"
            )));
        }
        Ok(OffsetBounds { lo, hi })
    }

    pub fn symmetric(k: u32) -> Self {
        let k = k.min(i32::MAX as u32) as i32;
        OffsetBounds { lo: -k, hi: k }
    }

    fn width(&self) -> i64 {
        i64::from(self.hi) - i64::from(self.lo) + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub tau3: f64,
    pub best_visibility: f64,
    /// Offsets added to each subset Fock label, per mode, down labels first.
    pub best_offsets: [Vec<i32>; 3],
    /// Offset combinations evaluated after removing equivalent ones.
    pub evaluations: u64,
    /// Visibility with all offsets zero, if that configuration is admissible.
    pub preset_visibility: Option<f64>,
    /// Full engine result at the optimum.
    pub signal: SignalResult,
}

/// `⟨O_l y|O_l x⟩`, `⟨O_u y|O_u x⟩`, `⟨O_l y|O_u x⟩` for one mode, indexed `[y][x]`.
#[derive(Debug, Clone, Copy)]
struct ModeMatrices {
    ll: [[Complex64; 2]; 2],
    uu: [[Complex64; 2]; 2],
    lu: [[Complex64; 2]; 2],
}

impl ModeMatrices {
    fn key(&self) -> Vec<i64> {
        let q = |x: f64| (x / EXACT_TOL).round() as i64;
        [self.ll, self.uu, self.lu]
            .iter()
            .flat_map(|m| m.iter().flatten())
            .flat_map(|z| [q(z.re), q(z.im)])
            .collect()
    }
}

fn embed(mode: Mode, v: &BTreeMap<u32, Complex64>) -> FieldState {
    FieldState::from_terms(
        v.iter()
            .map(|(n, a)| (FockLabel::new(0, 0, 0).with(mode, *n), *a)),
    )
}

fn mode_matrices(s: &ModeSubset, pulses: &PulseTriple) -> Result<ModeMatrices> {
    let mode = s.mode();
    let l = mode.index();
    let mut lower = Vec::with_capacity(2);
    let mut upper = Vec::with_capacity(2);
    for spin in crate::entangled::Spin::BOTH {
        let v = embed(mode, s.get(spin));
        lower.push(pulses.apply(mode, LOWER_PATH[l], &v)?);
        upper.push(pulses.apply(mode, UPPER_PATH[l], &v)?);
    }
    let m = |a: &[FieldState], b: &[FieldState]| -> [[Complex64; 2]; 2] {
        std::array::from_fn(|y| std::array::from_fn(|x| a[y].inner(&b[x])))
    };
    Ok(ModeMatrices {
        ll: m(&lower, &lower),
        uu: m(&upper, &upper),
        lu: m(&lower, &upper),
    })
}

fn distinct_labels(s: &ModeSubset, count: usize) -> bool {
    let mut labels: Vec<u32> = s.labels().collect();
    labels.sort_unstable();
    labels.dedup();
    labels.len() == count
}

/// Admissible offset tuples of one mode with their matrices, one
/// representative (the lexicographically smallest) per distinct matrix set.
fn mode_candidates(
    template: &SubsetTemplate,
    mode: Mode,
    bounds: OffsetBounds,
    c: &ClassCoefficients,
    setup: &PulseSetup,
) -> Result<Vec<(Vec<i32>, ModeMatrices)>> {
    let mt = &template.modes[mode.index()];
    let k = mt.label_count();
    let total = (bounds.width() as u128)
        .checked_pow(k as u32)
        .unwrap_or(u128::MAX);
    if total > MAX_COMBINATIONS {
        return Err(Error::SearchTooLarge {
            combinations: total,
        });
    }
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    let mut offsets = vec![bounds.lo; k];
    loop {
        if let Ok(s) = mt.instantiate(mode, &offsets) {
            if distinct_labels(&s, k) {
                let mean = |m: Mode| -> Result<f64> {
                    Ok(crate::entangled::Spin::BOTH
                        .iter()
                        .map(|&sp| c.marginal(m, sp) * s.mean_photon_number(sp))
                        .sum())
                };
                let nbar = setup.default_nbar(|m| if m == mode { mean(m) } else { Ok(1.0) })?;
                let pulses = PulseTriple::standard(setup.eval_mode, nbar, setup.coupling_phases)?;
                let mats = mode_matrices(&s, &pulses)?;
                if seen.insert(mats.key(), ()).is_none() {
                    out.push((offsets.clone(), mats));
                }
            }
        }
        // next tuple in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if offsets[i] < bounds.hi {
                offsets[i] += 1;
                offsets[i + 1..].iter_mut().for_each(|o| *o = bounds.lo);
                break;
            }
        }
    }
}

fn combine(c: &ClassCoefficients, m: [&ModeMatrices; 3]) -> OverlapTriple {
    let a = c.amplitudes();
    let mut ll = Complex64::new(0.0, 0.0);
    let mut uu = Complex64::new(0.0, 0.0);
    let mut lu = Complex64::new(0.0, 0.0);
    for (y, ay) in a.iter().enumerate() {
        if *ay == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (x, ax) in a.iter().enumerate() {
            if *ax == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = ay.conj() * ax;
            let bit = |z: usize, l: usize| (z >> (2 - l)) & 1;
            let prod = |f: &dyn Fn(&ModeMatrices) -> [[Complex64; 2]; 2]| -> Complex64 {
                (0..3).map(|l| f(m[l])[bit(y, l)][bit(x, l)]).product()
            };
            ll += w * prod(&|mm| mm.ll);
            uu += w * prod(&|mm| mm.uu);
            lu += w * prod(&|mm| mm.lu);
        }
    }
    OverlapTriple {
        o_ll: ll.re,
        o_uu: uu.re,
        o_lu: lu,
    }
}

/// `true` if candidate `a` should replace incumbent `b`.
fn better(a: (f64, usize), b: Option<(f64, usize)>) -> bool {
    match b {
        None => true,
        Some(b) => a.0 > b.0 + EXACT_TOL || ((a.0 - b.0).abs() <= EXACT_TOL && a.1 < b.1),
    }
}

fn evaluate_offsets(
    c: &ClassCoefficients,
    template: &SubsetTemplate,
    offsets: &[Vec<i32>; 3],
    setup: &PulseSetup,
) -> Result<SignalResult> {
    let subsets = template.instantiate(offsets)?;
    let psi = expand_state(c, &subsets)?;
    let pulses = setup.build(&psi)?;
    evaluate(&psi, &pulses)
}

/// Exhaustive search over integer offsets of every subset Fock label.
pub fn optimize_offsets(
    family: &Family,
    base: &PresetParams,
    tau3_target: f64,
    bounds: OffsetBounds,
    setup: &PulseSetup,
) -> Result<OptResult> {
    OffsetBounds::new(bounds.lo, bounds.hi)?;
    let params = family.params_for_tau3(base, tau3_target)?;
    let c = preset_coefficients(family.preset, &params)?;
    let template = SubsetTemplate::build(family.subset_kind(), params.n, params.vartheta);

    let cands: Vec<_> = Mode::ALL
        .iter()
        .map(|&m| mode_candidates(&template, m, bounds, &c, setup))
        .collect::<Result<_>>()?;
    if cands.iter().any(|v| v.is_empty()) {
        return Err(Error::EmptyAdmissibleSet);
    }
    let sizes = [cands[0].len(), cands[1].len(), cands[2].len()];
    let total = sizes.iter().map(|&s| s as u128).product::<u128>();
    if total > MAX_COMBINATIONS {
        return Err(Error::SearchTooLarge {
            combinations: total,
        });
    }
    let total = total as usize;
    let pick = |idx: usize| {
        [
            idx / (sizes[1] * sizes[2]),
            (idx / sizes[2]) % sizes[1],
            idx % sizes[2],
        ]
    };

    // fixed chunking keeps the reduction independent of the worker count
    let chunk_best: Vec<Option<(f64, usize)>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ch| {
            let mut best = None;
            for idx in ch * CHUNK..((ch + 1) * CHUNK).min(total) {
                let [i, j, k] = pick(idx);
                let ov = combine(&c, [&cands[0][i].1, &cands[1][j].1, &cands[2][k].1]);
                if let Ok(s) = signal(&ov, 0.0) {
                    if better((s.visibility, idx), best) {
                        best = Some((s.visibility, idx));
                    }
                }
            }
            best
        })
        .collect();
    let mut best = None;
    for cand in chunk_best.into_iter().flatten() {
        if better(cand, best) {
            best = Some(cand);
        }
    }
    let (_, idx) = best.ok_or(Error::EmptyAdmissibleSet)?;
    let [i, j, k] = pick(idx);
    let mut best_offsets = [
        cands[0][i].0.clone(),
        cands[1][j].0.clone(),
        cands[2][k].0.clone(),
    ];
    let mut best_signal = evaluate_offsets(&c, &template, &best_offsets, setup)?;

    let zero = template.zero_offsets();
    let preset_signal = evaluate_offsets(&c, &template, &zero, setup).ok();
    if let Some(ps) = preset_signal {
        let take = ps.visibility > best_signal.visibility + EXACT_TOL
            || ((ps.visibility - best_signal.visibility).abs() <= EXACT_TOL && zero < best_offsets);
        if take {
            best_offsets = zero;
            best_signal = ps;
        }
    }
    Ok(OptResult {
        tau3: tau3(&c),
        best_visibility: best_signal.visibility,
        best_offsets,
        evaluations: total as u64,
        preset_visibility: preset_signal.map(|s| s.visibility),
        signal: best_signal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    pub vartheta: f64,
    pub intensity: f64,
}

/// Ground-state intensity with the state phase shifted by each grid value.
/// The shift is added to `ϑ₀`.
pub fn fringe_scan(
    name: PresetName,
    params: &PresetParams,
    setup: &PulseSetup,
    grid: &[f64],
) -> Result<Vec<FringePoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("fringe grid is empty".into()));
    }
    grid.par_iter()
        .map(|&t| {
            let mut p = params.clone();
            p.vartheta[0] += t;
            let (_, s) = run_preset(name, &p, setup)?;
            Ok(FringePoint {
                vartheta: t,
                intensity: s.intensity(0.0),
            })
        })
        .collect()
}
