//! Mach-Zehnder light-pulse atom interferometer whose three atom-optical
//! pulses are quantized, possibly entangled light fields.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: exact sparse superpositions of three-mode Fock states.
//! - [`pulses`]: field-space matrix elements of the Jaynes-Cummings
//!   scattering operator for each pulse.
//! - [`interferometer`]: branch operators, the three overlap expectation
//!   values (two independent backends), visibility, phase and fringes.
//! - [`entangled`]: two-state subsets, GHZ/W/class states, the three-tangle.
//! - [`sweeps`]: residual-entanglement scans, photon-offset optimization and
//!   fringe scans.
//! - [`selftest`]: seeded randomized consistency checks.

pub mod entangled;
pub mod error;
pub mod fock;
pub mod interferometer;
pub mod pulses;
pub mod selftest;
pub mod sweeps;

pub use entangled::{
    expand_state, preset, tau3, tau3_class, ClassCoefficients, EntanglementClass, ModeSubset,
    Preset, PresetName, PresetParams, Spin, SubsetKind, SubsetTemplate,
};
pub use error::{Error, Result};
pub use fock::{
    apply_ladder, apply_number_diagonal, inner_product, FieldState, FockLabel, Ladder, Mode,
};
pub use interferometer::{
    branch_states, fringe, overlap_via_branches, overlap_via_products, signal, BranchStates,
    OverlapTriple, SignalResult,
};
pub use num_complex::Complex64;
pub use pulses::{
    scattering_element, trig_factor, EvalMode, PulseParams, PulseSetup, PulseTriple,
    ScatteringElement, TrigKind,
};
pub use sweeps::{
    fringe_scan, optimize_offsets, tau3_scan, Family, FringePoint, OffsetBounds, OptResult,
    ScanPoint, ScanSpec,
};

/// Tolerance used for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

/// Engine version recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
