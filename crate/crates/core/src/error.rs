use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("number-diagonal factor undefined for n = {n} in mode {mode}")]
    UndefinedFactor { mode: usize, n: u32 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("invalid pulse parameter `{field}` = {value}")]
    InvalidPulse { field: &'static str, value: f64 },

    #[error("ideal limit requires a pulse area of pi/2 or pi, got {area} on mode {mode}")]
    NonIdealPulseArea { mode: usize, area: f64 },

    #[error("pulse triple must contain exactly one pulse per mode in order 0, 1, 2")]
    PulseModes,

    #[error("no surviving population: both interfering branches are extinguished")]
    NoSurvivingPopulation,

    #[error("subset state `{which}` of mode {mode} has norm {norm}, expected 1")]
    SubsetNotNormalized {
        mode: usize,
        which: &'static str,
        norm: f64,
    },

    #[error("subset states of mode {mode} are not orthogonal (overlap magnitude {overlap})")]
    SubsetNotOrthogonal { mode: usize, overlap: f64 },

    #[error("class coefficients have norm {norm}, expected 1")]
    CoefficientsNotNormalized { norm: f64 },

    #[error("component {component} is not allowed for class {class}")]
    ClassSupport {
        class: &'static str,
        component: &'static str,
    },

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("photon-number underflow: mode {mode} would need label {label}")]
    PhotonUnderflow { mode: usize, label: i64 },

    #[error("tau3 = {tau3} is not reachable by the {family} family")]
    UnreachableTau3 { family: String, tau3: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no admissible photon-offset configuration within the bounds")]
    EmptyAdmissibleSet,

    #[error("offset search too large ({combinations} combinations)")]
    SearchTooLarge { combinations: u128 },
}

impl Error {
    /// Errors caused by an inconsistent run configuration rather than by the
    /// physics of a particular state.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidPulse { .. }
                | Error::NonIdealPulseArea { .. }
                | Error::PulseModes
                | Error::InvalidGrid(_)
                | Error::InvalidCoefficients(_)
        )
    }
}
