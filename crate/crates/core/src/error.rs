use thiserror::Error;

/// Errors raised by the scattering, decomposition, packet and clock routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("segment width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("potential needs at least one segment")]
    EmptyPotential,
    #[error("potential is not symmetric about its midpoint (max mismatch {mismatch:e})")]
    AsymmetricPotential { mismatch: f64 },
    #[error("non-finite value in potential definition")]
    NonFinitePotential,
    #[error("energy must be strictly positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("transfer matrix overflowed (|M22| = {magnitude:e}); barrier too opaque")]
    Overflow { magnitude: f64 },
    #[error("scattering system is numerically singular")]
    SolveSingular,
    #[error("T + R = {sum} deviates from 1")]
    NotNormalized { sum: f64 },
    #[error("no amplitude root gives an odd reflection state (midpoint residuals {residual_plus:e}, {residual_minus:e})")]
    OddSelectionFailed {
        residual_plus: f64,
        residual_minus: f64,
    },
    #[error("spectrum domain invalid: {0}")]
    SpectrumDomainError(String),
    #[error("invalid packet: {0}")]
    InvalidPacket(String),
    #[error("grid too coarse: estimated quadrature error {estimate:e}")]
    GridTooCoarse { estimate: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("component has zero norm")]
    ZeroNorm,
    #[error("probability {mass:e} accumulated near a hard wall")]
    BoundaryContamination { mass: f64 },
    #[error("fields are sampled on different grids")]
    GridMismatch,
    #[error("sub-process has zero incident flux at this energy")]
    ZeroFlux,
    #[error("invalid clock configuration: {0}")]
    InvalidClock(String),
    #[error("Larmor extrapolation diverged (residuals {residuals:?})")]
    ExtrapolationDiverged { residuals: Vec<f64> },
    #[error("readout requested while sub-packets still overlap (|overlap| = {overlap:e}, threshold {threshold:e})")]
    PrematureReadout { overlap: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
