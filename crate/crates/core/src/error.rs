use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("graph is not row-stochastic at vertex {vertex} (row sum {row_sum})")]
    NotStochastic { vertex: usize, row_sum: f64 },

    #[error("graph is not strongly connected (vertex {vertex} unreachable from 0)")]
    NotConnected { vertex: usize },

    #[error("detailed balance violated on edge ({from}, {to}): relative defect {defect:e}")]
    CycleInconsistency { from: usize, to: usize, defect: f64 },

    #[error("product graph would have {vertices} vertices, above the cap of {cap}")]
    TooLarge { vertices: usize, cap: usize },

    #[error("operator is not symmetrizable: asymmetry {asymmetry:e} relative to norm")]
    NonSymmetrizable { asymmetry: f64 },

    #[error("eigensolver did not converge (residual {residual:e})")]
    ConvergenceFailure { residual: f64 },

    #[error("z = {z} lies within {distance:e} of the spectrum of gamma*Laplacian")]
    PoleProximity { z: f64, distance: f64 },

    #[error("low-lying eigenvalues are degenerate (gap {gap:e})")]
    DegenerateLowStates { gap: f64 },

    #[error("eigenvalue E_{index} = {energy} lies on the spectrum of gamma*Laplacian")]
    EigenvalueOnSpectrum { index: usize, energy: f64 },

    #[error("no sign change of the {which} criterion in [{gamma_min}, {gamma_max}]")]
    NoRootInRange {
        which: &'static str,
        gamma_min: f64,
        gamma_max: f64,
    },

    #[error("E_0 + E_1 = {sum:e} at gamma = {gamma}; not at gamma_E")]
    NotAtGammaE { gamma: f64, sum: f64 },

    #[error("target vertex {target} out of range for {n} vertices")]
    TargetOutOfRange { target: usize, n: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceFailure { .. }
                | Error::PoleProximity { .. }
                | Error::DegenerateLowStates { .. }
                | Error::EigenvalueOnSpectrum { .. }
                | Error::NoRootInRange { .. }
                | Error::NotAtGammaE { .. }
                | Error::NonSymmetrizable { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
