use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("momentum {l} outside grid range [-{m_max}, {m_max}]")]
    MomentumOutOfRange { l: i64, m_max: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("tail mass {mass:.3e} exceeds {threshold:.0e}; increase the momentum cutoff")]
    TailMass { mass: f64, threshold: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("resonance order r={r}, q={q} is not coprime")]
    NotCoprime { r: u64, q: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("multiplier is not unimodular (max deviation {0:.3e})")]
    NotUnimodular(f64),

    #[error("momentum variance vanishes; directionality ratio undefined")]
    UndefinedRatio,

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("perturbative sum has imaginary residual {imag:.3e} against real part {real:.3e}")]
    ImaginaryResidual { real: f64, imag: f64 },

    #[error("evolution aborted after kick {kick}: {cause}")]
    Aborted { kick: usize, cause: Box<Error> },
}
