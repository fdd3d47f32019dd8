use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("invalid divisor: {0}")]
    InvalidDivisor(String),

    #[error("unsupported charge {0}: trajectories need 2σ to be an integer")]
    UnsupportedCharge(f64),

    #[error("result is not real (imaginary residue {0:e}); marked points are not conjugation-closed")]
    SymmetryViolation(f64),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("reference point {0} lies on a singularity")]
    InvalidReference(Complex64),

    #[error("point {point} is within {radius:e} of the singularity {singularity}")]
    TooCloseToSingularity {
        point: Complex64,
        singularity: Complex64,
        radius: f64,
    },

    #[error("launch direction {angle:.6} rad is not a separatrix at {point}")]
    BadLaunch { point: Complex64, angle: f64 },

    #[error("no interior-pointing separatrix at growth point {0}")]
    LaunchSelection(Complex64),

    #[error("winding about {0} is ill-defined: the polyline passes through it")]
    IllDefinedWinding(Complex64),

    #[error("map pole hit at {0}")]
    Pole(Complex64),

    #[error("invalid Möbius map: determinant {0:e} too small")]
    SingularMap(f64),

    #[error("driving points {first} and {second} collide near t in [{t_lo}, {t_hi}]")]
    Collision {
        first: usize,
        second: usize,
        t_lo: f64,
        t_hi: f64,
    },

    #[error("reverse Loewner flow left the half-plane at t = {0}")]
    InversionFailure(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
