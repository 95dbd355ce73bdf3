use thiserror::Error;

/// Errors produced by lattice construction, geometry, analysis and protocols.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rho must be >= 1 (got {0})")]
    RhoTooSmall(f64),
    #[error("rho*cos(theta) must lie in [0, 1/2] (got {0})")]
    SkewOutOfRange(f64),
    #[error("theta must lie in (0, pi) so the basis has positive height (got {0})")]
    ThetaOutOfRange(f64),
    #[error("alpha must be positive and finite (got {0})")]
    BadScale(f64),
    #[error("lattice parameter is not finite")]
    NonFiniteParameter,
    #[error("offset ({0}, {1}) lies outside the fundamental rectangle")]
    OffsetOutsideCell(f64, f64),
    #[error("d1 = {d1} outside the valid range (0, {max}]")]
    D1OutOfRange { d1: f64, max: f64 },
    #[error("operation requires an offset from the vertical d1 family")]
    OffsetNotVertical,
    #[error("rectangular lattice: the Babai and Voronoi partitions coincide and the rate/error constant degenerates")]
    RectangularDegenerate,
    #[error("stage-II rate {rate} bits is too small to give every slanted subinterval a bin")]
    RateTooSmall { rate: f64 },
    #[error("subinterval {index} has positive length but no bins")]
    MissingBins { index: i8 },
    #[error("protocol order {0} does not apply here")]
    WrongOrder(&'static str),
    #[error("bit exchange exceeded {0} rounds; the input lies on a cell boundary")]
    MaxRoundsExceeded(u32),
    #[error(
        "zero-error protocol decoded u = {got:?} but the nearest point is u = {want:?} at x = ({x1}, {x2})"
    )]
    ZeroErrorViolation {
        x1: f64,
        x2: f64,
        got: [i64; 2],
        want: [i64; 2],
    },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
