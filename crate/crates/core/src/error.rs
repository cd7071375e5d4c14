use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid needs at least 3 nodes per axis")]
    GridTooSmall,
    #[error("field contains non-finite value at node {0}")]
    NonFinite(usize),
    #[error("point ({0}, {1}) lies outside the grid hull")]
    OutOfDomain(f64, f64),
    #[error("ball of radius {radius} around ({x}, {y}) is not contained in the domain")]
    BallOutsideDomain { x: f64, y: f64, radius: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidQuadrature(String),
    #[error("negative input {0}")]
    NegativeInput(f64),
    #[error("radius {0} outside (0, 1)")]
    RadiusOutOfRange(f64),
    #[error("field does not match the boundary data at node {0}")]
    BoundaryMismatch(usize),
    #[error("field is negative at node {0}")]
    NegativeField(usize),
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("no convergence within {max_sweeps} sweeps (last update {last_update:e})")]
    NonConvergence { max_sweeps: usize, last_update: f64 },
    #[error("energy increased by {increase:e} during stage eps = {eps:e}")]
    DivergingEnergy { eps: f64, increase: f64 },
    #[error("free boundary is empty")]
    EmptyFreeBoundary,
    #[error("({0}, {1}) is not within tolerance of the extracted free boundary")]
    NotAFreeBoundaryPoint(f64, f64),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("profile does not cover the unit ball")]
    DomainTooSmall,
    #[error("energy gap {gap:e} at r = {radius} is negative beyond tolerance")]
    NonPositiveEnergyGap { radius: f64, gap: f64 },
    #[error("decay fit needs at least 4 radii spanning a factor of 4")]
    InsufficientRadii,
    #[error("seed abscissa {x_seed} is outside the range of the asymptotic expansion (residual {residual:e})")]
    SeedTooLarge { x_seed: f64, residual: f64 },
    #[error("profile reached 1 at x = {0} before x_max")]
    BlowThrough(f64),
    #[error("abscissa {0} outside the oracle range")]
    OutOfRange(f64),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
