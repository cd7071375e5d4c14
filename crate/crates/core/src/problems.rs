//! Standard problem setups with known solutions.

use crate::error::Result;
use crate::fields::{Grid, ScalarField};
use crate::oracle1d::OracleSolution1D;
use crate::scaling::ForcingMode;
use crate::solver::ProblemSpec;

/// Classical problem on `[-1, 1]` with data 0 and ½; solution `½ max(x, 0)²`.
pub fn classical_line(n: usize) -> Result<ProblemSpec> {
    let grid = Grid::cube(1, -1.0, 1.0, n)?;
    let mut v = vec![0.0; n];
    v[n - 1] = 0.5;
    Ok(ProblemSpec::new(ScalarField::new(grid, v)?, ForcingMode::Constant).with_optimal_omega())
}

/// Logarithmic problem on `[0, x_max]` with the oracle value at the right end.
pub fn singular_line(oracle: &OracleSolution1D, n: usize) -> Result<ProblemSpec> {
    let grid = Grid::cube(1, 0.0, oracle.x_max, n)?;
    let mut v = vec![0.0; n];
    v[n - 1] = oracle.value(oracle.x_max)?;
    Ok(ProblemSpec::new(ScalarField::new(grid, v)?, ForcingMode::Logarithmic).with_optimal_omega())
}

/// Logarithmic problem on `[-x_max, x_max]²` whose boundary data and starting
/// guess are the oracle profile extended constantly in `x₂`. The free
/// boundary is the line `x₁ = 0`.
pub fn planar(oracle: &OracleSolution1D, n: usize) -> Result<ProblemSpec> {
    let l = oracle.x_max;
    let grid = Grid::cube(2, -l, l, n)?;
    let ext = oracle.planar_extension(&grid)?;
    let mut spec = ProblemSpec::new(ext.clone(), ForcingMode::Logarithmic).with_optimal_omega();
    spec.initial = Some(ext);
    spec.epsilons = vec![1e-8];
    Ok(spec)
}
