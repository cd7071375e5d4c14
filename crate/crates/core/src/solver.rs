//! Projected over-relaxation for the discrete energy
//! `∫ ½|∇u|² + F_ε(u)` over `{u ≥ 0, u = φ on ∂Ω}` with continuation in ε.
//!
//! Each nodal update minimizes the energy with `F_ε` replaced by its tangent
//! at the current value. Since `F_ε` is concave the tangent majorizes it, so
//! every projected update with `ω ∈ (0, 2)` lowers the true discrete energy.
//! Nodes are visited in red–black order; nodes of one colour do not interact,
//! which makes the half-sweeps parallel without changing the result.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::freeboundary::FreeBoundarySet;
use crate::scaling::{positivity_threshold, regularized_derivative, regularized_energy, ForcingMode};

pub const DEFAULT_EPSILONS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
pub const DEFAULT_OMEGA: f64 = 1.7;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 500_000;

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub grid: Grid,
    /// Dirichlet data; only boundary nodes are read.
    pub boundary: ScalarField,
    pub mode: ForcingMode,
    pub epsilons: Vec<f64>,
    pub relax_omega: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Starting guess; zero inside when absent.
    pub initial: Option<ScalarField>,
}

impl ProblemSpec {
    pub fn new(boundary: ScalarField, mode: ForcingMode) -> Self {
        ProblemSpec {
            grid: boundary.grid().clone(),
            boundary,
            mode,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            relax_omega: DEFAULT_OMEGA,
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            initial: None,
        }
    }

    /// Uses the SOR parameter that is optimal for the Laplacian on this grid.
    pub fn with_optimal_omega(mut self) -> Self {
        self.relax_omega = optimal_omega(&self.grid);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.boundary.grid() != &self.grid {
            return Err(Error::InvalidSpec("boundary data lives on a different grid".into()));
        }
        if let Some(init) = &self.initial {
            if init.grid() != &self.grid {
                return Err(Error::InvalidSpec("initial guess lives on a different grid".into()));
            }
        }
        for k in boundary_nodes(&self.grid) {
            if self.boundary.values()[k] < 0.0 {
                return Err(Error::InvalidSpec(format!("negative boundary value at node {k}")));
            }
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidSpec("epsilon schedule must be non-empty and positive".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSpec("epsilon schedule must decrease".into()));
        }
        if !(self.relax_omega > 0.0 && self.relax_omega < 2.0) {
            return Err(Error::InvalidSpec(format!("relaxation {} outside (0, 2)", self.relax_omega)));
        }
        if !(self.tol > 0.0) || self.max_sweeps == 0 {
            return Err(Error::InvalidSpec("tol and max_sweeps must be positive".into()));
        }
        Ok(())
    }

    /// True when some boundary value reaches 1, where `-log u` changes sign.
    pub fn boundary_above_one(&self) -> bool {
        boundary_nodes(&self.grid).any(|k| self.boundary.values()[k] >= 1.0)
    }

    pub fn final_epsilon(&self) -> f64 {
        *self.epsilons.last().unwrap_or(&0.0)
    }
}

pub fn optimal_omega(grid: &Grid) -> f64 {
    let n = grid.counts()[0].max(grid.counts()[1]) as f64;
    2.0 / (1.0 + (std::f64::consts::PI / (n - 1.0)).sin())
}

fn boundary_nodes(grid: &Grid) -> impl Iterator<Item = usize> + '_ {
    (0..grid.len()).filter(move |&k| {
        let (i, j) = grid.coords(k);
        grid.is_boundary(i, j)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub final_energy: f64,
    pub sweeps_used: usize,
    pub residual: f64,
    pub kkt_violation: f64,
    pub epsilon_trace: Vec<(f64, f64)>,
    pub boundary_above_one: bool,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat `key=value` block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "final_energy={}", self.final_energy);
        let _ = writeln!(s, "sweeps_used={}", self.sweeps_used);
        let _ = writeln!(s, "residual={}", self.residual);
        let _ = writeln!(s, "kkt_violation={}", self.kkt_violation);
        let trace: Vec<String> = self.epsilon_trace.iter().map(|(e, en)| format!("{e}:{en}")).collect();
        let _ = writeln!(s, "epsilon_trace={}", trace.join(";"));
        let _ = writeln!(s, "boundary_above_one={}", self.boundary_above_one);
        s
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SweepStats {
    pub max_update: f64,
    pub energy_change: f64,
}

#[derive(Clone, Copy)]
struct Stencil {
    nx: usize,
    ny: usize,
    dim: usize,
    h2: f64,
    cell: f64,
    degree: f64,
}

impl Stencil {
    fn new(grid: &Grid) -> Self {
        let [nx, ny] = grid.counts();
        let h = grid.spacing();
        Stencil { nx, ny, dim: grid.dim(), h2: h * h, cell: h.powi(grid.dim() as i32), degree: 2.0 * grid.dim() as f64 }
    }

    fn rows(&self) -> std::ops::Range<usize> {
        if self.dim == 1 {
            0..1
        } else {
            1..self.ny - 1
        }
    }

    fn neighbour_sum(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let k = j * self.nx + i;
        let s = u[k - 1] + u[k + 1];
        if self.dim == 2 {
            s + u[k - self.nx] + u[k + self.nx]
        } else {
            s
        }
    }

    fn laplacian(&self, u: &[f64], i: usize, j: usize) -> f64 {
        (self.neighbour_sum(u, i, j) - self.degree * u[j * self.nx + i]) / self.h2
    }
}

/// Projected SOR state for one ε stage.
pub struct ProjectedSor<'a> {
    spec: &'a ProblemSpec,
    stencil: Stencil,
    values: Vec<f64>,
    scratch: Vec<f64>,
    eps: f64,
}

impl<'a> ProjectedSor<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let grid = &spec.grid;
        let mut values = match &spec.initial {
            Some(f) => f.values().iter().map(|v| v.max(0.0)).collect(),
            None => vec![0.0; grid.len()],
        };
        for k in boundary_nodes(grid) {
            values[k] = spec.boundary.values()[k];
        }
        let scratch = values.clone();
        Ok(ProjectedSor { spec, stencil: Stencil::new(grid), values, scratch, eps: spec.epsilons[0] })
    }

    pub fn set_epsilon(&mut self, eps: f64) {
        self.eps = eps;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn energy(&self) -> f64 {
        energy_of(&self.values, &self.spec.grid, self.spec.mode, self.eps)
    }

    /// One red–black sweep; returns the largest projected update and the exact
    /// energy change.
    pub fn sweep(&mut self) -> SweepStats {
        let mut stats = SweepStats::default();
        for colour in 0..2 {
            let s = self.half_sweep(colour);
            stats.max_update = stats.max_update.max(s.max_update);
            stats.energy_change += s.energy_change;
        }
        stats
    }

    fn half_sweep(&mut self, colour: usize) -> SweepStats {
        let st = self.stencil;
        let (omega, eps, mode) = (self.spec.relax_omega, self.eps, self.spec.mode);
        let u = &self.values;
        let rows = st.rows();
        let first = rows.start;
        let row_stats: Vec<SweepStats> = self.scratch[first * st.nx..rows.end * st.nx]
            .par_chunks_mut(st.nx)
            .enumerate()
            .map(|(r, out)| {
                let j = first + r;
                let mut s = SweepStats::default();
                let start = 1 + (j + 1 + colour) % 2;
                for i in (start..st.nx - 1).step_by(2) {
                    let k = j * st.nx + i;
                    let v = u[k];
                    let nb = st.neighbour_sum(u, i, j);
                    let target = (nb - st.h2 * regularized_derivative(v, eps, mode)) / st.degree;
                    let w = (v + omega * (target - v)).max(0.0);
                    out[i] = w;
                    s.max_update = s.max_update.max((w - v).abs());
                    s.energy_change += st.cell
                        * ((w - v) * (st.degree * (w + v) - 2.0 * nb) / (2.0 * st.h2)
                            + regularized_energy(w, eps, mode)
                            - regularized_energy(v, eps, mode));
                }
                s
            })
            .collect();
        self.values[first * st.nx..rows.end * st.nx]
            .par_chunks_mut(st.nx)
            .zip(self.scratch[first * st.nx..rows.end * st.nx].par_chunks(st.nx))
            .enumerate()
            .for_each(|(r, (dst, src))| {
                let j = first + r;
                let start = 1 + (j + 1 + colour) % 2;
                for i in (start..st.nx - 1).step_by(2) {
                    dst[i] = src[i];
                }
            });
        let mut total = SweepStats::default();
        for s in row_stats {
            total.max_update = total.max_update.max(s.max_update);
            total.energy_change += s.energy_change;
        }
        total
    }

    pub fn into_field(self) -> ScalarField {
        ScalarField::new(self.spec.grid.clone(), self.values).expect("iterates stay finite")
    }
}

/// Runs the continuation schedule to convergence.
pub fn solve(spec: &ProblemSpec) -> Result<(ScalarField, SolveReport)> {
    let mut sor = ProjectedSor::new(spec)?;
    let mut sweeps = 0usize;
    let mut last_update = f64::INFINITY;
    let mut trace = Vec::with_capacity(spec.epsilons.len());
    let n = spec.grid.len() as f64;
    for &eps in &spec.epsilons {
        sor.set_epsilon(eps);
        let start = sor.energy();
        let mut energy = start;
        loop {
            if sweeps >= spec.max_sweeps {
                return Err(Error::NonConvergence { max_sweeps: spec.max_sweeps, last_update });
            }
            let s = sor.sweep();
            sweeps += 1;
            last_update = s.max_update;
            let slack = 1e-11 * energy.abs() + 1e-14 * sor.stencil.cell * n;
            if s.energy_change > slack {
                return Err(Error::DivergingEnergy { eps, increase: s.energy_change });
            }
            energy += s.energy_change;
            if s.max_update < spec.tol {
                break;
            }
        }
        let end = sor.energy();
        if end > start + spec.tol {
            return Err(Error::DivergingEnergy { eps, increase: end - start });
        }
        trace.push((eps, end));
    }
    let eps = spec.final_epsilon();
    let field = sor.into_field();
    let report = SolveReport {
        final_energy: energy_of(field.values(), &spec.grid, spec.mode, eps),
        sweeps_used: sweeps,
        residual: last_update,
        kkt_violation: kkt_violation(&field, spec, eps),
        epsilon_trace: trace,
        boundary_above_one: spec.boundary_above_one(),
    };
    Ok((field, report))
}

/// Trapezoid weight of node index `i` among `n`.
fn trap(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        0.5
    } else {
        1.0
    }
}

fn energy_of(u: &[f64], grid: &Grid, mode: ForcingMode, eps: f64) -> f64 {
    let [nx, ny] = grid.counts();
    let h = grid.spacing();
    let cell = h.powi(grid.dim() as i32);
    let two_d = grid.dim() == 2;
    let rows: Vec<f64> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let wy = if two_d { trap(j, ny) } else { 1.0 };
            let mut acc = 0.0;
            for i in 0..nx {
                let k = j * nx + i;
                acc += trap(i, nx) * wy * regularized_energy(u[k], eps, mode);
                if i + 1 < nx {
                    let d = (u[k + 1] - u[k]) / h;
                    acc += wy * 0.5 * d * d;
                }
                if two_d && j + 1 < ny {
                    let d = (u[k + nx] - u[k]) / h;
                    acc += trap(i, nx) * 0.5 * d * d;
                }
            }
            acc
        })
        .collect();
    cell * rows.iter().sum::<f64>()
}

/// Trapezoid/midpoint discretization of `∫ ½|∇u|² + F_ε(u)`.
pub fn discrete_energy(u: &ScalarField, spec: &ProblemSpec, eps: f64) -> Result<f64> {
    if u.grid() != &spec.grid {
        return Err(Error::InvalidSpec("field and problem use different grids".into()));
    }
    if let Some(k) = u.values().iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeField(k));
    }
    if let Some(k) = boundary_nodes(&spec.grid).find(|&k| u.values()[k] != spec.boundary.values()[k]) {
        return Err(Error::BoundaryMismatch(k));
    }
    Ok(energy_of(u.values(), &spec.grid, spec.mode, eps))
}

fn interior(grid: &Grid) -> impl Iterator<Item = (usize, usize)> + '_ {
    let [nx, ny] = grid.counts();
    (0..ny).flat_map(move |j| (0..nx).map(move |i| (i, j))).filter(move |&(i, j)| !grid.is_boundary(i, j))
}

/// `max |min(u, h²/(2n)·(-Δ_h u + F_ε'(u)))|` over interior nodes.
pub fn kkt_violation(u: &ScalarField, spec: &ProblemSpec, eps: f64) -> f64 {
    let st = Stencil::new(&spec.grid);
    let v = u.values();
    interior(&spec.grid)
        .map(|(i, j)| {
            let k = spec.grid.index(i, j);
            let g = -st.laplacian(v, i, j) + regularized_derivative(v[k], eps, spec.mode);
            v[k].min(st.h2 / st.degree * g).abs()
        })
        .fold(0.0, f64::max)
}

/// Nodewise `|Δ_h u + log u|` (or `|Δ_h u - 1|`) on `{u > τ(h)}`, zero elsewhere.
pub fn residual_map(u: &ScalarField, spec: &ProblemSpec) -> ScalarField {
    let grid = u.grid();
    let st = Stencil::new(grid);
    let tau = positivity_threshold(grid.spacing());
    let v = u.values();
    let mut out = vec![0.0; grid.len()];
    for (i, j) in interior(grid) {
        let k = grid.index(i, j);
        if v[k] > tau {
            let lap = st.laplacian(v, i, j);
            out[k] = match spec.mode {
                ForcingMode::Logarithmic => (lap + v[k].ln()).abs(),
                ForcingMode::Constant => (lap - 1.0).abs(),
            };
        }
    }
    ScalarField::new(grid.clone(), out).expect("finite residuals")
}

/// Discrete harmonic function with the problem's boundary data, clipped at 0.
pub fn harmonic_extension(spec: &ProblemSpec) -> Result<ScalarField> {
    spec.validate()?;
    let grid = &spec.grid;
    let st = Stencil::new(grid);
    let omega = optimal_omega(grid);
    let mut u: Vec<f64> = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            if grid.is_boundary(i, j) {
                spec.boundary.values()[k]
            } else {
                0.0
            }
        })
        .collect();
    let nodes: Vec<(usize, usize)> = interior(grid).collect();
    for sweep in 0..spec.max_sweeps {
        let mut max_update: f64 = 0.0;
        for &(i, j) in &nodes {
            let k = grid.index(i, j);
            let target = st.neighbour_sum(&u, i, j) / st.degree;
            let d = omega * (target - u[k]);
            u[k] += d;
            max_update = max_update.max(d.abs());
        }
        if max_update < spec.tol {
            for v in u.iter_mut() {
                *v = v.max(0.0);
            }
            return ScalarField::new(grid.clone(), u);
        }
        if sweep + 1 == spec.max_sweeps {
            return Err(Error::NonConvergence { max_sweeps: spec.max_sweeps, last_update: max_update });
        }
    }
    unreachable!("max_sweeps is positive")
}

#[derive(Clone, Debug, Serialize)]
pub struct LogLipschitzReport {
    pub worst_ratio: f64,
    /// `(d, |∇u|/(d log(1/d)))` for every admissible node, ordered by node index.
    pub samples: Vec<(f64, f64)>,
}

impl LogLipschitzReport {
    /// Ratio spread `max/min` over samples with `d` in `[d_lo, d_hi]` and positive ratio.
    pub fn spread(&self, d_lo: f64, d_hi: f64) -> f64 {
        let r: Vec<f64> =
            self.samples.iter().filter(|(d, q)| *d >= d_lo && *d <= d_hi && *q > 0.0).map(|s| s.1).collect();
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

/// Largest `|∇u(x)| / (d log(1/d))`, `d` the distance to the free boundary,
/// over nodes with `h < d < 0.1`.
pub fn gradient_log_lipschitz_check(u: &ScalarField, fb: &FreeBoundarySet) -> Result<LogLipschitzReport> {
    if fb.points.is_empty() {
        return Err(Error::EmptyFreeBoundary);
    }
    let grid = u.grid();
    let h = grid.spacing();
    let grad = u.gradient()?;
    let (gx, gy) = grad.components();
    let samples: Vec<Option<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let p = grid.node_at(k);
            let d = fb
                .points
                .iter()
                .map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            if d > h && d < 0.1 {
                let g = (gx[k] * gx[k] + gy[k] * gy[k]).sqrt();
                Some((d, g / (d * (1.0 / d).ln())))
            } else {
                None
            }
        })
        .collect();
    let samples: Vec<(f64, f64)> = samples.into_iter().flatten().collect();
    let worst_ratio = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(LogLipschitzReport { worst_ratio, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_spec(lo: f64, hi: f64, n: usize, left: f64, right: f64, mode: ForcingMode) -> ProblemSpec {
        let grid = Grid::line(lo, (hi - lo) / (n - 1) as f64, n).unwrap();
        let mut v = vec![0.0; n];
        v[0] = left;
        v[n - 1] = right;
        ProblemSpec::new(ScalarField::new(grid, v).unwrap(), mode).with_optimal_omega()
    }

    #[test]
    fn zero_data_gives_zero() {
        for mode in [ForcingMode::Logarithmic, ForcingMode::Constant] {
            let grid = Grid::cube(2, 0.0, 1.0, 17).unwrap();
            let spec = ProblemSpec::new(ScalarField::zeros(grid), mode);
            let (u, rep) = solve(&spec).unwrap();
            assert!(u.values().iter().all(|&v| v == 0.0));
            assert_eq!(rep.final_energy, 0.0);
        }
    }

    #[test]
    fn classical_half_line() {
        let spec = line_spec(-1.0, 1.0, 1025, 0.0, 0.5, ForcingMode::Constant);
        let (u, rep) = solve(&spec).unwrap();
        let err = (0..1025)
            .map(|k| (u.values()[k] - 0.5 * u.grid().node_at(k)[0].max(0.0).powi(2)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "err {err}");
        assert!(rep.kkt_violation < 10.0 * spec.tol);
    }

    #[test]
    fn energy_never_increases_per_sweep() {
        let grid = Grid::cube(2, -0.5, 0.5, 33).unwrap();
        let b = ScalarField::from_fn(grid, |p| 0.2 * (p[0] + 0.5) * (1.0 + p[1])).unwrap();
        let spec = ProblemSpec::new(b, ForcingMode::Logarithmic);
        let mut sor = ProjectedSor::new(&spec).unwrap();
        for &eps in &spec.epsilons[..3] {
            sor.set_epsilon(eps);
            let mut e = sor.energy();
            for _ in 0..200 {
                let s = sor.sweep();
                let now = sor.energy();
                assert!(now <= e + 1e-14, "{now} > {e}");
                assert!((now - e - s.energy_change).abs() < 1e-10);
                e = now;
            }
            assert!(sor.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn energy_examples() {
        let grid = Grid::cube(2, -1.0, 1.0, 513).unwrap();
        let hs = ScalarField::from_fn(grid.clone(), |p| 0.5 * p[0].max(0.0).powi(2)).unwrap();
        let spec = ProblemSpec::new(hs.clone(), ForcingMode::Constant);
        let e = discrete_energy(&hs, &spec, 0.0).unwrap();
        assert!((e - 2.0 / 3.0).abs() < 1e-3, "{e}");

        let unit = Grid::cube(2, 0.0, 1.0, 65).unwrap();
        let one = ScalarField::from_fn(unit, |_| 1.0).unwrap();
        let spec = ProblemSpec::new(one.clone(), ForcingMode::Logarithmic);
        assert!((discrete_energy(&one, &spec, 0.0).unwrap() - 1.0).abs() < 1e-12);

        let zero = ScalarField::zeros(grid);
        let spec = ProblemSpec::new(zero.clone(), ForcingMode::Logarithmic);
        assert_eq!(discrete_energy(&zero, &spec, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn energy_rejects_infeasible_fields() {
        let grid = Grid::line(0.0, 0.25, 5).unwrap();
        let spec = ProblemSpec::new(ScalarField::zeros(grid.clone()), ForcingMode::Constant);
        let neg = ScalarField::new(grid.clone(), vec![0.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(discrete_energy(&neg, &spec, 0.0), Err(Error::NegativeField(1))));
        let off = ScalarField::new(grid, vec![0.0, 0.0, 0.0, 0.0, 0.1]).unwrap();
        assert!(matches!(discrete_energy(&off, &spec, 0.0), Err(Error::BoundaryMismatch(4))));
    }

    #[test]
    fn residual_of_constant_field() {
        let grid = Grid::cube(2, 0.0, 1.0, 9).unwrap();
        let e = ScalarField::from_fn(grid, |_| std::f64::consts::E).unwrap();
        let spec = ProblemSpec::new(e.clone(), ForcingMode::Logarithmic);
        let r = residual_map(&e, &spec);
        for (k, v) in r.values().iter().enumerate() {
            let (i, j) = r.grid().coords(k);
            let expected = if r.grid().is_boundary(i, j) { 0.0 } else { 1.0 };
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_residual_vanishes_off_interface() {
        let grid = Grid::cube(2, -1.0, 1.0, 129).unwrap();
        let hs = ScalarField::from_fn(grid, |p| 0.5 * p[0].max(0.0).powi(2)).unwrap();
        let spec = ProblemSpec::new(hs.clone(), ForcingMode::Constant);
        let r = residual_map(&hs, &spec);
        let h = hs.grid().spacing();
        for (k, v) in r.values().iter().enumerate() {
            if hs.grid().node_at(k)[0] > 1.5 * h {
                assert!(*v < 1e-6);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let grid = Grid::line(0.0, 0.25, 5).unwrap();
        let mut spec = ProblemSpec::new(ScalarField::zeros(grid), ForcingMode::Constant);
        spec.relax_omega = 2.0;
        assert!(matches!(solve(&spec), Err(Error::InvalidSpec(_))));
        spec.relax_omega = 1.5;
        spec.epsilons = vec![1e-3, 1e-2];
        assert!(matches!(solve(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn non_convergence_is_reported() {
        let mut spec = line_spec(0.0, 1.0, 257, 0.0, 0.4, ForcingMode::Logarithmic);
        spec.max_sweeps = 5;
        assert!(matches!(solve(&spec), Err(Error::NonConvergence { max_sweeps: 5, .. })));
    }

    #[test]
    fn report_text_is_flat() {
        let spec = line_spec(0.0, 1.0, 33, 0.0, 0.2, ForcingMode::Logarithmic);
        let (_, rep) = solve(&spec).unwrap();
        let txt = rep.to_text();
        assert!(txt.lines().all(|l| l.contains('=')));
        assert!(txt.starts_with("final_energy="));
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(json["sweeps_used"].as_u64().unwrap() as usize, rep.sweeps_used);
    }
}
