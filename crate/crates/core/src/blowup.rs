//! Blow-up rescalings around free-boundary points, half-space fits and the
//! empirical decay exponents of the corrected energy and of the traces.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{DiffField, Grid, InterpOrder, Point, Profile, QuadratureConfig, ScalarField};
use crate::scaling::mu;
use crate::stats::line_fit;
use crate::weiss::{WeissConfig, WeissScan};

pub use crate::weiss::homogeneity_defect;

/// Resampling grid for rescaled fields: `NODES` per axis on `[-HALF_WIDTH, HALF_WIDTH]^n`.
pub const NODES: usize = 257;
pub const HALF_WIDTH: f64 = 1.2;
const COARSE_ANGLES: usize = 64;
/// Slopes at or below this count as no decay.
pub const NO_DECAY_SLOPE: f64 = 1e-2;

/// `u_r(x) = u(x⁰ + r x)/μ(r)` resampled on the fixed unit grid. Grid nodes
/// that fall outside the source domain take the value at the nearest point
/// of the domain; only nodes near the corners are affected when `B_r(x⁰)`
/// fits.
pub fn rescale(u: &dyn Profile, x0: Point, r: f64) -> Result<ScalarField> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::RadiusOutOfRange(r));
    }
    if !u.contains_ball(x0, r) {
        return Err(Error::BallOutsideDomain { x: x0[0], y: x0[1], radius: r });
    }
    let m = mu(r)?;
    let grid = Grid::cube(u.dim(), -HALF_WIDTH, HALF_WIDTH, NODES)?;
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let y = grid.node_at(k);
        let p = u.clamp([x0[0] + r * y[0], x0[1] + r * y[1]]);
        values.push(u.value(p)? / m);
    }
    ScalarField::new(grid, values)
}

/// `½ max(cos(θ - φ), 0)²`, the trace of a half-space solution with normal angle φ.
fn half_space_trace(theta: f64, phi: f64) -> f64 {
    0.5 * (theta - phi).cos().max(0.0).powi(2)
}

fn trace_angles(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| 2.0 * PI * k as f64 / n as f64)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HalfspaceFit {
    pub nu: Point,
    pub residual: f64,
}

fn l1_to_half_space(trace: &[f64], phi: f64) -> f64 {
    let w = 2.0 * PI / trace.len() as f64;
    trace_angles(trace.len()).zip(trace).map(|(t, v)| (v - half_space_trace(t, phi)).abs()).sum::<f64>() * w
}

/// Closest half-space solution in `L¹(∂B₁)`. In 2D `trace[k]` belongs to
/// angle `2πk/n`; in 1D the trace is `[u(-1), u(1)]`.
pub fn halfspace_fit(trace: &[f64], dim: usize) -> HalfspaceFit {
    if dim == 1 {
        let res = |s: f64| (trace[0] - 0.5 * (-s).max(0.0).powi(2)).abs() + (trace[1] - 0.5 * s.max(0.0).powi(2)).abs();
        let (right, left) = (res(1.0), res(-1.0));
        return if right <= left {
            HalfspaceFit { nu: [1.0, 0.0], residual: right }
        } else {
            HalfspaceFit { nu: [-1.0, 0.0], residual: left }
        };
    }
    let step = 2.0 * PI / COARSE_ANGLES as f64;
    let best = (0..COARSE_ANGLES)
        .map(|k| k as f64 * step)
        .min_by(|&a, &b| l1_to_half_space(trace, a).total_cmp(&l1_to_half_space(trace, b)))
        .expect("non-empty scan");
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best - step, best + step);
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let (mut fc, mut fd) = (l1_to_half_space(trace, c), l1_to_half_space(trace, d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = l1_to_half_space(trace, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = l1_to_half_space(trace, d);
        }
    }
    let phi = 0.5 * (a + b);
    HalfspaceFit { nu: [phi.cos(), phi.sin()], residual: l1_to_half_space(trace, phi) }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupProfile {
    pub center: Point,
    pub radius: f64,
    pub dim: usize,
    /// `u_r` on `∂B₁` at angles `2πk/n` (2D) or at `x = -1, 1` (1D).
    pub trace: Vec<f64>,
    pub best_nu: Point,
    pub fit_residual: f64,
    pub hdefect: f64,
}

impl BlowupProfile {
    pub fn angles(&self) -> Vec<f64> {
        if self.dim == 1 {
            vec![PI, 0.0]
        } else {
            trace_angles(self.trace.len()).collect()
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,value")?;
        for (t, v) in self.angles().into_iter().zip(&self.trace) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }

    /// `L¹(∂B₁)` distance between two traces sampled alike.
    pub fn distance(&self, other: &BlowupProfile) -> f64 {
        let w = if self.dim == 1 { 1.0 } else { 2.0 * PI / self.trace.len() as f64 };
        self.trace.iter().zip(&other.trace).map(|(a, b)| (a - b).abs()).sum::<f64>() * w
    }
}

fn sample_trace(v: &dyn Profile, q: &QuadratureConfig) -> Result<Vec<f64>> {
    if v.dim() == 1 {
        return Ok(vec![v.value([-1.0, 0.0])?, v.value([1.0, 0.0])?]);
    }
    trace_angles(q.n_theta).map(|t| v.value([t.cos(), t.sin()])).collect()
}

/// Trace of an arbitrary profile on the unit sphere with its half-space fit.
pub fn profile_of(v: &dyn Profile, q: &QuadratureConfig) -> Result<BlowupProfile> {
    let trace = sample_trace(v, q)?;
    let fit = halfspace_fit(&trace, v.dim());
    Ok(BlowupProfile {
        center: [0.0, 0.0],
        radius: 1.0,
        dim: v.dim(),
        trace,
        best_nu: fit.nu,
        fit_residual: fit.residual,
        hdefect: f64::NAN,
    })
}

/// Rescales around `x0`, samples the trace of the resampled field and fits a
/// half-space solution.
pub fn blowup_profile(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<BlowupProfile> {
    let field = DiffField::new(rescale(u, x0, r)?, InterpOrder::Bilinear)?;
    let mut p = profile_of(&field, &cfg.quadrature)?;
    p.center = x0;
    p.radius = r;
    p.hdefect = homogeneity_defect(u, x0, r, cfg)?;
    Ok(p)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub radii: Vec<f64>,
    /// `W̄(r) - W̄(0+)`.
    pub energies: Vec<f64>,
    pub delta_hat: f64,
    pub eta_hat: f64,
    pub beta_hat: f64,
    /// `(2η + nη)/(2 + nη)` evaluated at `η̂`; equals `beta_hat` identically.
    pub beta_from_eta: f64,
    pub no_decay: bool,
    /// Larger radius of each successive pair of profiles.
    pub trace_radii: Vec<f64>,
    pub trace_distances: Vec<f64>,
    pub trace_slope: Option<f64>,
}

impl DecayFit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

/// Log-log fit of `E(r)` against `r`. Gaps in `(-tol, 0]` are dropped from
/// the fit; a gap below `-tol` is an error.
pub fn fit_energy_decay(radii: &[f64], energies: &[f64], n: usize, tol: f64) -> Result<DecayFit> {
    if radii.len() != energies.len() || radii.len() < 4 {
        return Err(Error::InsufficientRadii);
    }
    let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || hi < 4.0 * lo {
        return Err(Error::InsufficientRadii);
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&r, &e) in radii.iter().zip(energies) {
        if e < -tol {
            return Err(Error::NonPositiveEnergyGap { radius: r, gap: e });
        }
        if e > 0.0 {
            lx.push(r.ln());
            ly.push(e.ln());
        }
    }
    let delta_hat = line_fit(&lx, &ly).map(|f| f.0).unwrap_or(0.0);
    let nf = n as f64;
    let eta_hat = delta_hat / (nf + 2.0 + delta_hat);
    Ok(DecayFit {
        radii: radii.to_vec(),
        energies: energies.to_vec(),
        delta_hat,
        eta_hat,
        beta_hat: delta_hat / (2.0 + delta_hat),
        beta_from_eta: (2.0 * eta_hat + nf * eta_hat) / (2.0 + nf * eta_hat),
        no_decay: delta_hat <= NO_DECAY_SLOPE,
        trace_radii: Vec::new(),
        trace_distances: Vec::new(),
        trace_slope: None,
    })
}

/// Relative slack on `E(r) ≥ 0`, scaled by the limit estimate.
pub const ENERGY_GAP_TOL: f64 = 1e-3;

/// Decay fit of `W̄(r) - W̄(0+)` from a scan, plus the slope of the
/// distances between successive blow-up traces.
pub fn decay_fit(scan: &WeissScan, profiles: &[BlowupProfile]) -> Result<DecayFit> {
    let limit = scan.wbar_limit_estimate.ok_or(Error::InsufficientRadii)?;
    let radii: Vec<f64> = scan.records.iter().map(|r| r.r).collect();
    let energies: Vec<f64> = scan.records.iter().map(|r| r.wbar - limit).collect();
    let mut fit = fit_energy_decay(&radii, &energies, scan.dim, ENERGY_GAP_TOL * limit.abs().max(1e-12))?;
    let mut sorted: Vec<&BlowupProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| b.radius.total_cmp(&a.radius));
    for pair in sorted.windows(2) {
        fit.trace_radii.push(pair[0].radius);
        fit.trace_distances.push(pair[0].distance(pair[1]));
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = fit
        .trace_radii
        .iter()
        .zip(&fit.trace_distances)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, d)| (r.ln(), d.ln()))
        .unzip();
    fit.trace_slope = line_fit(&lx, &ly).map(|f| f.0);
    Ok(fit)
}
