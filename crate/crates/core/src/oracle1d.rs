//! One-sided 1D profile of `u'' = -log u` leaving the free boundary at the
//! origin, computed by integrating outward from an asymptotic seed.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::scaling::ForcingMode;
use crate::stats::lagrange_derivative;

pub const DEFAULT_SEED: f64 = 1e-6;
pub const DEFAULT_X_MAX: f64 = 0.5;
pub const MAX_SEED: f64 = 1e-3;
/// Seed residual beyond which the expansion is not trusted.
pub const MAX_SEED_RESIDUAL: f64 = 0.15;
pub const SAMPLE_RATIO: f64 = 1.01;
const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-30;

/// `φ(L)` with `u = x² φ`, `L = -log x`, and its first two L-derivatives.
fn phi_series(l: f64) -> (f64, f64, f64) {
    let g = l.ln();
    let phi = l - 0.5 * g + 1.5 + (0.25 * g - 1.5) / l + (g * g / 16.0 - 7.0 * g / 8.0 + 59.0 / 16.0) / (l * l);
    let d1 = 1.0 - 0.5 / l + (1.75 - 0.25 * g) / (l * l) + (-g * g / 8.0 + 15.0 * g / 8.0 - 8.25) / l.powi(3);
    let d2 =
        0.5 / (l * l) + (0.5 * g - 3.75) / l.powi(3) + (3.0 * g * g / 8.0 - 47.0 * g / 8.0 + 213.0 / 8.0) / l.powi(4);
    (phi, d1, d2)
}

/// Asymptotic profile near the free boundary: `(u, u')` at small `x > 0`.
pub fn expansion(x: f64) -> (f64, f64) {
    let (phi, d1, _) = phi_series(-x.ln());
    (x * x * phi, 2.0 * x * phi - x * d1)
}

/// `|u'' + log u|` of the expansion, evaluated in closed form.
pub fn expansion_residual(x: f64) -> f64 {
    let l = -x.ln();
    let (phi, d1, d2) = phi_series(l);
    (2.0 * phi - 3.0 * d1 + d2 - 2.0 * l + phi.ln()).abs()
}

/// Leading three terms `x²(L - ½ log L + 3/2)`.
pub fn leading_expansion(x: f64) -> f64 {
    let l = -x.ln();
    x * x * (l - 0.5 * l.ln() + 1.5)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSolution1D {
    pub x_seed: f64,
    pub x_max: f64,
    pub mode: ForcingMode,
    /// `(x, u, u')` on a geometric grid from `x_seed` to `x_max`.
    pub samples: Vec<[f64; 3]>,
    pub residual_max: f64,
}

fn rhs(y: [f64; 2]) -> [f64; 2] {
    [y[1], -y[0].ln()]
}

/// One Dormand–Prince 5(4) step; returns the 5th-order state and the error estimate.
fn dopri_step(y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    const C: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] =
        [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(y);
    for s in 0..6 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            yi[0] += h * C[s][j] * kj[0];
            yi[1] += h * C[s][j] * kj[1];
        }
        if yi[0] <= 0.0 {
            return (yi, [f64::INFINITY; 2]);
        }
        k[s + 1] = rhs(yi);
    }
    let mut y5 = y;
    for j in 0..6 {
        y5[0] += h * C[5][j] * k[j][0];
        y5[1] += h * C[5][j] * k[j][1];
    }
    let mut err = [0.0; 2];
    for (j, kj) in k.iter().enumerate() {
        err[0] += h * E[j] * kj[0];
        err[1] += h * E[j] * kj[1];
    }
    (y5, err)
}

fn sample_abscissae(x_seed: f64, x_max: f64) -> Vec<f64> {
    let mut xs = vec![x_seed];
    loop {
        let next = xs[xs.len() - 1] * SAMPLE_RATIO;
        if next >= x_max * (1.0 - 1e-12) {
            break;
        }
        xs.push(next);
    }
    xs.push(x_max);
    xs
}

/// Integrates outward from the asymptotic seed at `x_seed` up to `x_max`.
pub fn shoot(x_seed: f64, x_max: f64, mode: ForcingMode) -> Result<OracleSolution1D> {
    if !(x_seed > 0.0) || !(x_max > x_seed) {
        return Err(Error::InvalidSpec(format!("need 0 < x_seed < x_max, got {x_seed}, {x_max}")));
    }
    let xs = sample_abscissae(x_seed, x_max);
    if mode == ForcingMode::Constant {
        let samples = xs.iter().map(|&x| [x, 0.5 * x * x, x]).collect();
        return Ok(OracleSolution1D { x_seed, x_max, mode, samples, residual_max: 0.0 });
    }
    let seed_residual = expansion_residual(x_seed);
    if x_seed > MAX_SEED || !(seed_residual <= MAX_SEED_RESIDUAL) {
        return Err(Error::SeedTooLarge { x_seed, residual: seed_residual });
    }
    let (u0, du0) = expansion(x_seed);
    let mut y = [u0, du0];
    let mut x = x_seed;
    let mut h = 1e-3 * x_seed;
    let mut samples = Vec::with_capacity(xs.len());
    samples.push([x, y[0], y[1]]);
    for &target in &xs[1..] {
        while x < target {
            let step = h.min(target - x);
            let (yn, e) = dopri_step(y, step);
            let mut err: f64 = 0.0;
            for i in 0..2 {
                let sc = ATOL + RTOL * y[i].abs().max(yn[i].abs());
                err = err.max((e[i] / sc).abs());
            }
            if err <= 1.0 {
                x = if step == target - x { target } else { x + step };
                y = yn;
                if y[0] >= 1.0 {
                    return Err(Error::BlowThrough(x));
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                h = h.max(step) * factor;
            } else {
                h = step * factor;
            }
            if !(h > 1e-18 * x) {
                return Err(Error::NonConvergence { max_sweeps: 0, last_update: err });
            }
        }
        samples.push([x, y[0], y[1]]);
    }
    let mut sol = OracleSolution1D { x_seed, x_max, mode, samples, residual_max: 0.0 };
    sol.residual_max = sol.residuals().into_iter().fold(0.0, f64::max);
    Ok(sol)
}

impl OracleSolution1D {
    pub fn logarithmic() -> Result<Self> {
        shoot(DEFAULT_SEED, DEFAULT_X_MAX, ForcingMode::Logarithmic)
    }

    /// `|u'' + log u|` at every sample, `u''` from a 5-point local fit of `u'`.
    pub fn residuals(&self) -> Vec<f64> {
        let n = self.samples.len();
        if self.mode == ForcingMode::Constant || n < 5 {
            return vec![0.0; n];
        }
        let xs: Vec<f64> = self.samples.iter().map(|s| s[0]).collect();
        let ds: Vec<f64> = self.samples.iter().map(|s| s[2]).collect();
        (0..n)
            .map(|k| {
                let lo = k.saturating_sub(2).min(n - 5);
                let d2 = lagrange_derivative(&xs[lo..lo + 5], &ds[lo..lo + 5], k - lo);
                (d2 + self.samples[k][1].ln()).abs()
            })
            .collect()
    }

    /// `(u, u')` at `x ∈ [0, x_max]`; cubic Hermite between samples and the
    /// asymptotic expansion below the seed.
    pub fn interpolate(&self, x: f64) -> Result<(f64, f64)> {
        if !(x >= 0.0) || x > self.x_max * (1.0 + 1e-12) {
            return Err(Error::OutOfRange(x));
        }
        if self.mode == ForcingMode::Constant {
            return Ok((0.5 * x * x, x));
        }
        if x == 0.0 {
            return Ok((0.0, 0.0));
        }
        if x < self.x_seed {
            return Ok(expansion(x));
        }
        let k = self.samples.partition_point(|s| s[0] <= x).clamp(1, self.samples.len() - 1);
        let [x0, u0, d0] = self.samples[k - 1];
        let [x1, u1, d1] = self.samples[k];
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let u = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * h * d1;
        let du = ((6.0 * t2 - 6.0 * t) * u0 + (-6.0 * t2 + 6.0 * t) * u1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (3.0 * t2 - 2.0 * t) * d1;
        Ok((u, du))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.interpolate(x)?.0)
    }

    /// `u(r)/(r²|log r|)`; the profile is increasing so the sup over `B_r(0)` is `u(r)`.
    pub fn growth_ratio(&self, r: f64) -> Result<f64> {
        Ok(self.value(r)? / crate::scaling::growth_scale(r))
    }

    /// The profile as a function of the first coordinate, zero for `x₁ ≤ 0`.
    pub fn planar_extension(&self, grid: &Grid) -> Result<ScalarField> {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let x = grid.node_at(k)[0];
            values.push(if x <= 0.0 { 0.0 } else { self.value(x)? });
        }
        ScalarField::new(grid.clone(), values)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,u,du")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s[0], s[1], s[2])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_residual_small_near_zero() {
        assert!(expansion_residual(1e-6) < 6e-3);
        assert!(expansion_residual(1e-3) < MAX_SEED_RESIDUAL);
        assert!(expansion_residual(0.1) > 1.0);
    }

    #[test]
    fn expansion_derivative_consistent() {
        for &x in &[1e-6, 1e-4, 1e-2] {
            let d = 1e-6 * x;
            let fd = (expansion(x + d).0 - expansion(x - d).0) / (2.0 * d);
            assert!((fd / expansion(x).1 - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn constant_mode_is_exact() {
        let s = shoot(1e-4, 0.5, ForcingMode::Constant).unwrap();
        assert_eq!(s.residual_max, 0.0);
        assert!(s.samples.iter().all(|v| v[1] == 0.5 * v[0] * v[0]));
        assert_eq!(s.interpolate(0.3).unwrap(), (0.045, 0.3));
    }

    #[test]
    fn seed_preconditions() {
        assert!(matches!(shoot(0.1, 0.5, ForcingMode::Logarithmic), Err(Error::SeedTooLarge { .. })));
        assert!(shoot(0.0, 0.5, ForcingMode::Logarithmic).is_err());
    }

    #[test]
    fn dopri_step_size_independent() {
        let (u0, d0) = expansion(1e-3);
        let mut y = [u0, d0];
        let n = 1000;
        let h = 1e-3 / n as f64;
        for _ in 0..n {
            y = dopri_step(y, h).0;
        }
        let mut z = [u0, d0];
        for _ in 0..10 {
            z = dopri_step(z, 1e-4).0;
        }
        assert!((y[0] / z[0] - 1.0).abs() < 1e-9);
    }
}
