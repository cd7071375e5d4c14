use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{InterpOrder, Point, ScalarField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub n_theta: usize,
    pub n_rad: usize,
    pub interp: InterpOrder,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { n_theta: 1024, n_rad: 512, interp: InterpOrder::Bilinear }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 64 || self.n_rad < 64 {
            return Err(Error::InvalidQuadrature(format!(
                "n_theta = {} and n_rad = {} must both be at least 64",
                self.n_theta, self.n_rad
            )));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        QuadratureConfig { n_theta: 2 * self.n_theta, n_rad: 2 * self.n_rad, interp: self.interp }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    (x, w)
}

/// Measure of the unit sphere: 2 points in 1D, 2π in 2D.
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

/// Unit-sphere and unit-ball nodes with weights, ready to be translated and
/// scaled onto any ball.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    dim: usize,
    sphere: Vec<(Point, f64)>,
    rings: Vec<(f64, f64)>,
    cfg: QuadratureConfig,
}

impl QuadratureRule {
    pub fn new(dim: usize, cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let sphere = if dim == 1 {
            vec![([-1.0, 0.0], 1.0), ([1.0, 0.0], 1.0)]
        } else {
            let dt = 2.0 * PI / cfg.n_theta as f64;
            (0..cfg.n_theta)
                .map(|k| {
                    let t = k as f64 * dt;
                    ([t.cos(), t.sin()], dt)
                })
                .collect()
        };
        let (x, w) = gauss_legendre(cfg.n_rad);
        // 1D: signed abscissae on [-1, 1]; 2D: radii on [0, 1] with polar Jacobian.
        let rings = if dim == 1 {
            x.into_iter().zip(w).collect()
        } else {
            x.into_iter()
                .zip(w)
                .map(|(xi, wi)| {
                    let rho = 0.5 * (xi + 1.0);
                    (rho, 0.5 * wi * rho)
                })
                .collect()
        };
        Ok(QuadratureRule { dim, sphere, rings, cfg })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    /// `∫_{∂B_r(c)} f dH^{n-1}`; `f` receives the physical point and the
    /// outward unit normal.
    pub fn integrate_sphere<F>(&self, c: Point, r: f64, f: F) -> Result<f64>
    where
        F: Fn(Point, Point) -> Result<f64>,
    {
        Ok(self.integrate_sphere_n(c, r, |p, x| Ok([f(p, x)?]))?[0])
    }

    /// Several sphere integrals sharing one set of samples.
    pub fn integrate_sphere_n<const N: usize, F>(&self, c: Point, r: f64, f: F) -> Result<[f64; N]>
    where
        F: Fn(Point, Point) -> Result<[f64; N]>,
    {
        let mut acc = [0.0; N];
        for &(x, w) in &self.sphere {
            let v = f([c[0] + r * x[0], c[1] + r * x[1]], x)?;
            for i in 0..N {
                acc[i] += w * v[i];
            }
        }
        let scale = r.powi(self.dim as i32 - 1);
        Ok(acc.map(|a| a * scale))
    }

    /// `∫_{B_r(c)} f dx`; `f` receives the physical point and the point in
    /// unit-ball coordinates.
    pub fn integrate_ball<F>(&self, c: Point, r: f64, f: F) -> Result<f64>
    where
        F: Fn(Point, Point) -> Result<f64> + Sync,
    {
        Ok(self.integrate_ball_n(c, r, |p, x| Ok([f(p, x)?]))?[0])
    }

    /// Several ball integrals sharing one set of samples. Rings are evaluated
    /// in parallel and summed in a fixed order.
    pub fn integrate_ball_n<const N: usize, F>(&self, c: Point, r: f64, f: F) -> Result<[f64; N]>
    where
        F: Fn(Point, Point) -> Result<[f64; N]> + Sync,
    {
        let ring = |&(rho, wr): &(f64, f64)| -> Result<[f64; N]> {
            if self.dim == 1 {
                let v = f([c[0] + r * rho, 0.0], [rho, 0.0])?;
                return Ok(v.map(|a| a * wr));
            }
            let mut acc = [0.0; N];
            for &(e, wt) in &self.sphere {
                let x = [rho * e[0], rho * e[1]];
                let v = f([c[0] + r * x[0], c[1] + r * x[1]], x)?;
                for i in 0..N {
                    acc[i] += wt * v[i];
                }
            }
            Ok(acc.map(|a| a * wr))
        };
        let partial: Vec<Result<[f64; N]>> = if self.dim == 1 {
            self.rings.iter().map(ring).collect()
        } else {
            self.rings.par_iter().map(ring).collect()
        };
        let mut total = [0.0; N];
        for p in partial {
            let p = p?;
            for i in 0..N {
                total[i] += p[i];
            }
        }
        let scale = r.powi(self.dim as i32);
        Ok(total.map(|a| a * scale))
    }

    /// Visits every ball node (physical coordinates).
    pub fn ball_points(&self, c: Point, r: f64) -> Vec<Point> {
        let mut pts = Vec::new();
        if self.dim == 1 {
            pts.extend(self.rings.iter().map(|&(x, _)| [c[0] + r * x, 0.0]));
        } else {
            for &(rho, _) in &self.rings {
                pts.extend(self.sphere.iter().map(|&(e, _)| [c[0] + r * rho * e[0], c[1] + r * rho * e[1]]));
            }
        }
        pts
    }

    pub fn sphere_points(&self, c: Point, r: f64) -> Vec<Point> {
        self.sphere.iter().map(|&(e, _)| [c[0] + r * e[0], c[1] + r * e[1]]).collect()
    }
}

fn check_ball(field: &ScalarField, c: Point, r: f64) -> Result<()> {
    if !(r > 0.0) || !field.grid().contains_ball(c, r) {
        return Err(Error::BallOutsideDomain { x: c[0], y: c[1], radius: r });
    }
    Ok(())
}

pub fn sphere_integral(field: &ScalarField, c: Point, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_ball(field, c, r)?;
    let rule = QuadratureRule::new(field.grid().dim(), *q)?;
    rule.integrate_sphere(c, r, |p, _| field.sample(p, q.interp))
}

pub fn ball_integral(field: &ScalarField, c: Point, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_ball(field, c, r)?;
    let rule = QuadratureRule::new(field.grid().dim(), *q)?;
    rule.integrate_ball(c, r, |p, _| field.sample(p, q.interp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;

    fn plane(n: usize) -> Grid {
        Grid::cube(2, -1.0, 1.0, n).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(512);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_examples() {
        let q = QuadratureConfig::default();
        let one = ScalarField::from_fn(plane(1025), |_| 1.0).unwrap();
        assert!((sphere_integral(&one, [0.0, 0.0], 0.5, &q).unwrap() - PI).abs() < 1e-9);
        let x2 = ScalarField::from_fn(plane(1025), |p| p[0] * p[0]).unwrap();
        let cubic = QuadratureConfig { interp: InterpOrder::Bicubic, ..q };
        assert!((sphere_integral(&x2, [0.0, 0.0], 1.0, &cubic).unwrap() - PI).abs() < 1e-6);
        let line = ScalarField::from_fn(Grid::line(-1.0, 1.0 / 64.0, 129).unwrap(), |_| 1.0).unwrap();
        assert_eq!(sphere_integral(&line, [0.0, 0.0], 0.3, &q).unwrap(), 2.0);
    }

    #[test]
    fn ball_examples() {
        let q = QuadratureConfig::default();
        let one = ScalarField::from_fn(plane(1025), |_| 1.0).unwrap();
        assert!((ball_integral(&one, [0.0, 0.0], 1.0, &q).unwrap() - PI).abs() < 1e-8);
        let r2 = ScalarField::from_fn(plane(1025), |p| p[0] * p[0] + p[1] * p[1]).unwrap();
        let cubic = QuadratureConfig { interp: InterpOrder::Bicubic, ..q };
        assert!((ball_integral(&r2, [0.0, 0.0], 1.0, &cubic).unwrap() - PI / 2.0).abs() < 1e-6);
        let hs = ScalarField::from_fn(plane(1025), |p| p[0].max(0.0).powi(2)).unwrap();
        assert!((ball_integral(&hs, [0.0, 0.0], 1.0, &q).unwrap() - PI / 8.0).abs() < 1e-4);
    }

    #[test]
    fn ball_outside_domain_is_rejected() {
        let q = QuadratureConfig::default();
        let one = ScalarField::from_fn(plane(33), |_| 1.0).unwrap();
        let err = ball_integral(&one, [0.5, 0.0], 0.6, &q).unwrap_err();
        assert!(matches!(err, Error::BallOutsideDomain { .. }));
    }

    #[test]
    fn small_quadrature_rejected() {
        let q = QuadratureConfig { n_theta: 32, ..Default::default() };
        assert!(QuadratureRule::new(2, q).is_err());
    }
}
