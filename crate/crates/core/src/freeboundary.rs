//! Positivity set, free boundary, growth statistics and the empirical
//! regularity exponent of the normal field.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{Grid, InterpOrder, Point, QuadratureConfig, QuadratureRule, ScalarField};
use crate::scaling::{growth_scale, positivity_threshold};
use crate::stats::line_fit;

/// A centre counts as a free-boundary point when it lies within this many
/// cells of an extracted crossing.
pub const PROXIMITY_CELLS: f64 = 4.0;
/// Normal differences below this are treated as unresolved.
pub const FLAT_FLOOR: f64 = 1e-3;
pub const MIN_HOLDER_POINTS: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct FreeBoundarySet {
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub threshold: f64,
    pub spacing: f64,
    pub dim: usize,
}

impl FreeBoundarySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.points.iter().map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
    }

    /// Index of the crossing closest to `p`.
    pub fn nearest(&self, p: Point) -> Option<usize> {
        let d = |q: &Point| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        (0..self.points.len()).min_by(|&a, &b| d(&self.points[a]).total_cmp(&d(&self.points[b])))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,nx,ny")?;
        for (p, n) in self.points.iter().zip(&self.normals) {
            writeln!(w, "{},{},{},{}", p[0], p[1], n[0], n[1])?;
        }
        Ok(())
    }
}

/// Crossings of the grid-consistent level `τ(h)` along grid edges.
pub fn extract(u: &ScalarField) -> FreeBoundarySet {
    extract_with_threshold(u, positivity_threshold(u.grid().spacing()))
}

/// 3-point box filter of the soft indicator `√u`. Off the free boundary
/// `√u` grows linearly in the distance, so its gradient stays away from zero
/// across the interface and points into the positivity set.
fn smoothed_indicator(u: &ScalarField) -> ScalarField {
    let g = u.grid();
    let [nx, ny] = g.counts();
    let chi: Vec<f64> = u.values().iter().map(|&v| v.max(0.0).sqrt()).collect();
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut along_x = vec![0.0; g.len()];
    for j in 0..ny {
        for i in 0..nx {
            let s: f64 = (-1..=1).map(|d| chi[g.index(clamp(i as isize + d, nx), j)]).sum();
            along_x[g.index(i, j)] = s / 3.0;
        }
    }
    if g.dim() == 1 {
        return ScalarField::new(g.clone(), along_x).expect("finite");
    }
    let mut out = vec![0.0; g.len()];
    for j in 0..ny {
        for i in 0..nx {
            let s: f64 = (-1..=1).map(|d| along_x[g.index(i, clamp(j as isize + d, ny))]).sum();
            out[g.index(i, j)] = s / 3.0;
        }
    }
    ScalarField::new(g.clone(), out).expect("finite")
}

pub fn extract_with_threshold(u: &ScalarField, tau: f64) -> FreeBoundarySet {
    let g = u.grid();
    let [nx, ny] = g.counts();
    let v = u.values();
    let mut set =
        FreeBoundarySet { points: Vec::new(), normals: Vec::new(), threshold: tau, spacing: g.spacing(), dim: g.dim() };
    if !v.iter().any(|&x| x > tau) || v.iter().all(|&x| x > tau) {
        return set;
    }
    let grad = smoothed_indicator(u).gradient().expect("grid has at least 3 nodes");
    let mut push = |a: usize, b: usize| {
        let (ua, ub) = (v[a], v[b]);
        if (ua > tau) == (ub > tau) {
            return;
        }
        let t = (tau - ua) / (ub - ua);
        let (pa, pb) = (g.node_at(a), g.node_at(b));
        let p = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
        let (ga, gb) = (grad.sample(pa, InterpOrder::Bilinear), grad.sample(pb, InterpOrder::Bilinear));
        let (ga, gb) = (ga.expect("node in hull"), gb.expect("node in hull"));
        let mut n = [ga[0] + t * (gb[0] - ga[0]), ga[1] + t * (gb[1] - ga[1])];
        let norm = (n[0] * n[0] + n[1] * n[1]).sqrt();
        if g.dim() == 1 || norm < 1e-12 {
            let s = if ub > ua { 1.0 } else { -1.0 };
            let e = [pb[0] - pa[0], pb[1] - pa[1]];
            let l = (e[0] * e[0] + e[1] * e[1]).sqrt();
            n = [s * e[0] / l, s * e[1] / l];
        } else {
            n = [n[0] / norm, n[1] / norm];
        }
        set.points.push(p);
        set.normals.push(n);
    };
    for j in 0..ny {
        for i in 0..nx {
            let k = g.index(i, j);
            if i + 1 < nx {
                push(k, k + 1);
            }
            if g.dim() == 2 && j + 1 < ny {
                push(k, k + nx);
            }
        }
    }
    set
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthStats {
    pub center: Point,
    pub radii: Vec<f64>,
    /// `sup_{B_r(x⁰)} u / (r²|log r|)` per radius.
    pub g: Vec<f64>,
}

impl GrowthStats {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,g")?;
        for (r, g) in self.radii.iter().zip(&self.g) {
            writeln!(w, "{r},{g}")?;
        }
        Ok(())
    }
}

/// Checks that `x0` is within `PROXIMITY_CELLS·h` of an extracted crossing.
pub fn check_free_boundary_point(fb: &FreeBoundarySet, x0: Point) -> Result<()> {
    if fb.distance(x0) > PROXIMITY_CELLS * fb.spacing {
        return Err(Error::NotAFreeBoundaryPoint(x0[0], x0[1]));
    }
    Ok(())
}

pub fn growth_stats(u: &ScalarField, fb: &FreeBoundarySet, x0: Point, radii: &[f64]) -> Result<GrowthStats> {
    growth_stats_with(u, fb, x0, radii, &QuadratureConfig::default())
}

pub fn growth_stats_with(
    u: &ScalarField,
    fb: &FreeBoundarySet,
    x0: Point,
    radii: &[f64],
    q: &QuadratureConfig,
) -> Result<GrowthStats> {
    check_free_boundary_point(fb, x0)?;
    let grid: &Grid = u.grid();
    let rule = QuadratureRule::new(grid.dim(), *q)?;
    let mut g = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::RadiusOutOfRange(r));
        }
        if !grid.contains_ball(x0, r) {
            return Err(Error::BallOutsideDomain { x: x0[0], y: x0[1], radius: r });
        }
        let mut sup: f64 = 0.0;
        for p in rule.ball_points(x0, r).into_iter().chain(rule.sphere_points(x0, r)) {
            sup = sup.max(u.sample(p, q.interp)?);
        }
        g.push(sup / growth_scale(r));
    }
    Ok(GrowthStats { center: x0, radii: radii.to_vec(), g })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum HolderEstimate {
    Exponent(f64),
    /// Every admissible pair sits below the resolution floor.
    Flat,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HolderFit {
    pub estimate: HolderEstimate,
    pub pairs_used: usize,
}

/// Least-squares slope of `log|ν(y) - ν(z)|` against `log|y - z|` over pairs
/// with `4h < |y - z| < diam/4` and `|ν(y) - ν(z)| ≥ 10⁻³`.
pub fn normal_holder_exponent(fb: &FreeBoundarySet) -> Result<HolderFit> {
    let n = fb.points.len();
    if n < MIN_HOLDER_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_HOLDER_POINTS, got: n });
    }
    let dist = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut diam: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diam = diam.max(dist(fb.points[i], fb.points[j]));
        }
    }
    let (lo, hi) = (PROXIMITY_CELLS * fb.spacing, diam / 4.0);
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(fb.points[i], fb.points[j]);
            if d <= lo || d >= hi {
                continue;
            }
            let dn = dist(fb.normals[i], fb.normals[j]);
            if dn < FLAT_FLOOR {
                continue;
            }
            lx.push(d.ln());
            ly.push(dn.ln());
        }
    }
    let pairs_used = lx.len();
    let estimate = match line_fit(&lx, &ly) {
        Some((slope, _)) => HolderEstimate::Exponent(slope),
        None => HolderEstimate::Flat,
    };
    Ok(HolderFit { estimate, pairs_used })
}
