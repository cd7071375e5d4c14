//! Uniform grids, scalar fields on them, interpolation and the polar
//! quadrature used for every ball and sphere integral.

mod io;
mod quadrature;

pub use io::{load_field, read_field, save_field, write_field, MAGIC};
pub use quadrature::{
    ball_integral, gauss_legendre, sphere_integral, sphere_measure, QuadratureConfig, QuadratureRule,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Slack used for hull membership, relative to the grid extent.
const HULL_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterpOrder {
    #[default]
    Bilinear,
    Bicubic,
}

impl InterpOrder {
    pub fn from_order(order: u32) -> Option<Self> {
        match order {
            1 => Some(InterpOrder::Bilinear),
            3 => Some(InterpOrder::Bicubic),
            _ => None,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            InterpOrder::Bilinear => 1,
            InterpOrder::Bicubic => 3,
        }
    }
}

/// Uniform grid in one or two dimensions. In 1D the second axis is a single
/// dummy node at y = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    origin: Point,
    spacing: f64,
    counts: [usize; 2],
}

impl Grid {
    pub fn line(x0: f64, spacing: f64, n: usize) -> Result<Self> {
        Self::build(1, [x0, 0.0], spacing, [n, 1])
    }

    pub fn plane(origin: Point, spacing: f64, counts: [usize; 2]) -> Result<Self> {
        Self::build(2, origin, spacing, counts)
    }

    /// `[lo, hi]^dim` with `n` nodes per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::GridTooSmall);
        }
        let h = (hi - lo) / (n - 1) as f64;
        match dim {
            1 => Self::line(lo, h, n),
            2 => Self::plane([lo, lo], h, [n, n]),
            _ => Err(Error::InvalidGrid(format!("dimension {dim} not supported"))),
        }
    }

    fn build(dim: usize, origin: Point, spacing: f64, counts: [usize; 2]) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if counts[0] < 3 || (dim == 2 && counts[1] < 3) {
            return Err(Error::GridTooSmall);
        }
        Ok(Grid { dim, origin, spacing, counts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.counts[0] + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.counts[0], k / self.counts[0])
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        let y = if self.dim == 2 { self.origin[1] + j as f64 * self.spacing } else { 0.0 };
        [self.origin[0] + i as f64 * self.spacing, y]
    }

    pub fn node_at(&self, k: usize) -> Point {
        let (i, j) = self.coords(k);
        self.node(i, j)
    }

    /// Upper corner of the hull.
    pub fn upper(&self) -> Point {
        let x = self.origin[0] + (self.counts[0] - 1) as f64 * self.spacing;
        let y = if self.dim == 2 { self.origin[1] + (self.counts[1] - 1) as f64 * self.spacing } else { 0.0 };
        [x, y]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        let [nx, ny] = self.counts;
        i == 0 || i == nx - 1 || (self.dim == 2 && (j == 0 || j == ny - 1))
    }

    fn slack(&self) -> f64 {
        let hi = self.upper();
        let extent = (hi[0] - self.origin[0]).max(hi[1] - self.origin[1]);
        HULL_SLACK * extent.max(1.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        let hi = self.upper();
        let s = self.slack();
        let inside_x = p[0] >= self.origin[0] - s && p[0] <= hi[0] + s;
        inside_x && (self.dim == 1 || (p[1] >= self.origin[1] - s && p[1] <= hi[1] + s))
    }

    /// The closed ball (a segment in 1D) lies inside the hull.
    pub fn contains_ball(&self, c: Point, r: f64) -> bool {
        if self.dim == 1 {
            return self.contains([c[0] - r, 0.0]) && self.contains([c[0] + r, 0.0]);
        }
        self.contains([c[0] - r, c[1] - r]) && self.contains([c[0] + r, c[1] + r])
    }

    /// Cell index and local coordinate along one axis, clamped into the hull.
    fn locate(&self, axis: usize, x: f64) -> (usize, f64) {
        let n = self.counts[axis];
        let mut s = ((x - self.origin[axis]) / self.spacing).clamp(0.0, (n - 1) as f64);
        // Snap round-off so that nodes reproduce stored values exactly.
        if (s - s.round()).abs() < 1e-9 {
            s = s.round();
        }
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }
}

/// Keys cubic-convolution weights (a = -1/2) for offsets -1, 0, 1, 2.
fn keys_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (t3 - t2)]
}

/// Node values with one layer of quadratically extrapolated ghost nodes.
fn ghosted(values: &[f64], counts: [usize; 2], i: isize, j: isize) -> f64 {
    let nx = counts[0] as isize;
    let ny = counts[1] as isize;
    if i < 0 {
        return 3.0 * ghosted(values, counts, 0, j) - 3.0 * ghosted(values, counts, 1, j)
            + ghosted(values, counts, 2, j);
    }
    if i >= nx {
        return 3.0 * ghosted(values, counts, nx - 1, j) - 3.0 * ghosted(values, counts, nx - 2, j)
            + ghosted(values, counts, nx - 3, j);
    }
    if j < 0 {
        return 3.0 * ghosted(values, counts, i, 0) - 3.0 * ghosted(values, counts, i, 1)
            + ghosted(values, counts, i, 2);
    }
    if j >= ny {
        return 3.0 * ghosted(values, counts, i, ny - 1) - 3.0 * ghosted(values, counts, i, ny - 2)
            + ghosted(values, counts, i, ny - 3);
    }
    values[(j * nx + i) as usize]
}

fn interpolate(grid: &Grid, values: &[f64], p: Point, order: InterpOrder) -> Result<f64> {
    if !grid.contains(p) {
        return Err(Error::OutOfDomain(p[0], p[1]));
    }
    let (i, tx) = grid.locate(0, p[0]);
    if grid.dim == 1 {
        return Ok(match order {
            InterpOrder::Bilinear => values[i] * (1.0 - tx) + values[i + 1] * tx,
            InterpOrder::Bicubic => {
                let w = keys_weights(tx);
                (0..4).map(|a| w[a] * ghosted(values, grid.counts, i as isize + a as isize - 1, 0)).sum()
            }
        });
    }
    let (j, ty) = grid.locate(1, p[1]);
    let nx = grid.counts[0];
    Ok(match order {
        InterpOrder::Bilinear => {
            let k = j * nx + i;
            let lo = values[k] * (1.0 - tx) + values[k + 1] * tx;
            let hi = values[k + nx] * (1.0 - tx) + values[k + nx + 1] * tx;
            lo * (1.0 - ty) + hi * ty
        }
        InterpOrder::Bicubic => {
            let wx = keys_weights(tx);
            let wy = keys_weights(ty);
            let mut acc = 0.0;
            for (b, wyb) in wy.iter().enumerate() {
                let jj = j as isize + b as isize - 1;
                let row: f64 =
                    (0..4).map(|a| wx[a] * ghosted(values, grid.counts, i as isize + a as isize - 1, jj)).sum();
                acc += wyb * row;
            }
            acc
        }
    })
}

/// Node values of a scalar quantity, row-major with x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        ScalarField { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.node_at(k))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn sample(&self, p: Point, order: InterpOrder) -> Result<f64> {
        interpolate(&self.grid, &self.values, p, order)
    }

    /// Central differences inside, second-order one-sided differences on
    /// the boundary.
    pub fn gradient(&self) -> Result<VectorField> {
        let g = &self.grid;
        let [nx, ny] = g.counts;
        if nx < 3 || (g.dim == 2 && ny < 3) {
            return Err(Error::GridTooSmall);
        }
        let h = g.spacing;
        let v = &self.values;
        let diff = |at: &dyn Fn(usize) -> f64, i: usize, n: usize| -> f64 {
            if i == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            }
        };
        let mut gx = vec![0.0; g.len()];
        let mut gy = vec![0.0; g.len()];
        for j in 0..ny {
            for i in 0..nx {
                let k = g.index(i, j);
                gx[k] = diff(&|a| v[g.index(a, j)], i, nx);
                if g.dim == 2 {
                    gy[k] = diff(&|b| v[g.index(i, b)], j, ny);
                }
            }
        }
        Ok(VectorField { grid: g.clone(), x: gx, y: gy })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, i: usize, j: usize) -> Point {
        let k = self.grid.index(i, j);
        [self.x[k], self.y[k]]
    }

    pub fn components(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    pub fn sample(&self, p: Point, order: InterpOrder) -> Result<Point> {
        let gx = interpolate(&self.grid, &self.x, p, order)?;
        let gy = if self.grid.dim == 2 { interpolate(&self.grid, &self.y, p, order)? } else { 0.0 };
        Ok([gx, gy])
    }
}

/// Anything that can be evaluated with its gradient at arbitrary points.
/// Energies and traces are written against this trait so that grid fields,
/// closed-form profiles and rescaled views share one code path.
pub trait Profile: Sync {
    fn dim(&self) -> usize;

    fn value(&self, p: Point) -> Result<f64>;

    fn value_grad(&self, p: Point) -> Result<(f64, Point)>;

    fn contains_ball(&self, c: Point, r: f64) -> bool;

    /// Native resolution, if the profile comes from a grid.
    fn spacing(&self) -> Option<f64> {
        None
    }

    /// Nearest point at which the profile can be evaluated.
    fn clamp(&self, p: Point) -> Point {
        p
    }
}

/// A grid field bundled with its finite-difference gradient.
#[derive(Clone, Debug)]
pub struct DiffField {
    field: ScalarField,
    grad: VectorField,
    order: InterpOrder,
}

impl DiffField {
    pub fn new(field: ScalarField, order: InterpOrder) -> Result<Self> {
        let grad = field.gradient()?;
        Ok(DiffField { field, grad, order })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn gradient(&self) -> &VectorField {
        &self.grad
    }

    pub fn order(&self) -> InterpOrder {
        self.order
    }
}

impl Profile for DiffField {
    fn dim(&self) -> usize {
        self.field.grid.dim
    }

    fn value(&self, p: Point) -> Result<f64> {
        self.field.sample(p, self.order)
    }

    fn value_grad(&self, p: Point) -> Result<(f64, Point)> {
        Ok((self.field.sample(p, self.order)?, self.grad.sample(p, self.order)?))
    }

    fn contains_ball(&self, c: Point, r: f64) -> bool {
        self.field.grid.contains_ball(c, r)
    }

    fn spacing(&self) -> Option<f64> {
        Some(self.field.grid.spacing)
    }

    fn clamp(&self, p: Point) -> Point {
        let (lo, hi) = (self.field.grid.origin(), self.field.grid.upper());
        [p[0].clamp(lo[0], hi[0]), p[1].clamp(lo[1], hi[1])]
    }
}

/// Closed-form profile defined on all of space.
pub struct Analytic<F, G> {
    dim: usize,
    value: F,
    grad: G,
}

impl<F, G> Analytic<F, G>
where
    F: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> Point + Sync,
{
    pub fn new(dim: usize, value: F, grad: G) -> Self {
        Analytic { dim, value, grad }
    }
}

impl<F, G> Profile for Analytic<F, G>
where
    F: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> Point + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, p: Point) -> Result<f64> {
        Ok((self.value)(p))
    }

    fn value_grad(&self, p: Point) -> Result<(f64, Point)> {
        Ok(((self.value)(p), (self.grad)(p)))
    }

    fn contains_ball(&self, _c: Point, _r: f64) -> bool {
        true
    }
}

/// The view `x ↦ inner(center + r·x) / scale` of another profile.
pub struct Rescaled<'a, P: ?Sized> {
    inner: &'a P,
    center: Point,
    r: f64,
    scale: f64,
}

impl<'a, P: Profile + ?Sized> Rescaled<'a, P> {
    pub fn new(inner: &'a P, center: Point, r: f64, scale: f64) -> Self {
        Rescaled { inner, center, r, scale }
    }

    fn physical(&self, x: Point) -> Point {
        let y = if self.inner.dim() == 2 { self.center[1] + self.r * x[1] } else { 0.0 };
        [self.center[0] + self.r * x[0], y]
    }
}

impl<P: Profile + ?Sized> Profile for Rescaled<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.inner.value(self.physical(p))? / self.scale)
    }

    fn value_grad(&self, p: Point) -> Result<(f64, Point)> {
        let (v, g) = self.inner.value_grad(self.physical(p))?;
        let s = self.r / self.scale;
        Ok((v / self.scale, [g[0] * s, g[1] * s]))
    }

    fn contains_ball(&self, c: Point, r: f64) -> bool {
        self.inner.contains_ball(self.physical(c), self.r * r)
    }

    fn spacing(&self) -> Option<f64> {
        self.inner.spacing().map(|h| h / self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine_field(h: f64, n: usize) -> ScalarField {
        let grid = Grid::plane([-1.0, -1.0], h, [n, n]).unwrap();
        ScalarField::from_fn(grid, |p| 3.0 * p[0] - 2.0 * p[1] + 1.0).unwrap()
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(matches!(Grid::line(0.0, 0.1, 2), Err(Error::GridTooSmall)));
        assert!(matches!(Grid::line(0.0, -0.1, 5), Err(Error::InvalidGrid(_))));
        let g = Grid::cube(2, -1.0, 1.0, 5).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.upper(), [1.0, 1.0]);
    }

    #[test]
    fn bilinear_exact_on_nodes_and_affine() {
        let f = affine_field(0.1, 21);
        for &(i, j) in &[(0, 0), (3, 7), (20, 20)] {
            let p = f.grid().node(i, j);
            assert_eq!(f.sample(p, InterpOrder::Bilinear).unwrap(), f.get(i, j));
        }
        let v = f.sample([0.05, 0.05], InterpOrder::Bilinear).unwrap();
        assert!((v - 1.05).abs() < 1e-13);
        let v = f.sample([0.05, 0.05], InterpOrder::Bicubic).unwrap();
        assert!((v - 1.05).abs() < 1e-12);
    }

    #[test]
    fn sample_outside_hull_fails() {
        let f = affine_field(0.1, 21);
        assert!(matches!(f.sample([1.2, 0.0], InterpOrder::Bilinear), Err(Error::OutOfDomain(..))));
    }

    #[test]
    fn bicubic_reproduces_quadratics() {
        let grid = Grid::cube(2, -1.0, 1.0, 21).unwrap();
        let q = |p: Point| p[0] * p[0] - 0.5 * p[0] * p[1] + 2.0 * p[1] * p[1];
        let f = ScalarField::from_fn(grid, q).unwrap();
        for p in [[0.33, -0.71], [-0.98, 0.97], [0.999, -0.999]] {
            assert!((f.sample(p, InterpOrder::Bicubic).unwrap() - q(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_affine_and_constant() {
        let f = affine_field(0.1, 11);
        let g = f.gradient().unwrap();
        for j in 0..11 {
            for i in 0..11 {
                let [a, b] = g.at(i, j);
                assert!((a - 3.0).abs() < 1e-12 && (b + 2.0).abs() < 1e-12);
            }
        }
        let c = ScalarField::from_fn(Grid::line(0.0, 0.1, 5).unwrap(), |_| 4.0).unwrap();
        assert!(c.gradient().unwrap().components().0.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_of_half_space_profile() {
        let grid = Grid::cube(2, -1.0, 1.0, 1025).unwrap();
        let f = ScalarField::from_fn(grid, |p| 0.5 * p[0].max(0.0).powi(2)).unwrap();
        let g = f.gradient().unwrap();
        let d = g.sample([0.5, 0.0], InterpOrder::Bilinear).unwrap();
        assert!((d[0] - 0.5).abs() < 5e-4);
    }

    #[test]
    fn non_finite_values_rejected() {
        let grid = Grid::line(0.0, 0.5, 3).unwrap();
        assert!(matches!(ScalarField::new(grid, vec![0.0, f64::NAN, 1.0]), Err(Error::NonFinite(1))));
    }

    #[test]
    fn rescaled_view_scales_value_and_gradient() {
        let quad = Analytic::new(2, |p: Point| p[0] * p[0] + p[1] * p[1], |p: Point| [2.0 * p[0], 2.0 * p[1]]);
        let view = Rescaled::new(&quad, [0.5, 0.0], 0.1, 0.01);
        let (v, g) = view.value_grad([1.0, 0.0]).unwrap();
        assert!((v - 0.36 / 0.01).abs() < 1e-9);
        assert!((g[0] - 1.2 * 0.1 / 0.01).abs() < 1e-9);
    }
}
