//! Weiss-type energy with variable parameter and its monotonicity
//! decomposition `dW/dr = K + Q`, the corrected energy `W̄`, the balance
//! energies `M(r; v)`, `M₀(v)` and the energy-density classifier.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{sphere_measure, Point, Profile, QuadratureConfig, QuadratureRule, Rescaled};
use crate::scaling::{
    alpha, alpha_prime, f_energy, g_integrand, g_integrand_dr, log_factor, mu, q_tail_bound, qbar_shift,
    qbar_shift_integral, ForcingMode,
};
use crate::stats::extrapolate_to_zero;

/// Constant in `|Q| ≤ C log(-log r)/(r log² r)`, fitted once on the planar
/// test (observed ratios 0.24–0.74) and frozen.
pub const Q_BOUND_CONSTANT: f64 = 1.0;
/// Relative disagreement at which the two limit estimators flag a scan.
pub const LIMIT_CROSS_CHECK: f64 = 0.1;
/// Gauss–Legendre points per interval when integrating Q between radii.
const Q_NODES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeissConfig {
    pub gamma: f64,
    pub quadrature: QuadratureConfig,
    pub fd_step: f64,
}

impl Default for WeissConfig {
    fn default() -> Self {
        WeissConfig { gamma: 0.5, quadrature: QuadratureConfig::default(), fd_step: 1e-3 }
    }
}

impl WeissConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidSpec(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.5) {
            return Err(Error::InvalidSpec(format!("fd_step {} outside (0, 0.5)", self.fd_step)));
        }
        self.quadrature.validate()
    }

    fn rule(&self, dim: usize) -> Result<QuadratureRule> {
        self.validate()?;
        QuadratureRule::new(dim, self.quadrature)
    }
}

fn check(u: &dyn Profile, x0: Point, r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::RadiusOutOfRange(r));
    }
    if !u.contains_ball(x0, r) {
        return Err(Error::BallOutsideDomain { x: x0[0], y: x0[1], radius: r });
    }
    Ok(())
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Integrals of the rescaled profile `u_r` over the unit ball and sphere.
#[derive(Clone, Copy, Debug)]
struct Moments {
    /// `∫_{B₁} ½|∇u_r|² + G(r; u_r)`
    bulk: f64,
    /// `∫_{B₁} ∂_r G(r; u_r)` in closed form
    bulk_dr: f64,
    /// `∫_{B₁} u_r`
    mass: f64,
    /// `∫_{∂B₁} u_r`
    trace: f64,
    /// `∫_{∂B₁} (∇u_r·x - (2/α) u_r)²`
    defect: f64,
}

fn moments(u: &dyn Profile, x0: Point, r: f64, rule: &QuadratureRule) -> Result<Moments> {
    check(u, x0, r)?;
    let al = alpha(r)?;
    let view = Rescaled::new(u, x0, r, mu(r)?);
    let [bulk, bulk_dr, mass] = rule.integrate_ball_n([0.0, 0.0], 1.0, |x, _| {
        let (v, g) = view.value_grad(x)?;
        let v = v.max(0.0);
        Ok([0.5 * dot(g, g) + g_integrand(r, v)?, g_integrand_dr(r, v)?, v])
    })?;
    let [trace, defect] = rule.integrate_sphere_n([0.0, 0.0], 1.0, |x, n| {
        let (v, g) = view.value_grad(x)?;
        let d = dot(g, n) - 2.0 / al * v;
        Ok([v, d * d])
    })?;
    Ok(Moments { bulk, bulk_dr, mass, trace, defect })
}

fn weiss_with(u: &dyn Profile, x0: Point, r: f64, rule: &QuadratureRule) -> Result<f64> {
    check(u, x0, r)?;
    let n = u.dim() as i32;
    let a = log_factor(r);
    let j0 = rule.integrate_ball(x0, r, |p, _| {
        let (v, g) = u.value_grad(p)?;
        Ok(0.5 * dot(g, g) + f_energy(v.max(0.0), ForcingMode::Logarithmic)?)
    })?;
    let boundary = rule.integrate_sphere(x0, r, |p, _| Ok(u.value(p)?.powi(2)))?;
    Ok(alpha(r)? / (r.powi(n + 2) * a * a) * j0 - boundary / (r.powi(n + 3) * a * a))
}

/// `W(r; u, x⁰) = α/(r^{n+2}a²)·J₀(u; B_r(x⁰)) - 1/(r^{n+3}a²)·∫_{∂B_r(x⁰)} u²`,
/// evaluated in physical coordinates.
pub fn weiss_energy(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<f64> {
    weiss_with(u, x0, r, &cfg.rule(u.dim())?)
}

/// Perfect-square term `K = (α/r) ∫_{∂B₁} (∇u_r·x - (2/α) u_r)²`.
pub fn k_term(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<f64> {
    let m = moments(u, x0, r, &cfg.rule(u.dim())?)?;
    Ok(alpha(r)? / r * m.defect)
}

/// `Q = α'(r) ∫_{B₁}(½|∇u_r|² + G) + α ∫_{B₁} 2u_r/(r a²)·(1 - log(u_r a))`.
pub fn q_term(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<f64> {
    let m = moments(u, x0, r, &cfg.rule(u.dim())?)?;
    Ok(alpha_prime(r)? * m.bulk + alpha(r)? * m.bulk_dr)
}

/// Q with the radial derivative of `G` taken by central differences at
/// fixed `u_r`, as it arises when differentiating W.
pub fn q_term_derivation_form(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<f64> {
    let rule = cfg.rule(u.dim())?;
    check(u, x0, r)?;
    let d = cfg.fd_step * r;
    let view = Rescaled::new(u, x0, r, mu(r)?);
    let [bulk, dg] = rule.integrate_ball_n([0.0, 0.0], 1.0, |x, _| {
        let (v, g) = view.value_grad(x)?;
        let v = v.max(0.0);
        let dg = (g_integrand(r + d, v)? - g_integrand(r - d, v)?) / (2.0 * d);
        Ok([0.5 * dot(g, g) + g_integrand(r, v)?, dg])
    })?;
    Ok(alpha_prime(r)? * bulk + alpha(r)? * dg)
}

/// `Q̄ = Q - 1/(r a^{1+γ})`.
pub fn qbar_term(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<f64> {
    Ok(q_term(u, x0, r, cfg)? - qbar_shift(r, cfg.gamma)?)
}

fn phi_coefficient(r: f64, n: usize) -> Result<f64> {
    let l = r.ln();
    Ok(2.0 * alpha(r)? * l / ((4.0 * l - 1.0) * (n as f64 + 2.0)))
}

/// `Φ = W - [2α log r/((4 log r - 1)(n + 2))] ∫_{∂B₁} u_r`.
pub fn phi_diagnostic(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<f64> {
    let rule = cfg.rule(u.dim())?;
    let w = weiss_with(u, x0, r, &rule)?;
    let m = moments(u, x0, r, &rule)?;
    Ok(w - phi_coefficient(r, u.dim())? * m.trace)
}

/// `∫_{∂B₁} (∇u_r·x - (2/α(r)) u_r)²`.
pub fn homogeneity_defect(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<f64> {
    Ok(moments(u, x0, r, &cfg.rule(u.dim())?)?.defect)
}

fn check_unit_ball(v: &dyn Profile) -> Result<()> {
    if v.contains_ball([0.0, 0.0], 1.0) {
        Ok(())
    } else {
        Err(Error::DomainTooSmall)
    }
}

/// `M(r; v) = α ∫_{B₁}(½|∇v|² + G(r; v)) - ∫_{∂B₁} v²`.
pub fn m_energy(r: f64, v: &dyn Profile, q: &QuadratureConfig) -> Result<f64> {
    check_unit_ball(v)?;
    let al = alpha(r)?;
    let rule = QuadratureRule::new(v.dim(), *q)?;
    let bulk = rule.integrate_ball([0.0, 0.0], 1.0, |x, _| {
        let (val, g) = v.value_grad(x)?;
        Ok(0.5 * dot(g, g) + g_integrand(r, val.max(0.0))?)
    })?;
    let trace = rule.integrate_sphere([0.0, 0.0], 1.0, |x, _| Ok(v.value(x)?.powi(2)))?;
    Ok(al * bulk - trace)
}

/// `M₀(v) = ∫_{B₁}(½|∇v|² + v) - ∫_{∂B₁} v²`.
pub fn m0_energy(v: &dyn Profile, q: &QuadratureConfig) -> Result<f64> {
    check_unit_ball(v)?;
    let rule = QuadratureRule::new(v.dim(), *q)?;
    let bulk = rule.integrate_ball([0.0, 0.0], 1.0, |x, _| {
        let (val, g) = v.value_grad(x)?;
        Ok(0.5 * dot(g, g) + val)
    })?;
    let trace = rule.integrate_sphere([0.0, 0.0], 1.0, |x, _| Ok(v.value(x)?.powi(2)))?;
    Ok(bulk - trace)
}

/// Energy density of half-space solutions, `H^{n-1}(∂B₁)/(8n(n+2))`.
pub fn omega_half(n: usize) -> f64 {
    sphere_measure(n) / (8.0 * n as f64 * (n as f64 + 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Density {
    Regular,
    NotRegular,
}

impl Density {
    pub fn label(self) -> &'static str {
        match self {
            Density::Regular => "REGULAR",
            Density::NotRegular => "NOT-REGULAR",
        }
    }
}

pub fn energy_density_classify(limit: f64, n: usize, tol: f64) -> Density {
    if (limit - omega_half(n)).abs() <= tol {
        Density::Regular
    } else {
        Density::NotRegular
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DerivativeCheck {
    pub r: f64,
    /// Central difference of W with step `fd_step·r`.
    pub fd: f64,
    pub k: f64,
    pub q: f64,
}

impl DerivativeCheck {
    pub fn relative_error(&self) -> f64 {
        (self.fd - (self.k + self.q)).abs() / (self.k + self.q).abs()
    }
}

pub fn derivative_check(u: &dyn Profile, x0: Point, r: f64, cfg: &WeissConfig) -> Result<DerivativeCheck> {
    let rule = cfg.rule(u.dim())?;
    let d = cfg.fd_step * r;
    let fd = (weiss_with(u, x0, r + d, &rule)? - weiss_with(u, x0, r - d, &rule)?) / (2.0 * d);
    let m = moments(u, x0, r, &rule)?;
    let al = alpha(r)?;
    Ok(DerivativeCheck { r, fd, k: al / r * m.defect, q: alpha_prime(r)? * m.bulk + al * m.bulk_dr })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeissRecord {
    pub r: f64,
    pub w: f64,
    pub k: f64,
    pub q: f64,
    pub qbar: f64,
    pub wbar: f64,
    pub phi: f64,
    pub hdefect: f64,
    /// `½ ∫_{B₁} u_r`, the blow-up side of the density estimate.
    pub half_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeissScan {
    pub center: Point,
    pub dim: usize,
    pub gamma: f64,
    pub records: Vec<WeissRecord>,
    /// Extrapolation of W over the three smallest radii (W̄ and W share the limit).
    pub wbar_limit_estimate: Option<f64>,
    /// Extrapolation of `½ ∫_{B₁} u_r` over the same radii.
    pub blowup_limit_estimate: Option<f64>,
    pub estimates_agree: bool,
    /// Bound on the neglected `∫₀^{r_min} Q`.
    pub q_tail_error: f64,
}

impl WeissScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,W,K,Q,Qbar,Wbar,Phi,hdefect")?;
        for s in &self.records {
            writeln!(w, "{},{},{},{},{},{},{},{}", s.r, s.w, s.k, s.q, s.qbar, s.wbar, s.phi, s.hdefect)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan serializes")
    }

    /// Largest relative drop of W̄ when moving to a larger radius (0 when monotone).
    pub fn worst_wbar_decrease(&self) -> f64 {
        let mut recs = self.records.clone();
        recs.sort_by(|a, b| a.r.total_cmp(&b.r));
        recs.windows(2)
            .map(|p| (p[0].wbar - p[1].wbar) / p[0].wbar.abs().max(p[1].wbar.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

fn limit_in_log_scale(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let t = [1.0 / log_factor(points[0].0), 1.0 / log_factor(points[1].0), 1.0 / log_factor(points[2].0)];
    Some(extrapolate_to_zero(t, [points[0].1, points[1].1, points[2].1]))
}

/// Scans the energies over decreasing radii. `∫_{r_min}^r Q` uses composite
/// Gauss–Legendre between consecutive radii; `∫₀^{r_min} Q` is dropped and
/// reported as an error bar; the subtraction in Q̄ is integrated in closed form.
pub fn wbar_scan(u: &dyn Profile, x0: Point, radii: &[f64], cfg: &WeissConfig) -> Result<WeissScan> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidSpec("radii must be non-empty and strictly decreasing".into()));
    }
    let rule = cfg.rule(u.dim())?;
    let n = u.dim();
    let mut records = Vec::with_capacity(radii.len());
    for &r in radii {
        let m = moments(u, x0, r, &rule)?;
        let w = weiss_with(u, x0, r, &rule)?;
        let al = alpha(r)?;
        let q = alpha_prime(r)? * m.bulk + al * m.bulk_dr;
        records.push(WeissRecord {
            r,
            w,
            k: al / r * m.defect,
            q,
            qbar: q - qbar_shift(r, cfg.gamma)?,
            wbar: 0.0,
            phi: w - phi_coefficient(r, n)? * m.trace,
            hdefect: m.defect,
            half_mass: 0.5 * m.mass,
        });
    }
    let (gx, gw) = crate::fields::gauss_legendre(Q_NODES);
    let q_at = |s: f64| -> Result<f64> {
        let m = moments(u, x0, s, &rule)?;
        Ok(alpha_prime(s)? * m.bulk + alpha(s)? * m.bulk_dr)
    };
    // Cumulative ∫_{r_min}^{r} Q, walking outward from the smallest radius.
    let mut cumulative = 0.0;
    for idx in (0..records.len()).rev() {
        if idx + 1 < records.len() {
            let (lo, hi) = (records[idx + 1].r, records[idx].r);
            let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, wt) in gx.iter().zip(&gw) {
                cumulative += h * wt * q_at(c + h * x)?;
            }
        }
        let rec = &mut records[idx];
        rec.wbar = rec.w - cumulative + qbar_shift_integral(rec.r, cfg.gamma)?;
    }
    let smallest: Vec<&WeissRecord> = records.iter().rev().take(3).collect();
    let wbar_limit_estimate = limit_in_log_scale(&smallest.iter().map(|s| (s.r, s.w)).collect::<Vec<_>>());
    let blowup_limit_estimate = limit_in_log_scale(&smallest.iter().map(|s| (s.r, s.half_mass)).collect::<Vec<_>>());
    let estimates_agree = match (wbar_limit_estimate, blowup_limit_estimate) {
        (Some(a), Some(b)) => (a - b).abs() <= LIMIT_CROSS_CHECK * a.abs().max(b.abs()),
        _ => false,
    };
    let r_min = radii[radii.len() - 1];
    let q_tail_error = if r_min < (-1.0f64).exp() { q_tail_bound(r_min, Q_BOUND_CONSTANT)? } else { f64::NAN };
    Ok(WeissScan {
        center: x0,
        dim: n,
        gamma: cfg.gamma,
        records,
        wbar_limit_estimate,
        blowup_limit_estimate,
        estimates_agree,
        q_tail_error,
    })
}
