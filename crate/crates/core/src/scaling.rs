//! Scaling and forcing functions of the logarithmic problem together with
//! their classical (constant forcing) counterparts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value `v log v` is treated as its limit 0.
pub const TINY: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingMode {
    #[default]
    Logarithmic,
    Constant,
}

impl ForcingMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logarithmic" | "log" => Some(ForcingMode::Logarithmic),
            "constant" | "classical" => Some(ForcingMode::Constant),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ForcingMode::Logarithmic => "logarithmic",
            ForcingMode::Constant => "constant",
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::RadiusOutOfRange(r))
    }
}

fn check_value(v: f64) -> Result<()> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeInput(v))
    }
}

/// `1 - 2 log r`, the logarithmic factor shared by μ and α.
pub fn log_factor(r: f64) -> f64 {
    1.0 - 2.0 * r.ln()
}

/// Blow-up normalization `μ(r) = r²(1 - 2 log r)`.
pub fn mu(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(r * r * log_factor(r))
}

/// Weight `α(r) = 1 - 1/(2 log r)` in front of the bulk energy.
pub fn alpha(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(1.0 - 0.5 / r.ln())
}

pub fn alpha_prime(r: f64) -> Result<f64> {
    check_radius(r)?;
    let l = r.ln();
    Ok(0.5 / (r * l * l))
}

/// Supercharacteristic growth scale `r²|log r|`.
pub fn growth_scale(r: f64) -> f64 {
    r * r * r.ln().abs()
}

/// Positivity threshold `τ(h) = h²(1 + 2|log h|)/10`.
pub fn positivity_threshold(h: f64) -> f64 {
    0.1 * h * h * (1.0 + 2.0 * h.ln().abs())
}

fn xlogx_energy(v: f64) -> f64 {
    if v < TINY {
        0.0
    } else {
        v * (1.0 - v.ln())
    }
}

/// Potential `F`: `v(1 - log v)` or `v`.
pub fn f_energy(v: f64, mode: ForcingMode) -> Result<f64> {
    check_value(v)?;
    Ok(match mode {
        ForcingMode::Logarithmic => xlogx_energy(v),
        ForcingMode::Constant => v,
    })
}

/// Regularized potential `F_ε(v) = F(v + ε) - F(ε)`, so that `F_ε(0) = 0`.
pub fn regularized_energy(v: f64, eps: f64, mode: ForcingMode) -> f64 {
    match mode {
        ForcingMode::Logarithmic if eps > 0.0 => xlogx_energy(v + eps) - xlogx_energy(eps),
        ForcingMode::Logarithmic => xlogx_energy(v),
        ForcingMode::Constant => v,
    }
}

/// `F_ε'(v)`: `-log(v + ε)` or `1`.
pub fn regularized_derivative(v: f64, eps: f64, mode: ForcingMode) -> f64 {
    match mode {
        ForcingMode::Logarithmic => -(v + eps).max(TINY).ln(),
        ForcingMode::Constant => 1.0,
    }
}

/// Rescaled potential `G(r; v) = v/a · (1 - log(v r² a))`, `a = 1 - 2 log r`.
pub fn g_integrand(r: f64, v: f64) -> Result<f64> {
    check_radius(r)?;
    check_value(v)?;
    if v < TINY {
        return Ok(0.0);
    }
    let a = log_factor(r);
    Ok(v / a * (1.0 - (v * r * r * a).ln()))
}

/// `∂G/∂r` at fixed `v`: `2v/(r a²) · (1 - log(v a))`.
pub fn g_integrand_dr(r: f64, v: f64) -> Result<f64> {
    check_radius(r)?;
    check_value(v)?;
    if v < TINY {
        return Ok(0.0);
    }
    let a = log_factor(r);
    Ok(2.0 * v / (r * a * a) * (1.0 - (v * a).ln()))
}

/// Subtraction `1/(r a^{1+γ})` turning Q into the corrected rate.
pub fn qbar_shift(r: f64, gamma: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(1.0 / (r * log_factor(r).powf(1.0 + gamma)))
}

/// `∫₀^r ds / (s a(s)^{1+γ}) = a(r)^{-γ} / (2γ)`.
pub fn qbar_shift_integral(r: f64, gamma: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(log_factor(r).powf(-gamma) / (2.0 * gamma))
}

/// Pointwise envelope `C log(-log r)/(r log² r)` for the radial rate Q,
/// positive for `r < 1/e`.
pub fn q_bound(r: f64, c: f64) -> Result<f64> {
    check_radius(r)?;
    let l = r.ln();
    Ok(c * (-l).ln() / (r * l * l))
}

/// `C ∫₀^r log(-log s)/(s log² s) ds = C (1 + log|log r|)/|log r|`, valid for `r < 1/e`.
pub fn q_tail_bound(r: f64, c: f64) -> Result<f64> {
    check_radius(r)?;
    let t = -r.ln();
    Ok(c * (1.0 + t.ln()) / t)
}
