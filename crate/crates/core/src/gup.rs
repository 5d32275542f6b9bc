//! Deformed commutation relation `[x, p] = iħ(1 + αx² + βp²)` with
//! `α, β < 0`, and the q-deformed oscillator it maps onto.
//!
//! Only the negative branch of the `(α, β) → q` mapping is provided; for
//! `α, β > 0` the crate answers the minimal-uncertainty predicate and
//! nothing else.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::DeformationParameter;

/// Constants of the deformed commutator and of the oscillator.
///
/// Units are documentary: `alpha` in 1/length², `beta` in 1/momentum²,
/// `hbar` in action units, `m` a mass and `omega` a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GupParameters {
    pub alpha: f64,
    pub beta: f64,
    pub hbar: f64,
    pub m: f64,
    pub omega: f64,
}

impl GupParameters {
    pub fn new(alpha: f64, beta: f64, hbar: f64, m: f64, omega: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            hbar,
            m,
            omega,
        };
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() {
                return Err(Error::InvalidGupParams(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [("hbar", hbar), ("m", m), ("omega", omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGupParams(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(p)
    }

    /// `u = ħ√(|α||β|)`
    pub fn coupling(&self) -> f64 {
        self.hbar * (self.alpha.abs() * self.beta.abs()).sqrt()
    }
}

fn check_same_sign(alpha: f64, beta: f64) -> Result<()> {
    if alpha == 0.0 || beta == 0.0 {
        return Err(Error::InvalidGupParams(format!(
            "alpha and beta must be nonzero, got alpha={alpha}, beta={beta}"
        )));
    }
    if alpha.signum() != beta.signum() {
        return Err(Error::InvalidGupParams(format!(
            "mixed signs: alpha={alpha}, beta={beta}"
        )));
    }
    Ok(())
}

/// `q = (1 - u)/(1 + u)` with `u = ħ√(|α||β|)`, for `α, β < 0` and `u < 1`.
pub fn q_from_alpha_beta(p: &GupParameters) -> Result<DeformationParameter> {
    check_same_sign(p.alpha, p.beta)?;
    if p.alpha > 0.0 {
        return Err(Error::InvalidGupParams(
            "alpha, beta > 0 is not mapped; only the negative branch is supported".into(),
        ));
    }
    let u = p.coupling();
    if u >= 1.0 {
        return Err(Error::InvalidGupParams(format!(
            "hbar*sqrt(|alpha*beta|) = {u} must be < 1 for q in (0, 1)"
        )));
    }
    DeformationParameter::new(ratio_one_minus_over_one_plus(u))
}

/// `(1 - u)/(1 + u)` rounded correctly: both sums are split into exact
/// hi/lo pairs and the quotient gets one fma-based residual correction.
fn ratio_one_minus_over_one_plus(u: f64) -> f64 {
    let two_sum = |a: f64, b: f64| {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    };
    let (num_hi, num_lo) = two_sum(1.0, -u);
    let (den_hi, den_lo) = two_sum(1.0, u);
    let q0 = num_hi / den_hi;
    let residual = (-q0).mul_add(den_hi, num_hi) + num_lo - q0 * den_lo;
    q0 + residual / den_hi
}

/// Frequency `(1+q)ω/2` of the equivalent q-deformed oscillator.
pub fn effective_frequency(q: DeformationParameter, omega: f64) -> f64 {
    0.5 * (1.0 + q.value()) * omega
}

/// Relative mismatch `| |α| - m²ω²|β| | / |α|` of the equivalence condition.
pub fn check_isotropy(p: &GupParameters) -> f64 {
    let target = p.m * p.m * p.omega * p.omega * p.beta.abs();
    (p.alpha.abs() - target).abs() / p.alpha.abs()
}

/// Whether the deformed commutator produces nonzero minimal uncertainties in
/// position and momentum: only for `α, β > 0`.
pub fn minimal_uncertainty_exists(alpha: f64, beta: f64) -> Result<bool> {
    check_same_sign(alpha, beta)?;
    Ok(alpha > 0.0)
}

/// Everything the `gup` subcommand prints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GupReport {
    pub parameters: GupParameters,
    pub coupling: f64,
    pub q: f64,
    pub effective_frequency: f64,
    pub isotropy_mismatch: f64,
    pub minimal_uncertainty: bool,
}

pub fn gup_report(p: &GupParameters) -> Result<GupReport> {
    let q = q_from_alpha_beta(p)?;
    Ok(GupReport {
        parameters: *p,
        coupling: p.coupling(),
        q: q.value(),
        effective_frequency: effective_frequency(q, p.omega),
        isotropy_mismatch: check_isotropy(p),
        minimal_uncertainty: minimal_uncertainty_exists(p.alpha, p.beta)?,
    })
}
