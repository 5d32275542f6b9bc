//! Photon statistics, metric factor, quadrature squeezing and the
//! signal-to-quantum-noise ratio of the q-deformed coherent state.
//!
//! Two ladder algebras appear here. The quadrature `X = (b + b†)/√2` is built
//! from the conventional operators `b|n⟩ = √n |n-1⟩` acting on the deformed
//! state; the ratios `√n/√[n]_q` produced that way are where the
//! `√(2/(1+q))` factors of the small-`t` expansions come from. The deformed
//! ladder `a|n⟩ = √[n]_q |n-1⟩` enters only [`intelligent_check`].
//!
//! Every moment carries a truncation error bound derived from the state's
//! geometric tail envelope. Derived quantities propagate those bounds to
//! first order.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{DeformationParameter, SeriesConfig};
use crate::states::QCoherentState;

/// Value with an absolute truncation-error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub error_bound: f64,
}

/// Which axis of the z-plane a one-parameter evaluation runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// `z = √t`
    Real,
    /// `z = i√t`
    Imag,
}

impl Phase {
    pub fn point(self, t: f64) -> Complex64 {
        match self {
            Phase::Real => Complex64::new(t.sqrt(), 0.0),
            Phase::Imag => Complex64::new(0.0, t.sqrt()),
        }
    }
}

/// Moments of the number operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumberMoments {
    pub mean: f64,
    pub second: f64,
    pub variance: f64,
    pub err_mean: f64,
    pub err_second: f64,
    pub err_variance: f64,
}

pub fn number_moments(state: &QCoherentState) -> NumberMoments {
    let p = state.probabilities();
    let mean: f64 = p.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let second: f64 = p.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
    // centered form avoids ⟨N²⟩ - ⟨N⟩² cancellation
    let variance: f64 = p
        .iter()
        .enumerate()
        .map(|(n, p)| (n as f64 - mean).powi(2) * p)
        .sum();

    let tail = state.tail();
    let err_mean = mean * tail.rel_tail + tail.number_moment(1);
    let err_second = second * tail.rel_tail + tail.number_moment(2);
    let err_variance = err_second + 2.0 * mean * err_mean + err_mean * err_mean;
    NumberMoments {
        mean,
        second,
        variance,
        err_mean,
        err_second,
        err_variance,
    }
}

/// `⟨N⟩ = Σ n pₙ`.
pub fn mean_n(state: &QCoherentState) -> f64 {
    number_moments(state).mean
}

/// Mandel parameter `Q = ((ΔN)² - ⟨N⟩)/⟨N⟩`; undefined at the vacuum.
pub fn mandel(state: &QCoherentState) -> Result<f64> {
    mandel_bounded(state).map(|b| b.value)
}

pub fn mandel_bounded(state: &QCoherentState) -> Result<Bounded> {
    if state.is_vacuum() {
        return Err(Error::DegenerateState);
    }
    let m = number_moments(state);
    Ok(mandel_from(&m))
}

fn mandel_from(m: &NumberMoments) -> Bounded {
    let value = (m.variance - m.mean) / m.mean;
    let err = (m.err_variance + (value + 1.0).abs() * m.err_mean) / (m.mean - m.err_mean);
    Bounded {
        value,
        error_bound: err,
    }
}

/// `ω_q(t) = d⟨N⟩/dt` from the series, at a state built on the real axis.
///
/// With `A(t) = t e_q'(t)`, `⟨N⟩ = A/e_q` and the quotient rule collapses to
/// `(⟨N²⟩ - ⟨N⟩²)/t`; the variance is taken from the same truncated series.
fn metric_from(t: f64, m: &NumberMoments) -> Bounded {
    if t == 0.0 {
        return Bounded {
            value: 1.0,
            error_bound: 0.0,
        };
    }
    Bounded {
        value: m.variance / t,
        error_bound: m.err_variance / t,
    }
}

pub fn metric_factor(q: DeformationParameter, t: f64, tolerance: f64) -> Result<f64> {
    metric_factor_bounded(q, t, tolerance, &SeriesConfig::default()).map(|b| b.value)
}

pub fn metric_factor_bounded(
    q: DeformationParameter,
    t: f64,
    tolerance: f64,
    config: &SeriesConfig,
) -> Result<Bounded> {
    refine(q, Phase::Real.point(t), tolerance, config, |s| {
        Ok(metric_from(s.t(), &number_moments(s)))
    })
}

/// `⟨b⟩`, `⟨b²⟩`, `⟨b†b⟩` for the conventional ladder `b|n⟩ = √n |n-1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderMoments {
    pub mean_b: Complex64,
    pub mean_b2: Complex64,
    pub mean_n: f64,
    pub err_b: f64,
    pub err_b2: f64,
    pub err_n: f64,
}

pub fn conventional_ladder_moments(state: &QCoherentState) -> LadderMoments {
    let p = state.probabilities();
    let n_max = state.n_max();
    let mut b = 0.0;
    let mut b2 = 0.0;
    for n in 0..n_max {
        b += ((n + 1) as f64 * p[n] * p[n + 1]).sqrt();
        if n + 2 <= n_max {
            b2 += (((n + 1) * (n + 2)) as f64 * p[n] * p[n + 2]).sqrt();
        }
    }
    let phase = state.unit_phase();
    let tail = state.tail();
    let numbers = number_moments(state);
    LadderMoments {
        mean_b: phase * b,
        mean_b2: phase * phase * b2,
        mean_n: numbers.mean,
        err_b: b * tail.rel_tail + tail.lowering_once(),
        err_b2: b2 * tail.rel_tail + tail.lowering_twice(),
        err_n: numbers.err_mean,
    }
}

/// Mean and variance of `X = (b + b†)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub mean_x: f64,
    pub var_x: f64,
    pub err_mean_x: f64,
    pub err_var_x: f64,
}

pub fn quadrature(state: &QCoherentState) -> Quadrature {
    quadrature_from(&conventional_ladder_moments(state))
}

fn quadrature_from(l: &LadderMoments) -> Quadrature {
    let re_b = l.mean_b.re;
    let mean_x = std::f64::consts::SQRT_2 * re_b;
    let var_x = 0.5 + l.mean_n + l.mean_b2.re - 2.0 * re_b * re_b;
    Quadrature {
        mean_x,
        var_x,
        err_mean_x: std::f64::consts::SQRT_2 * l.err_b,
        err_var_x: l.err_n + l.err_b2 + 4.0 * re_b.abs() * l.err_b + 2.0 * l.err_b * l.err_b,
    }
}

/// `R_q(t) = 2 (ΔX)²` at `z = √t` or `z = i√t`; below one means squeezing.
pub fn variance_ratio(q: DeformationParameter, t: f64, phase: Phase, tolerance: f64) -> Result<f64> {
    variance_ratio_bounded(q, t, phase, tolerance, &SeriesConfig::default()).map(|b| b.value)
}

pub fn variance_ratio_bounded(
    q: DeformationParameter,
    t: f64,
    phase: Phase,
    tolerance: f64,
    config: &SeriesConfig,
) -> Result<Bounded> {
    refine(q, phase.point(t), tolerance, config, |s| {
        let x = quadrature(s);
        Ok(Bounded {
            value: 2.0 * x.var_x,
            error_bound: 2.0 * x.err_var_x,
        })
    })
}

/// `σ = ⟨X⟩²/(ΔX)²`.
pub fn snr(state: &QCoherentState) -> f64 {
    let x = quadrature(state);
    x.mean_x * x.mean_x / x.var_x
}

pub fn snr_bounded(state: &QCoherentState) -> Bounded {
    snr_from(&quadrature(state))
}

fn snr_from(x: &Quadrature) -> Bounded {
    let value = x.mean_x * x.mean_x / x.var_x;
    let err_num = 2.0 * x.mean_x.abs() * x.err_mean_x + x.err_mean_x * x.err_mean_x;
    let denom_floor = x.var_x - x.err_var_x;
    Bounded {
        value,
        error_bound: err_num / denom_floor + value * x.err_var_x / denom_floor,
    }
}

/// Closed-form first-order coefficients of the small-`t` expansions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeSet {
    /// `ω_q(t) ≈ 1 + d_omega·t`
    pub d_omega: f64,
    /// `Q_q(t) ≈ d_mandel·t`
    pub d_mandel: f64,
    /// `R_q(t) ≈ 1 + d_ratio_imag·t` at `z = i√t`
    pub d_ratio_imag: f64,
    /// `R_q(t) ≈ 1 + d_ratio_real_superunit·t` at `z = √t` (the `q > 1` branch)
    pub d_ratio_real_superunit: f64,
}

pub fn small_t_slopes(q: DeformationParameter) -> SlopeSet {
    let q = q.value();
    let s = (2.0 / (1.0 + q)).sqrt();
    SlopeSet {
        d_omega: 2.0 * (1.0 - q) / (1.0 + q),
        d_mandel: (1.0 - q) / (1.0 + q),
        d_ratio_imag: 2.0 * (1.0 - s),
        d_ratio_real_superunit: -2.0 * (1.0 - s),
    }
}

/// Coefficient of `2(Re z)²` in `(ΔX)²` at fixed `t`:
/// `[(ΔX)²(√t) - (ΔX)²(i√t)]/(2t)`. Tends to `√(2/(1+q)) - 1` as `t → 0`.
pub fn quadrature_coefficient_re2(q: DeformationParameter, t: f64, tolerance: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::DegenerateState);
    }
    let config = SeriesConfig::default();
    let real = refine(q, Phase::Real.point(t), tolerance * t, &config, |s| {
        let x = quadrature(s);
        Ok(Bounded {
            value: x.var_x,
            error_bound: x.err_var_x,
        })
    })?;
    let imag = refine(q, Phase::Imag.point(t), tolerance * t, &config, |s| {
        let x = quadrature(s);
        Ok(Bounded {
            value: x.var_x,
            error_bound: x.err_var_x,
        })
    })?;
    Ok((real.value - imag.value) / (2.0 * t))
}

/// Both sides of the uncertainty relation for `x = c(a + a†)`,
/// `p = i d(a† - a)` with the deformed ladder `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintySides {
    /// `Δx·Δp`
    pub product: f64,
    /// `½|⟨[x, p]⟩|`
    pub half_commutator: f64,
}

impl UncertaintySides {
    pub fn residual(&self) -> f64 {
        (self.product - self.half_commutator).abs()
    }
}

/// Scale constants `(c, d)` for a given mass scale: `c = 1/√(2m)`,
/// `d = √(m/2)`; unit mass gives `c = d = 1/√2`.
pub fn position_momentum_scales(mass_scale: f64) -> (f64, f64) {
    ((0.5 / mass_scale).sqrt(), (0.5 * mass_scale).sqrt())
}

pub fn uncertainty_sides(state: &QCoherentState, mass_scale: f64) -> UncertaintySides {
    let (c, d) = position_momentum_scales(mass_scale);
    let q = state.q();
    let p = state.probabilities();
    let n_max = state.n_max();

    // ⟨a⟩ and ⟨a²⟩ with the deformed weights √[n+1]_q
    let mut a1 = 0.0;
    let mut a2 = 0.0;
    let mut raise_lower = 0.0; // ⟨a†a⟩ = Σ [n] pₙ
    let mut lower_raise = 0.0; // ⟨aa†⟩ = Σ [n+1] pₙ
    let mut commutator = 0.0; // ⟨[a, a†]⟩ = Σ qⁿ pₙ
    for n in 0..=n_max {
        let nn = n as u64;
        raise_lower += q.bracket(nn) * p[n];
        lower_raise += q.bracket(nn + 1) * p[n];
        commutator += q.pow(nn) * p[n];
        if n < n_max {
            a1 += (q.bracket(nn + 1) * p[n] * p[n + 1]).sqrt();
        }
        if n + 2 <= n_max {
            a2 += (q.bracket(nn + 1) * q.bracket(nn + 2) * p[n] * p[n + 2]).sqrt();
        }
    }
    let phase = state.unit_phase();
    let mean_a = phase * a1;
    let mean_a2 = phase * phase * a2;

    let var_x = c * c * (lower_raise + raise_lower + 2.0 * mean_a2.re - 4.0 * mean_a.re * mean_a.re);
    let var_p = d * d * (lower_raise + raise_lower - 2.0 * mean_a2.re - 4.0 * mean_a.im * mean_a.im);
    // [x, p] = 2icd [a, a†]
    UncertaintySides {
        product: (var_x.max(0.0) * var_p.max(0.0)).sqrt(),
        half_commutator: c * d * commutator.abs(),
    }
}

/// `|Δx·Δp - ½|⟨[x, p]⟩||`; zero up to truncation for an eigenstate of `a`.
pub fn intelligent_check(state: &QCoherentState, mass_scale: f64) -> f64 {
    uncertainty_sides(state, mass_scale).residual()
}

/// Every scalar observable at one `(q, z)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableReport {
    pub q: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub t: f64,
    pub mean_n: f64,
    pub var_n: f64,
    /// `None` at the vacuum, where `Q` is 0/0.
    pub mandel_q: Option<f64>,
    pub metric_omega: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub ratio_r: f64,
    pub snr_sigma: f64,
    pub n_max: usize,
    pub tail_bound: f64,
    pub bounds: ReportBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportBounds {
    pub mean_n: f64,
    pub var_n: f64,
    pub mandel_q: f64,
    pub metric_omega: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub ratio_r: f64,
    pub snr_sigma: f64,
}

impl ReportBounds {
    pub fn max(&self) -> f64 {
        [
            self.mean_n,
            self.var_n,
            self.mandel_q,
            self.metric_omega,
            self.mean_x,
            self.var_x,
            self.ratio_r,
            self.snr_sigma,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl ObservableReport {
    /// Evaluates every observable from one state, tightening the state's
    /// truncation until each error bound is at most `tolerance`.
    pub fn evaluate(
        q: DeformationParameter,
        z: Complex64,
        tolerance: f64,
        config: &SeriesConfig,
    ) -> Result<Self> {
        let (report, _) = refine_state(q, z, tolerance, config, |s| {
            let r = Self::from_state(s);
            let err = r.bounds.max();
            Ok((r, err))
        })?;
        Ok(report)
    }

    /// Evaluates every observable on the given state as is.
    pub fn from_state(state: &QCoherentState) -> Self {
        let numbers = number_moments(state);
        let ladder = conventional_ladder_moments(state);
        let x = quadrature_from(&ladder);
        let omega = metric_from(state.t(), &numbers);
        let sigma = snr_from(&x);
        let mandel = (!state.is_vacuum()).then(|| mandel_from(&numbers));
        ObservableReport {
            q: state.q().value(),
            z_re: state.z().re,
            z_im: state.z().im,
            t: state.t(),
            mean_n: numbers.mean,
            var_n: numbers.variance,
            mandel_q: mandel.map(|m| m.value),
            metric_omega: omega.value,
            mean_x: x.mean_x,
            var_x: x.var_x,
            ratio_r: 2.0 * x.var_x,
            snr_sigma: sigma.value,
            n_max: state.n_max(),
            tail_bound: state.tail_bound(),
            bounds: ReportBounds {
                mean_n: numbers.err_mean,
                var_n: numbers.err_variance,
                mandel_q: mandel.map_or(0.0, |m| m.error_bound),
                metric_omega: omega.error_bound,
                mean_x: x.err_mean_x,
                var_x: x.err_var_x,
                ratio_r: 2.0 * x.err_var_x,
                snr_sigma: sigma.error_bound,
            },
        }
    }
}

/// Hard floor on the state tolerance reached while refining.
const MIN_STATE_TOLERANCE: f64 = 1e-300;

/// Evaluates `f` on states of decreasing truncation tolerance until the
/// returned error bound is at most `tolerance`.
pub fn refine<F>(
    q: DeformationParameter,
    z: Complex64,
    tolerance: f64,
    config: &SeriesConfig,
    f: F,
) -> Result<Bounded>
where
    F: Fn(&QCoherentState) -> Result<Bounded>,
{
    refine_state(q, z, tolerance, config, |s| {
        let b = f(s)?;
        Ok((b, b.error_bound))
    })
    .map(|(b, _)| b)
}

pub fn refine_state<T, F>(
    q: DeformationParameter,
    z: Complex64,
    tolerance: f64,
    config: &SeriesConfig,
    f: F,
) -> Result<(T, QCoherentState)>
where
    F: Fn(&QCoherentState) -> Result<(T, f64)>,
{
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::invalid(
            "tolerance",
            format!("must be finite and > 0, got {tolerance}"),
        ));
    }
    let mut state_tol = tolerance;
    loop {
        let state = QCoherentState::with_config(q, z, state_tol, config)?;
        let (value, err) = f(&state)?;
        if err <= tolerance {
            return Ok((value, state));
        }
        let shrink = if err.is_finite() {
            (0.5 * tolerance / err).min(0.5)
        } else {
            1e-8
        };
        state_tol *= shrink;
        if state_tol < MIN_STATE_TOLERANCE {
            return Err(Error::NonConvergent {
                t: state.t(),
                tolerance,
                cap: config.max_terms,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn dp(q: f64) -> DeformationParameter {
        DeformationParameter::new(q).unwrap()
    }

    fn state(q: f64, re: f64, im: f64) -> QCoherentState {
        QCoherentState::new(dp(q), Complex64::new(re, im), 1e-15).unwrap()
    }

    #[test]
    fn vacuum_values() {
        let s = state(0.96, 0.0, 0.0);
        assert_eq!(mean_n(&s), 0.0);
        assert_eq!(mandel(&s), Err(Error::DegenerateState));
        let x = quadrature(&s);
        assert_eq!((x.mean_x, x.var_x), (0.0, 0.5));
        let l = conventional_ladder_moments(&s);
        assert_eq!((l.mean_b, l.mean_b2, l.mean_n), (Complex64::default(), Complex64::default(), 0.0));
        assert_eq!(snr(&s), 0.0);
        let sides = uncertainty_sides(&s, 1.0);
        assert!((sides.product - 0.5).abs() < 1e-15 && (sides.half_commutator - 0.5).abs() < 1e-15);
    }

    #[test]
    fn classical_limit_values() {
        let s = state(0.999_999, 1.0, 0.0);
        assert!((mean_n(&s) - 1.0).abs() < 1e-4);
        assert!(mandel(&s).unwrap().abs() < 1e-4);
        let l = conventional_ladder_moments(&s);
        assert!((l.mean_b - Complex64::new(1.0, 0.0)).norm() < 1e-4);
        assert!((l.mean_b2 - Complex64::new(1.0, 0.0)).norm() < 1e-4);
        let x = quadrature(&s);
        assert!((x.mean_x - 2.0_f64.sqrt()).abs() < 1e-4);
        assert!((x.var_x - 0.5).abs() < 1e-4);
        assert!((snr(&s) - 4.0).abs() < 1e-3);
        assert!((metric_factor(dp(0.999_999), 3.0, 1e-12).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mean_n_matches_reference() {
        let s = state(0.96, 0.5_f64.sqrt(), 0.0);
        // 40-digit weighted sum
        assert!((mean_n(&s) - 0.505_172_526_374_142_2).abs() < 1e-14);
    }

    #[test]
    fn mandel_positive_example() {
        let s = state(0.94, 2.0_f64.sqrt(), 0.0);
        let q = mandel(&s).unwrap();
        assert!(q > 0.0);
        // 40-digit weighted sum
        assert!((q - 0.069_030_442_809_062_64).abs() < 1e-12);
    }

    #[test]
    fn metric_factor_at_origin_is_one() {
        for q in [0.3, 1.0, 2.0] {
            assert_eq!(metric_factor(dp(q), 0.0, 1e-12).unwrap(), 1.0);
        }
    }

    #[test]
    fn metric_factor_matches_central_difference() {
        let q = dp(0.9);
        let h = 1e-4;
        let mean_at = |t: f64| mean_n(&QCoherentState::new(q, Complex64::new(t.sqrt(), 0.0), 1e-15).unwrap());
        for t in [0.3, 1.0, 4.0, 8.0] {
            let fd = (mean_at(t + h) - mean_at(t - h)) / (2.0 * h);
            let analytic = metric_factor(q, t, 1e-13).unwrap();
            assert!((analytic - fd).abs() < 1e-5, "t={t}: {analytic} vs {fd}");
        }
    }

    #[test]
    fn ladder_moments_reference() {
        let s = state(0.96, 0.3, 0.0);
        let l = conventional_ladder_moments(&s);
        assert!((l.mean_b.re - 0.300_274_663_511_977_1).abs() < 1e-14);
        // leading order z(1 + (√(2/(1+q)) - 1)t)
        let lead = 0.3 * (1.0 + ((2.0_f64 / 1.96).sqrt() - 1.0) * 0.09);
        assert!((l.mean_b.re - lead).abs() < 1e-4);
        let o = oracle::moments(0.96, (0.3, 0.0));
        // the ⟨b²⟩ cut pairs p_{N-1} with p_{N+1}, so its error is O(√tail)
        assert!((l.mean_b2.re - o.mean_b2.0).abs() <= l.err_b2);
        assert!(l.err_b2 < 1e-13);
    }

    #[test]
    fn snr_on_imaginary_axis_vanishes() {
        let s = state(0.96, 0.0, 0.8);
        assert!(snr(&s) <= 1e-10);
    }

    #[test]
    fn snr_example_below_bound() {
        let s = state(0.96, 0.4, 0.3);
        let sigma = snr(&s);
        assert!(sigma < 4.0 * mean_n(&s));
        assert!((sigma - 0.642_344_213_319_154_8).abs() < 1e-13);
    }

    #[test]
    fn slope_constants() {
        let s = small_t_slopes(dp(0.98));
        assert!((s.d_mandel - 1.0 / 99.0).abs() < 1e-15);
        let s = small_t_slopes(dp(0.96));
        assert!((s.d_ratio_imag + 0.020_305_0).abs() < 1e-7);
        let s = small_t_slopes(dp(0.94));
        assert!((s.d_omega - 0.061_855_7).abs() < 1e-7);
        let s = small_t_slopes(dp(1.0));
        assert_eq!(
            (s.d_omega, s.d_mandel, s.d_ratio_imag, s.d_ratio_real_superunit),
            (0.0, 0.0, 0.0, 0.0)
        );
        let s = small_t_slopes(dp(1.25));
        assert!((s.d_ratio_real_superunit + 0.114_381_9).abs() < 1e-7);
    }

    #[test]
    fn variance_ratio_at_origin() {
        for phase in [Phase::Real, Phase::Imag] {
            assert_eq!(variance_ratio(dp(0.9), 0.0, phase, 1e-12).unwrap(), 1.0);
        }
    }

    #[test]
    fn re2_coefficient() {
        let small = quadrature_coefficient_re2(dp(0.96), 1e-4, 1e-12).unwrap();
        assert!((small - ((2.0_f64 / 1.96).sqrt() - 1.0)).abs() < 1e-5);
        assert!(small > 0.0);
        for t in [0.1, 1.0, 5.0] {
            assert!(quadrature_coefficient_re2(dp(1.0), t, 1e-12).unwrap().abs() < 1e-6);
        }
        // 40-digit direct variance difference
        let mid = quadrature_coefficient_re2(dp(0.5), 0.5, 1e-14).unwrap();
        assert!((mid - 0.185_563_105_508_174_4).abs() < 1e-12);
        assert_eq!(quadrature_coefficient_re2(dp(0.5), 0.0, 1e-12), Err(Error::DegenerateState));
        for q in [0.5, 0.6, 0.7, 0.8, 0.9, 0.94, 0.96, 0.98] {
            for k in 1..=20 {
                let t = k as f64 / 20.0;
                assert!(quadrature_coefficient_re2(dp(q), t, 1e-12).unwrap() > 0.0, "q={q}, t={t}");
            }
        }
    }

    #[test]
    fn intelligent_equality_closed_form() {
        for &(q, re, im) in &[(0.96, 0.5, 0.2), (1.25, 1.0, -0.3), (1.0, 1.5, 0.5), (0.5, 0.9, 0.9)] {
            let s = state(q, re, im);
            let sides = uncertainty_sides(&s, 1.0);
            let expected = 0.5 * (1.0 + (q - 1.0) * s.t());
            assert!((sides.half_commutator - expected).abs() < 1e-10, "q={q}");
            assert!((sides.product - expected).abs() < 1e-10, "q={q}");
            assert!(intelligent_check(&s, 1.0) < 1e-8);
            assert!(intelligent_check(&s, 7.5) < 1e-8);
        }
    }

    #[test]
    fn report_bounds_respect_tolerance() {
        let r = ObservableReport::evaluate(dp(0.94), Complex64::new(2.0, 1.5), 1e-12, &SeriesConfig::default())
            .unwrap();
        assert!(r.bounds.max() <= 1e-12);
        assert_eq!(r.ratio_r, 2.0 * r.var_x);
        let q = r.mandel_q.unwrap();
        assert!((q - (r.var_n - r.mean_n) / r.mean_n).abs() < 1e-14);
        assert!(r.var_n >= 0.0 && r.var_x > 0.0 && r.snr_sigma >= 0.0);
    }

    #[test]
    fn report_at_vacuum_has_no_mandel() {
        let r = ObservableReport::evaluate(dp(0.5), Complex64::new(0.0, 0.0), 1e-12, &SeriesConfig::default())
            .unwrap();
        assert_eq!(r.mandel_q, None);
        assert_eq!(r.metric_omega, 1.0);
    }

    #[test]
    fn error_bounds_cover_actual_truncation_error() {
        // a loose state against the double-double oracle
        let q = 0.9;
        let z = Complex64::new(1.2, 0.9);
        let s = QCoherentState::new(dp(q), z, 1e-6).unwrap();
        let o = oracle::moments(q, (z.re, z.im));
        let m = number_moments(&s);
        let l = conventional_ladder_moments(&s);
        assert!((m.mean - o.mean_n).abs() <= m.err_mean + 1e-14);
        assert!((m.variance - o.var_n).abs() <= m.err_variance + 1e-14);
        assert!((l.mean_b - Complex64::new(o.mean_b.0, o.mean_b.1)).norm() <= l.err_b + 1e-14);
        assert!((l.mean_b2 - Complex64::new(o.mean_b2.0, o.mean_b2.1)).norm() <= l.err_b2 + 1e-14);
    }
}
