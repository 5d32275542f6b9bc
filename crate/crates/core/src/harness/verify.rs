//! Self-check suite behind `qdefcs verify`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gup::{effective_frequency, minimal_uncertainty_exists, q_from_alpha_beta, GupParameters};
use crate::observables::{
    mandel_bounded, metric_factor_bounded, Bounded, number_moments, refine, small_t_slopes,
    uncertainty_sides, variance_ratio_bounded, ObservableReport, Phase, SlopeSet,
};
use crate::oracle;
use crate::qcore::{DeformationParameter, SeriesConfig};
use crate::states::QCoherentState;
use crate::DEFAULT_TOLERANCE;

use super::scan::{scan_t, scan_z, Coords, Observable, ScanConfig, TGrid, ZGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Fast,
    Strict,
}

impl Profile {
    fn snr_grid(self) -> usize {
        match self {
            Profile::Fast => 20,
            Profile::Strict => 50,
        }
    }

    fn oracle_samples(self) -> usize {
        match self {
            Profile::Fast => 5,
            Profile::Strict => 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub profile: Profile,
    pub checks: Vec<CheckResult>,
    pub elapsed_seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const FIGURE_Q: [f64; 3] = [0.94, 0.96, 0.98];
const SLOPE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
const SLOPE_TOLERANCE: f64 = 0.01;
const ORACLE_TOLERANCE: f64 = 1e-10;
const SEED: u64 = 0x5eed_0001;

fn dp(q: f64) -> DeformationParameter {
    DeformationParameter::new(q).expect("built-in q values are valid")
}

/// First-order coefficient of `f` at `t = 0` from three one-sided
/// difference quotients, with the `t` and `t²` error terms eliminated.
pub fn richardson_slope(f0: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let [h1, h2, h3] = SLOPE_STEPS;
    let s = |h: f64| -> Result<f64> { Ok((f(h)? - f0) / h) };
    let (s1, s2, s3) = (s(h1)?, s(h2)?, s(h3)?);
    Ok((8.0 * s3 - 6.0 * s2 + s1) / 3.0)
}

fn relative_error(measured: f64, expected: f64) -> f64 {
    ((measured - expected) / expected).abs()
}

fn failed(name: &str, e: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        measured: f64::NAN,
        threshold: f64::NAN,
        detail: format!("error: {e}"),
    }
}

fn guarded(name: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| failed(name, e))
}

fn slope_check(
    name: &str,
    qs: &[f64],
    expected: impl Fn(&SlopeSet) -> f64,
    slopes: &dyn Fn(DeformationParameter) -> SlopeSet,
    f0: f64,
    f: impl Fn(DeformationParameter, f64) -> Result<f64>,
) -> CheckResult {
    guarded(name, || {
        let mut worst = 0.0_f64;
        let mut detail = Vec::new();
        for &q in qs {
            let q = dp(q);
            let want = expected(&slopes(q));
            let got = richardson_slope(f0, |t| f(q, t))?;
            worst = worst.max(relative_error(got, want));
            detail.push(format!("q={}: {got:.7} vs {want:.7}", q.value()));
        }
        Ok(CheckResult {
            name: name.to_string(),
            passed: worst <= SLOPE_TOLERANCE,
            measured: worst,
            threshold: SLOPE_TOLERANCE,
            detail: detail.join("; "),
        })
    })
}

fn slope_checks(slopes: &dyn Fn(DeformationParameter) -> SlopeSet) -> Vec<CheckResult> {
    let cfg = SeriesConfig::default();
    let tol = 1e-13;
    let mandel = |q, t| refine(q, Phase::Real.point(t), tol, &cfg, mandel_bounded).map(|b| b.value);
    let metric = |q, t| metric_factor_bounded(q, t, tol, &cfg).map(|b| b.value);
    let ratio = |phase| move |q, t| variance_ratio_bounded(q, t, phase, tol, &cfg).map(|b| b.value);
    let mut out = vec![
        slope_check("slope.mandel", &FIGURE_Q, |s| s.d_mandel, slopes, 0.0, mandel),
        slope_check("slope.metric", &FIGURE_Q, |s| s.d_omega, slopes, 1.0, metric),
        slope_check("slope.ratio_imag", &FIGURE_Q, |s| s.d_ratio_imag, slopes, 1.0, ratio(Phase::Imag)),
    ];
    let mut real = slope_check(
        "slope.ratio_real_superunit",
        &[1.25],
        |s| s.d_ratio_real_superunit,
        slopes,
        1.0,
        ratio(Phase::Real),
    );
    let squeezing = richardson_slope(1.0, |t| ratio(Phase::Real)(dp(1.25), t)).is_ok_and(|s| s < 0.0);
    real.passed &= squeezing;
    if !squeezing {
        real.detail.push_str("; slope is not negative");
    }
    out.push(real);
    out
}

fn figure_rows(observable: Observable, phase: Phase, stop: f64) -> Result<Vec<Vec<f64>>> {
    let cfg = ScanConfig {
        q_list: FIGURE_Q.to_vec(),
        t_grid: TGrid {
            start: 0.0,
            stop,
            count: 51,
        },
        phase,
        observable,
        ..ScanConfig::default()
    };
    let rows = scan_t(&cfg)?;
    Ok(FIGURE_Q
        .iter()
        .map(|&q| {
            rows.iter()
                .filter(|r| r.q == q)
                .filter(|r| matches!(r.coords, Coords::T { t } if t > 0.0))
                .map(|r| r.value)
                .collect()
        })
        .collect())
}

/// `Q > 0` on 50 points of `(0, 10]` and `Q_{0.94} > Q_{0.96} > Q_{0.98}`.
fn mandel_figure_check() -> CheckResult {
    let name = "figure.mandel";
    guarded(name, || {
        let curves = figure_rows(Observable::Mandel, Phase::Real, 10.0)?;
        let min_value = curves.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let ordered = (0..curves[0].len()).all(|i| curves[0][i] > curves[1][i] && curves[1][i] > curves[2][i]);
        Ok(CheckResult {
            name: name.into(),
            passed: min_value > 0.0 && ordered,
            measured: min_value,
            threshold: 0.0,
            detail: format!("min Q = {min_value:.3e}, ordered by 1-q: {ordered}"),
        })
    })
}

/// `R < 1` at imaginary `z` on 50 points of `(0, 1]`, `R_{0.94} < R_{0.96} < R_{0.98}`.
fn ratio_figure_check() -> CheckResult {
    let name = "figure.variance_ratio";
    guarded(name, || {
        let curves = figure_rows(Observable::VarianceRatio, Phase::Imag, 1.0)?;
        let max_value = curves.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let ordered = (0..curves[0].len()).all(|i| curves[0][i] < curves[1][i] && curves[1][i] < curves[2][i]);
        Ok(CheckResult {
            name: name.into(),
            passed: max_value < 1.0 && ordered,
            measured: max_value,
            threshold: 1.0,
            detail: format!("max R = {max_value:.12}, ordered by 1-q: {ordered}"),
        })
    })
}

/// `ω ≥ 1`, increasing in `t` on `(0, 0.9·radius)` and in `1 - q`.
fn metric_geometry_check() -> CheckResult {
    let name = "metric.geometry";
    guarded(name, || {
        let cfg = SeriesConfig::default();
        let tol = 1e-12;
        let points = 100;
        let mut min_omega = f64::INFINITY;
        let mut increasing = true;
        for &q in &FIGURE_Q {
            let q = dp(q);
            let top = 0.9 * q.radius();
            let mut prev = f64::NEG_INFINITY;
            for k in 1..=points {
                let t = top * k as f64 / (points + 1) as f64;
                let w = metric_factor_bounded(q, t, tol, &cfg)?;
                min_omega = min_omega.min(w.value);
                increasing &= w.value - w.error_bound > prev;
                prev = w.value + w.error_bound;
            }
        }
        let common = 0.9 * dp(FIGURE_Q[0]).radius();
        let mut ordered = true;
        for k in 1..=points {
            let t = common * k as f64 / (points + 1) as f64;
            let w: Vec<f64> = FIGURE_Q
                .iter()
                .map(|&q| metric_factor_bounded(dp(q), t, tol, &cfg).map(|b| b.value))
                .collect::<Result<_>>()?;
            ordered &= w[0] > w[1] && w[1] > w[2];
        }
        Ok(CheckResult {
            name: name.into(),
            passed: min_omega >= 1.0 && increasing && ordered,
            measured: min_omega,
            threshold: 1.0,
            detail: format!("min ω = {min_omega:.6}, increasing in t: {increasing}, in 1-q: {ordered}"),
        })
    })
}

pub const SNR_Q: [f64; 3] = [0.5, 0.94, 0.98];
pub const SNR_GUARD: f64 = 0.9;
/// Ray monotonicity is checked on `t ≤ SNR_MONOTONE_FRACTION · radius`;
/// closer to the disc edge `σ` turns over.
pub const SNR_MONOTONE_FRACTION: f64 = 0.75;

fn snr_checks(profile: Profile) -> Vec<CheckResult> {
    let n = profile.snr_grid();
    let grid = ZGrid {
        nr: n,
        nphi: n,
        guard: SNR_GUARD,
        ..ZGrid::default()
    };
    let mut worst_ratio = 0.0_f64;
    let mut min_step = f64::INFINITY;
    let mut bound_ok = true;
    let mut monotone_ok = true;
    for &q in &SNR_Q {
        let q = dp(q);
        let rows = match scan_z(q, &grid) {
            Ok(rows) => rows,
            Err(e) => return vec![failed("snr.bound", &e), failed("snr.monotone", e)],
        };
        for r in &rows[1..] {
            let bound = r.bound.unwrap_or(f64::NAN);
            worst_ratio = worst_ratio.max(r.value / bound);
            bound_ok &= r.value + r.error_bound < bound;
        }
        let t_limit = SNR_MONOTONE_FRACTION * q.radius();
        for ray in rows[1..].chunks(n) {
            let mut prev = (0.0, 0.0);
            for r in ray {
                let Coords::Z { x, y } = r.coords else { unreachable!() };
                if x * x + y * y > t_limit {
                    break;
                }
                if prev.0 > 0.0 {
                    min_step = min_step.min((r.value - prev.0) / prev.0);
                }
                monotone_ok &= r.value - r.error_bound > prev.0 + prev.1;
                prev = (r.value, r.error_bound);
            }
        }
    }
    vec![
        CheckResult {
            name: "snr.bound".into(),
            passed: bound_ok,
            measured: worst_ratio,
            threshold: 1.0,
            detail: format!("max σ/4⟨N⟩ = {worst_ratio:.6} on {n}×{n} polar grid, ρ = {SNR_GUARD}"),
        },
        CheckResult {
            name: "snr.monotone".into(),
            passed: monotone_ok,
            measured: min_step,
            threshold: 0.0,
            detail: format!(
                "min relative step along rays for t ≤ {SNR_MONOTONE_FRACTION}·radius = {min_step:.4}"
            ),
        },
    ]
}

fn gup_check() -> CheckResult {
    let name = "gup.mapping";
    guarded(name, || {
        let q = q_from_alpha_beta(&GupParameters::new(-1.0, -1.0 / 9.0, 1.0, 1.0, 1.0)?)?;
        let w = effective_frequency(dp(0.5), 1.0);
        let neg = minimal_uncertainty_exists(-1.0, -1.0)?;
        let pos = minimal_uncertainty_exists(1.0, 1.0)?;
        Ok(CheckResult {
            name: name.into(),
            passed: q.value() == 0.5 && w == 0.75 && !neg && pos,
            measured: (q.value() - 0.5).abs(),
            threshold: 0.0,
            detail: format!("q = {:?}, ω_eff = {w:?}, minimal(−,−) = {neg}, minimal(+,+) = {pos}", q.value()),
        })
    })
}

/// `(q, z)` samples for one regime.
fn regime_samples(rng: &mut ChaCha8Rng, regime: usize, count: usize, t_cap: f64) -> Vec<(f64, Complex64)> {
    (0..count)
        .map(|_| {
            let q: f64 = match regime {
                0 => rng.gen_range(0.3..0.98),
                1 => 1.0,
                _ => rng.gen_range(1.02..3.0),
            };
            let t_max = if q < 1.0 { (0.5 / (1.0 - q)).min(t_cap) } else { t_cap };
            let t = rng.gen_range(0.0..t_max);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            (q, Complex64::from_polar(t.sqrt(), phi))
        })
        .collect()
}

const REGIMES: [&str; 3] = ["sub-unit", "classical", "super-unit"];

/// `Δx·Δp = ½|⟨[x, p]⟩| = c·d·(1 + (q−1)t)` at 10 points per regime.
fn intelligent_check() -> CheckResult {
    let name = "intelligent.equality";
    guarded(name, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut worst = 0.0_f64;
        for regime in 0..3 {
            for (q, z) in regime_samples(&mut rng, regime, 10, 3.0) {
                let state = QCoherentState::new(dp(q), z, 1e-12)?;
                let sides = uncertainty_sides(&state, 1.0);
                let closed = 0.5 * (1.0 + (q - 1.0) * z.norm_sqr());
                worst = worst
                    .max(sides.residual())
                    .max((sides.product - closed).abs())
                    .max((sides.half_commutator - closed).abs());
            }
        }
        Ok(CheckResult {
            name: name.into(),
            passed: worst <= 1e-8,
            measured: worst,
            threshold: 1e-8,
            detail: format!("30 points across {}", REGIMES.join(", ")),
        })
    })
}

/// Default pipeline against 200-term double-double sums.
fn oracle_check(profile: Profile) -> CheckResult {
    let name = "oracle.equivalence";
    guarded(name, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
        let count = profile.oracle_samples();
        let mut worst = 0.0_f64;
        let mut worst_at = String::new();
        for regime in 0..3 {
            for (q, z) in regime_samples(&mut rng, regime, count, 10.0) {
                let report = ObservableReport::evaluate(dp(q), z, DEFAULT_TOLERANCE, &SeriesConfig::default())?;
                let o = oracle::moments(q, (z.re, z.im));
                let diffs = [
                    report.mean_n - o.mean_n,
                    report.var_n - o.var_n,
                    report.mean_x - o.mean_x,
                    report.var_x - o.var_x,
                    report.snr_sigma - o.snr,
                ];
                let d = diffs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                if d > worst {
                    worst = d;
                    worst_at = format!("q={q:.4}, z={:.4}{:+.4}i", z.re, z.im);
                }
            }
        }
        Ok(CheckResult {
            name: name.into(),
            passed: worst <= ORACLE_TOLERANCE,
            measured: worst,
            threshold: ORACLE_TOLERANCE,
            detail: format!("{count} samples per regime, largest at {worst_at}"),
        })
    })
}

/// Analytic `ω` against a central difference of `⟨N⟩(t)`.
fn metric_difference_check() -> CheckResult {
    let name = "metric.finite_difference";
    guarded(name, || {
        let cfg = SeriesConfig::default();
        let h = 1e-4;
        let mean = |q, t: f64| -> Result<f64> {
            refine(q, Phase::Real.point(t), 1e-13, &cfg, |s| {
                let m = number_moments(s);
                Ok(Bounded {
                    value: m.mean,
                    error_bound: m.err_mean,
                })
            })
            .map(|b| b.value)
        };
        let mut worst = 0.0_f64;
        for &q in &FIGURE_Q {
            let q = dp(q);
            for t in [0.5, 1.0, 2.0, 5.0] {
                let fd = (mean(q, t + h)? - mean(q, t - h)?) / (2.0 * h);
                let w = metric_factor_bounded(q, t, 1e-13, &cfg)?.value;
                worst = worst.max((w - fd).abs());
            }
        }
        Ok(CheckResult {
            name: name.into(),
            passed: worst <= 1e-5,
            measured: worst,
            threshold: 1e-5,
            detail: format!("step {h}, t ∈ {{0.5, 1, 2, 5}}"),
        })
    })
}

/// `q = 1 − 1e-6` reproduces the conventional coherent state.
fn classical_limit_check() -> CheckResult {
    let name = "classical.limit";
    guarded(name, || {
        let q = dp(1.0 - 1e-6);
        let real = ObservableReport::evaluate(q, Complex64::new(1.0, 0.0), 1e-13, &SeriesConfig::default())?;
        let imag = ObservableReport::evaluate(q, Complex64::new(0.0, 1.0), 1e-13, &SeriesConfig::default())?;
        let deviations = [
            real.mandel_q.unwrap_or(f64::NAN).abs(),
            (real.metric_omega - 1.0).abs(),
            (real.ratio_r - 1.0).abs(),
            (imag.ratio_r - 1.0).abs(),
        ];
        let worst = deviations.iter().fold(0.0_f64, |m, x| m.max(*x));
        let snr_dev = (real.snr_sigma - 4.0).abs();
        Ok(CheckResult {
            name: name.into(),
            passed: worst <= 1e-4 && snr_dev <= 1e-3,
            measured: worst,
            threshold: 1e-4,
            detail: format!("|σ − 4t| = {snr_dev:.3e} (threshold 1e-3)"),
        })
    })
}

pub fn run(profile: Profile) -> VerifyReport {
    run_with_slopes(profile, &small_t_slopes)
}

/// Runs the suite with `slopes` standing in for the closed-form small-`t`
/// coefficients.
pub fn run_with_slopes(profile: Profile, slopes: &dyn Fn(DeformationParameter) -> SlopeSet) -> VerifyReport {
    let start = Instant::now();
    let mut checks = slope_checks(slopes);
    checks.push(mandel_figure_check());
    checks.push(ratio_figure_check());
    checks.push(metric_geometry_check());
    checks.extend(snr_checks(profile));
    checks.push(gup_check());
    checks.push(intelligent_check());
    checks.push(oracle_check(profile));
    checks.push(metric_difference_check());
    checks.push(classical_limit_check());
    VerifyReport {
        profile,
        checks,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}
