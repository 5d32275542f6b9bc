//! q-numbers, q-factorials and the q-exponential `e_q(t) = Σ tⁿ/[n]_q!`.
//!
//! All term magnitudes are composed in the log domain. For `q > 1` the
//! factorial grows like `q^{n(n-1)/2}` and for `q < 1` close to the disc
//! boundary the partial sums grow without bound, so nothing here divides two
//! large linear-domain numbers.

use serde::Serialize;

use crate::error::{DiscViolation, Error, Result};
use crate::numerics::log_add_exp;

/// Powers above this index use `exp(n ln q)` instead of repeated squaring.
const POW_SQUARING_LIMIT: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `0 < q < 1`: finite disc of convergence.
    SubUnit,
    /// `q = 1` exactly: the conventional oscillator.
    Classical,
    /// `q > 1`: entire series.
    SuperUnit,
}

/// Validated deformation parameter `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformationParameter {
    q: f64,
    regime: Regime,
    #[serde(skip)]
    ln_q: f64,
}

impl DeformationParameter {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::invalid("q", format!("must be finite and > 0, got {q}")));
        }
        let regime = if q < 1.0 {
            Regime::SubUnit
        } else if q > 1.0 {
            Regime::SuperUnit
        } else {
            Regime::Classical
        };
        Ok(Self {
            q,
            regime,
            ln_q: (q - 1.0).ln_1p(),
        })
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn is_classical(&self) -> bool {
        self.regime == Regime::Classical
    }

    /// `qⁿ`.
    pub fn pow(&self, n: u64) -> f64 {
        if n <= POW_SQUARING_LIMIT {
            self.q.powi(n as i32)
        } else {
            (n as f64 * self.ln_q).exp()
        }
    }

    /// The q-number `[n]_q = (1 - qⁿ)/(1 - q)`, `n` at `q = 1`.
    ///
    /// Evaluated through `expm1` so that `1 - qⁿ` keeps full relative
    /// precision for `q` close to one.
    pub fn bracket(&self, n: u64) -> f64 {
        match self.regime {
            Regime::Classical => n as f64,
            Regime::SubUnit => -(n as f64 * self.ln_q).exp_m1() / (1.0 - self.q),
            Regime::SuperUnit => (n as f64 * self.ln_q).exp_m1() / (self.q - 1.0),
        }
    }

    /// `[∞]_q`: `1/(1-q)` for `q < 1`, `+∞` otherwise.
    pub fn bracket_infinity(&self) -> f64 {
        match self.regime {
            Regime::SubUnit => 1.0 / (1.0 - self.q),
            _ => f64::INFINITY,
        }
    }

    /// `ln [n]_q` for `n ≥ 1`, finite even where `[n]_q` itself overflows.
    pub fn ln_bracket(&self, n: u64) -> f64 {
        if n == 0 {
            return f64::NEG_INFINITY;
        }
        let x = n as f64 * self.ln_q;
        match self.regime {
            Regime::Classical => (n as f64).ln(),
            Regime::SubUnit => (-x.exp_m1()).ln() - (1.0 - self.q).ln(),
            // ln(e^x - 1) = x + ln(1 - e^{-x})
            Regime::SuperUnit => x + (-(-x).exp_m1()).ln() - (self.q - 1.0).ln(),
        }
    }

    /// `ln [n]_q! = Σ_{k=1..n} ln [k]_q`.
    pub fn ln_factorial(&self, n: u64) -> f64 {
        (1..=n).map(|k| self.ln_bracket(k)).sum()
    }

    /// Bound on `t = |z|²` for the coherent-state series: `1/(1-q)` for
    /// `q < 1`, infinite otherwise.
    pub fn radius(&self) -> f64 {
        self.bracket_infinity()
    }
}

/// Free-function form of [`DeformationParameter::bracket`].
pub fn q_bracket(q: DeformationParameter, n: u64) -> f64 {
    q.bracket(n)
}

pub fn log_q_factorial(q: DeformationParameter, n: u64) -> f64 {
    q.ln_factorial(n)
}

pub fn radius_of_convergence(q: DeformationParameter) -> f64 {
    q.radius()
}

/// Disc guard and term cap shared by every series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    /// Fraction ρ of the convergence radius beyond which inputs are refused.
    pub guard: f64,
    /// Hard cap on the truncation index.
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            guard: 0.99,
            max_terms: 10_000,
        }
    }
}

impl SeriesConfig {
    pub fn with_guard(guard: f64) -> Self {
        Self {
            guard,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.guard > 0.0 && self.guard <= 1.0) {
            return Err(Error::invalid("guard", format!("must lie in (0, 1], got {}", self.guard)));
        }
        if self.max_terms == 0 {
            return Err(Error::invalid("max_terms", "must be positive"));
        }
        Ok(())
    }

    /// Rejects `t` outside the disc, or inside it but past `guard · radius`.
    pub fn check_disc(&self, q: DeformationParameter, t: f64) -> Result<()> {
        check_t(t)?;
        let radius = q.radius();
        if t >= radius {
            return Err(Error::OutOfDisc {
                t,
                radius,
                guard: self.guard,
                kind: DiscViolation::Outside,
            });
        }
        if t >= self.guard * radius {
            return Err(Error::OutOfDisc {
                t,
                radius,
                guard: self.guard,
                kind: DiscViolation::BeyondGuard,
            });
        }
        Ok(())
    }
}

fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::invalid(
            "tolerance",
            format!("must be finite and > 0, got {tolerance}"),
        ));
    }
    Ok(())
}

/// Where the series `Σ tⁿ/[n]_q!` is cut, and how much that costs.
///
/// `achieved_bound` bounds the omitted tail relative to the retained partial
/// sum: `Σ_{n>n_max} termₙ ≤ achieved_bound · Σ_{n≤n_max} termₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationSpec {
    pub n_max: usize,
    pub tolerance: f64,
    pub achieved_bound: f64,
    /// Geometric ratio `t/[n_max+1]_q` dominating every later term ratio.
    pub ratio: f64,
}

/// Log-domain terms `ln(tⁿ/[n]_q!)` for `n = 0..=n_max` plus the cut.
#[derive(Debug, Clone)]
pub(crate) struct TruncatedSeries {
    pub spec: TruncationSpec,
    pub ln_terms: Vec<f64>,
    pub ln_sum: f64,
}

/// Grows the series until the geometric tail estimate
/// `termₙ · r/(1-r)`, `r = t/[n+1]_q`, drops below `tolerance` times the
/// partial sum. Since `[n]_q` increases with `n`, the term ratio
/// `t/[n+1]_q` is non-increasing and the estimate bounds the true tail.
pub(crate) fn truncate_series(
    q: DeformationParameter,
    t: f64,
    tolerance: f64,
    max_terms: usize,
) -> Result<TruncatedSeries> {
    check_t(t)?;
    check_tolerance(tolerance)?;
    if t >= q.radius() {
        return Err(Error::OutOfDisc {
            t,
            radius: q.radius(),
            guard: 1.0,
            kind: DiscViolation::Outside,
        });
    }
    if t == 0.0 {
        return Ok(TruncatedSeries {
            spec: TruncationSpec {
                n_max: 0,
                tolerance,
                achieved_bound: 0.0,
                ratio: 0.0,
            },
            ln_terms: vec![0.0],
            ln_sum: 0.0,
        });
    }

    let ln_t = t.ln();
    let mut ln_terms = vec![0.0_f64];
    let mut ln_fact = 0.0;
    let mut ln_sum = 0.0_f64;
    for n in 0..=max_terms {
        let ratio = t / q.bracket(n as u64 + 1);
        if ratio < 1.0 {
            let bound = (ln_terms[n] - ln_sum).exp() * ratio / (1.0 - ratio);
            if bound < tolerance {
                return Ok(TruncatedSeries {
                    spec: TruncationSpec {
                        n_max: n,
                        tolerance,
                        achieved_bound: bound,
                        ratio,
                    },
                    ln_terms,
                    ln_sum,
                });
            }
        }
        if n == max_terms {
            break;
        }
        ln_fact += q.ln_bracket(n as u64 + 1);
        let ln_term = (n + 1) as f64 * ln_t - ln_fact;
        ln_terms.push(ln_term);
        ln_sum = log_add_exp(ln_sum, ln_term);
    }
    Err(Error::NonConvergent {
        t,
        tolerance,
        cap: max_terms,
    })
}

/// Smallest cut index whose relative geometric tail bound is below
/// `tolerance`, using the default term cap.
pub fn choose_truncation(q: DeformationParameter, t: f64, tolerance: f64) -> Result<TruncationSpec> {
    choose_truncation_with(q, t, tolerance, &SeriesConfig::default())
}

pub fn choose_truncation_with(
    q: DeformationParameter,
    t: f64,
    tolerance: f64,
    config: &SeriesConfig,
) -> Result<TruncationSpec> {
    truncate_series(q, t, tolerance, config.max_terms).map(|s| s.spec)
}

/// Value of a truncated series together with its certified error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    /// Linear-domain value; `+∞` when it exceeds the `f64` range.
    pub value: f64,
    pub ln_value: f64,
    /// Relative bound: `|exact - value| ≤ tail_bound · value`.
    pub tail_bound: f64,
    pub n_max: usize,
}

impl SeriesValue {
    pub fn abs_error_bound(&self) -> f64 {
        self.tail_bound * self.value
    }
}

/// `e_q(t) = Σ_{n≥0} tⁿ/[n]_q!` under the default disc guard.
pub fn q_exponential(q: DeformationParameter, t: f64, tolerance: f64) -> Result<SeriesValue> {
    q_exponential_with(q, t, tolerance, &SeriesConfig::default())
}

pub fn q_exponential_with(
    q: DeformationParameter,
    t: f64,
    tolerance: f64,
    config: &SeriesConfig,
) -> Result<SeriesValue> {
    config.validate()?;
    config.check_disc(q, t)?;
    let series = truncate_series(q, t, tolerance, config.max_terms)?;
    if q.is_classical() {
        return Ok(SeriesValue {
            value: t.exp(),
            ln_value: t,
            tail_bound: 0.0,
            n_max: series.spec.n_max,
        });
    }
    // Upper bound on the exact sum is partial · (1 + bound); report the midpoint.
    let bound = series.spec.achieved_bound;
    let ln_value = series.ln_sum + (0.5 * bound).ln_1p();
    Ok(SeriesValue {
        value: ln_value.exp(),
        ln_value,
        tail_bound: 0.5 * bound,
        n_max: series.spec.n_max,
    })
}
