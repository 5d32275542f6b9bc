//! The normalized coherent state `|z⟩ ∝ Σ zⁿ/√([n]_q!) |n⟩` on a truncated
//! Fock basis.

use num_complex::Complex64;

use crate::error::Result;
use crate::numerics::poly_geometric;
use crate::qcore::{truncate_series, DeformationParameter, SeriesConfig, TruncationSpec};

/// Amplitude `cₙ = exp(ln_magnitude + i·phase)` of the normalized state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub ln_magnitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone)]
pub struct QCoherentState {
    q: DeformationParameter,
    z: Complex64,
    t: f64,
    spec: TruncationSpec,
    /// `ln Σ_{n≤n_max} tⁿ/[n]_q!`
    ln_norm: f64,
    amplitudes: Vec<Amplitude>,
    probabilities: Vec<f64>,
}

impl QCoherentState {
    /// Builds the state under the default disc guard and term cap.
    pub fn new(q: DeformationParameter, z: Complex64, tolerance: f64) -> Result<Self> {
        Self::with_config(q, z, tolerance, &SeriesConfig::default())
    }

    pub fn with_config(
        q: DeformationParameter,
        z: Complex64,
        tolerance: f64,
        config: &SeriesConfig,
    ) -> Result<Self> {
        config.validate()?;
        let t = z.norm_sqr();
        if t == 0.0 {
            return Self::vacuum(q, tolerance);
        }
        config.check_disc(q, t)?;
        let series = truncate_series(q, t, tolerance, config.max_terms)?;

        let peak = series.ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = series.ln_terms.iter().map(|l| (l - peak).exp()).collect();
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();

        let arg = z.arg();
        let amplitudes = series
            .ln_terms
            .iter()
            .enumerate()
            .map(|(n, l)| Amplitude {
                ln_magnitude: 0.5 * (l - series.ln_sum),
                phase: n as f64 * arg,
            })
            .collect();

        Ok(Self {
            q,
            z,
            t,
            spec: series.spec,
            ln_norm: series.ln_sum,
            amplitudes,
            probabilities,
        })
    }

    fn vacuum(q: DeformationParameter, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(crate::Error::invalid(
                "tolerance",
                format!("must be finite and > 0, got {tolerance}"),
            ));
        }
        Ok(Self {
            q,
            z: Complex64::new(0.0, 0.0),
            t: 0.0,
            spec: TruncationSpec {
                n_max: 0,
                tolerance,
                achieved_bound: 0.0,
                ratio: 0.0,
            },
            ln_norm: 0.0,
            amplitudes: vec![Amplitude {
                ln_magnitude: 0.0,
                phase: 0.0,
            }],
            probabilities: vec![1.0],
        })
    }

    pub fn q(&self) -> DeformationParameter {
        self.q
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// `t = |z|²`
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_max(&self) -> usize {
        self.spec.n_max
    }

    pub fn truncation(&self) -> &TruncationSpec {
        &self.spec
    }

    /// Relative bound on the omitted probability mass.
    pub fn tail_bound(&self) -> f64 {
        self.spec.achieved_bound
    }

    /// Natural log of the retained normalization sum.
    pub fn ln_normalization(&self) -> f64 {
        self.ln_norm
    }

    pub fn is_vacuum(&self) -> bool {
        self.t == 0.0
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> Complex64 {
        let a = self.amplitudes[n];
        Complex64::from_polar(a.ln_magnitude.exp(), a.phase)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Unit phase `z/|z|` shared by every `conj(cₙ) c_{n+k}` as its k-th power.
    pub(crate) fn unit_phase(&self) -> Complex64 {
        if self.t == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            self.z / self.z.norm()
        }
    }

    /// Envelope of the omitted probabilities: `p_{N+j} ≤ p_N rʲ`.
    pub(crate) fn tail(&self) -> TailEnvelope {
        let n = self.spec.n_max;
        TailEnvelope {
            p_last: self.probabilities[n],
            p_before_last: if n > 0 { self.probabilities[n - 1] } else { 0.0 },
            ratio: self.spec.ratio,
            n_max: n as f64,
            rel_tail: self.spec.achieved_bound,
        }
    }
}

/// Geometric envelope of the truncated-away Fock weights, used to bound
/// every moment's truncation error.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TailEnvelope {
    pub p_last: f64,
    pub p_before_last: f64,
    pub ratio: f64,
    pub n_max: f64,
    pub rel_tail: f64,
}

impl TailEnvelope {
    /// `Σ_{n>N} n^k pₙ` for `k ∈ {0, 1, 2}`.
    pub fn number_moment(&self, power: u8) -> f64 {
        if self.ratio == 0.0 {
            return 0.0;
        }
        self.p_last * poly_geometric(self.n_max, self.ratio, power, 1)
    }

    /// Missing terms of `Σ √(n+1)·√(pₙ p_{n+1})`: all `n ≥ N`.
    pub fn lowering_once(&self) -> f64 {
        if self.ratio == 0.0 {
            return 0.0;
        }
        self.ratio.sqrt() * self.p_last * poly_geometric(self.n_max + 2.0, self.ratio, 1, 0)
    }

    /// Missing terms of `Σ √((n+1)(n+2))·√(pₙ p_{n+2})`: `n = N-1` and all `n ≥ N`.
    pub fn lowering_twice(&self) -> f64 {
        if self.ratio == 0.0 {
            return 0.0;
        }
        let n = self.n_max;
        let edge = (n * (n + 1.0) * self.p_before_last * self.p_last * self.ratio).sqrt();
        edge + self.ratio * self.p_last * poly_geometric(n + 2.0, self.ratio, 1, 0)
    }
}

/// `(n, pₙ)` for every retained Fock index.
pub fn photon_distribution(state: &QCoherentState) -> Vec<(usize, f64)> {
    state.probabilities.iter().copied().enumerate().collect()
}

/// `‖(a - z)ψ‖` for the truncated normalized state `ψ`, with the deformed
/// ladder `a|n⟩ = √[n]_q |n-1⟩`.
///
/// Exact eigenstates give zero; truncation leaves `|z|·|ψ_N|` in the last
/// component, which is of order `√tail_bound`.
pub fn annihilator_residual(state: &QCoherentState) -> f64 {
    let n_max = state.n_max();
    let q = state.q();
    let z = state.z();
    let mut acc = 0.0;
    for n in 0..=n_max {
        let lowered = if n < n_max {
            state.amplitude(n + 1) * q.bracket(n as u64 + 1).sqrt()
        } else {
            Complex64::new(0.0, 0.0)
        };
        acc += (lowered - z * state.amplitude(n)).norm_sqr();
    }
    acc.sqrt()
}

/// Upper bound for [`annihilator_residual`] implied by the truncation:
/// `|z|·√p_N ≤ √(tail · [N+1]_q)`, plus rounding slack.
pub fn annihilator_residual_bound(state: &QCoherentState) -> f64 {
    let tail = state.tail_bound();
    let next = state.q().bracket(state.n_max() as u64 + 1);
    (tail * next).sqrt() + 64.0 * f64::EPSILON * (1.0 + state.t())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::DiscViolation;

    fn dp(q: f64) -> DeformationParameter {
        DeformationParameter::new(q).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_short_circuit() {
        let s = QCoherentState::new(dp(0.96), c(0.0, 0.0), 1e-12).unwrap();
        assert_eq!(photon_distribution(&s), vec![(0, 1.0)]);
        assert_eq!(annihilator_residual(&s), 0.0);
        assert!(s.is_vacuum());
    }

    #[test]
    fn classical_limit_is_poisson() {
        let s = QCoherentState::new(dp(0.999_999), c(1.0, 0.0), 1e-12).unwrap();
        let mut factorial = 1.0;
        for (n, p) in photon_distribution(&s).into_iter().take(12) {
            if n > 0 {
                factorial *= n as f64;
            }
            let poisson = (-1.0_f64).exp() / factorial;
            assert!((p - poisson).abs() < 1e-4, "n={n}");
        }
        assert!((s.probabilities()[0] - 0.367_879).abs() < 1e-4);
    }

    #[test]
    fn vacuum_weight_matches_oracle() {
        let s = QCoherentState::new(dp(0.96), c(0.5, 0.0), 1e-14).unwrap();
        // 1/e_q(0.25), 40-digit reference
        assert!((s.probabilities()[0] - 0.778_301_993_461_857_6).abs() < 1e-14);
        let o = oracle::moments(0.96, (0.5, 0.0));
        assert!((s.probabilities()[0] - o.p0).abs() < 1e-14);
    }

    #[test]
    fn distribution_is_normalized_and_non_negative() {
        for &(q, z) in &[(0.94, c(1.2, 0.4)), (1.7, c(-2.0, 1.0)), (1.0, c(0.0, 3.0))] {
            let s = QCoherentState::new(dp(q), z, 1e-12).unwrap();
            let total: f64 = s.probabilities().iter().sum();
            assert!(total <= 1.0 + 1e-15 && total >= 1.0 - s.tail_bound() - 1e-15);
            assert!(s.probabilities().iter().all(|&p| p >= 0.0));
            assert!(s.tail_bound() <= 1e-12);
        }
    }

    #[test]
    fn super_poissonian_example() {
        let s = QCoherentState::new(dp(0.94), c(2.0_f64.sqrt(), 0.0), 1e-14).unwrap();
        let dist = photon_distribution(&s);
        let mean: f64 = dist.iter().map(|(n, p)| *n as f64 * p).sum();
        let var: f64 = dist.iter().map(|(n, p)| (*n as f64 - mean).powi(2) * p).sum();
        assert!(var > mean);
    }

    #[test]
    fn guard_and_disc_errors() {
        let q = dp(0.5);
        let outside = QCoherentState::new(q, c(1.5, 0.0), 1e-12).unwrap_err();
        assert_eq!(outside.disc_violation(), Some(DiscViolation::Outside));
        let guarded = QCoherentState::new(q, c(1.41, 0.0), 1e-12).unwrap_err();
        assert_eq!(guarded.disc_violation(), Some(DiscViolation::BeyondGuard));
        let relaxed = SeriesConfig {
            guard: 1.0,
            max_terms: 10_000,
        };
        assert!(QCoherentState::with_config(q, c(1.41, 0.0), 1e-10, &relaxed).is_ok());
    }

    #[test]
    fn amplitudes_square_to_probabilities() {
        let s = QCoherentState::new(dp(1.25), c(0.6, -0.8), 1e-12).unwrap();
        for n in 0..=s.n_max() {
            let a = s.amplitude(n);
            assert!((a.norm_sqr() - s.probabilities()[n]).abs() < 1e-14);
        }
        // c1/c0 ∝ z
        let ratio = s.amplitude(1) / s.amplitude(0);
        assert!((ratio - c(0.6, -0.8)).norm() < 1e-13);
    }

    #[test]
    fn eigenstate_residual_examples() {
        for &(q, z) in &[(0.96, c(0.5, 0.0)), (1.25, c(1.0, 0.0))] {
            let s = QCoherentState::new(dp(q), z, 1e-12).unwrap();
            let r = annihilator_residual(&s);
            assert!(r <= 1e-5, "q={q}: {r}");
            assert!(r <= annihilator_residual_bound(&s));
            let reference = oracle::annihilator_residual(q, (z.re, z.im), s.n_max() + 1);
            assert!((r - reference).abs() < 1e-12, "{r} vs {reference}");
        }
    }

    #[test]
    fn eigenstate_residual_shrinks_with_tolerance() {
        let q = dp(0.9);
        let z = c(1.5, 0.7);
        let tols = [1e-6, 1e-8, 1e-10];
        let residuals: Vec<f64> = tols
            .iter()
            .map(|&tol| annihilator_residual(&QCoherentState::new(q, z, tol).unwrap()))
            .collect();
        // [N+1]_q < [∞]_q = 10 fixes the constant in front of √tol
        let scale = q.bracket_infinity().sqrt();
        for (r, tol) in residuals.iter().zip(tols) {
            assert!(*r <= scale * tol.sqrt(), "{r} at {tol}");
        }
        assert!(residuals[2] < residuals[1] && residuals[1] < residuals[0]);
    }
}
