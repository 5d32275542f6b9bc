//! Deterministic grid scans over `t = |z|²` and over the complex z-plane.
//!
//! Points are evaluated in parallel and collected in grid order, so the
//! output does not depend on the number of worker threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DiscViolation, Error, Result};
use crate::observables::{
    mandel_bounded, metric_factor_bounded, number_moments, refine, refine_state, snr_bounded,
    variance_ratio_bounded, Phase,
};
use crate::qcore::{DeformationParameter, SeriesConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Mandel,
    MetricFactor,
    VarianceRatio,
    Snr,
}

impl Observable {
    pub fn as_str(self) -> &'static str {
        match self {
            Observable::Mandel => "mandel",
            Observable::MetricFactor => "metric-factor",
            Observable::VarianceRatio => "variance-ratio",
            Observable::Snr => "snr",
        }
    }
}

/// Inclusive linear grid `start, …, stop` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl TGrid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub q_list: Vec<f64>,
    pub t_grid: TGrid,
    pub phase: Phase,
    pub observable: Observable,
    pub tolerance: f64,
    /// Disc guard ρ: the grid must stay below `ρ · radius` for every `q < 1`.
    pub guard: f64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            q_list: vec![0.98, 0.96, 0.94],
            t_grid: TGrid {
                start: 0.0,
                stop: 10.0,
                count: 200,
            },
            phase: Phase::Real,
            observable: Observable::Mandel,
            tolerance: 1e-12,
            guard: 0.99,
            threads: None,
        }
    }
}

impl ScanConfig {
    /// Settings behind the Mandel-parameter figure.
    pub fn mandel_figure() -> Self {
        Self::default()
    }

    /// Settings behind the variance-ratio figure: imaginary `z`, `t ∈ [0, 1]`.
    pub fn variance_ratio_figure() -> Self {
        Self {
            t_grid: TGrid {
                start: 0.0,
                stop: 1.0,
                count: 200,
            },
            phase: Phase::Imag,
            observable: Observable::VarianceRatio,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<Vec<DeformationParameter>> {
        if self.q_list.is_empty() {
            return Err(Error::invalid("q", "at least one q value is required"));
        }
        let qs = self
            .q_list
            .iter()
            .map(|&q| DeformationParameter::new(q))
            .collect::<Result<Vec<_>>>()?;
        let g = self.t_grid;
        if g.count < 2 {
            return Err(Error::invalid("t-count", format!("must be >= 2, got {}", g.count)));
        }
        if !(g.start.is_finite() && g.start >= 0.0) {
            return Err(Error::invalid("t-start", format!("must be finite and >= 0, got {}", g.start)));
        }
        if !(g.stop.is_finite() && g.stop > g.start) {
            return Err(Error::invalid("t-stop", format!("must exceed t-start, got {}", g.stop)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("tol", format!("must be > 0, got {}", self.tolerance)));
        }
        SeriesConfig::with_guard(self.guard).validate()?;
        if self.threads == Some(0) {
            return Err(Error::invalid("threads", "must be >= 1"));
        }
        for q in &qs {
            let radius = q.radius();
            if g.stop >= self.guard * radius {
                return Err(Error::OutOfDisc {
                    t: g.stop,
                    radius,
                    guard: self.guard,
                    kind: if g.stop >= radius {
                        DiscViolation::Outside
                    } else {
                        DiscViolation::BeyondGuard
                    },
                });
            }
        }
        Ok(qs)
    }
}

/// Grid coordinates of one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    T { t: f64 },
    Z { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub q: f64,
    #[serde(flatten)]
    pub coords: Coords,
    pub value: f64,
    /// Companion column, e.g. `4⟨N⟩` next to `σ`.
    pub bound: Option<f64>,
    pub error_bound: f64,
}

pub(crate) fn run_in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("threads", e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

fn evaluate_t(
    q: DeformationParameter,
    t: f64,
    config: &ScanConfig,
    series: &SeriesConfig,
) -> Result<GridRow> {
    let tol = config.tolerance;
    let z = config.phase.point(t);
    let (value, bound) = match config.observable {
        Observable::Mandel => (refine(q, z, tol, series, mandel_bounded)?, None),
        Observable::MetricFactor => (metric_factor_bounded(q, t, tol, series)?, None),
        Observable::VarianceRatio => (variance_ratio_bounded(q, t, config.phase, tol, series)?, None),
        Observable::Snr => {
            let ((sigma, mean), _) = refine_state(q, z, tol, series, |s| {
                let b = snr_bounded(s);
                Ok(((b, number_moments(s).mean), b.error_bound))
            })?;
            (sigma, Some(4.0 * mean))
        }
    };
    Ok(GridRow {
        q: q.value(),
        coords: Coords::T { t },
        value: value.value,
        bound,
        error_bound: value.error_bound,
    })
}

/// One row per `(q, t)`, q-major and t-minor. Mandel scans drop `t = 0`,
/// where `Q` is undefined.
pub fn scan_t(config: &ScanConfig) -> Result<Vec<GridRow>> {
    let qs = config.validate()?;
    let series = SeriesConfig::with_guard(config.guard);
    let ts = config.t_grid.points();
    let tasks: Vec<(DeformationParameter, f64)> = qs
        .iter()
        .flat_map(|&q| ts.iter().map(move |&t| (q, t)))
        .filter(|&(_, t)| !(config.observable == Observable::Mandel && t == 0.0))
        .collect();
    run_in_pool(config.threads, || {
        tasks
            .par_iter()
            .map(|&(q, t)| evaluate_t(q, t, config, &series))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Polar grid over the z-plane for the signal-to-quantum-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZGrid {
    /// Radial rings, excluding the origin.
    pub nr: usize,
    /// Rays; angles are offset by a third of a step so none lies on an axis.
    pub nphi: usize,
    /// Outermost `|z|`. Defaults to `√(guard · radius)` for `q < 1`;
    /// required for `q ≥ 1`.
    pub r_max: Option<f64>,
    pub guard: f64,
    pub tolerance: f64,
    pub threads: Option<usize>,
}

impl Default for ZGrid {
    fn default() -> Self {
        Self {
            nr: 50,
            nphi: 50,
            r_max: None,
            guard: 0.9,
            tolerance: 1e-12,
            threads: None,
        }
    }
}

impl ZGrid {
    fn outer_radius(&self, q: DeformationParameter) -> Result<f64> {
        SeriesConfig::with_guard(self.guard).validate()?;
        let disc = (self.guard * q.radius()).sqrt();
        match self.r_max {
            Some(r) if !(r.is_finite() && r > 0.0) => {
                Err(Error::invalid("r-max", format!("must be finite and > 0, got {r}")))
            }
            Some(r) if r * r > self.guard * q.radius() => Err(Error::OutOfDisc {
                t: r * r,
                radius: q.radius(),
                guard: self.guard,
                kind: if r * r >= q.radius() {
                    DiscViolation::Outside
                } else {
                    DiscViolation::BeyondGuard
                },
            }),
            Some(r) => Ok(r),
            None if disc.is_finite() => Ok(disc),
            None => Err(Error::invalid("r-max", "required when q >= 1 (no finite disc)")),
        }
    }

    /// Grid points: the origin first, then ray by ray outward.
    pub fn points(&self, q: DeformationParameter) -> Result<Vec<Complex64>> {
        if self.nr == 0 || self.nphi == 0 {
            return Err(Error::invalid("grid", "nr and nphi must be >= 1"));
        }
        let r_max = self.outer_radius(q)?;
        let mut points = Vec::with_capacity(self.nr * self.nphi + 1);
        points.push(Complex64::new(0.0, 0.0));
        for j in 0..self.nphi {
            let phi = 2.0 * PI * (j as f64 + 1.0 / 3.0) / self.nphi as f64;
            for i in 1..=self.nr {
                let r = r_max * i as f64 / self.nr as f64;
                points.push(Complex64::from_polar(r, phi));
            }
        }
        Ok(points)
    }
}

/// Rows `(x, y, σ_q, 4⟨N⟩_q)` over the polar grid.
pub fn scan_z(q: DeformationParameter, grid: &ZGrid) -> Result<Vec<GridRow>> {
    if !(grid.tolerance > 0.0 && grid.tolerance.is_finite()) {
        return Err(Error::invalid("tol", format!("must be > 0, got {}", grid.tolerance)));
    }
    let points = grid.points(q)?;
    // the grid already stays inside guard·radius
    let series = SeriesConfig::with_guard(1.0);
    run_in_pool(grid.threads, || {
        points
            .par_iter()
            .map(|&z| {
                let ((sigma, mean), _) = refine_state(q, z, grid.tolerance, &series, |s| {
                    let b = snr_bounded(s);
                    Ok(((b, number_moments(s).mean), b.error_bound))
                })?;
                Ok(GridRow {
                    q: q.value(),
                    coords: Coords::Z { x: z.re, y: z.im },
                    value: sigma.value,
                    bound: Some(4.0 * mean),
                    error_bound: sigma.error_bound,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_of(row: &GridRow) -> f64 {
        match row.coords {
            Coords::T { t } => t,
            Coords::Z { .. } => panic!("expected a t row"),
        }
    }

    #[test]
    fn mandel_scan_drops_origin_and_orders_rows() {
        let cfg = ScanConfig {
            t_grid: TGrid {
                start: 0.0,
                stop: 10.0,
                count: 21,
            },
            ..ScanConfig::default()
        };
        let rows = scan_t(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 20);
        assert!(t_of(&rows[0]) > 0.0);
        assert_eq!(rows[0].q, 0.98);
        assert_eq!(rows[20].q, 0.96);
        for chunk in rows.chunks(20) {
            assert!(chunk.windows(2).all(|w| t_of(&w[0]) < t_of(&w[1])));
            assert!(chunk.iter().all(|r| r.value > 0.0));
        }
        for i in 0..20 {
            assert!(rows[i].value < rows[20 + i].value && rows[20 + i].value < rows[40 + i].value);
        }
        assert!(rows.iter().all(|r| r.error_bound <= cfg.tolerance));
    }

    #[test]
    fn variance_ratio_scan_starts_at_one() {
        let mut cfg = ScanConfig::variance_ratio_figure();
        cfg.q_list = vec![0.96];
        cfg.t_grid.count = 11;
        let rows = scan_t(&cfg).unwrap();
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[0].value, 1.0);
        assert!(rows[1..].iter().all(|r| r.value < 1.0));
    }

    #[test]
    fn config_errors_name_the_field() {
        let mut cfg = ScanConfig::default();
        cfg.t_grid.count = 1;
        match cfg.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "t-count"),
            other => panic!("{other:?}"),
        }
        let mut cfg = ScanConfig::default();
        cfg.q_list = vec![0.5];
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.disc_violation(), Some(DiscViolation::Outside));
        cfg.t_grid.stop = 1.99;
        assert_eq!(cfg.validate().unwrap_err().disc_violation(), Some(DiscViolation::BeyondGuard));
    }

    #[test]
    fn snr_scan_origin_and_bound() {
        let grid = ZGrid {
            nr: 8,
            nphi: 6,
            ..ZGrid::default()
        };
        let q = DeformationParameter::new(0.96).unwrap();
        let rows = scan_z(q, &grid).unwrap();
        assert_eq!(rows.len(), 1 + 48);
        assert_eq!(rows[0].value, 0.0);
        for r in &rows[1..] {
            assert!(r.value < r.bound.unwrap());
        }
    }

    #[test]
    fn snr_scan_needs_radius_for_superunit() {
        let q = DeformationParameter::new(1.5).unwrap();
        assert!(scan_z(q, &ZGrid::default()).is_err());
        let grid = ZGrid {
            nr: 4,
            nphi: 4,
            r_max: Some(2.0),
            ..ZGrid::default()
        };
        assert_eq!(scan_z(q, &grid).unwrap().len(), 17);
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let mut cfg = ScanConfig::variance_ratio_figure();
        cfg.t_grid.count = 30;
        cfg.threads = Some(1);
        let serial = scan_t(&cfg).unwrap();
        cfg.threads = Some(4);
        let parallel = scan_t(&cfg).unwrap();
        assert_eq!(serial, parallel);
    }
}
