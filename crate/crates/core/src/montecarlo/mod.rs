//! Replicated tail experiments.
//!
//! Each replicate draws one environment from `Seed(base_seed, kind, index)`
//! and reduces it to a single score; every threshold of the grid is then
//! evaluated on the same score, so exceedance events are nested per
//! realization. Scores are collected in replicate order, which makes every
//! output independent of the thread schedule.

mod csv;
mod fit;

pub use csv::{parse_tail_csv, render_fit_lines, write_tail_csv, write_variance_csv, ParsedTailCsv};
pub use fit::{bootstrap_kappa, fit_exponent, ExponentFit, FitOptions, ModelComparison};

use rayon::prelude::*;

use crate::bounds::TailFamily;
use crate::environment::{build_bulk, build_stationary_boundary, Density, Seed};
use crate::error::{LppError, Result};
use crate::lattice::{Point, Window};
use crate::passage::{exit_time, passage_point_to_point, passage_stationary_boundary};
use crate::shape::CharacteristicSpec;
use crate::stats::{least_squares, variance_with_jackknife, wilson_interval, Z_95};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// `|Z| >= r N^{2/3}`.
    ExitTail,
    /// `G_stat(v_N) - N >= y N^{1/3}`.
    UpperTail,
    /// `G_stat(v_N) - N <= -y N^{1/3}`.
    LowerTail,
    /// `G(0, v_N) - N >= y N^{1/3}` in the bulk environment.
    P2pTail,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ExitTail => "exit_tail",
            ExperimentKind::UpperTail => "upper_tail",
            ExperimentKind::LowerTail => "lower_tail",
            ExperimentKind::P2pTail => "p2p_tail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::ExitTail, Self::UpperTail, Self::LowerTail, Self::P2pTail].into_iter().find(|k| k.name() == s)
    }

    pub fn family(self) -> TailFamily {
        match self {
            ExperimentKind::ExitTail => TailFamily::ExitCubic,
            ExperimentKind::UpperTail => TailFamily::UpperThreeHalves,
            ExperimentKind::LowerTail => TailFamily::LowerCubic,
            ExperimentKind::P2pTail => TailFamily::P2pUpper,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub rho: Density,
    pub n: u64,
    /// Strictly increasing, positive.
    pub thresholds: Vec<f64>,
    pub replicates: u64,
    pub base_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<CharacteristicSpec> {
        if self.thresholds.is_empty() {
            return Err(LppError::param("threshold grid is empty"));
        }
        if self.thresholds.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(LppError::param("thresholds must be positive and finite"));
        }
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LppError::param("thresholds must be strictly increasing"));
        }
        if self.replicates < 1 {
            return Err(LppError::param("need at least one replicate"));
        }
        CharacteristicSpec::new(self.rho, self.n)
    }

    /// Seed of one replicate.
    pub fn seed(&self, replicate: u64) -> Seed {
        Seed::new(self.base_seed, self.kind.name(), replicate)
    }

    /// The threshold unit: `N^{2/3}` for the exit time, `N^{1/3}` otherwise.
    pub fn scale(&self) -> f64 {
        let n = self.n as f64;
        match self.kind {
            ExperimentKind::ExitTail => n.powf(2.0 / 3.0),
            _ => n.cbrt(),
        }
    }
}

/// One row of an exceedance curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRow {
    pub threshold: f64,
    pub n_samples: u64,
    pub n_exceed: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl TailRow {
    pub fn from_counts(threshold: f64, n_exceed: u64, n_samples: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(n_exceed, n_samples, Z_95);
        TailRow { threshold, n_samples, n_exceed, p_hat: n_exceed as f64 / n_samples as f64, ci_lo, ci_hi }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailCurve {
    pub rows: Vec<TailRow>,
    pub fit: std::result::Result<ExponentFit, String>,
}

impl TailCurve {
    /// Thresholds with no exceedances; always outside the fit window.
    pub fn flagged(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n_exceed == 0).map(|r| r.threshold).collect()
    }
}

/// Rows for `thresholds` from per-replicate scores: a replicate exceeds `t`
/// when `score >= t * scale`.
pub fn tail_rows(scores: &[f64], scale: f64, thresholds: &[f64]) -> Vec<TailRow> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as u64;
    thresholds
        .iter()
        .map(|&t| {
            let cut = t * scale;
            let below = sorted.partition_point(|s| *s < cut) as u64;
            TailRow::from_counts(t, n - below, n)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TailExperiment {
    pub spec: ExperimentSpec,
    pub characteristic: CharacteristicSpec,
    /// Per-replicate scores, in replicate order.
    pub scores: Vec<f64>,
    pub curve: TailCurve,
}

impl TailExperiment {
    /// `#meta` key/value pairs.
    pub fn meta(&self) -> Vec<(String, String)> {
        let v = self.characteristic.v_n;
        let (ex, ey) = self.characteristic.exact();
        vec![
            ("kind".into(), self.spec.kind.name().into()),
            ("rho".into(), self.spec.rho.to_string()),
            ("N".into(), self.spec.n.to_string()),
            ("replicates".into(), self.spec.replicates.to_string()),
            ("seed".into(), self.spec.base_seed.to_string()),
            ("v_N".into(), format!("{},{}", v.x, v.y)),
            ("v_N_exact".into(), format!("{ex},{ey}")),
            ("rounding".into(), "nearest".into()),
            ("scale".into(), self.spec.scale().to_string()),
            ("version".into(), crate::VERSION.into()),
        ]
    }

    pub fn to_csv(&self) -> String {
        write_tail_csv(&self.meta(), &self.curve)
    }
}

/// Score of one replicate; see [`ExperimentKind`] for the events.
fn replicate_score(spec: &ExperimentSpec, ch: &CharacteristicSpec, replicate: u64) -> Result<f64> {
    let seed = spec.seed(replicate);
    let n = spec.n as f64;
    match spec.kind {
        ExperimentKind::ExitTail => {
            let field = build_stationary_boundary(spec.n, spec.rho, &seed)?;
            Ok(exit_time(&field, ch)?.z.unsigned_abs() as f64)
        }
        ExperimentKind::UpperTail => {
            let field = build_stationary_boundary(spec.n, spec.rho, &seed)?;
            Ok(passage_stationary_boundary(&field, ch.v_n)? - n)
        }
        ExperimentKind::LowerTail => {
            let field = build_stationary_boundary(spec.n, spec.rho, &seed)?;
            Ok(n - passage_stationary_boundary(&field, ch.v_n)?)
        }
        ExperimentKind::P2pTail => {
            let field = build_bulk(Window::from_origin(ch.v_n)?, &seed)?;
            let g = passage_point_to_point(&field, Point::ORIGIN, ch.v_n)?.ok_or(LppError::Unreachable(ch.v_n))?;
            Ok(g - n)
        }
    }
}

/// Per-replicate scores of an experiment, in replicate order.
pub fn run_scores(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    let ch = spec.validate()?;
    (0..spec.replicates).into_par_iter().map(|i| replicate_score(spec, &ch, i)).collect()
}

/// Run an experiment: scores, exceedance rows, exponent fit and its bootstrap interval.
pub fn run_tail(spec: &ExperimentSpec, options: &FitOptions) -> Result<TailExperiment> {
    let characteristic = spec.validate()?;
    let scores = run_scores(spec)?;
    let scale = spec.scale();
    let rows = tail_rows(&scores, scale, &spec.thresholds);
    let fit = fit_exponent(&rows, options).map(|mut fit| {
        if options.bootstrap_resamples > 0 {
            let boot_seed = Seed::new(spec.base_seed, format!("bootstrap/{}", spec.kind.name()), 0);
            fit.kappa_ci = bootstrap_kappa(&scores, scale, &spec.thresholds, options, &boot_seed);
        }
        fit
    });
    Ok(TailExperiment {
        spec: spec.clone(),
        characteristic,
        scores,
        curve: TailCurve { rows, fit: fit.map_err(|e| e.to_string()) },
    })
}

fn expect_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return Err(LppError::param(format!("expected a {} spec, got {}", kind.name(), spec.kind.name())));
    }
    Ok(())
}

pub fn run_exit_tail(spec: &ExperimentSpec, options: &FitOptions) -> Result<TailExperiment> {
    expect_kind(spec, ExperimentKind::ExitTail)?;
    run_tail(spec, options)
}

pub fn run_upper_tail(spec: &ExperimentSpec, options: &FitOptions) -> Result<TailExperiment> {
    expect_kind(spec, ExperimentKind::UpperTail)?;
    run_tail(spec, options)
}

pub fn run_lower_tail(spec: &ExperimentSpec, options: &FitOptions) -> Result<TailExperiment> {
    expect_kind(spec, ExperimentKind::LowerTail)?;
    run_tail(spec, options)
}

pub fn run_p2p_tail(spec: &ExperimentSpec, options: &FitOptions) -> Result<TailExperiment> {
    expect_kind(spec, ExperimentKind::P2pTail)?;
    run_tail(spec, options)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceSpec {
    pub rho: Density,
    pub ns: Vec<u64>,
    pub replicates: u64,
    pub base_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceRow {
    pub n: u64,
    pub n_samples: u64,
    pub variance: f64,
    pub variance_se: f64,
    /// Variance of the boundary-only passage time to `((1-rho)^2 N, 0)`.
    pub control_variance: f64,
    pub control_variance_se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceTable {
    pub spec: VarianceSpec,
    pub rows: Vec<VarianceRow>,
    pub slope: f64,
    pub slope_se: f64,
    pub control_slope: f64,
    pub control_slope_se: f64,
}

impl VarianceTable {
    pub fn meta(&self) -> Vec<(String, String)> {
        vec![
            ("kind".into(), "variance_scaling".into()),
            ("rho".into(), self.spec.rho.to_string()),
            ("replicates".into(), self.spec.replicates.to_string()),
            ("seed".into(), self.spec.base_seed.to_string()),
            ("rounding".into(), "nearest".into()),
            ("version".into(), crate::VERSION.into()),
        ]
    }

    pub fn to_csv(&self) -> String {
        write_variance_csv(&self.meta(), self)
    }
}

/// Least-squares slope of `ln var` on `ln N` with the jackknife errors propagated.
fn log_log_slope(ns: &[u64], vars: &[f64], ses: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = vars.iter().map(|v| v.ln()).collect();
    let fit = least_squares(&xs, &ys).expect("at least two distinct N");
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let se =
        xs.iter().zip(vars.iter().zip(ses)).map(|(x, (v, s))| ((x - mx) / sxx * s / v).powi(2)).sum::<f64>().sqrt();
    (fit.slope, se)
}

/// Sample variance of `G_stat(v_N)` across `N`, with a boundary-sum control
/// whose variance is exactly linear in `N`.
pub fn run_variance_scaling(spec: &VarianceSpec) -> Result<VarianceTable> {
    if spec.ns.len() < 2 {
        return Err(LppError::param("variance scaling needs at least two values of N"));
    }
    let (lo, hi) = (*spec.ns.iter().min().unwrap(), *spec.ns.iter().max().unwrap());
    if hi < 4 * lo {
        return Err(LppError::param(format!("largest N must be at least 4x the smallest, got {lo}..{hi}")));
    }
    if spec.replicates < 3 {
        return Err(LppError::param("variance scaling needs at least three replicates"));
    }
    let mut rows = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let ch = CharacteristicSpec::new(spec.rho, n)?;
        let id = format!("variance_scaling/N={n}");
        let pairs: Vec<(f64, f64)> = (0..spec.replicates)
            .into_par_iter()
            .map(|i| {
                let field = build_stationary_boundary(n, spec.rho, &Seed::new(spec.base_seed, id.as_str(), i))?;
                let g = passage_stationary_boundary(&field, ch.v_n)?;
                let control = passage_stationary_boundary(&field, Point::new(ch.v_n.x, 0))?;
                Ok((g, control))
            })
            .collect::<Result<_>>()?;
        let (gs, cs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (variance, variance_se) = variance_with_jackknife(&gs);
        let (control_variance, control_variance_se) = variance_with_jackknife(&cs);
        rows.push(VarianceRow {
            n,
            n_samples: spec.replicates,
            variance,
            variance_se,
            control_variance,
            control_variance_se,
        });
    }
    let ns: Vec<u64> = rows.iter().map(|r| r.n).collect();
    let (slope, slope_se) = log_log_slope(
        &ns,
        &rows.iter().map(|r| r.variance).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.variance_se).collect::<Vec<_>>(),
    );
    let (control_slope, control_slope_se) = log_log_slope(
        &ns,
        &rows.iter().map(|r| r.control_variance).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.control_variance_se).collect::<Vec<_>>(),
    );
    Ok(VarianceTable { spec: spec.clone(), rows, slope, slope_se, control_slope, control_slope_se })
}

/// Run `f` on a dedicated pool of `threads` workers (`None` for the rayon default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| LppError::param(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ExperimentKind, thresholds: Vec<f64>, replicates: u64) -> ExperimentSpec {
        ExperimentSpec { kind, rho: Density::half(), n: 128, thresholds, replicates, base_seed: 17 }
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(ExperimentKind::ExitTail, vec![0.5, 1.0], 10);
        assert!(s.validate().is_ok());
        s.thresholds = vec![1.0, 0.5];
        assert!(s.validate().is_err());
        s.thresholds = vec![];
        assert!(s.validate().is_err());
        s.thresholds = vec![-1.0, 1.0];
        assert!(s.validate().is_err());
        let wrong = spec(ExperimentKind::UpperTail, vec![1.0], 10);
        assert!(run_exit_tail(&wrong, &FitOptions::default()).is_err());
    }

    #[test]
    fn tiny_threshold_is_certain_for_the_exit_time() {
        // |Z| >= 1 always, so any r below N^{-2/3} is exceeded by every replicate.
        let s = spec(ExperimentKind::ExitTail, vec![1e-3, 0.25, 0.5, 1.0, 1.5], 400);
        let exp = run_exit_tail(&s, &FitOptions::no_bootstrap()).unwrap();
        let rows = &exp.curve.rows;
        assert_eq!(rows[0].n_exceed, 400);
        assert_eq!(rows[0].p_hat, 1.0);
        for w in rows.windows(2) {
            assert!(w[1].n_exceed <= w[0].n_exceed);
        }
        for r in rows {
            assert!(r.ci_lo <= r.p_hat && r.p_hat <= r.ci_hi);
        }
    }

    #[test]
    fn upper_and_lower_tails_partition_the_mass() {
        let thresholds = vec![0.25, 0.5, 1.0, 2.0];
        let up = run_scores(&spec(ExperimentKind::UpperTail, thresholds.clone(), 300)).unwrap();
        let scale = (128f64).cbrt();
        let lower_scores: Vec<f64> = up.iter().map(|s| -s).collect();
        let up_rows = tail_rows(&up, scale, &thresholds);
        let low_rows = tail_rows(&lower_scores, scale, &thresholds);
        for (u, l) in up_rows.iter().zip(&low_rows) {
            let interior = up.iter().filter(|s| s.abs() < u.threshold * scale).count() as u64;
            assert_eq!(u.n_exceed + l.n_exceed + interior, 300);
        }
    }

    #[test]
    fn scores_do_not_depend_on_thread_count() {
        let s = spec(ExperimentKind::UpperTail, vec![0.5, 1.0], 64);
        let one = with_threads(Some(1), || run_scores(&s)).unwrap().unwrap();
        let four = with_threads(Some(4), || run_scores(&s)).unwrap().unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn nested_exceedances_per_realization() {
        let thresholds = [0.25, 0.5, 0.75, 1.0];
        let scores = run_scores(&spec(ExperimentKind::ExitTail, thresholds.to_vec(), 200)).unwrap();
        let scale = (128f64).powf(2.0 / 3.0);
        for s in scores {
            let hits: Vec<bool> = thresholds.iter().map(|t| s >= t * scale).collect();
            assert!(hits.windows(2).all(|w| w[0] || !w[1]));
        }
    }

    #[test]
    fn variance_needs_spread_in_n() {
        let bad = VarianceSpec { rho: Density::half(), ns: vec![64, 128], replicates: 10, base_seed: 1 };
        assert!(run_variance_scaling(&bad).is_err());
        let single = VarianceSpec { ns: vec![64], ..bad };
        assert!(run_variance_scaling(&single).is_err());
    }

    #[test]
    fn p2p_tail_runs() {
        let s = spec(ExperimentKind::P2pTail, vec![0.5, 1.0], 50);
        let e = run_p2p_tail(&s, &FitOptions::no_bootstrap()).unwrap();
        assert_eq!(e.curve.rows.len(), 2);
        assert!(e.curve.fit.is_err());
    }
}
