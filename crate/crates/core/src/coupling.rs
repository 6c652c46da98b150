//! Coupling of the two stationary realizations through one boundary model
//! anchored at `(-n, -n)`.
//!
//! From a single shifted stationary field `nu` with passage times
//! `H(v) = G_stat(-n, v)`:
//!
//! * the quadrant realization on `[0, n]^2` takes the increments of `H` along
//!   the two axes as its boundary weights and copies `nu` in the interior;
//! * the point-to-line realization takes `T(t) = H((t, -t)) - H(0)` as its
//!   profile and copies `nu` above the line.
//!
//! Both then satisfy `G1(v) = G2(v) = H(v) - H(0)` for every `0 <= v <= (n, n)`.

use rayon::prelude::*;

use crate::environment::{BoundaryProfile, Builder, Density, PointToLineModel, Seed, Variant, WeightField};
use crate::error::{LppError, Result};
use crate::lattice::{Point, Window};
use crate::passage::{exit_time, forward_table, line_table, q_last_axis_meeting, stationary_table};
use crate::shape::CharacteristicSpec;
use crate::stats::{exponential_cdf, ks_one_sample, mean};

/// Relative tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CoupledPair {
    pub n: i64,
    pub rho: Density,
    /// Stationary boundary field on `[-n, n]^2` anchored at `(-n, -n)`.
    pub shifted_model: WeightField,
    /// Stationary boundary field on `[0, n]^2`.
    pub derived_rep1: WeightField,
    /// Half-plane field on `[-n, n]^2` with its line profile on `[-n, n]`.
    pub derived_rep2: PointToLineModel,
}

impl CoupledPair {
    pub fn corner(&self) -> Point {
        Point::new(self.n, self.n)
    }
}

pub fn build_coupled_pair(n: u64, rho: Density, seed: &Seed) -> Result<CoupledPair> {
    build_coupled_pair_with(&Builder::default(), n, rho, seed)
}

pub fn build_coupled_pair_with(builder: &Builder, n: u64, rho: Density, seed: &Seed) -> Result<CoupledPair> {
    if n < 1 {
        return Err(LppError::param("coupling window needs n >= 1"));
    }
    let n = n as i64;
    let corner = Point::new(n, n);
    let shifted_model = builder.stationary_boundary_at(Point::new(-n, -n), Point::new(2 * n, 2 * n), rho, seed)?;

    // One forward sweep gives H on both axes and on the antidiagonal.
    let table = stationary_table(&shifted_model, corner)?;
    let h = |p: Point| table.get(p).expect("every site of the shifted window is reachable");
    let h0 = h(Point::ORIGIN);

    let quadrant = Window::from_origin(corner)?;
    let rep1_weights = quadrant
        .points()
        .map(|p| match (p.x, p.y) {
            (0, 0) => 0.0,
            (i, 0) => h(p) - h(Point::new(i - 1, 0)),
            (0, j) => h(p) - h(Point::new(0, j - 1)),
            _ => shifted_model.at(p),
        })
        .collect();
    let derived_rep1 = WeightField::from_weights(Variant::StationaryBoundary { rho }, quadrant, rep1_weights)?;

    let full = *shifted_model.window();
    let rep2_weights = full.points().map(|p| if p.level() > 0 { shifted_model.at(p) } else { 0.0 }).collect();
    let field = WeightField::from_weights(Variant::HalfPlane, full, rep2_weights)?;
    let profile_values = (-n..=n).map(|t| if t == 0 { 0.0 } else { h(Point::new(t, -t)) - h0 }).collect();
    let profile = BoundaryProfile::from_values(Some(rho), -n, profile_values)?;

    Ok(CoupledPair { n, rho, shifted_model, derived_rep1, derived_rep2: PointToLineModel { field, profile } })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EqualityReport {
    pub sites_checked: usize,
    pub max_abs_discrepancy: f64,
    pub max_rel_discrepancy: f64,
    /// Site of the largest relative discrepancy.
    pub worst: Option<Point>,
}

impl EqualityReport {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.max_rel_discrepancy <= tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Check `G1(v) = G2(v) = H(v) - H(0)` at every `0 <= v <= (n, n)`.
pub fn verify_equality(pair: &CoupledPair) -> Result<EqualityReport> {
    let corner = pair.corner();
    let g1 = stationary_table(&pair.derived_rep1, corner)?;
    let g2 = line_table(&pair.derived_rep2.field, &pair.derived_rep2.profile, corner)?;
    let h = forward_table(&pair.shifted_model, pair.shifted_model.origin(), corner)?;
    let h0 = h.get(Point::ORIGIN).ok_or(LppError::Unreachable(Point::ORIGIN))?;

    let mut report =
        EqualityReport { sites_checked: 0, max_abs_discrepancy: 0.0, max_rel_discrepancy: 0.0, worst: None };
    for v in Window::from_origin(corner)?.points() {
        let a = g1.get(v).ok_or(LppError::Unreachable(v))?;
        let b = g2.get(v).ok_or(LppError::Unreachable(v))?;
        let c = h.get(v).ok_or(LppError::Unreachable(v))? - h0;
        let abs = (a - b).abs().max((a - c).abs()).max((b - c).abs());
        let r = rel(a, b).max(rel(a, c)).max(rel(b, c));
        report.sites_checked += 1;
        report.max_abs_discrepancy = report.max_abs_discrepancy.max(abs);
        if r > report.max_rel_discrepancy {
            report.max_rel_discrepancy = r;
            report.worst = Some(v);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BurkeReport {
    pub samples_per_axis: usize,
    /// KS p-value of pooled x-axis increments against `exp(1 - rho)`.
    pub x_p_value: f64,
    /// KS p-value of pooled y-axis increments against `exp(rho)`.
    pub y_p_value: f64,
    pub x_mean: f64,
    pub x_std_error: f64,
    pub y_mean: f64,
    pub y_std_error: f64,
    /// Negative control: x-axis increments tested against `exp(rho)`.
    /// Only informative when `rho != 1/2`.
    pub control_p_value: f64,
}

impl BurkeReport {
    pub fn passes(&self, alpha: f64) -> bool {
        self.x_p_value > alpha && self.y_p_value > alpha
    }
}

/// Pool the derived boundary weights of `replicates` coupled realizations and
/// test them against their stationary marginals.
pub fn burke_increment_test(rho: Density, n: u64, replicates: u64, seed: &Seed) -> Result<BurkeReport> {
    if replicates < 1000 {
        return Err(LppError::param(format!("Burke test needs at least 1000 replicates, got {replicates}")));
    }
    let per: Vec<(Vec<f64>, Vec<f64>)> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let pair = build_coupled_pair(n, rho, &seed.with_replicate(i))?;
            let f = &pair.derived_rep1;
            let xs = (1..=pair.n).map(|i| f.at(Point::new(i, 0))).collect();
            let ys = (1..=pair.n).map(|j| f.at(Point::new(0, j))).collect();
            Ok((xs, ys))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = per.iter().flat_map(|(x, _)| x.iter().copied()).collect();
    let ys: Vec<f64> = per.iter().flat_map(|(_, y)| y.iter().copied()).collect();

    let std_err = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0) / v.len() as f64).sqrt()
    };
    Ok(BurkeReport {
        samples_per_axis: xs.len(),
        x_p_value: ks_one_sample(&xs, exponential_cdf(1.0 - rho.get())).p_value,
        y_p_value: ks_one_sample(&ys, exponential_cdf(rho.get())).p_value,
        x_mean: mean(&xs),
        x_std_error: std_err(&xs),
        y_mean: mean(&ys),
        y_std_error: std_err(&ys),
        control_p_value: ks_one_sample(&xs, exponential_cdf(rho.get())).p_value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoupledExit {
    /// Exit time from the quadrant realization.
    pub z: i64,
    /// Last axis meeting from the point-to-line realization.
    pub q: i64,
}

impl CoupledExit {
    pub fn equal(&self) -> bool {
        self.z == self.q
    }
}

/// Compute `Z` and `q_N` on the two coupled realizations. `v_N` must lie in `[0, n]^2`.
pub fn coupled_exit_equality(pair: &CoupledPair, spec: &CharacteristicSpec) -> Result<CoupledExit> {
    if !spec.v_n.le(pair.corner()) {
        return Err(LppError::param(format!("v_N = {} lies outside the coupled window [0, {}]^2", spec.v_n, pair.n)));
    }
    let z = exit_time(&pair.derived_rep1, spec)?.z;
    let q = q_last_axis_meeting(&pair.derived_rep2, spec)?;
    Ok(CoupledExit { z, q })
}

/// The largest `N` whose rounded characteristic point fits in `[0, n]^2`
/// with both coordinates at least 1.
pub fn largest_characteristic_n(rho: Density, n: u64) -> Option<u64> {
    let r = rho.get();
    let dominant = (1.0 - r).powi(2).max(r * r);
    let mut cand = (n as f64 / dominant).floor() as u64 + 1;
    while cand >= 1 {
        if let Ok(spec) = CharacteristicSpec::new(rho, cand) {
            if spec.v_n.x <= n as i64 && spec.v_n.y <= n as i64 {
                return Some(cand);
            }
        }
        cand -= 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::passage::passage_stationary_boundary;

    #[test]
    fn derived_objects_vanish_at_the_origin() {
        let pair = build_coupled_pair(20, Density::new(0.35).unwrap(), &Seed::new(1, "cp", 0)).unwrap();
        assert_eq!(pair.derived_rep1.at(Point::ORIGIN), 0.0);
        assert_eq!(pair.derived_rep2.profile.get(0), Some(0.0));
        assert!(pair.derived_rep1.weights().iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn three_way_equality_at_n20() {
        let rho = Density::new(0.6).unwrap();
        for i in 0..10 {
            let pair = build_coupled_pair(20, rho, &Seed::new(2, "cp", i)).unwrap();
            let report = verify_equality(&pair).unwrap();
            assert_eq!(report.sites_checked, 21 * 21);
            assert!(report.holds(EXACT_TOLERANCE), "{report:?}");
        }
    }

    #[test]
    fn axis_values_telescope() {
        let pair = build_coupled_pair(12, Density::half(), &Seed::new(3, "cp", 0)).unwrap();
        let table = stationary_table(&pair.shifted_model, pair.corner()).unwrap();
        let h0 = table.get(Point::ORIGIN).unwrap();
        for i in 1..=12 {
            let v = Point::new(i, 0);
            let g1 = passage_stationary_boundary(&pair.derived_rep1, v).unwrap();
            assert!((g1 - (table.get(v).unwrap() - h0)).abs() <= 1e-9 * g1);
        }
    }

    #[test]
    fn tiny_coupled_exit_matches_enumeration() {
        // n = 2, rho = 1/2, v_N = (2, 2): enumerate the six quadrant paths directly.
        let rho = Density::half();
        let spec = CharacteristicSpec::new(rho, 8).unwrap();
        assert_eq!(spec.v_n, Point::new(2, 2));
        for i in 0..25 {
            let pair = build_coupled_pair(2, rho, &Seed::new(4, "tiny", i)).unwrap();
            let f = &pair.derived_rep1;
            let paths: [&[(i64, i64)]; 6] = [
                &[(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)],
                &[(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)],
                &[(0, 0), (1, 0), (1, 1), (1, 2), (2, 2)],
                &[(0, 0), (0, 1), (1, 1), (2, 1), (2, 2)],
                &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)],
                &[(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)],
            ];
            let exits = [2, 1, 1, -1, -1, -2];
            let (best, _) = paths
                .iter()
                .enumerate()
                .map(|(k, p)| (k, p.iter().map(|&(x, y)| f.at(Point::new(x, y))).sum::<f64>()))
                .fold((0, f64::MIN), |acc, (k, w)| if w > acc.1 { (k, w) } else { acc });
            let out = coupled_exit_equality(&pair, &spec).unwrap();
            assert_eq!(out.z, exits[best]);
            assert!(out.equal(), "{out:?}");
        }
    }

    #[test]
    fn corner_target_is_admitted() {
        let rho = Density::half();
        let pair = build_coupled_pair(16, rho, &Seed::new(5, "edge", 0)).unwrap();
        let spec = CharacteristicSpec::new(rho, 64).unwrap();
        assert_eq!(spec.v_n, pair.corner());
        assert!(coupled_exit_equality(&pair, &spec).unwrap().equal());
        let too_far = CharacteristicSpec::new(rho, 72).unwrap();
        assert!(coupled_exit_equality(&pair, &too_far).is_err());
    }

    #[test]
    fn largest_characteristic_n_fits() {
        let n = largest_characteristic_n(Density::half(), 64).unwrap();
        assert_eq!(CharacteristicSpec::new(Density::half(), n).unwrap().v_n, Point::new(64, 64));
        let rho = Density::new(0.3).unwrap();
        let n = largest_characteristic_n(rho, 64).unwrap();
        let v = CharacteristicSpec::new(rho, n).unwrap().v_n;
        assert!(v.x <= 64 && v.y <= 64);
        assert!(CharacteristicSpec::new(rho, n + 1).unwrap().v_n.x > 64);
    }
}
