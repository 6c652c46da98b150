//! Seeded random environments.
//!
//! Three variants are supported:
//!
//! * [`Variant::Bulk`]: i.i.d. rate-1 exponential weights on a window.
//! * [`Variant::StationaryBoundary`]: the quadrant model anchored at the
//!   window's lower-left corner. The corner has weight 0, the bottom row
//!   carries rate `1 - rho` weights, the left column rate `rho` weights and
//!   the interior rate-1 weights.
//! * [`Variant::HalfPlane`]: weight 0 on `x + y <= 0`, rate-1 weights above.
//!
//! Randomness is drawn from a ChaCha20 stream keyed by the SHA-256 digest of
//! the seed triple, see [`Seed::rng`]. Each builder consumes its stream in a
//! fixed order (row-major for fields), so an environment is a pure function of
//! its parameters and seed.

use std::fmt;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{LppError, Result};
use crate::lattice::{Point, Window};
use crate::shape::characteristic_point;

/// Default upper bound on the number of cells of any materialized window.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 30;

/// Particle density `rho`, strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Density(f64);

impl Density {
    pub fn new(rho: f64) -> Result<Self> {
        if rho > 0.0 && rho < 1.0 {
            Ok(Density(rho))
        } else {
            Err(LppError::param(format!("density must lie in (0, 1), got {rho}")))
        }
    }

    pub fn half() -> Self {
        Density(0.5)
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// The density with the roles of the two axes exchanged.
    pub fn complement(self) -> Self {
        Density(1.0 - self.0)
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifies one random stream: `(base_seed, experiment_id, replicate_index)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Seed {
    pub base_seed: u64,
    pub experiment_id: String,
    pub replicate_index: u64,
}

const SEED_DOMAIN: &[u8] = b"lpp-lab/seed/v1\0";

impl Seed {
    pub fn new(base_seed: u64, experiment_id: impl Into<String>, replicate_index: u64) -> Self {
        Seed { base_seed, experiment_id: experiment_id.into(), replicate_index }
    }

    pub fn with_replicate(&self, replicate_index: u64) -> Self {
        Seed { replicate_index, ..self.clone() }
    }

    /// A child seed for one component of a composite realization.
    pub fn derive(&self, tag: &str) -> Self {
        Seed { experiment_id: format!("{}/{}", self.experiment_id, tag), ..self.clone() }
    }

    /// The 32-byte stream key:
    ///
    /// ```text
    /// SHA-256( "lpp-lab/seed/v1\0"
    ///        || base_seed as u64 LE
    ///        || len(experiment_id) as u64 LE || experiment_id (UTF-8)
    ///        || replicate_index as u64 LE )
    /// ```
    pub fn key(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(SEED_DOMAIN);
        hasher.update(self.base_seed.to_le_bytes());
        hasher.update((self.experiment_id.len() as u64).to_le_bytes());
        hasher.update(self.experiment_id.as_bytes());
        hasher.update(self.replicate_index.to_le_bytes());
        hasher.finalize().into()
    }

    /// ChaCha20 keystream keyed by [`Seed::key`], starting at block 0.
    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.key())
    }
}

/// Inverse-CDF map from a uniform `u` in `(0, 1)` to an exponential variate of rate `rate`.
pub fn exponential_from_uniform(rate: f64, u: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(LppError::param(format!("exponential rate must be positive, got {rate}")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(LppError::param(format!("uniform variate must lie in (0, 1), got {u}")));
    }
    Ok(-u.ln() / rate)
}

/// Draw `-ln(U)/rate` with `U` uniform on the open interval `(0, 1)`.
pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<f64> {
    let u: f64 = rng.sample(Open01);
    exponential_from_uniform(rate, u)
}

#[inline]
fn draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln() / rate
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    Bulk,
    StationaryBoundary { rho: Density },
    HalfPlane,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Bulk => "bulk",
            Variant::StationaryBoundary { .. } => "stationary-boundary",
            Variant::HalfPlane => "half-plane",
        }
    }
}

/// A realized environment on a finite window. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    variant: Variant,
    window: Window,
    weights: Vec<f64>,
}

impl WeightField {
    /// Wrap explicit weights (row-major over `window`).
    ///
    /// Weights must be finite and nonnegative; the structural zeros of the
    /// variant (the stationary corner, the half-plane below the line) are
    /// checked.
    pub fn from_weights(variant: Variant, window: Window, weights: Vec<f64>) -> Result<Self> {
        if weights.len() as u64 != window.cells() {
            return Err(LppError::param(format!(
                "{} weights supplied for a window of {} cells",
                weights.len(),
                window.cells()
            )));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(LppError::param(format!("weight {w} at {} is not finite and nonnegative", window.point(i))));
        }
        match variant {
            Variant::Bulk => {}
            Variant::StationaryBoundary { .. } => {
                if weights[0] != 0.0 {
                    return Err(LppError::param("stationary boundary field must have weight 0 at its corner"));
                }
            }
            Variant::HalfPlane => {
                if let Some(p) = window.points().find(|p| p.level() <= 0 && weights[window.index(*p)] != 0.0) {
                    return Err(LppError::param(format!("half-plane field has nonzero weight at {p}")));
                }
            }
        }
        Ok(WeightField { variant, window, weights })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, p: Point) -> Option<f64> {
        self.window.contains(p).then(|| self.weights[self.window.index(p)])
    }

    /// Weight at `p`, which must lie in the window.
    #[inline]
    pub fn at(&self, p: Point) -> f64 {
        self.weights[self.window.index(p)]
    }

    /// Corner of a stationary boundary field (its origin).
    pub fn origin(&self) -> Point {
        self.window.min
    }

    /// The same field with the two coordinates exchanged; a stationary
    /// boundary field becomes one of density `1 - rho`.
    pub fn transpose(&self) -> WeightField {
        let window = Window { min: self.window.min.transpose(), max: self.window.max.transpose() };
        let weights = window.points().map(|p| self.at(p.transpose())).collect();
        let variant = match self.variant {
            Variant::StationaryBoundary { rho } => Variant::StationaryBoundary { rho: rho.complement() },
            v => v,
        };
        WeightField { variant, window, weights }
    }
}

/// The random-walk initial profile `T` on the line `x + y = 0`, indexed by
/// `t` for the site `(t, -t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryProfile {
    /// `None` for deterministic profiles such as `T = 0`.
    rho: Option<Density>,
    t_min: i64,
    values: Vec<f64>,
}

impl BoundaryProfile {
    /// Wrap explicit values for `t = t_min, t_min + 1, ...`; `T(0)` must be exactly 0.
    pub fn from_values(rho: Option<Density>, t_min: i64, values: Vec<f64>) -> Result<Self> {
        let t_max = t_min + values.len() as i64 - 1;
        if t_min > 0 || t_max < 0 {
            return Err(LppError::param(format!("profile range [{t_min}, {t_max}] must contain 0")));
        }
        if values[(-t_min) as usize] != 0.0 {
            return Err(LppError::param("profile must vanish at t = 0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LppError::param("profile values must be finite"));
        }
        Ok(BoundaryProfile { rho, t_min, values })
    }

    /// The flat profile `T = 0` on `[t_min, t_max]`.
    pub fn zero(t_min: i64, t_max: i64) -> Result<Self> {
        if t_min > 0 || t_max < 0 {
            return Err(LppError::param(format!("profile range [{t_min}, {t_max}] must contain 0")));
        }
        Ok(BoundaryProfile { rho: None, t_min, values: vec![0.0; (t_max - t_min + 1) as usize] })
    }

    pub fn rho(&self) -> Option<Density> {
        self.rho
    }

    pub fn t_min(&self) -> i64 {
        self.t_min
    }

    pub fn t_max(&self) -> i64 {
        self.t_min + self.values.len() as i64 - 1
    }

    pub fn covers(&self, t_lo: i64, t_hi: i64) -> bool {
        self.t_min <= t_lo && t_hi <= self.t_max()
    }

    pub fn get(&self, t: i64) -> Option<f64> {
        if t < self.t_min || t > self.t_max() {
            None
        } else {
            Some(self.values[(t - self.t_min) as usize])
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A realization of the point-to-line stationary model targeting one site.
#[derive(Clone, Debug, PartialEq)]
pub struct PointToLineModel {
    pub field: WeightField,
    pub profile: BoundaryProfile,
}

/// Builders with a configurable cell budget.
#[derive(Clone, Copy, Debug)]
pub struct Builder {
    pub cell_budget: u64,
}

impl Default for Builder {
    fn default() -> Self {
        Builder { cell_budget: DEFAULT_CELL_BUDGET }
    }
}

impl Builder {
    pub fn with_cell_budget(cell_budget: u64) -> Self {
        Builder { cell_budget }
    }

    pub fn bulk(&self, window: Window, seed: &Seed) -> Result<WeightField> {
        window.check_budget(self.cell_budget)?;
        let mut rng = seed.rng();
        let weights = (0..window.cells()).map(|_| draw(1.0, &mut rng)).collect();
        Ok(WeightField { variant: Variant::Bulk, window, weights })
    }

    /// Stationary boundary field on `[origin, origin + extent]`, anchored at `origin`.
    pub fn stationary_boundary_at(
        &self,
        origin: Point,
        extent: Point,
        rho: Density,
        seed: &Seed,
    ) -> Result<WeightField> {
        if extent.x < 0 || extent.y < 0 {
            return Err(LppError::param(format!("negative extent {extent}")));
        }
        let window = Window::new(origin, Point::new(origin.x + extent.x, origin.y + extent.y))?;
        window.check_budget(self.cell_budget)?;
        let (rate_x, rate_y) = (1.0 - rho.get(), rho.get());
        let mut rng = seed.rng();
        let weights = window
            .points()
            .map(|p| match (p.x == origin.x, p.y == origin.y) {
                (true, true) => 0.0,
                (false, true) => draw(rate_x, &mut rng),
                (true, false) => draw(rate_y, &mut rng),
                (false, false) => draw(1.0, &mut rng),
            })
            .collect();
        Ok(WeightField { variant: Variant::StationaryBoundary { rho }, window, weights })
    }

    /// Stationary boundary field on `[0, (1-rho)^2 N] x [0, rho^2 N]`, corners rounded to nearest.
    pub fn stationary_boundary(&self, n: u64, rho: Density, seed: &Seed) -> Result<WeightField> {
        if n < 1 {
            return Err(LppError::param("N must be at least 1"));
        }
        self.stationary_boundary_at(Point::ORIGIN, characteristic_point(rho, n), rho, seed)
    }

    pub fn half_plane(&self, window: Window, seed: &Seed) -> Result<WeightField> {
        window.check_budget(self.cell_budget)?;
        let mut rng = seed.rng();
        let weights = window.points().map(|p| if p.level() > 0 { draw(1.0, &mut rng) } else { 0.0 }).collect();
        Ok(WeightField { variant: Variant::HalfPlane, window, weights })
    }

    /// Two-sided random-walk profile on `[t_min, t_max]`.
    ///
    /// The positive and negative halves use separate streams, each drawing
    /// `tau` then `psi` per step moving away from 0, so a profile is a prefix
    /// of any wider profile built from the same seed.
    pub fn boundary_profile(&self, rho: Density, t_min: i64, t_max: i64, seed: &Seed) -> Result<BoundaryProfile> {
        if t_min > 0 || t_max < 0 {
            return Err(LppError::param(format!("profile range [{t_min}, {t_max}] must satisfy t_min <= 0 <= t_max")));
        }
        let len = (t_max - t_min + 1) as u64;
        if len > self.cell_budget {
            return Err(LppError::CellBudget { cells: len, budget: self.cell_budget });
        }
        let (rate_tau, rate_psi) = (1.0 - rho.get(), rho.get());
        let mut values = vec![0.0; len as usize];
        let zero = (-t_min) as usize;

        let mut rng = seed.derive("profile+").rng();
        let mut acc = 0.0;
        for v in &mut values[zero + 1..] {
            let tau = draw(rate_tau, &mut rng);
            let psi = draw(rate_psi, &mut rng);
            acc += tau - psi;
            *v = acc;
        }

        let mut rng = seed.derive("profile-").rng();
        let mut acc = 0.0;
        for v in values[..zero].iter_mut().rev() {
            let tau = draw(rate_tau, &mut rng);
            let psi = draw(rate_psi, &mut rng);
            acc -= tau - psi;
            *v = acc;
        }
        Ok(BoundaryProfile { rho: Some(rho), t_min, values })
    }

    /// Point-to-line realization covering the backward light cone of `target`:
    /// a half-plane field on `[-y, x] x [-x, y]` and a profile on `[-y, x]`.
    pub fn point_to_line(&self, rho: Density, target: Point, seed: &Seed) -> Result<PointToLineModel> {
        if target.level() <= 0 {
            return Err(LppError::param(format!("target {target} must satisfy x + y > 0")));
        }
        let window = cone_window(target)?;
        let field = self.half_plane(window, &seed.derive("field"))?;
        let profile = self.boundary_profile(rho, -target.y, target.x, &seed.derive("profile"))?;
        Ok(PointToLineModel { field, profile })
    }
}

/// Smallest rectangle containing every up-right path from the line `x + y = 0` to `target`.
pub fn cone_window(target: Point) -> Result<Window> {
    Window::new(Point::new(-target.y, -target.x), target)
}

pub fn build_bulk(window: Window, seed: &Seed) -> Result<WeightField> {
    Builder::default().bulk(window, seed)
}

pub fn build_stationary_boundary(n: u64, rho: Density, seed: &Seed) -> Result<WeightField> {
    Builder::default().stationary_boundary(n, rho, seed)
}

pub fn build_half_plane(window: Window, seed: &Seed) -> Result<WeightField> {
    Builder::default().half_plane(window, seed)
}

pub fn build_boundary_profile(rho: Density, t_min: i64, t_max: i64, seed: &Seed) -> Result<BoundaryProfile> {
    Builder::default().boundary_profile(rho, t_min, t_max, seed)
}

pub fn build_point_to_line(rho: Density, target: Point, seed: &Seed) -> Result<PointToLineModel> {
    Builder::default().point_to_line(rho, target, seed)
}
