//! Deterministic shape functions and their expansions around the
//! characteristic direction.
//!
//! `f(m, n) = (sqrt(m) + sqrt(n))^2` is the first-order limit of point-to-point
//! passage times, `g` is the mean of a boundary sum of length `|x|`, and `h`
//! is the quadratic loss of leaving the axes at distance `x`.

use crate::environment::Density;
use crate::error::{LppError, Result};
use crate::lattice::Point;

/// The characteristic endpoint `v_N = ((1-rho)^2 N, rho^2 N)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicSpec {
    pub rho: Density,
    pub n: u64,
    /// `v_N` rounded to the nearest lattice point.
    pub v_n: Point,
}

impl CharacteristicSpec {
    /// Both coordinates of the rounded endpoint must be at least 1.
    pub fn new(rho: Density, n: u64) -> Result<Self> {
        if n < 1 {
            return Err(LppError::param("N must be at least 1"));
        }
        let v_n = characteristic_point(rho, n);
        if v_n.x < 1 || v_n.y < 1 {
            return Err(LppError::param(format!(
                "characteristic point {v_n} for rho={rho}, N={n} has a zero coordinate"
            )));
        }
        Ok(CharacteristicSpec { rho, n, v_n })
    }

    /// Unrounded `v_N`.
    pub fn exact(&self) -> (f64, f64) {
        characteristic_exact(self.rho, self.n)
    }

    /// `N^{2/3}`, the transversal scale.
    pub fn transversal_scale(&self) -> f64 {
        (self.n as f64).powf(2.0 / 3.0)
    }

    /// `N^{1/3}`, the fluctuation scale.
    pub fn fluctuation_scale(&self) -> f64 {
        (self.n as f64).cbrt()
    }
}

pub fn characteristic_exact(rho: Density, n: u64) -> (f64, f64) {
    let r = rho.get();
    let n = n as f64;
    ((1.0 - r).powi(2) * n, r * r * n)
}

/// `v_N` with each coordinate rounded to the nearest integer (halves away from zero).
pub fn characteristic_point(rho: Density, n: u64) -> Point {
    let (x, y) = characteristic_exact(rho, n);
    Point::new(x.round() as i64, y.round() as i64)
}

/// `f((m, n)) = (sqrt(m) + sqrt(n))^2` on real coordinates.
pub fn shape_f_real(m: f64, n: f64) -> Result<f64> {
    if !(m >= 0.0 && n >= 0.0) {
        return Err(LppError::domain(format!("shape_f needs nonnegative coordinates, got ({m}, {n})")));
    }
    Ok(m + n + 2.0 * (m * n).sqrt())
}

pub fn shape_f(p: Point) -> Result<f64> {
    shape_f_real(p.x as f64, p.y as f64)
}

/// Mean of a boundary sum of length `|x|`: `x/(1-rho)` on the x-axis, `-x/rho` on the y-axis.
pub fn shape_g(x: f64, rho: Density) -> f64 {
    let r = rho.get();
    if x >= 0.0 {
        x / (1.0 - r)
    } else {
        -x / r
    }
}

pub fn shape_h(x: f64, rho: Density) -> f64 {
    let r = rho.get();
    if x >= 0.0 {
        r * x * x / (4.0 * (1.0 - r).powi(3))
    } else {
        (1.0 - r) * x * x / (4.0 * r.powi(3))
    }
}

/// `N - h(x)/N - [g(x) + f(v_N - x_up)]` with the exact (unrounded) `v_N`,
/// where `x_up = (x, 1)` for `x > 0` and `(1, -x)` for `x < 0`.
///
/// Strictly positive on `-rho^2 N < x < (1-rho)^2 N`.
pub fn taylor_remainder_axis(x: f64, spec: &CharacteristicSpec) -> Result<f64> {
    let (vx, vy) = spec.exact();
    if !(x > -vy && x < vx) || x == 0.0 {
        return Err(LppError::domain(format!("x={x} outside (-{vy}, {vx}) or zero")));
    }
    let (ux, uy) = if x > 0.0 { (x, 1.0) } else { (1.0, -x) };
    let n = spec.n as f64;
    let f = shape_f_real(vx - ux, vy - uy)?;
    Ok(n - shape_h(x, spec.rho) / n - (shape_g(x, spec.rho) + f))
}

/// `N - 4t^2/N - f(v_N - (t, -t))` at `rho = 1/2`, where `v_N = (N/4, N/4)`.
///
/// Evaluated through the identity
/// `N - 4t^2/N - f = 16 t^4 / (N (N/2 + 2 s)^2)` with `s = sqrt(N^2/16 - t^2)`,
/// which avoids the cancellation of the direct difference for small `t`.
pub fn taylor_remainder_antidiagonal(t: f64, n: u64) -> Result<f64> {
    let nf = n as f64;
    if n < 1 || !(t.abs() < nf / 4.0) {
        return Err(LppError::domain(format!("t={t} outside (-N/4, N/4) for N={n}")));
    }
    let s = ((nf / 4.0 - t) * (nf / 4.0 + t)).sqrt();
    let denom = nf / 2.0 + 2.0 * s;
    Ok(16.0 * t.powi(4) / (nf * denom * denom))
}
