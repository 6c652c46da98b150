//! Closed-form moment generating function of centered boundary sums, the
//! threshold below which it is dominated by a Gaussian bound, and reference
//! tail curves.

use crate::environment::Density;
use crate::error::{LppError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MgfSpec {
    pub rho: Density,
    pub r: f64,
    pub n: u64,
    /// Length of the boundary sum, `(r + 1) N^{2/3}`.
    pub x_bar: f64,
    pub lambda: f64,
    pub c_star: f64,
}

impl MgfSpec {
    pub fn new(rho: Density, r: f64, n: u64, lambda: f64, c_star: f64) -> Result<Self> {
        if !(r >= 0.0) || n < 1 {
            return Err(LppError::param(format!("need r >= 0 and N >= 1, got r={r}, N={n}")));
        }
        let x_bar = (r + 1.0) * (n as f64).powf(2.0 / 3.0);
        MgfSpec::with_x_bar(rho, x_bar, lambda, c_star).map(|s| MgfSpec { r, n, ..s })
    }

    /// Spec for a given sum length directly (`r = 0`, `N = x_bar^{3/2}` nominal).
    pub fn with_x_bar(rho: Density, x_bar: f64, lambda: f64, c_star: f64) -> Result<Self> {
        if !(x_bar > 0.0) || !(lambda > 0.0) {
            return Err(LppError::param(format!("need x_bar > 0 and lambda > 0, got {x_bar}, {lambda}")));
        }
        if !(c_star > 0.5) {
            return Err(LppError::domain(format!("C* must exceed 1/2, got {c_star}")));
        }
        Ok(MgfSpec { rho, r: 0.0, n: x_bar.powf(1.5).round().max(1.0) as u64, x_bar, lambda, c_star })
    }

    /// `u = lambda / sqrt(x_bar)`.
    pub fn u(&self) -> f64 {
        self.lambda / self.x_bar.sqrt()
    }
}

/// `-ln(1 - u) - u`, the log-MGF of a centered rate-1 exponential at `u`.
fn centered_log_mgf(u: f64) -> f64 {
    -(-u).ln_1p() - u
}

/// Natural log of [`mgf_closed_form`].
pub fn log_mgf_closed_form(spec: &MgfSpec) -> Result<f64> {
    let u = spec.u();
    if !(u < 1.0) {
        return Err(LppError::domain(format!(
            "lambda = {} must be below sqrt(x_bar) = {}",
            spec.lambda,
            spec.x_bar.sqrt()
        )));
    }
    Ok(spec.x_bar * centered_log_mgf(u))
}

/// `((1/(1-u)) e^{-u})^{x_bar}` with `u = lambda/sqrt(x_bar)`: the MGF at
/// `lambda` of a sum of `x_bar` rate-`(1-rho)` exponentials, centered at its
/// mean and divided by `sqrt(x_bar)/(1-rho)`.
pub fn mgf_closed_form(spec: &MgfSpec) -> Result<f64> {
    log_mgf_closed_form(spec).map(f64::exp)
}

/// `(-ln(1-u) - u) / u^2`, strictly increasing from 1/2 at `0+` to infinity at `1-`.
pub fn mgf_ratio(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        // Series 1/2 + u/3 + u^2/4 + u^3/5 avoids cancellation near 0.
        return 0.5 + u / 3.0 + u * u / 4.0 + u * u * u / 5.0;
    }
    centered_log_mgf(u) / (u * u)
}

/// Largest `u` in `(0, 1)` with `mgf_ratio(u) <= c_star`, by bisection to 1e-12.
///
/// For `lambda / sqrt(x_bar) <= delta0(c_star)`, `ln MGF <= c_star lambda^2`.
pub fn delta0(c_star: f64) -> Result<f64> {
    if !(c_star > 0.5) {
        return Err(LppError::domain(format!("C* must exceed 1/2, got {c_star}")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mgf_ratio(mid) <= c_star {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailFamily {
    ExitCubic,
    UpperThreeHalves,
    LowerCubic,
    P2pUpper,
    P2pLower,
}

impl TailFamily {
    /// Stretched-exponential exponent of the family.
    ///
    /// The point-to-point upper bound `exp(-c min(y^{3/2}, y n^{1/3}))` is
    /// represented by its moderate-deviation branch `y^{3/2}`.
    pub fn kappa(self) -> f64 {
        match self {
            TailFamily::ExitCubic | TailFamily::LowerCubic | TailFamily::P2pLower => 3.0,
            TailFamily::UpperThreeHalves | TailFamily::P2pUpper => 1.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TailFamily::ExitCubic => "exit_cubic",
            TailFamily::UpperThreeHalves => "upper_three_halves",
            TailFamily::LowerCubic => "lower_cubic",
            TailFamily::P2pUpper => "p2p_upper",
            TailFamily::P2pLower => "p2p_lower",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailModel {
    pub family: TailFamily,
    pub big_c: f64,
    pub small_c: f64,
}

impl TailModel {
    pub fn new(family: TailFamily, big_c: f64, small_c: f64) -> Result<Self> {
        if !(big_c > 0.0 && small_c > 0.0) {
            return Err(LppError::param("tail model constants must be positive"));
        }
        Ok(TailModel { family, big_c, small_c })
    }
}

/// `min(1, C exp(-c argument^kappa))`.
pub fn reference_curve(model: &TailModel, argument: f64) -> f64 {
    let a = argument.max(0.0);
    (model.big_c * (-model.small_c * a.powf(model.family.kappa())).exp()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_example() {
        let spec = MgfSpec::with_x_bar(Density::half(), 4.0, 1.0, 1.0).unwrap();
        let expected = 16.0 * (-2.0f64).exp();
        assert!((mgf_closed_form(&spec).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 2.1654).abs() < 1e-4);
    }

    #[test]
    fn closed_form_near_zero_and_at_pole() {
        let spec = MgfSpec::with_x_bar(Density::half(), 100.0, 1e-9, 1.0).unwrap();
        assert!((mgf_closed_form(&spec).unwrap() - 1.0).abs() < 1e-12);
        let pole = MgfSpec::with_x_bar(Density::half(), 100.0, 10.0, 1.0).unwrap();
        assert!(matches!(mgf_closed_form(&pole), Err(LppError::Domain(_))));
    }

    #[test]
    fn ratio_is_strictly_increasing() {
        let mut prev = mgf_ratio(1e-6);
        assert!((prev - 0.5).abs() < 1e-5);
        for i in 1..100_000 {
            let u = i as f64 / 100_000.0;
            let r = mgf_ratio(u);
            assert!(r > prev, "not increasing at u={u}");
            prev = r;
        }
    }

    #[test]
    fn delta0_examples() {
        assert!(delta0(100.0).unwrap() > 0.99);
        assert!(delta0(0.5 + 1e-6).unwrap() < 0.01);
        let d1 = delta0(1.0).unwrap();
        assert!((mgf_ratio(d1) - 1.0).abs() < 1e-9);
        assert!((d1 - 0.684).abs() < 1e-3, "delta0(1) = {d1}");
        assert!(delta0(0.5).is_err());
    }

    #[test]
    fn reference_curve_examples() {
        let exit = TailModel::new(TailFamily::ExitCubic, 1.0, 1.0).unwrap();
        assert!((reference_curve(&exit, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        let upper = TailModel::new(TailFamily::UpperThreeHalves, 1.0, 1.0).unwrap();
        assert!((reference_curve(&upper, 4.0) - (-8.0f64).exp()).abs() < 1e-15);
        let big = TailModel::new(TailFamily::LowerCubic, 5.0, 1.0).unwrap();
        assert_eq!(reference_curve(&big, 1e-6), 1.0);
        assert!(TailModel::new(TailFamily::P2pUpper, 0.0, 1.0).is_err());
    }
}
