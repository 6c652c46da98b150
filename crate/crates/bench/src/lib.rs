//! Fixtures shared by the criterion benchmarks.

use lpp_core::coupling::{build_coupled_pair, CoupledPair};
use lpp_core::environment::{build_bulk, build_stationary_boundary};
use lpp_core::{CharacteristicSpec, Density, Point, Seed, WeightField, Window};

pub const BENCH_SEED: u64 = 0x5eed;

/// Square i.i.d. field with `side` sites per row.
pub fn bulk_square(side: i64) -> WeightField {
    build_bulk(Window::from_origin(Point::new(side - 1, side - 1)).unwrap(), &Seed::new(BENCH_SEED, "bench/bulk", 0))
        .unwrap()
}

/// Stationary field sized for the characteristic point of `n` at `rho = 1/2`.
pub fn stationary(n: u64) -> (WeightField, CharacteristicSpec) {
    let rho = Density::half();
    let field = build_stationary_boundary(n, rho, &Seed::new(BENCH_SEED, "bench/stationary", 0)).unwrap();
    (field, CharacteristicSpec::new(rho, n).unwrap())
}

pub fn coupled(n: u64) -> CoupledPair {
    build_coupled_pair(n, Density::half(), &Seed::new(BENCH_SEED, "bench/coupled", 0)).unwrap()
}
