//! Shared fixtures for the benchmarks in `benches/`.

use lrgibbs::model::config::bundled;
use lrgibbs::{HamiltonianSpec, Interval};

/// Bundled power-law transverse-field Ising chain with `alpha = 3`.
pub fn tfim(n: usize) -> HamiltonianSpec {
    bundled("tfim-a3", n).and_then(|c| c.to_spec()).expect("bundled model")
}

/// `[1, n/2]` and `[n/2 + 1, n]`.
pub fn halves(n: usize) -> (Interval, Interval) {
    (Interval { lo: 1, hi: n / 2 }, Interval { lo: n / 2 + 1, hi: n })
}
