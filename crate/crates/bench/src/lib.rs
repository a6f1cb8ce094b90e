//! Benchmarks live in `benches/`; run them with `cargo bench -p lpp-bench`.

use lpp_core::{LatticePoint, WeightField};

/// Environment covering `[0, side]²` for benchmark sample `index`.
pub fn bench_field(index: u64, side: u32) -> WeightField {
    WeightField::new(0xBE7C, index, LatticePoint::diag(side))
}
