//! Fixtures shared by the kernel benchmarks.

use tracebound_core::torus::{PotentialSpec, TorusGeometry, TorusModel};

/// `-Δ + 2cos x` on the circle of length 2π.
pub fn mathieu() -> TorusModel {
    TorusModel::new(TorusGeometry::standard(1).expect("d = 1"), PotentialSpec::cosine(1, 1.0), 1.0)
}

/// Free Laplacian on the square torus `[0, 2π]²` with a `(2n+1)²` basis.
pub fn free_square(n: usize) -> TorusModel {
    TorusModel::new(TorusGeometry::standard(2).expect("d = 2"), PotentialSpec::zero(), 1.0).with_half_width(n)
}

/// `z` grid of `count` points on `[start, stop]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}
