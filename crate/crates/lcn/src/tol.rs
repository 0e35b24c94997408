//! Tolerance bundle shared by the numerical operations.

use num_traits::Float;

use crate::Scalar;

/// Relative tolerances used by root finding, clustering, grid checks and
/// orbit matching. Every operation that consumes floating-point input
/// takes a `&Tolerances<T>`, so all thresholds are overridable per call.
#[derive(Clone, Debug)]
pub struct Tolerances<T> {
    /// Aberth correction threshold, relative to `1 + |z|`.
    pub root: T,
    /// Root clustering radius, relative to `1 + |z|`.
    pub cluster: T,
    /// Off-grid coefficient threshold, relative to the coefficient norm.
    pub grid: T,
    /// Hyperroot orbit matching threshold in the `r^s` image space,
    /// applied with the metric `|a - b| / (1 + |a| + |b|)`.
    pub orbit: T,
    /// Realness snapping threshold for roots and coefficients.
    pub real: T,
    /// Threshold below which a leading or trailing coefficient counts as a
    /// structural zero (root at infinity or at zero), relative to the
    /// coefficient norm.
    pub coeff_zero: T,
    /// Iteration cap for one Aberth attempt.
    pub max_root_iters: usize,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        // Defaults are stated for f64; for coarser scalars they are floored
        // at a small multiple of the machine epsilon.
        let floor = T::epsilon() * T::of(64.0);
        let at_least = |v: f64| Float::max(T::of(v), floor);
        Tolerances {
            root: at_least(1e-12),
            cluster: at_least(1e-6),
            grid: at_least(1e-9),
            orbit: at_least(1e-6),
            real: at_least(1e-8),
            coeff_zero: at_least(1e-12),
            max_root_iters: 400,
        }
    }
}
