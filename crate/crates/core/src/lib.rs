//! Exact counting of integer lattice points in spherical caps and segments.
//!
//! A segment of the sphere `|x|² = n` in `ℤ^d` is the set difference of two
//! concentric caps with a common direction. This crate represents all cap and
//! segment radii as exact rational *squared* radii, so every membership test
//! and every counting bound reduces to integer/rational comparisons: the
//! reported counts carry no floating-point error.
//!
//! Module map:
//!
//! - [`geometry`] — spheres, directions, caps, segments, and the exact
//!   angle/radius/height/offset conversions between them.
//! - [`lattice`] — exhaustive enumeration of `{x ∈ ℤ^d : |x|² = n}` and exact
//!   (or tri-state, for float directions) membership tests.
//! - [`slicing`] — grouping sphere points by rational hyperplanes `b·x = t`,
//!   the per-direction slice maximum, and the slice-count inequality checker.
//! - [`diophantine`] — simultaneous rational approximation of a direction by
//!   an integer vector, with certified norm and angle bounds.
//! - [`covering`] — enlarging a segment to one of integer direction that
//!   provably contains it, and the end-to-end bound pipeline.
//! - [`interval`] — the rational interval arithmetic (directed rounding for
//!   square roots) that backs every certified inequality above.

pub mod covering;
pub mod diophantine;
mod error;
pub mod geometry;
pub mod interval;
pub mod lattice;
pub mod slicing;

pub use covering::{
    bound_pipeline, bound_pipeline_with_h, build_covering, height_bound, ApproxMode,
    CoveringHeight, CoveringSegment, PipelineReport,
};
pub use diophantine::{
    approx_direction, approx_direction_rational_quotients, dirichlet_approx,
    normalized_difference_bound, DirectionApproximation, DirichletResult,
};
pub use error::{Error, Result};
pub use geometry::{Cap, Direction, Segment, SphereSpec};
pub use lattice::{
    cap_contains, count_segment, enumerate_sphere, enumerate_sphere_with_budget, segment_contains,
    segment_contains_exact, LatticePoint, SegmentCount, SpherePointSet, Verdict,
};
pub use slicing::{
    check_lemma1, count_slices_hit, kappa_estimate, slice, KappaEstimate, SliceHistogram,
};
