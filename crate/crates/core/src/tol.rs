//! Shared floating-point tolerances.

/// Relative tolerance used for completion and threshold checks.
pub const REL: f64 = 1e-9;
/// Absolute floor for [`REL`].
pub const ABS: f64 = 1e-12;
/// Slack allowed on the sum of rates.
pub const RATE_SLACK: f64 = 1e-12;

#[inline]
pub fn tol(scale: f64) -> f64 {
    (REL * scale.abs()).max(ABS)
}

/// `amount` has reached `threshold` up to tolerance.
#[inline]
pub fn reached(amount: f64, threshold: f64) -> bool {
    threshold - amount <= tol(threshold)
}

#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= tol(a.abs().max(b.abs()))
}
