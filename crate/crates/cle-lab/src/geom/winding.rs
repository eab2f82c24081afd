//! Winding numbers of closed polylines around a point.

use super::{GeomError, Loop, Point};

/// Signed winding number of `points` (as a closed polyline) around `z`,
/// with no on-trace guard. Computed by summing per-segment argument
/// increments; exact rounding to an integer.
pub fn winding_number_raw(points: &[Point], z: Point) -> i32 {
    let n = points.len();
    let mut total = 0.0f64;
    for i in 0..n {
        let a = points[i] - z;
        let b = points[(i + 1) % n] - z;
        // Angle from a to b in (-pi, pi]: atan2 of (a conj * b).
        let crossv = a.re * b.im - a.im * b.re;
        let dotv = a.re * b.re + a.im * b.im;
        total += crossv.atan2(dotv);
    }
    (total / std::f64::consts::TAU).round() as i32
}

/// Signed winding number of the loop around `z`.
///
/// Errors with [`GeomError::PointOnLoop`] if `z` lies within `tol` of the
/// loop trace, where the winding number is ill-defined.
pub fn winding_number(l: &Loop, z: Point, tol: f64) -> Result<i32, GeomError> {
    if l.distance_to(z) < tol {
        return Err(GeomError::PointOnLoop { tol });
    }
    Ok(winding_number_raw(l.points(), z))
}
