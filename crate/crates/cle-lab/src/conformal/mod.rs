//! Conformal mapping toolkit: Möbius maps, a geodesic-composition Riemann
//! map for simply connected domains, an alternating circularization scheme
//! for doubly connected domains, and a walk-on-spheres harmonic-measure
//! sampler used to cross-check the maps.
//!
//! Domains are described by polyline boundaries. Maps are returned as
//! [`crate::loewner::MapStack`]s — compositions of closed-form elementary
//! maps that can be evaluated in both directions and serialized.

mod annulus_map;
mod mobius;
mod wos;
mod zipper;

pub use annulus_map::{circularize_annulus, CircularizeReport};
pub use mobius::{apply_to_ensemble, apply_to_loop, apply_to_point, MapSpec, Mobius};
pub use wos::{hitting_probability, BoundaryPart, HittingEstimate};
pub use zipper::{map_simply_connected, polyline_half_plane_capacity, Normalization};

use crate::geom::Point;
use thiserror::Error;

/// Errors from conformal-map construction and evaluation.
#[derive(Debug, Error)]
pub enum ConformalError {
    /// The requested map has a pole on (or too close to) the object.
    #[error("map pole lies on the object (distance {dist:.3e})")]
    PoleOnObject {
        /// Distance from the pole to the object.
        dist: f64,
    },
    /// The image of a loop collapsed below the resolution of a valid loop.
    #[error("image degenerated to fewer than three distinct vertices")]
    DegenerateImage,
    /// A boundary vertex turns too sharply for the map construction.
    #[error("boundary too rough at vertex {vertex} (turning angle {turn_deg:.1}°)")]
    BoundaryTooRough {
        /// Index of the offending vertex in the boundary polyline.
        vertex: usize,
        /// Turning angle at that vertex, in degrees.
        turn_deg: f64,
    },
    /// The alternating circularization scheme failed to converge.
    #[error(
        "circularization did not converge after {iterations} rounds \
         (residuals: outer {residual_outer:.3e}, inner {residual_inner:.3e})"
    )]
    NoConvergence {
        /// Rounds performed before giving up.
        iterations: usize,
        /// Final roundness residual of the outer boundary image.
        residual_outer: f64,
        /// Final roundness residual of the inner boundary image.
        residual_inner: f64,
    },
    /// The domain descriptor is malformed.
    #[error("invalid domain: {0}")]
    BadDomain(String),
}

/// A domain bounded by one or two polylines.
///
/// The first boundary is the outer one, oriented counterclockwise; a second
/// boundary, if present, is an inner hole oriented clockwise and strictly
/// inside the outer. Constructors fix orientation automatically.
#[derive(Debug, Clone)]
pub struct DomainDescriptor {
    /// Boundary polylines (closed; the last vertex connects back to the
    /// first). `boundaries[0]` is the outer boundary.
    pub boundaries: Vec<Vec<Point>>,
    /// Marked boundary points used to pin normalizations.
    pub marked: Vec<Point>,
}

impl DomainDescriptor {
    /// A simply connected domain from one closed boundary polyline.
    pub fn simply_connected(boundary: Vec<Point>) -> Result<Self, ConformalError> {
        let b = oriented(boundary, true)?;
        Ok(DomainDescriptor { boundaries: vec![b], marked: Vec::new() })
    }

    /// A doubly connected domain from outer and inner boundary polylines.
    pub fn doubly_connected(
        outer: Vec<Point>,
        inner: Vec<Point>,
    ) -> Result<Self, ConformalError> {
        let o = oriented(outer, true)?;
        let i = oriented(inner, false)?;
        // The inner boundary must sit strictly inside the outer one.
        let oloop = crate::geom::Loop::new(o.clone())
            .map_err(|e| ConformalError::BadDomain(e.to_string()))?;
        for &p in &i {
            let w = crate::geom::winding_number(&oloop, p, 1e-12)
                .map_err(|_| ConformalError::BadDomain("inner touches outer".into()))?;
            if w == 0 {
                return Err(ConformalError::BadDomain(
                    "inner boundary not inside outer boundary".into(),
                ));
            }
        }
        Ok(DomainDescriptor { boundaries: vec![o, i], marked: Vec::new() })
    }

    /// Adds a marked boundary point (used to pin rotations).
    pub fn with_marked(mut self, p: Point) -> Self {
        self.marked.push(p);
        self
    }

    /// Whether the domain has an inner hole.
    pub fn is_doubly_connected(&self) -> bool {
        self.boundaries.len() == 2
    }

    /// Diameter of the outer boundary.
    pub fn outer_diameter(&self) -> f64 {
        crate::geom::polyline_diameter(&self.boundaries[0])
    }
}

/// Validates a closed boundary and fixes its orientation.
fn oriented(mut pts: Vec<Point>, ccw: bool) -> Result<Vec<Point>, ConformalError> {
    // Drop an explicit closing vertex and collapse coincident neighbors.
    if pts.len() >= 2 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-14 {
        pts.pop();
    }
    pts.dedup_by(|a, b| (*a - *b).norm() < 1e-14);
    if pts.len() < 3 {
        return Err(ConformalError::BadDomain(
            "boundary needs at least three distinct vertices".into(),
        ));
    }
    let area = signed_area(&pts);
    if area.abs() < 1e-300 {
        return Err(ConformalError::BadDomain("boundary has zero area".into()));
    }
    if (area > 0.0) != ccw {
        pts.reverse();
    }
    Ok(pts)
}

/// Shoelace signed area of a closed polyline.
pub(crate) fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        s += p.re * q.im - q.re * p.im;
    }
    0.5 * s
}
