//! Loop-space geometry: polyline loops, arcs of loops, loop ensembles, and
//! the metrics used to compare ensembles.
//!
//! Loops are closed polylines in the complex plane. An ensemble is a finite
//! multiset of loops together with a domain descriptor and sampling
//! metadata. The metrics implemented here are the ones the statistical
//! experiments are phrased in:
//!
//! * [`loop_distance`] — discrete Fréchet distance between closed polylines,
//!   minimized over cyclic shifts (orientation preserved);
//! * [`finite_ensemble_distance`] — optimal-assignment sum of loop
//!   distances, capped at 1, or exactly 1 on cardinality mismatch;
//! * [`ensemble_distance`] — the diameter-threshold integral
//!   `∫₀¹ finite_ensemble_distance(A_ε, B_ε) dε`, evaluated exactly;
//! * [`local_ensemble_distance`] — the exponentially weighted radial
//!   localization of [`ensemble_distance`].

mod metrics;
mod polyline;
mod winding;

pub mod faces;

pub use metrics::{
    ensemble_distance, finite_ensemble_distance, local_ensemble_distance, loop_distance,
};
pub use polyline::{
    bbox as polyline_bbox, douglas_peucker, nearest_point_on_polyline, polyline_diameter,
    polyline_length, resample_by_arclength, segment_distance,
};
pub use winding::{winding_number, winding_number_raw};

use num_complex::Complex64;
use thiserror::Error;

/// A point in the complex plane.
pub type Point = Complex64;

/// Errors from loop construction and point queries.
#[derive(Debug, Error)]
pub enum GeomError {
    /// A loop needs at least three vertices.
    #[error("loop needs at least three vertices, got {0}")]
    TooFewPoints(usize),
    /// Consecutive vertices (cyclically) must be distinct.
    #[error("consecutive duplicate vertex at index {0}")]
    DuplicatePoint(usize),
    /// The query point lies on (or within tolerance of) the loop trace, so
    /// the winding number is undefined.
    #[error("query point lies within {tol:e} of the loop trace")]
    PointOnLoop {
        /// The tolerance that was violated.
        tol: f64,
    },
}

/// Default geometric tolerance for on-boundary tests: `1e-9` times the
/// diameter of the ambient domain.
pub fn default_geom_tol(domain: &Domain) -> f64 {
    1e-9 * domain.diameter()
}

/// A closed polyline loop.
///
/// Vertices are joined in order, with an implicit closing segment from the
/// last vertex back to the first. Construction enforces: at least three
/// vertices, cyclically-consecutive vertices distinct (which also forces a
/// positive diameter).
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    points: Vec<Point>,
}

impl Loop {
    /// Builds a loop, validating the polyline invariants.
    pub fn new(points: Vec<Point>) -> Result<Self, GeomError> {
        if points.len() < 3 {
            return Err(GeomError::TooFewPoints(points.len()));
        }
        let n = points.len();
        for i in 0..n {
            if points[i] == points[(i + 1) % n] {
                return Err(GeomError::DuplicatePoint(i));
            }
        }
        Ok(Loop { points })
    }

    /// Builds a loop from a polyline that may contain consecutive
    /// duplicates (within `tol`), removing them first. The final vertex is
    /// dropped if it coincides with the first.
    pub fn from_polyline(points: &[Point], tol: f64) -> Result<Self, GeomError> {
        let mut cleaned: Vec<Point> = Vec::with_capacity(points.len());
        for &p in points {
            if cleaned.last().map_or(true, |&q| (p - q).norm() > tol) {
                cleaned.push(p);
            }
        }
        while cleaned.len() >= 2
            && (cleaned[0] - *cleaned.last().unwrap()).norm() <= tol
        {
            cleaned.pop();
        }
        Loop::new(cleaned)
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True if the loop has no vertices (never true for a validated loop;
    /// present for the usual `len`/`is_empty` pairing).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The vertex list.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Vertex by cyclic index.
    pub fn point(&self, i: usize) -> Point {
        self.points[i % self.points.len()]
    }

    /// Maximum pairwise vertex distance, via convex hull and rotating
    /// calipers (`O(n log n)`).
    pub fn diameter(&self) -> f64 {
        polyline::polyline_diameter(&self.points)
    }

    /// Total polyline length including the closing segment.
    pub fn length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| (self.points[(i + 1) % n] - self.points[i]).norm())
            .sum()
    }

    /// The loop with reversed orientation (same vertex set).
    pub fn reversed(&self) -> Loop {
        let mut pts = self.points.clone();
        pts.reverse();
        Loop { points: pts }
    }

    /// The loop with its vertex list rotated so that index `s` comes first.
    pub fn cyclic_shift(&self, s: usize) -> Loop {
        let n = self.points.len();
        let s = s % n;
        let mut pts = Vec::with_capacity(n);
        pts.extend_from_slice(&self.points[s..]);
        pts.extend_from_slice(&self.points[..s]);
        Loop { points: pts }
    }

    /// Image of the loop under a pointwise map, revalidated.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Loop, GeomError> {
        Loop::new(self.points.iter().map(|&p| f(p)).collect())
    }

    /// Minimum distance from `z` to the loop trace (vertices and segments).
    pub fn distance_to(&self, z: Point) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| polyline::segment_distance(self.points[i], self.points[(i + 1) % n], z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box `(min_re, min_im, max_re, max_im)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        polyline::bbox(&self.points)
    }

    /// Lexicographically smallest vertex (by real part, then imaginary
    /// part); used for the deterministic ensemble ordering.
    pub fn lex_min_vertex(&self) -> Point {
        let mut best = self.points[0];
        for &p in &self.points[1..] {
            if (p.re, p.im) < (best.re, best.im) {
                best = p;
            }
        }
        best
    }
}

/// A contiguous piece of a loop, by cyclic vertex indices.
///
/// The arc runs forward (in the parent's orientation) from `start_index` to
/// `end_index`, wrapping past the last vertex if needed. Producers that cut
/// arcs at geometric crossings store the interpolated crossing points in
/// `snapped_start` / `snapped_end`; these replace the first and last vertex
/// when the arc is materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    /// Index of the parent loop in its owning ensemble (or other context).
    pub parent: usize,
    /// First vertex index (cyclic).
    pub start_index: usize,
    /// Last vertex index (cyclic, inclusive).
    pub end_index: usize,
    /// True iff the arc is neither empty nor the whole loop.
    pub proper: bool,
    /// Replacement for the first vertex (e.g. a boundary crossing point).
    pub snapped_start: Option<Point>,
    /// Replacement for the last vertex.
    pub snapped_end: Option<Point>,
}

impl Arc {
    /// An arc of `parent` from `start_index` to `end_index` with no snapped
    /// endpoints. `loop_len` is the parent's vertex count, used to set the
    /// `proper` flag.
    pub fn new(parent: usize, start_index: usize, end_index: usize, loop_len: usize) -> Self {
        let span = vertex_span(start_index, end_index, loop_len);
        Arc {
            parent,
            start_index,
            end_index,
            proper: span > 1 && span < loop_len,
            snapped_start: None,
            snapped_end: None,
        }
    }

    /// Number of vertices the arc covers (inclusive of both endpoints).
    pub fn vertex_count(&self, loop_len: usize) -> usize {
        vertex_span(self.start_index, self.end_index, loop_len)
    }

    /// Materializes the arc as an open polyline, applying snapped endpoints.
    pub fn polyline(&self, parent: &Loop) -> Vec<Point> {
        let n = parent.len();
        let span = self.vertex_count(n);
        let mut pts: Vec<Point> = (0..span)
            .map(|k| parent.point(self.start_index + k))
            .collect();
        if let Some(s) = self.snapped_start {
            pts[0] = s;
        }
        if let Some(e) = self.snapped_end {
            let last = pts.len() - 1;
            pts[last] = e;
        }
        pts
    }
}

/// Inclusive cyclic span from `start` to `end` in a loop of `n` vertices.
fn vertex_span(start: usize, end: usize, n: usize) -> usize {
    if end >= start {
        end - start + 1
    } else {
        n - start + end + 1
    }
}

/// Domain descriptor for an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// The open unit disk.
    Disk,
    /// The annulus `{rho < |z| < 1}`.
    Annulus {
        /// Inner radius in `(0, 1)`.
        rho: f64,
    },
    /// A whole-plane sample restricted to the window `{|z| ≤ radius}`.
    WholePlaneWindow {
        /// Window radius.
        radius: f64,
    },
    /// A general simply connected component with the given boundary
    /// polyline (counterclockwise).
    Component {
        /// Boundary vertices.
        boundary: Vec<Point>,
    },
}

impl Domain {
    /// Euclidean diameter of the domain.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Disk | Domain::Annulus { .. } => 2.0,
            Domain::WholePlaneWindow { radius } => 2.0 * radius,
            Domain::Component { boundary } => polyline::polyline_diameter(boundary),
        }
    }
}

/// Sampling metadata carried by every ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMeta {
    /// SLE parameter.
    pub kappa: f64,
    /// Master seed the sample was drawn from.
    pub seed: u64,
    /// Stop resolution: components smaller than this are not explored, and
    /// loops smaller than this are not reported.
    pub epsilon_stop: f64,
    /// Base capacity-time step of the driving processes.
    pub dt: f64,
    /// Maximum exploration-tree depth reached during construction.
    pub depth: u32,
    /// True if a budget cap stopped construction before the resolution
    /// target was reached everywhere.
    pub truncated: bool,
    /// For whole-plane windows: the radius of the large sampling disk the
    /// window was cut from (for convergence audits).
    pub r_big: Option<f64>,
}

impl EnsembleMeta {
    /// Metadata for analytically constructed (non-sampled) ensembles.
    pub fn synthetic() -> Self {
        EnsembleMeta {
            kappa: f64::NAN,
            seed: 0,
            epsilon_stop: 0.0,
            dt: 0.0,
            depth: 0,
            truncated: false,
            r_big: None,
        }
    }
}

/// A finite multiset of loops in a common domain.
///
/// Stored as a list in the canonical order (diameter descending, then
/// lexicographically smallest vertex) so that equal multisets have equal
/// representations.
#[derive(Debug, Clone)]
pub struct LoopEnsemble {
    /// The loops, canonically ordered.
    pub loops: Vec<Loop>,
    /// Ambient domain.
    pub domain: Domain,
    /// Sampling metadata.
    pub meta: EnsembleMeta,
}

impl LoopEnsemble {
    /// Builds an ensemble and puts the loops into canonical order.
    pub fn new(loops: Vec<Loop>, domain: Domain, meta: EnsembleMeta) -> Self {
        let mut ens = LoopEnsemble { loops, domain, meta };
        ens.sort_canonical();
        ens
    }

    /// Restores the canonical (diameter desc, lex vertex) ordering after
    /// direct mutation of `loops`.
    pub fn sort_canonical(&mut self) {
        let mut keyed: Vec<(f64, Point, Loop)> = self
            .loops
            .drain(..)
            .map(|l| (l.diameter(), l.lex_min_vertex(), l))
            .collect();
        keyed.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then((a.1.re, a.1.im).partial_cmp(&(b.1.re, b.1.im)).unwrap())
        });
        self.loops = keyed.into_iter().map(|(_, _, l)| l).collect();
    }

    /// Number of loops.
    pub fn len(&self) -> usize {
        self.loops.len()
    }

    /// True if the ensemble contains no loops.
    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }
}

/// Region descriptor for [`restrict_ensemble`].
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Closed ball of the given center and radius.
    Ball {
        /// Center.
        center: Point,
        /// Radius.
        radius: f64,
    },
    /// Closed annulus `{inner ≤ |z - center| ≤ outer}`.
    Annulus {
        /// Center.
        center: Point,
        /// Inner radius.
        inner: f64,
        /// Outer radius.
        outer: f64,
    },
    /// Closed polygon (vertices in order; containment by winding number).
    Polygon {
        /// Polygon vertices.
        vertices: Vec<Point>,
    },
}

impl Region {
    /// True if `z` lies in the closed region (within `tol`).
    pub fn contains_point(&self, z: Point, tol: f64) -> bool {
        match self {
            Region::Ball { center, radius } => (z - center).norm() <= radius + tol,
            Region::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                r >= inner - tol && r <= outer + tol
            }
            Region::Polygon { vertices } => {
                let n = vertices.len();
                let on_boundary = (0..n).any(|i| {
                    polyline::segment_distance(vertices[i], vertices[(i + 1) % n], z) <= tol
                });
                on_boundary || winding::winding_number_raw(vertices, z) != 0
            }
        }
    }

    /// True if any point of the loop trace meets the closed region
    /// (within `tol`). Checked on vertices and segment midpoint refinement
    /// against the region boundary.
    pub fn meets_loop(&self, l: &Loop, tol: f64) -> bool {
        if l.points().iter().any(|&p| self.contains_point(p, tol)) {
            return true;
        }
        // A segment can cross a ball/annulus region without either endpoint
        // inside; test segment-to-center distances for the circular cases.
        match self {
            Region::Ball { center, radius } => {
                let n = l.len();
                (0..n).any(|i| {
                    polyline::segment_distance(l.point(i), l.point(i + 1), *center)
                        <= radius + tol
                })
            }
            Region::Annulus { center, outer, .. } => {
                let n = l.len();
                (0..n).any(|i| {
                    polyline::segment_distance(l.point(i), l.point(i + 1), *center)
                        <= outer + tol
                })
            }
            Region::Polygon { vertices } => {
                // Vertices of the loop are all outside the closed polygon;
                // the loop can still clip a corner, so test the segments for
                // crossings.
                let n = l.len();
                let m = vertices.len();
                (0..n).any(|i| {
                    (0..m).any(|j| {
                        polyline::segments_intersect(
                            l.point(i),
                            l.point(i + 1),
                            vertices[j],
                            vertices[(j + 1) % m],
                        )
                    })
                })
            }
        }
    }

    /// True if the whole loop lies in the closed region (within `tol`).
    pub fn contains_loop(&self, l: &Loop, tol: f64) -> bool {
        l.points().iter().all(|&p| self.contains_point(p, tol))
    }
}

/// Splits an ensemble by a region: loops entirely inside `closure(A)`, and
/// loops meeting `closure(A)`. The first output is always a subset of the
/// second.
pub fn restrict_ensemble(
    ensemble: &LoopEnsemble,
    region: &Region,
) -> (LoopEnsemble, LoopEnsemble) {
    let tol = default_geom_tol(&ensemble.domain);
    let contained: Vec<Loop> = ensemble
        .loops
        .iter()
        .filter(|l| region.contains_loop(l, tol))
        .cloned()
        .collect();
    let meeting: Vec<Loop> = ensemble
        .loops
        .iter()
        .filter(|l| region.meets_loop(l, tol))
        .cloned()
        .collect();
    (
        LoopEnsemble::new(contained, ensemble.domain.clone(), ensemble.meta.clone()),
        LoopEnsemble::new(meeting, ensemble.domain.clone(), ensemble.meta.clone()),
    )
}

/// Maximum pairwise vertex distance of a loop. Equivalent to
/// [`Loop::diameter`]; exposed as a free function to match the operation
/// vocabulary used throughout the crate.
pub fn diameter(l: &Loop) -> f64 {
    l.diameter()
}
