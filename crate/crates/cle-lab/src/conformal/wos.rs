//! Walk-on-spheres estimation of harmonic measure.
//!
//! A Brownian path in a polyline-bounded domain is advanced by jumping to a
//! uniform point on the largest origin-centered circle that stays inside the
//! domain, and absorbed once it comes within a small threshold of the
//! boundary. The hitting probability of a set of boundary pieces is the
//! fraction of absorbed walks whose nearest boundary segment belongs to the
//! target set.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{segment_distance, Point};

use super::{ConformalError, DomainDescriptor};

/// A piece of the domain boundary: one polyline, optionally restricted to a
/// half-open range of segment indices (segment `i` joins vertex `i` to
/// vertex `i + 1`, cyclically).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryPart {
    /// Index into `DomainDescriptor::boundaries`.
    pub polyline: usize,
    /// Half-open segment index range; `None` selects the whole polyline.
    pub range: Option<(usize, usize)>,
}

impl BoundaryPart {
    /// The whole boundary polyline with the given index.
    pub fn whole(polyline: usize) -> Self {
        BoundaryPart { polyline, range: None }
    }

    /// A segment range of the given boundary polyline.
    pub fn segments(polyline: usize, start: usize, end: usize) -> Self {
        BoundaryPart { polyline, range: Some((start, end)) }
    }
}

/// Result of a walk-on-spheres run.
#[derive(Debug, Clone, Copy)]
pub struct HittingEstimate {
    /// Fraction of walks absorbed on the target pieces.
    pub probability: f64,
    /// Binomial standard error of the estimate.
    pub std_error: f64,
    /// Number of walks performed.
    pub walks: usize,
}

/// One boundary segment with its owning polyline.
#[derive(Debug, Clone, Copy)]
struct Seg {
    a: Point,
    b: Point,
    polyline: usize,
    index: usize,
}

/// Uniform grid over segments for nearest-boundary queries, plus a dense
/// per-cell lower bound on the distance to the boundary. Away from the
/// boundary a walk can jump by the lower bound without an exact search.
struct SegGrid {
    segs: Vec<Seg>,
    cells: std::collections::HashMap<(i64, i64), Vec<usize>>,
    cell: f64,
    origin: Point,
    /// Distance lower bound per cell of the padded bounding box, row-major.
    lower: Vec<f64>,
    dims: (i64, i64),
}

const GRID_RES: f64 = 64.0;
const GRID_PAD: i64 = 2;

impl SegGrid {
    fn build(domain: &DomainDescriptor) -> Self {
        let mut segs = Vec::new();
        for (pi, poly) in domain.boundaries.iter().enumerate() {
            let n = poly.len();
            for i in 0..n {
                segs.push(Seg { a: poly[i], b: poly[(i + 1) % n], polyline: pi, index: i });
            }
        }
        let (x0, y0, x1, y1) = crate::geom::polyline_bbox(&domain.boundaries[0]);
        let diam = ((x1 - x0).hypot(y1 - y0)).max(1e-300);
        let cell = diam / GRID_RES;
        let origin = C::new(x0 - GRID_PAD as f64 * cell, y0 - GRID_PAD as f64 * cell);
        let dims = (
            ((x1 - origin.re) / cell).ceil() as i64 + GRID_PAD + 1,
            ((y1 - origin.im) / cell).ceil() as i64 + GRID_PAD + 1,
        );
        let mut cells: std::collections::HashMap<(i64, i64), Vec<usize>> =
            std::collections::HashMap::new();
        for (si, s) in segs.iter().enumerate() {
            let lo_x = s.a.re.min(s.b.re) - cell;
            let lo_y = s.a.im.min(s.b.im) - cell;
            let hi_x = s.a.re.max(s.b.re) + cell;
            let hi_y = s.a.im.max(s.b.im) + cell;
            let (ci0, cj0) = Self::cell_of_raw(lo_x, lo_y, origin, cell);
            let (ci1, cj1) = Self::cell_of_raw(hi_x, hi_y, origin, cell);
            for ci in ci0..=ci1 {
                for cj in cj0..=cj1 {
                    cells.entry((ci, cj)).or_default().push(si);
                }
            }
        }
        // Dense lower-bound field: distance from the cell center to the
        // boundary minus the cell half-diagonal.
        let half_diag = cell * std::f64::consts::FRAC_1_SQRT_2;
        let mut lower = vec![0.0f64; (dims.0 * dims.1) as usize];
        for ci in 0..dims.0 {
            for cj in 0..dims.1 {
                let center = C::new(
                    origin.re + (ci as f64 + 0.5) * cell,
                    origin.im + (cj as f64 + 0.5) * cell,
                );
                let mut d = f64::INFINITY;
                for s in &segs {
                    d = d.min(segment_distance(s.a, s.b, center));
                    if d <= half_diag {
                        break;
                    }
                }
                lower[(ci * dims.1 + cj) as usize] = (d - half_diag).max(0.0);
            }
        }
        SegGrid { segs, cells, cell, origin, lower, dims }
    }

    fn cell_of_raw(x: f64, y: f64, origin: Point, cell: f64) -> (i64, i64) {
        (((x - origin.re) / cell).floor() as i64, ((y - origin.im) / cell).floor() as i64)
    }

    fn cell_of(&self, p: Point) -> (i64, i64) {
        Self::cell_of_raw(p.re, p.im, self.origin, self.cell)
    }

    /// Lower bound on the distance from `p` to the boundary (0 if unknown).
    fn lower_bound(&self, p: Point) -> f64 {
        let (ci, cj) = self.cell_of(p);
        if ci < 0 || cj < 0 || ci >= self.dims.0 || cj >= self.dims.1 {
            return 0.0;
        }
        self.lower[(ci * self.dims.1 + cj) as usize]
    }

    /// Exact nearest segment: distance and segment id.
    fn nearest(&self, p: Point) -> (f64, usize) {
        let (ci, cj) = self.cell_of(p);
        let mut best = (f64::INFINITY, 0usize);
        let mut ring = 0i64;
        loop {
            for di in -ring..=ring {
                for dj in -ring..=ring {
                    if di.abs() != ring && dj.abs() != ring {
                        continue; // only the ring boundary
                    }
                    if let Some(list) = self.cells.get(&(ci + di, cj + dj)) {
                        for &si in list {
                            let s = self.segs[si];
                            let d = segment_distance(s.a, s.b, p);
                            if d < best.0 {
                                best = (d, si);
                            }
                        }
                    }
                }
            }
            // Cells on ring k are at least (k−1)·cell away from p; once that
            // exceeds the best distance the search is complete.
            if best.0.is_finite() && (ring - 1) as f64 * self.cell > best.0 {
                return best;
            }
            if ring > 2 * (self.dims.0 + self.dims.1) {
                return best; // beyond the grid extent in every direction
            }
            ring += 1;
        }
    }
}

/// Estimates the probability that Brownian motion from `z` exits the domain
/// through the target boundary pieces.
///
/// `absorb_dist` is the absorption threshold; `None` uses 10⁻⁴ times the
/// outer boundary diameter. The run is fully determined by `seed`.
pub fn hitting_probability(
    domain: &DomainDescriptor,
    z: Point,
    target: &[BoundaryPart],
    n_walks: usize,
    absorb_dist: Option<f64>,
    seed: u64,
) -> Result<HittingEstimate, ConformalError> {
    if domain.boundaries.is_empty() {
        return Err(ConformalError::BadDomain("no boundary".into()));
    }
    let grid = SegGrid::build(domain);
    let delta = absorb_dist.unwrap_or(1e-4 * domain.outer_diameter());
    if delta <= 0.0 {
        return Err(ConformalError::BadDomain("absorption threshold must be positive".into()));
    }
    // Precompute target membership per segment.
    let in_target: Vec<bool> = grid
        .segs
        .iter()
        .map(|s| {
            target.iter().any(|t| {
                t.polyline == s.polyline
                    && t.range.map(|(lo, hi)| s.index >= lo && s.index < hi).unwrap_or(true)
            })
        })
        .collect();

    let (d0, _) = grid.nearest(z);
    if d0 < delta {
        return Err(ConformalError::BadDomain(
            "start point is within the absorption threshold of the boundary".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n_walks {
        let mut p = z;
        for _step in 0..1_000_000 {
            // Away from the boundary the cell lower bound gives a valid
            // (slightly conservative) jump radius without an exact search.
            // It is only used when at least a cell wide, so the jump
            // underestimates the true distance by a bounded factor; smaller
            // bounds would trap the walk in a slow small-step diffusion.
            let lb = grid.lower_bound(p);
            let d = if lb > grid.cell {
                lb
            } else {
                let (d, si) = grid.nearest(p);
                if !d.is_finite() {
                    break;
                }
                if d < delta {
                    if in_target[si] {
                        hits += 1;
                    }
                    break;
                }
                d
            };
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            p += C::from_polar(d, theta);
        }
    }
    let prob = hits as f64 / n_walks as f64;
    let se = (prob * (1.0 - prob) / n_walks as f64).sqrt();
    Ok(HittingEstimate { probability: prob, std_error: se, walks: n_walks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_pts(c: C, r: f64, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                c + C::new(r * t.cos(), r * t.sin())
            })
            .collect()
    }

    /// In a round annulus the probability of hitting the inner circle first
    /// is log|z| / log ρ.
    #[test]
    fn gamblers_ruin_in_round_annulus() {
        let d = DomainDescriptor::doubly_connected(
            circle_pts(C::new(0.0, 0.0), 1.0, 256),
            circle_pts(C::new(0.0, 0.0), 0.25, 128),
        )
        .unwrap();
        let est = hitting_probability(
            &d,
            C::new(0.5, 0.0),
            &[BoundaryPart::whole(1)],
            20_000,
            None,
            7,
        )
        .unwrap();
        assert!(
            (est.probability - 0.5).abs() < 4.0 * est.std_error.max(1e-3),
            "estimate {} ± {}",
            est.probability,
            est.std_error
        );
    }

    /// The geometric-mean radius is the 50/50 level for any round annulus.
    #[test]
    fn geometric_mean_radius_splits_evenly() {
        let rho: f64 = 0.1;
        let d = DomainDescriptor::doubly_connected(
            circle_pts(C::new(0.0, 0.0), 1.0, 256),
            circle_pts(C::new(0.0, 0.0), rho, 128),
        )
        .unwrap();
        let r_mid = rho.sqrt();
        let est = hitting_probability(
            &d,
            C::new(0.0, r_mid),
            &[BoundaryPart::whole(1)],
            20_000,
            None,
            11,
        )
        .unwrap();
        assert!(
            (est.probability - 0.5).abs() < 4.0 * est.std_error.max(1e-3),
            "estimate {} ± {}",
            est.probability,
            est.std_error
        );
    }

    /// Harmonic measure of a boundary arc of the disk has a Möbius closed
    /// form: transport the arc endpoints by the automorphism sending z to 0
    /// and read off the angular fraction.
    #[test]
    fn disk_arc_matches_poisson_kernel() {
        let n = 256;
        let pts = circle_pts(C::new(0.0, 0.0), 1.0, n);
        let d = DomainDescriptor { boundaries: vec![pts.clone()], marked: vec![] };
        let z = C::new(0.3, 0.2);
        let (i1, i2) = (32usize, 96usize);
        let m = |w: C| (w - z) / (C::new(1.0, 0.0) - z.conj() * w);
        let a1 = m(pts[i1]).arg();
        let a2 = m(pts[i2]).arg();
        let mut expected = (a2 - a1) / std::f64::consts::TAU;
        if expected < 0.0 {
            expected += 1.0;
        }
        let est = hitting_probability(
            &d,
            z,
            &[BoundaryPart::segments(0, i1, i2)],
            20_000,
            None,
            23,
        )
        .unwrap();
        assert!(
            (est.probability - expected).abs() < 4.0 * est.std_error.max(1e-3),
            "estimate {} ± {} vs {}",
            est.probability,
            est.std_error,
            expected
        );
    }

    /// Exit through the bottom side of the unit square, against the
    /// separation-of-variables series for the Laplace problem.
    #[test]
    fn square_side_matches_series() {
        // Square with 32 vertices per side so side ↔ segment ranges align.
        let m = 32usize;
        let mut pts = Vec::new();
        for i in 0..m {
            pts.push(C::new(i as f64 / m as f64, 0.0));
        }
        for i in 0..m {
            pts.push(C::new(1.0, i as f64 / m as f64));
        }
        for i in 0..m {
            pts.push(C::new(1.0 - i as f64 / m as f64, 1.0));
        }
        for i in 0..m {
            pts.push(C::new(0.0, 1.0 - i as f64 / m as f64));
        }
        let d = DomainDescriptor { boundaries: vec![pts], marked: vec![] };
        let (x, y) = (0.5, 0.25);
        let expected = square_bottom_series(x, y);
        let est = hitting_probability(
            &d,
            C::new(x, y),
            &[BoundaryPart::segments(0, 0, m)],
            20_000,
            None,
            41,
        )
        .unwrap();
        assert!(
            (est.probability - expected).abs() < 4.0 * est.std_error.max(1e-3),
            "estimate {} ± {} vs {}",
            est.probability,
            est.std_error,
            expected
        );
    }

    /// Harmonic function equal to 1 on the bottom side of the unit square:
    /// u(x, y) = Σ_{n odd} (4/nπ) sin(nπx) sinh(nπ(1−y))/sinh(nπ).
    fn square_bottom_series(x: f64, y: f64) -> f64 {
        let mut sum = 0.0;
        let mut n = 1u32;
        loop {
            let npi = n as f64 * std::f64::consts::PI;
            // Stable form of sinh(nπ(1−y))/sinh(nπ).
            let ratio = (-npi * y).exp() * (1.0 - (-2.0 * npi * (1.0 - y)).exp())
                / (1.0 - (-2.0 * npi).exp());
            let term = 4.0 / npi * (npi * x).sin() * ratio;
            sum += term;
            if ratio < 1e-14 || n > 2001 {
                break;
            }
            n += 2;
        }
        sum
    }
}
