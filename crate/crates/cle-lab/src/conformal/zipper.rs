//! Riemann maps for simply connected polyline domains.
//!
//! The map is built as a composition of closed-form elementary maps: one
//! edge-opening square root, then one geodesic pull-down per boundary
//! vertex, then a Möbius normalization. Each geodesic step removes the
//! hyperbolic geodesic approximating the next boundary edge, so accuracy
//! improves as the boundary is sampled more finely. The final edge at the
//! starting vertex is left welded; its unresolved sliver carries boundary
//! harmonic measure comparable to one edge and shrinks with the sampling
//! step.

use num_complex::Complex64 as C;

use crate::geom::Point;
use crate::loewner::{Canonical, MapElem, MapStack, NormalizationRecord};

use super::{ConformalError, DomainDescriptor, Mobius};

/// Maximum allowed turning angle at a boundary vertex, in degrees.
const MAX_TURN_DEG: f64 = 175.0;

/// How a simply connected map is normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Send this interior point to 0 in the unit disk. If the domain has a
    /// marked boundary point, its image pins the rotation on the positive
    /// real axis.
    InteriorPoint(Point),
    /// Send these three boundary points (in counterclockwise order) to
    /// `1`, `i`, `−1` on the unit circle.
    ThreeBoundaryPoints(Point, Point, Point),
}

/// Builds a conformal map from the domain onto the unit disk.
///
/// The boundary polyline is used as given; callers control accuracy through
/// the vertex spacing. Vertices with near-straight turning angles are cheap;
/// a turning angle beyond 175° is rejected as too rough.
pub fn map_simply_connected(
    domain: &DomainDescriptor,
    normalization: Normalization,
) -> Result<MapStack, ConformalError> {
    if domain.is_doubly_connected() {
        return Err(ConformalError::BadDomain(
            "map_simply_connected needs a single boundary".into(),
        ));
    }
    let pts = &domain.boundaries[0];
    check_roughness(pts)?;

    if let Some(stack) = circle_fast_path(domain, normalization) {
        return Ok(stack);
    }

    let probe = match normalization {
        Normalization::InteriorPoint(z) => z,
        Normalization::ThreeBoundaryPoints(..) => interior_probe(pts)?,
    };

    let mut stack = unzip_boundary(pts, probe)?;

    match normalization {
        Normalization::InteriorPoint(z0) => {
            let w = stack.to_canonical(z0);
            if w.im <= 0.0 || !w.is_finite() {
                return Err(ConformalError::BadDomain(
                    "normalization point is not interior to the domain".into(),
                ));
            }
            stack.push(MapElem::Mobius(Mobius::halfplane_to_disk(w)));
            stack.canonical = Canonical::Disk;
            let pin = domain.marked.first().copied();
            if let Some(mk) = pin {
                // Evaluate just inside the boundary: the image of an exact
                // boundary vertex is unreliable (it can land on either prime
                // end of an unzipped edge), while the interior limit is
                // stable.
                let u = stack.to_canonical(nudge_inward(mk, z0));
                stack.push(MapElem::Mobius(Mobius::rotation(-u.arg())));
            }
            stack.normalization = NormalizationRecord::InteriorPoint {
                z: (z0.re, z0.im),
                boundary: pin.map(|p| (p.re, p.im)),
            };
        }
        Normalization::ThreeBoundaryPoints(p1, p2, p3) => {
            let us: Vec<C> = [p1, p2, p3]
                .iter()
                .map(|&p| {
                    let u = stack.to_canonical(nudge_inward(p, probe));
                    C::new(u.re, 0.0) // near-boundary images are near-real
                })
                .collect();
            let w_probe = stack.to_canonical(probe);
            let targets = (C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0));
            let m = Mobius::from_three_points((us[0], us[1], us[2]), targets);
            let m = if m.apply(w_probe).norm() < 1.0 {
                m
            } else {
                // Boundary orientation came out reversed; flip the middle
                // target to the conjugate circle orientation.
                Mobius::from_three_points(
                    (us[0], us[1], us[2]),
                    (targets.0, C::new(0.0, -1.0), targets.2),
                )
            };
            stack.push(MapElem::Mobius(m));
            stack.canonical = Canonical::Disk;
            stack.normalization = NormalizationRecord::ThreePoint;
        }
    }
    Ok(stack)
}

/// Moves a boundary point a small relative step toward an interior
/// reference point, where map evaluation is stable.
fn nudge_inward(p: Point, toward: Point) -> Point {
    p + 1e-6 * (toward - p)
}

/// Unzips the boundary into the upper half plane, leaving the stack in
/// half-plane coordinates with the interior of `pts` as its domain.
fn unzip_boundary(pts: &[Point], probe: Point) -> Result<MapStack, ConformalError> {
    let n = pts.len();
    let mut stack = MapStack::identity(Canonical::HalfPlane);

    // Open the first edge; choose the branch putting the probe upstairs.
    let (z0, z1) = (pts[0], pts[1]);
    let w_plus = C::new(0.0, 1.0) * ((probe - z1) / (probe - z0)).sqrt();
    let sign = if w_plus.im > 0.0 { 1.0 } else { -1.0 };
    stack.push(MapElem::EdgeOpen { z0, z1, sign });

    let scale = crate::geom::polyline_diameter(pts).max(1e-300);
    for k in 2..n {
        let a = stack.to_canonical(pts[k]);
        if !a.is_finite() {
            return Err(ConformalError::BadDomain(format!(
                "boundary vertex {k} maps to a non-finite point"
            )));
        }
        // Already flattened (straight continuation or round-off): skip.
        if a.im <= 1e-13 * (a.norm() + scale) {
            continue;
        }
        let inv_d = if a.re.abs() < 1e-300 { 0.0 } else { a.re / a.norm_sqr() };
        let t = a / (1.0 - a * inv_d);
        let h = t.im;
        if h <= 0.0 {
            continue;
        }
        stack.push(MapElem::Geodesic { inv_d, h });
    }
    Ok(stack)
}

/// Rejects boundaries with near-reversing turning angles.
fn check_roughness(pts: &[Point]) -> Result<(), ConformalError> {
    let n = pts.len();
    for i in 0..n {
        let prev = pts[(i + n - 1) % n];
        let next = pts[(i + 1) % n];
        let v1 = pts[i] - prev;
        let v2 = next - pts[i];
        if v1.norm() == 0.0 || v2.norm() == 0.0 {
            continue;
        }
        let turn = (v2 / v1).arg().to_degrees();
        if turn.abs() > MAX_TURN_DEG {
            return Err(ConformalError::BoundaryTooRough { vertex: i, turn_deg: turn });
        }
    }
    Ok(())
}

/// Exact Möbius stack when the boundary is a numerical circle.
fn circle_fast_path(
    domain: &DomainDescriptor,
    normalization: Normalization,
) -> Option<MapStack> {
    let pts = &domain.boundaries[0];
    let n = pts.len() as f64;
    let c = pts.iter().sum::<C>() / n;
    let r = pts.iter().map(|&p| (p - c).norm()).sum::<f64>() / n;
    let dev = pts.iter().map(|&p| ((p - c).norm() - r).abs()).fold(0.0, f64::max);
    if dev > 1e-12 * r || r == 0.0 {
        return None;
    }
    // ζ = (z − c)/r sends the boundary to the unit circle exactly.
    let to_unit = Mobius {
        a: (1.0 / r).into(),
        b: -c / r,
        c: 0.0.into(),
        d: 1.0.into(),
    };
    let mut stack = MapStack::identity(Canonical::Disk);
    stack.push(MapElem::Mobius(to_unit));
    match normalization {
        Normalization::InteriorPoint(z0) => {
            let w0 = to_unit.apply(z0);
            if w0.norm() >= 1.0 {
                return None;
            }
            // Blaschke factor moving w0 to the origin.
            let blaschke = Mobius {
                a: 1.0.into(),
                b: -w0,
                c: -w0.conj(),
                d: 1.0.into(),
            };
            stack.push(MapElem::Mobius(blaschke));
            let pin = domain.marked.first().copied();
            if let Some(mk) = pin {
                let u = stack.to_canonical(mk);
                stack.push(MapElem::Mobius(Mobius::rotation(-u.arg())));
            }
            stack.normalization = NormalizationRecord::InteriorPoint {
                z: (z0.re, z0.im),
                boundary: pin.map(|p| (p.re, p.im)),
            };
        }
        Normalization::ThreeBoundaryPoints(p1, p2, p3) => {
            let u1 = to_unit.apply(p1);
            let u2 = to_unit.apply(p2);
            let u3 = to_unit.apply(p3);
            let m = Mobius::from_three_points(
                (u1, u2, u3),
                (C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0)),
            );
            let m = if m.apply(C::new(0.0, 0.0)).norm() < 1.0 {
                m
            } else {
                Mobius::from_three_points(
                    (u1, u2, u3),
                    (C::new(1.0, 0.0), C::new(0.0, -1.0), C::new(-1.0, 0.0)),
                )
            };
            stack.push(MapElem::Mobius(m));
            stack.normalization = NormalizationRecord::ThreePoint;
        }
    }
    Some(stack)
}

/// A point inside the polygon, reasonably far from its boundary.
fn interior_probe(pts: &[Point]) -> Result<Point, ConformalError> {
    let l = crate::geom::Loop::new(pts.to_vec())
        .map_err(|e| ConformalError::BadDomain(e.to_string()))?;
    let centroid = pts.iter().sum::<C>() / pts.len() as f64;
    if crate::geom::winding_number(&l, centroid, 1e-12).map(|w| w != 0).unwrap_or(false) {
        return Ok(centroid);
    }
    let (x0, y0, x1, y1) = crate::geom::polyline_bbox(pts);
    let mut best: Option<(f64, Point)> = None;
    for res in [16usize, 48] {
        for i in 1..res {
            for j in 1..res {
                let p = C::new(
                    x0 + (x1 - x0) * i as f64 / res as f64,
                    y0 + (y1 - y0) * j as f64 / res as f64,
                );
                if crate::geom::winding_number(&l, p, 1e-12).map(|w| w != 0).unwrap_or(false) {
                    let d = l.distance_to(p);
                    if best.map(|(bd, _)| d > bd).unwrap_or(true) {
                        best = Some((d, p));
                    }
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| ConformalError::BadDomain("no interior point found".into()))
}

/// Half-plane capacity of a polyline curve grown from the real line.
///
/// The curve starts on (or at round-off distance from) ℝ and lives in the
/// closed upper half plane. The capacity is read off from the asymptotic
/// expansion of the unzipping map that flattens the curve.
pub fn polyline_half_plane_capacity(curve: &[Point]) -> Result<f64, ConformalError> {
    if curve.len() < 2 {
        return Ok(0.0);
    }
    let mut stack = MapStack::identity(Canonical::HalfPlane);
    stack.push(MapElem::Mobius(Mobius::translation(C::new(-curve[0].re, 0.0))));
    let scale = curve
        .iter()
        .map(|&p| (p - curve[0]).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    for (k, &p) in curve.iter().enumerate().skip(1) {
        let a = stack.to_canonical(p);
        if !a.is_finite() {
            return Err(ConformalError::BadDomain(format!(
                "curve vertex {k} maps to a non-finite point"
            )));
        }
        if a.im <= 1e-13 * (a.norm() + scale) {
            continue;
        }
        let inv_d = if a.re.abs() < 1e-300 { 0.0 } else { a.re / a.norm_sqr() };
        let h = (a / (1.0 - a * inv_d)).im;
        if h <= 0.0 {
            continue;
        }
        stack.push(MapElem::Geodesic { inv_d, h });
        if inv_d != 0.0 {
            // The tilted geodesic's Möbius factor folds ∞ to a finite
            // point; follow with the real Möbius sending the image of ∞
            // back, so the composition admits the c₁z + c₀ + c₋₁/z
            // expansion the capacity fit reads off.
            let d = 1.0 / inv_d;
            let e = -d.signum() * (d * d + h * h).sqrt();
            let renorm = Mobius {
                a: 1.0.into(),
                b: 0.0.into(),
                c: (-1.0 / e).into(),
                d: 1.0.into(),
            };
            stack.push(MapElem::Mobius(renorm));
        }
    }

    // Fit G(z) ≈ c₁z + c₀ + c₋₁/z + … at a ladder of heights; the
    // hydrodynamically normalized capacity is c₋₁ / (2 c₁).
    let heights = [20.0, 40.0, 80.0, 160.0, 320.0, 640.0];
    let m = heights.len();
    let mut mat = vec![vec![C::new(0.0, 0.0); m]; m];
    let mut rhs = vec![C::new(0.0, 0.0); m];
    for (i, &hh) in heights.iter().enumerate() {
        let z = C::new(0.0, hh * scale);
        rhs[i] = stack.to_canonical(z);
        // Basis: z, 1, 1/z, 1/z², 1/z³, 1/z⁴.
        let mut b = z;
        for cell in mat[i].iter_mut() {
            *cell = b;
            b /= z;
        }
    }
    let coeffs = solve_complex(&mut mat, &mut rhs)
        .ok_or_else(|| ConformalError::BadDomain("capacity fit is singular".into()))?;
    let c1 = coeffs[0];
    let cm1 = coeffs[2];
    if c1.norm() == 0.0 {
        return Err(ConformalError::BadDomain("degenerate capacity fit".into()));
    }
    Ok((cm1 / c1).re / 2.0)
}

/// Gaussian elimination with partial pivoting for small complex systems.
fn solve_complex(mat: &mut [Vec<C>], rhs: &mut [C]) -> Option<Vec<C>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| {
            mat[a][col].norm().partial_cmp(&mat[b][col].norm()).unwrap()
        })?;
        if mat[piv][col].norm() == 0.0 {
            return None;
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for row in (col + 1)..n {
            let f = mat[row][col] / mat[col][col];
            for k in col..n {
                let v = mat[col][k];
                mat[row][k] -= f * v;
            }
            let r = rhs[col];
            rhs[row] -= f * r;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..n {
            s -= mat[row][k] * x[k];
        }
        x[row] = s / mat[row][row];
    }
    Some(x)
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

    /// Upper half disk boundary: diameter then semicircular arc, CCW.
    fn half_disk_pts(n_seg: usize, n_arc: usize) -> Vec<Point> {
        let mut pts = Vec::new();
        for i in 0..n_seg {
            let x = -1.0 + 2.0 * i as f64 / n_seg as f64;
            pts.push(C::new(x, 0.0));
        }
        for j in 0..n_arc {
            let t = std::f64::consts::PI * j as f64 / n_arc as f64;
            pts.push(C::new(t.cos(), t.sin()));
        }
        pts
    }

    #[test]
    fn disk_map_with_center_normalization_is_identity() {
        let d = DomainDescriptor::simply_connected(circle_pts(C::new(0.0, 0.0), 1.0, 256))
            .unwrap()
            .with_marked(C::new(1.0, 0.0));
        let stack = map_simply_connected(&d, Normalization::InteriorPoint(C::new(0.0, 0.0)))
            .unwrap();
        for &z in &[C::new(0.3, 0.1), C::new(-0.5, 0.4), C::new(0.0, -0.8), C::new(0.9, 0.0)] {
            let w = stack.to_canonical(z);
            assert!((w - z).norm() < 1e-9, "expected identity, got {z} -> {w}");
        }
    }

    #[test]
    fn half_disk_matches_closed_form() {
        // Reference: z ↦ −(z + 1/z)/2 maps the upper half disk onto the
        // upper half plane; follow with the Cayley map sending φ(z0) to 0
        // and the rotation pinning the image of the marked point i.
        let z0 = C::new(0.0, 0.5);
        let mk = C::new(0.0, 1.0);
        let phi = |z: C| -(z + z.finv()) * 0.5;
        let cay = Mobius::halfplane_to_disk(phi(z0));
        let rot = Mobius::rotation(-cay.apply(phi(mk)).arg());
        let reference = |z: C| rot.apply(cay.apply(phi(z)));

        let d = DomainDescriptor::simply_connected(half_disk_pts(700, 1100))
            .unwrap()
            .with_marked(mk);
        let stack = map_simply_connected(&d, Normalization::InteriorPoint(z0)).unwrap();

        let probes = [
            C::new(0.0, 0.5),
            C::new(0.3, 0.4),
            C::new(-0.3, 0.4),
            C::new(0.0, 0.7),
            C::new(0.5, 0.3),
            C::new(-0.5, 0.3),
            C::new(0.2, 0.6),
            C::new(-0.2, 0.6),
            C::new(0.4, 0.5),
            C::new(-0.4, 0.5),
        ];
        let mut worst = 0.0f64;
        for &z in &probes {
            let err = (stack.to_canonical(z) - reference(z)).norm();
            worst = worst.max(err);
        }
        assert!(worst < 1e-4, "half-disk map error {worst:.2e} exceeds 1e-4");
    }

    #[test]
    fn round_trip_through_a_star_polygon() {
        // A wavy star-shaped polygon exercises non-convex turns.
        let n = 400;
        let pts: Vec<Point> = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                let r = 1.0 + 0.25 * (5.0 * t).cos();
                C::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let d = DomainDescriptor::simply_connected(pts).unwrap();
        let stack = map_simply_connected(&d, Normalization::InteriorPoint(C::new(0.0, 0.0)))
            .unwrap();
        let probes: Vec<C> = (0..100)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 100.0;
                C::new(0.5 * t.cos(), 0.5 * t.sin())
            })
            .collect();
        let err = stack.round_trip_error(&probes);
        assert!(err < 1e-9, "round-trip error {err:.2e}");
        // Images must land inside the closed unit disk.
        for &p in &probes {
            assert!(stack.to_canonical(p).norm() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn three_point_normalization_hits_targets() {
        let d = DomainDescriptor::simply_connected(circle_pts(C::new(0.2, 0.1), 1.3, 200))
            .unwrap();
        let (p1, p2, p3) = (
            d.boundaries[0][0],
            d.boundaries[0][50],
            d.boundaries[0][100],
        );
        let stack =
            map_simply_connected(&d, Normalization::ThreeBoundaryPoints(p1, p2, p3)).unwrap();
        assert!((stack.to_canonical(p1) - C::new(1.0, 0.0)).norm() < 1e-9);
        assert!((stack.to_canonical(p2) - C::new(0.0, 1.0)).norm() < 1e-9);
        assert!((stack.to_canonical(p3) - C::new(-1.0, 0.0)).norm() < 1e-9);
        assert!(stack.to_canonical(C::new(0.2, 0.1)).norm() < 1.0);
    }

    #[test]
    fn rough_boundary_is_rejected() {
        // A thin needle into a square: the tip turns by nearly 180°.
        let eps = 1e-3;
        let pts = vec![
            C::new(0.0, 0.0),
            C::new(4.0, 0.0),
            C::new(4.0, 4.0),
            C::new(2.0 + eps, 4.0),
            C::new(2.0, 0.5),
            C::new(2.0 - eps, 4.0),
            C::new(0.0, 4.0),
        ];
        let d = DomainDescriptor { boundaries: vec![pts], marked: vec![] };
        let err = map_simply_connected(&d, Normalization::InteriorPoint(C::new(1.0, 1.0)))
            .unwrap_err();
        assert!(matches!(err, ConformalError::BoundaryTooRough { .. }));
    }

    #[test]
    fn vertical_slit_capacity_matches_closed_form() {
        // hcap of the segment [0, i·H] is H²/4.
        let h = 1.0;
        let n = 120;
        let curve: Vec<Point> = (0..=n).map(|k| C::new(0.0, h * k as f64 / n as f64)).collect();
        let cap = polyline_half_plane_capacity(&curve).unwrap();
        assert!((cap - h * h / 4.0).abs() < 2e-4, "capacity {cap} vs {}", h * h / 4.0);
    }

    #[test]
    fn tilted_slit_capacity_matches_elementary_map() {
        // Trace the slit of a tilted elementary map and recover its
        // capacity α(1−α)(a+b)²/4 by unzipping the traced polyline.
        let (a, b) = (0.35, 0.2);
        let alpha = b / (a + b); // hydrodynamic balance αa = (1−α)b
        let e = MapElem::TiltedSlit { base: 0.0, a, b, alpha };
        let zeta_star = alpha * b - (1.0 - alpha) * a;
        let n = 150;
        let mut curve: Vec<Point> = (0..=n)
            .map(|k| {
                let zeta = b + (zeta_star - b) * (k as f64 / n as f64).powi(2);
                e.from_canonical(C::new(zeta, 0.0))
            })
            .collect();
        curve[0] = C::new(0.0, 0.0);
        let expected = alpha * (1.0 - alpha) * (a + b) * (a + b) / 4.0;
        let cap = polyline_half_plane_capacity(&curve).unwrap();
        assert!(
            (cap - expected).abs() < 3e-3 * expected.max(1e-3),
            "capacity {cap} vs {expected}"
        );
    }
}
