//! Polyline utilities shared across the crate: distances, diameters,
//! resampling, simplification, and segment predicates.

use super::Point;

/// Cross product of `b - a` and `c - a` (twice the signed triangle area).
pub fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

/// Distance from point `z` to the closed segment `[a, b]`.
pub fn segment_distance(a: Point, b: Point, z: Point) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a).re * d.re + (z - a).im * d.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// Nearest point to `z` on the open polyline `pts`, returned as
/// `(segment index, parameter in [0,1], point, distance)`.
pub fn nearest_point_on_polyline(pts: &[Point], z: Point) -> (usize, f64, Point, f64) {
    let mut best = (0usize, 0.0f64, pts[0], f64::INFINITY);
    for i in 0..pts.len().saturating_sub(1) {
        let (a, b) = (pts[i], pts[i + 1]);
        let d = b - a;
        let len2 = d.norm_sqr();
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((z - a).re * d.re + (z - a).im * d.im) / len2).clamp(0.0, 1.0)
        };
        let p = a + d * t;
        let dist = (z - p).norm();
        if dist < best.3 {
            best = (i, t, p, dist);
        }
    }
    best
}

/// True if closed segments `[a,b]` and `[c,d]` intersect (including
/// touching endpoints), by the standard orientation test.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| -> bool {
        cross(p, q, r) == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

/// Intersection point of segments `[a,b]` and `[c,d]` if they cross
/// properly (interior crossing), as parameters `(t, u)` with the point
/// `a + t(b-a)`.
pub fn segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<(f64, f64, Point)> {
    let r = b - a;
    let s = d - c;
    let denom = r.re * s.im - r.im * s.re;
    if denom == 0.0 {
        return None;
    }
    let qp = c - a;
    let t = (qp.re * s.im - qp.im * s.re) / denom;
    let u = (qp.re * r.im - qp.im * r.re) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some((t, u, a + r * t))
    } else {
        None
    }
}

/// Axis-aligned bounding box `(min_re, min_im, max_re, max_im)`.
pub fn bbox(pts: &[Point]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        b.0 = b.0.min(p.re);
        b.1 = b.1.min(p.im);
        b.2 = b.2.max(p.re);
        b.3 = b.3.max(p.im);
    }
    b
}

/// Total length of the open polyline.
pub fn polyline_length(pts: &[Point]) -> f64 {
    pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Convex hull by Andrew's monotone chain, counterclockwise, no
/// collinear points retained.
fn convex_hull(pts: &[Point]) -> Vec<Point> {
    let mut v: Vec<Point> = pts.to_vec();
    v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    v.dedup_by(|a, b| a.re == b.re && a.im == b.im);
    if v.len() <= 2 {
        return v;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * v.len());
    for &p in v.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in v.iter().rev() {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Maximum pairwise distance among the points (diameter), via convex hull
/// and rotating calipers.
pub fn polyline_diameter(pts: &[Point]) -> f64 {
    let hull = convex_hull(pts);
    let n = hull.len();
    if n <= 1 {
        return 0.0;
    }
    if n == 2 {
        return (hull[1] - hull[0]).norm();
    }
    let mut best = 0.0f64;
    let mut j = 1usize;
    for i in 0..n {
        let next = (i + 1) % n;
        loop {
            let jn = (j + 1) % n;
            // Advance j while the antipodal step still increases the
            // distance to edge (i, i+1), measured by triangle area.
            let a1 = cross(hull[i], hull[next], hull[jn]).abs();
            let a0 = cross(hull[i], hull[next], hull[j]).abs();
            if a1 > a0 {
                j = jn;
            } else {
                break;
            }
        }
        best = best.max((hull[j] - hull[i]).norm());
        best = best.max((hull[j] - hull[next]).norm());
    }
    best
}

/// Resamples an open polyline to (approximately) uniform arclength spacing
/// `h`, keeping the original endpoints exactly. Returns at least the two
/// endpoints. Original vertices are not necessarily kept.
pub fn resample_by_arclength(pts: &[Point], h: f64) -> Vec<Point> {
    assert!(h > 0.0, "spacing must be positive");
    if pts.len() < 2 {
        return pts.to_vec();
    }
    let total = polyline_length(pts);
    if total == 0.0 {
        return vec![pts[0], *pts.last().unwrap()];
    }
    let n_seg = (total / h).ceil().max(1.0) as usize;
    let step = total / n_seg as f64;
    let mut out = Vec::with_capacity(n_seg + 1);
    out.push(pts[0]);
    let mut acc = 0.0f64; // arclength consumed on the current source segment
    let mut i = 0usize; // current source segment
    let mut next_mark = step;
    let mut walked = 0.0f64;
    while out.len() < n_seg {
        if i + 1 >= pts.len() {
            break; // float accumulation ran past the end; endpoint closes it
        }
        let seg_len = (pts[i + 1] - pts[i]).norm();
        if walked + (seg_len - acc) < next_mark {
            walked += seg_len - acc;
            acc = 0.0;
            i += 1;
            continue;
        }
        let need = next_mark - walked;
        acc += need;
        walked = next_mark;
        let t = acc / seg_len;
        out.push(pts[i] + (pts[i + 1] - pts[i]) * t);
        next_mark += step;
    }
    out.push(*pts.last().unwrap());
    out
}

/// Ramer–Douglas–Peucker simplification of an open polyline with absolute
/// tolerance `tol`. Endpoints are kept.
pub fn douglas_peucker(pts: &[Point], tol: f64) -> Vec<Point> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let mut keep = vec![false; pts.len()];
    keep[0] = true;
    keep[pts.len() - 1] = true;
    let mut stack = vec![(0usize, pts.len() - 1)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (mut worst, mut idx) = (0.0f64, lo + 1);
        for i in lo + 1..hi {
            let d = segment_distance(pts[lo], pts[hi], pts[i]);
            if d > worst {
                worst = d;
                idx = i;
            }
        }
        if worst > tol {
            keep[idx] = true;
            stack.push((lo, idx));
            stack.push((idx, hi));
        }
    }
    pts.iter()
        .zip(keep.iter())
        .filter_map(|(&p, &k)| if k { Some(p) } else { None })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn segment_distance_basics() {
        assert_eq!(segment_distance(c(0.0, 0.0), c(1.0, 0.0), c(0.5, 1.0)), 1.0);
        assert_eq!(segment_distance(c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)), 1.0);
        assert_eq!(segment_distance(c(0.0, 0.0), c(0.0, 0.0), c(3.0, 4.0)), 5.0);
    }

    #[test]
    fn diameter_matches_brute_force() {
        // A ragged star-like loop.
        let pts: Vec<C> = (0..37)
            .map(|k| {
                let t = k as f64 * 0.7;
                let r = 1.0 + 0.5 * (3.0 * t).sin();
                c(r * t.cos(), r * t.sin())
            })
            .collect();
        let mut brute = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                brute = brute.max((pts[i] - pts[j]).norm());
            }
        }
        let fast = polyline_diameter(&pts);
        assert!((fast - brute).abs() < 1e-12, "fast {fast} vs brute {brute}");
    }

    #[test]
    fn resample_spacing_is_uniform() {
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)];
        let out = resample_by_arclength(&pts, 0.3);
        assert_eq!(out[0], pts[0]);
        assert_eq!(*out.last().unwrap(), pts[2]);
        let lens: Vec<f64> = out.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        // Spacing is uniform except that a corner can shorten a chord.
        let step = 2.0 / lens.len() as f64;
        for l in &lens {
            assert!(*l <= step + 1e-12, "chord {l} exceeds step {step}");
            assert!(*l >= 0.1 * step, "chord {l} collapsed");
        }
    }

    #[test]
    fn douglas_peucker_drops_collinear() {
        let pts: Vec<C> = (0..11).map(|k| c(k as f64 * 0.1, 0.0)).collect();
        let out = douglas_peucker(&pts, 1e-6);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn segment_intersection_proper_crossing() {
        let got = segment_intersection(c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0));
        let (t, u, p) = got.expect("segments cross");
        assert!((t - 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
        assert!((p - c(0.0, 0.0)).norm() < 1e-15);
        assert!(segments_intersect(c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)));
        assert!(!segments_intersect(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)));
    }
}
