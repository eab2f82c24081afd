//! Circularization of doubly connected domains.
//!
//! An alternating scheme: map the filled outer boundary onto the unit disk
//! (outer becomes exactly round, hole centroid goes to 0), then swap the
//! boundary roles with `w ↦ s/w`, and repeat. Each round replaces the
//! current non-round boundary by an interior-transported image, so the
//! roundness defect contracts geometrically until the domain is a round
//! annulus `ρ < |w| < 1`; the modulus `ρ` is read off the converged inner
//! radius.

use num_complex::Complex64 as C;

use crate::geom::Point;
use crate::loewner::{MapElem, MapStack, NormalizationRecord};

use super::zipper::{map_simply_connected, Normalization};
use super::{ConformalError, DomainDescriptor, Mobius};

/// Tuning knobs for [`circularize_annulus_with`].
#[derive(Debug, Clone, Copy)]
pub struct CircularizeOptions {
    /// Roundness tolerance relative to the current outer diameter.
    pub tol_round_rel: f64,
    /// Maximum number of alternating rounds.
    pub max_iters: usize,
}

impl Default for CircularizeOptions {
    fn default() -> Self {
        CircularizeOptions { tol_round_rel: 1e-5, max_iters: 200 }
    }
}

/// Convergence summary of a circularization.
#[derive(Debug, Clone, Copy)]
pub struct CircularizeReport {
    /// Conformal modulus: the converged inner radius.
    pub rho: f64,
    /// Alternating rounds performed.
    pub iterations: usize,
    /// Final roundness residual of the outer boundary image (0 when the
    /// outer circle is exact by construction).
    pub residual_outer: f64,
    /// Final roundness residual of the inner boundary image.
    pub residual_inner: f64,
}

/// Circularizes with default options.
pub fn circularize_annulus(
    domain: &DomainDescriptor,
) -> Result<(CircularizeReport, MapStack), ConformalError> {
    circularize_annulus_with(domain, CircularizeOptions::default())
}

/// Maps a doubly connected domain onto a round annulus `ρ < |w| < 1`.
///
/// Returns the modulus and the composed map; the outer boundary goes to the
/// unit circle. If the domain has a marked point its image pins the
/// rotation on the positive real axis, otherwise the first outer vertex
/// does.
pub fn circularize_annulus_with(
    domain: &DomainDescriptor,
    opts: CircularizeOptions,
) -> Result<(CircularizeReport, MapStack), ConformalError> {
    if !domain.is_doubly_connected() {
        return Err(ConformalError::BadDomain("circularization needs an inner boundary".into()));
    }
    let outer = &domain.boundaries[0];
    let inner = &domain.boundaries[1];

    if let Some(result) = concentric_fast_path(domain, outer, inner) {
        return Ok(result);
    }

    let pin_point = domain.marked.first().copied().unwrap_or(outer[0]);
    // Tracked-curve sampling also sets the boundary resolution of every
    // later round's disk map, so it bounds the roundness floor the
    // iteration can reach; oversample the inner boundary.
    let n_track = (2 * inner.len()).max(128);

    // Round 0: flatten the raw outer boundary; transport the raw inner.
    let dd = DomainDescriptor { boundaries: vec![outer.clone()], marked: vec![] };
    let sub = map_simply_connected(&dd, Normalization::InteriorPoint(area_centroid(inner)))?;
    let mut stack = sub;
    let mut curve: Vec<C> = inner.iter().map(|&p| stack.to_canonical(p)).collect();
    let mut swaps = 0usize;
    let mut iterations = 0usize;
    let mut residual = roundness_residual(&curve);
    let tol = opts.tol_round_rel * 2.0; // outer diameter is 2 in canonical coordinates

    while residual > tol {
        if iterations >= opts.max_iters {
            return Err(ConformalError::NoConvergence {
                iterations,
                residual_outer: 0.0,
                residual_inner: residual,
            });
        }
        iterations += 1;

        // Swap roles: the non-round inner curve becomes the outer boundary,
        // the exact unit circle becomes an exact inner circle of radius s.
        let r_hat = mean_radius(&curve);
        let s = r_hat * r_hat;
        let swap = Mobius::over_z(s);
        let mut sw_stack = MapStack::identity(crate::loewner::Canonical::Disk);
        sw_stack.push(MapElem::Mobius(swap));
        stack.extend(&sw_stack);
        swaps += 1;
        let new_outer: Vec<C> = curve.iter().map(|&w| swap.apply(w)).collect();

        // Flatten the new outer; transport a fresh sampling of the exact
        // inner circle (interior points of the filled outer, so their
        // images are accurate).
        let dd = DomainDescriptor { boundaries: vec![new_outer], marked: vec![] };
        let sub = map_simply_connected(&dd, Normalization::InteriorPoint(C::new(0.0, 0.0)))?;
        curve = (0..n_track)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n_track as f64;
                sub.to_canonical(C::from_polar(s, t))
            })
            .collect();
        stack.extend(&sub);
        residual = roundness_residual(&curve);
    }

    let rho = mean_radius(&curve);
    if swaps % 2 == 1 {
        // Odd number of swaps leaves the original boundaries exchanged;
        // one more inversion restores the outer boundary to the unit circle.
        let mut sw_stack = MapStack::identity(crate::loewner::Canonical::Disk);
        sw_stack.push(MapElem::Mobius(Mobius::over_z(rho)));
        stack.extend(&sw_stack);
    }
    // Evaluate the pin just inside the domain (toward the hole): the image
    // of an exact boundary point is unreliable across unzipped edges.
    let inward = area_centroid(inner);
    let u = stack.to_canonical(pin_point + 1e-6 * (inward - pin_point));
    let mut rot = MapStack::identity(crate::loewner::Canonical::Disk);
    rot.push(MapElem::Mobius(Mobius::rotation(-u.arg())));
    stack.extend(&rot);
    stack.normalization = NormalizationRecord::InteriorPoint {
        z: (0.0, 0.0),
        boundary: Some((pin_point.re, pin_point.im)),
    };

    Ok((
        CircularizeReport {
            rho,
            iterations,
            residual_outer: 0.0,
            residual_inner: residual,
        },
        stack,
    ))
}

/// Exact Möbius stack when both boundaries are concentric numerical circles.
fn concentric_fast_path(
    domain: &DomainDescriptor,
    outer: &[Point],
    inner: &[Point],
) -> Option<(CircularizeReport, MapStack)> {
    let (co, ro, devo) = circle_fit(outer);
    let (ci, ri, devi) = circle_fit(inner);
    if devo > 1e-12 * ro || devi > 1e-12 * ro || (co - ci).norm() > 1e-12 * ro {
        return None;
    }
    let to_unit = Mobius {
        a: (1.0 / ro).into(),
        b: -co / ro,
        c: 0.0.into(),
        d: 1.0.into(),
    };
    let mut stack = MapStack::identity(crate::loewner::Canonical::Disk);
    stack.push(MapElem::Mobius(to_unit));
    let pin_point = domain.marked.first().copied().unwrap_or(outer[0]);
    let u = stack.to_canonical(pin_point);
    stack.push(MapElem::Mobius(Mobius::rotation(-u.arg())));
    stack.normalization = NormalizationRecord::InteriorPoint {
        z: (co.re, co.im),
        boundary: Some((pin_point.re, pin_point.im)),
    };
    Some((
        CircularizeReport {
            rho: ri / ro,
            iterations: 0,
            residual_outer: 0.0,
            residual_inner: 0.0,
        },
        stack,
    ))
}

/// Mean center, mean radius, and max radius deviation of a point set.
fn circle_fit(pts: &[Point]) -> (C, f64, f64) {
    let c = pts.iter().sum::<C>() / pts.len() as f64;
    let r = pts.iter().map(|&p| (p - c).norm()).sum::<f64>() / pts.len() as f64;
    let dev = pts.iter().map(|&p| ((p - c).norm() - r).abs()).fold(0.0, f64::max);
    (c, r, dev)
}

fn mean_radius(pts: &[C]) -> f64 {
    pts.iter().map(|w| w.norm()).sum::<f64>() / pts.len() as f64
}

/// Roundness defect about the origin: spread of radii.
fn roundness_residual(pts: &[C]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in pts {
        lo = lo.min(w.norm());
        hi = hi.max(w.norm());
    }
    hi - lo
}

/// Area centroid of a closed polygon (vertex mean if degenerate).
fn area_centroid(pts: &[Point]) -> C {
    let n = pts.len();
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let w = p.re * q.im - q.re * p.im;
        area2 += w;
        cx += (p.re + q.re) * w;
        cy += (p.im + q.im) * w;
    }
    if area2.abs() < 1e-30 {
        pts.iter().sum::<C>() / n as f64
    } else {
        C::new(cx / (3.0 * area2), cy / (3.0 * area2))
    }
}
