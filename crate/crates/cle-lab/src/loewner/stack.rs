//! Composable stacks of closed-form elementary conformal maps.
//!
//! A [`MapStack`] represents a conformal map from a domain onto a canonical
//! target (upper half plane or unit disk) as an ordered composition of
//! elementary maps. Every elementary map has closed-form evaluation toward
//! the canonical side and back, except the tilted-slit step whose
//! canonical-direction evaluation uses a short Newton iteration.

use crate::conformal::Mobius;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

/// Canonical target of a map stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Canonical {
    /// Upper half plane.
    HalfPlane,
    /// Unit disk.
    Disk,
}

/// Record of the normalization used when the stack was built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum NormalizationRecord {
    /// An interior point was sent to the canonical center, optionally with a
    /// boundary point pinning the rotation.
    InteriorPoint {
        /// The interior point sent to 0.
        z: (f64, f64),
        /// Boundary point sent to the positive direction, if any.
        boundary: Option<(f64, f64)>,
    },
    /// Three boundary points were sent to canonical positions.
    ThreePoint,
    /// The stack arose from a Loewner evolution rather than a domain map.
    Loewner,
    /// No normalization (raw composition).
    None,
}

/// One elementary map in a stack.
///
/// `to_canonical` moves a point toward the canonical domain; `from_canonical`
/// is its inverse.
#[derive(Debug, Clone)]
pub enum MapElem {
    /// A Möbius transformation.
    Mobius(Mobius),
    /// Opens a two-point boundary edge onto the real line:
    /// `z ↦ sign · i · √((z − z1)/(z − z0))`, sending `z0 ↦ ∞`, `z1 ↦ 0` and
    /// the domain into the upper half plane.
    EdgeOpen {
        /// Edge endpoint sent to infinity.
        z0: C,
        /// Edge endpoint sent to the origin.
        z1: C,
        /// Branch selector (±1) putting the domain in the upper half plane.
        sign: f64,
    },
    /// Pulls the hyperbolic geodesic from 0 to an interior point down onto
    /// the real line: `z ↦ √(T(z)² + h²)` with `T(z) = z/(1 − z·inv_d)`.
    /// `inv_d = 0` encodes a vertical geodesic (`T = id`).
    Geodesic {
        /// Reciprocal of the real pole of `T` (0 for a vertical geodesic).
        inv_d: f64,
        /// Height of the geodesic endpoint after `T`.
        h: f64,
    },
    /// A tilted-slit Loewner step in the half plane. `from_canonical` is the
    /// welding map `w ↦ base + (ζ + a)^α (ζ − b)^{1−α}`, `ζ = w − base`,
    /// which grows a straight slit of the step's capacity and driver
    /// increment.
    TiltedSlit {
        /// Driver value at the start of the step.
        base: f64,
        /// Left real preimage extent.
        a: f64,
        /// Right real preimage extent.
        b: f64,
        /// Slit angle parameter in (0, 1); the slit leaves ℝ at angle
        /// `π(1 − α)`.
        alpha: f64,
    },
    /// A radial Loewner step in the unit disk with constant driver
    /// `e^{i·angle}`: `to_canonical` removes a radial slit of capacity
    /// `delta` growing from the boundary toward 0. The constant-driver
    /// radial equation integrates in closed form through
    /// `g/(1+g)² = e^δ · z/(1+z)²`.
    RadialSlit {
        /// Capacity of the step (the log-derivative at 0 grows by `delta`).
        delta: f64,
        /// Driver angle: the slit grows from `e^{i·angle}`.
        angle: f64,
    },
}

/// The Koebe-type transform `z/(1+z)²`, mapping the unit disk onto the
/// complement of the ray `[1/4, ∞)`.
fn koebe_plus(z: C) -> C {
    let d = 1.0 + z;
    z / (d * d)
}

/// Inverse of [`koebe_plus`] on the complement of `[1/4, ∞)`, in the
/// rationalized form `2u / (1 − 2u + √(1 − 4u))` (stable near `u = 0`).
fn koebe_plus_inv(u: C) -> C {
    2.0 * u / (1.0 - 2.0 * u + (1.0 - 4.0 * u).sqrt())
}

/// Square root with image in the closed upper half plane; real outputs take
/// the sign of `re_like` so boundary evaluation stays continuous.
fn sqrt_upper(v: C, re_like: f64) -> C {
    let mut q = v.sqrt();
    if q.im < 0.0 {
        q = -q;
    }
    if q.im == 0.0 && (q.re != 0.0) && (q.re.signum() != re_like.signum()) && re_like != 0.0 {
        q = -q;
    }
    q
}

/// Principal power for arguments in the closed upper half plane.
fn pow_upper(z: C, e: f64) -> C {
    if z.norm() == 0.0 {
        return C::new(0.0, 0.0);
    }
    let r = z.norm();
    let mut th = z.arg();
    if th < 0.0 {
        // Inputs live in the closed upper half plane; a negative argument is
        // boundary round-off. Snap to the nearer real ray.
        th = if th > -std::f64::consts::FRAC_PI_2 { 0.0 } else { std::f64::consts::PI };
    }
    C::from_polar(r.powf(e), th * e)
}

impl MapElem {
    /// Evaluates the elementary map toward the canonical side.
    pub fn to_canonical(&self, z: C) -> C {
        match *self {
            MapElem::Mobius(m) => m.apply(z),
            MapElem::EdgeOpen { z0, z1, sign } => {
                let r = (z - z1) / (z - z0);
                sign * C::new(0.0, 1.0) * r.sqrt()
            }
            MapElem::Geodesic { inv_d, h } => {
                let t = z / (1.0 - z * inv_d);
                sqrt_upper(t * t + h * h, t.re)
            }
            MapElem::TiltedSlit { .. } => self.slit_newton(z),
            MapElem::RadialSlit { delta, angle } => {
                let rot = C::from_polar(1.0, angle);
                let v = z / rot;
                rot * koebe_plus_inv(delta.exp() * koebe_plus(v))
            }
        }
    }

    /// Evaluates the inverse elementary map (from the canonical side).
    pub fn from_canonical(&self, w: C) -> C {
        match *self {
            MapElem::Mobius(m) => m.inverse().apply(w),
            MapElem::EdgeOpen { z0, z1, .. } => {
                // r = −w² regardless of the branch sign; z = (z1 − z0·r)/(1 − r).
                let r = -w * w;
                (z1 - z0 * r) / (1.0 - r)
            }
            MapElem::Geodesic { inv_d, h } => {
                let s = sqrt_upper(w * w - h * h, w.re);
                s / (1.0 + s * inv_d)
            }
            MapElem::TiltedSlit { base, a, b, alpha } => {
                let zeta = w - base;
                base + pow_upper(zeta + a, alpha) * pow_upper(zeta - b, 1.0 - alpha)
            }
            MapElem::RadialSlit { delta, angle } => {
                let rot = C::from_polar(1.0, angle);
                let v = w / rot;
                rot * koebe_plus_inv((-delta).exp() * koebe_plus(v))
            }
        }
    }

    /// Newton inversion of the tilted-slit welding map (canonical direction).
    fn slit_newton(&self, z: C) -> C {
        let (base, a, b, alpha) = match *self {
            MapElem::TiltedSlit { base, a, b, alpha } => (base, a, b, alpha),
            _ => unreachable!(),
        };
        let target = z - base;
        // Seed above the slit to keep the iteration in the half plane.
        let mut zeta = target + C::new(0.0, 0.1 * (a + b).max(1e-12));
        for _ in 0..60 {
            let fa = pow_upper(zeta + a, alpha);
            let fb = pow_upper(zeta - b, 1.0 - alpha);
            let val = fa * fb - target;
            if val.norm() < 1e-13 * (1.0 + target.norm()) {
                break;
            }
            let deriv = fa * fb * (alpha / (zeta + a) + (1.0 - alpha) / (zeta - b));
            if !deriv.is_finite() || deriv.norm() == 0.0 {
                break;
            }
            let mut step = val / deriv;
            // Damp steps that would jump across the real axis.
            if (zeta - step).im < 0.0 {
                step *= 0.5;
            }
            zeta -= step;
            if zeta.im < 0.0 {
                zeta = C::new(zeta.re, 0.0);
            }
        }
        base + zeta
    }
}

/// An ordered composition of elementary maps onto a canonical domain.
#[derive(Debug, Clone)]
pub struct MapStack {
    /// Elementary maps, applied left to right toward the canonical side.
    pub elems: Vec<MapElem>,
    /// Canonical target of the full composition.
    pub canonical: Canonical,
    /// How the map was normalized when built.
    pub normalization: NormalizationRecord,
}

impl MapStack {
    /// An empty (identity) stack onto the given canonical domain.
    pub fn identity(canonical: Canonical) -> Self {
        MapStack { elems: Vec::new(), canonical, normalization: NormalizationRecord::None }
    }

    /// Maps a point from the domain to the canonical side.
    pub fn to_canonical(&self, z: C) -> C {
        self.elems.iter().fold(z, |w, e| e.to_canonical(w))
    }

    /// Maps a point from the canonical side back to the domain.
    pub fn from_canonical(&self, w: C) -> C {
        self.elems.iter().rev().fold(w, |z, e| e.from_canonical(z))
    }

    /// Appends an elementary map on the canonical side.
    pub fn push(&mut self, e: MapElem) {
        self.elems.push(e);
    }

    /// Concatenates another stack applied after this one.
    pub fn extend(&mut self, other: &MapStack) {
        self.elems.extend(other.elems.iter().cloned());
        self.canonical = other.canonical;
    }

    /// Maximum round-trip error over the given probe points.
    pub fn round_trip_error(&self, probes: &[C]) -> f64 {
        probes
            .iter()
            .map(|&z| (self.from_canonical(self.to_canonical(z)) - z).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_open_round_trips() {
        let e = MapElem::EdgeOpen { z0: C::new(0.0, 0.0), z1: C::new(1.0, 0.0), sign: 1.0 };
        for &z in &[C::new(0.5, 0.5), C::new(-0.3, 1.2), C::new(2.0, 0.1)] {
            let w = e.to_canonical(z);
            assert!(w.im > 0.0, "image should be in the upper half plane, got {w}");
            let back = e.from_canonical(w);
            assert!((back - z).norm() < 1e-12);
        }
    }

    #[test]
    fn geodesic_round_trips_and_flattens_endpoint() {
        // Endpoint a in H; with d = |a|²/Re a the composed map sends a to 0.
        let a = C::new(0.8, 0.6);
        let inv_d = a.re / a.norm_sqr();
        let t = a / (1.0 - a * inv_d);
        assert!(t.re.abs() < 1e-12, "T should send a to the imaginary axis");
        let e = MapElem::Geodesic { inv_d, h: t.im };
        // √(T(a)² + h²) cancels to 0; round-off leaves ~√ε residue.
        let img = e.to_canonical(a);
        assert!(img.norm() < 1e-7, "geodesic endpoint should map to 0, got {img}");
        for &z in &[C::new(0.1, 1.0), C::new(-1.0, 0.4), C::new(3.0, 2.0)] {
            let w = e.to_canonical(z);
            let back = e.from_canonical(w);
            assert!((back - z).norm() < 1e-10, "round trip failed at {z}: {back}");
        }
        // Boundary reals stay real with consistent signs.
        let wr = e.to_canonical(C::new(-0.5, 0.0));
        assert!(wr.im.abs() < 1e-12 && wr.re < 0.0);
    }

    #[test]
    fn vertical_geodesic_is_the_classic_sqrt_map() {
        let e = MapElem::Geodesic { inv_d: 0.0, h: 1.0 };
        let w = e.to_canonical(C::new(0.0, 1.0));
        assert!(w.norm() < 1e-12);
        let back = e.from_canonical(C::new(2.0, 0.0));
        // Inverse of √(z² + 1) at w = 2: z = √3 on the positive side.
        assert!((back - C::new(3f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn tilted_slit_is_hydrodynamic_and_round_trips() {
        // Symmetric slit: α = 1/2, a = b; capacity α(1−α)(a+b)²/4 = a²/4.
        let e = MapElem::TiltedSlit { base: 0.3, a: 0.2, b: 0.2, alpha: 0.5 };
        // Near infinity the welding map looks like the identity.
        let big = C::new(500.0, 40.0);
        let w = e.from_canonical(big);
        assert!((w - big).norm() < 1e-3);
        for &z in &[C::new(0.7, 0.9), C::new(-1.0, 0.2), C::new(0.3, 2.0)] {
            let w = e.from_canonical(z);
            assert!(w.im >= 0.0);
            let back = e.to_canonical(w);
            assert!((back - z).norm() < 1e-8, "round trip failed at {z}: {back}");
        }
        // The symmetric slit is vertical with tip i·√(ab) above the base.
        let tip = e.from_canonical(C::new(0.3, 0.0));
        assert!((tip - C::new(0.3, 0.2)).norm() < 1e-10, "tip at {tip}");
    }

    #[test]
    fn radial_slit_round_trips_and_grows_the_right_tip() {
        let delta = 0.3;
        let angle = 1.1;
        let e = MapElem::RadialSlit { delta, angle };
        // 0 is fixed and the derivative there is e^delta.
        assert!(e.to_canonical(C::new(0.0, 0.0)).norm() < 1e-15);
        let eps = 1e-7;
        let deriv = e.to_canonical(C::new(eps, 0.0)) / eps;
        assert!((deriv.norm() - delta.exp()).abs() < 1e-5, "derivative {deriv}");
        // Interior round trips.
        for &z in &[C::new(0.3, 0.2), C::new(-0.5, 0.1), C::new(0.0, -0.7)] {
            let w = e.to_canonical(z);
            assert!(w.norm() < 1.0 + 1e-12);
            let back = e.from_canonical(w);
            assert!((back - z).norm() < 1e-12, "round trip failed at {z}: {back}");
        }
        // The driver point pulls back to the slit tip at radius
        // (2e^δ − 1) − 2√(e^{2δ} − e^δ) along the driver ray.
        let ed = delta.exp();
        let x = (2.0 * ed - 1.0) - 2.0 * (ed * ed - ed).sqrt();
        let tip = e.from_canonical(C::from_polar(1.0, angle));
        assert!((tip - C::from_polar(x, angle)).norm() < 1e-12, "tip {tip} vs radius {x}");
    }

    #[test]
    fn stack_round_trip_probe() {
        let mut s = MapStack::identity(Canonical::HalfPlane);
        s.push(MapElem::EdgeOpen { z0: C::new(0.0, 0.0), z1: C::new(1.0, 0.0), sign: 1.0 });
        s.push(MapElem::Geodesic { inv_d: 0.2, h: 0.7 });
        s.push(MapElem::Mobius(Mobius::halfplane_to_disk(C::new(0.0, 1.0))));
        let probes = [C::new(0.4, 0.3), C::new(0.6, 0.8), C::new(-0.2, 0.5)];
        assert!(s.round_trip_error(&probes) < 1e-10);
    }
}
