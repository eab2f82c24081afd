//! Trace computation: from driving paths to curves.
//!
//! A driver is turned into a curve by composing one elementary slit map per
//! time step and evaluating the backward composition at the current driving
//! position — the standard zipper scheme, O(N²) in the number of steps.
//! Chordal traces use tilted-slit steps in the half plane (each step grows
//! a straight slit with the step's exact capacity and driver increment);
//! radial traces use constant-driver radial slit steps in the disk.

use num_complex::Complex64 as C;

use super::{ChordalDriver, LoewnerError, MapElem, MapStack, RadialDriver};

/// Interior round-trip tolerance for composed maps; also the slack allowed
/// before a trace evaluation counts as leaving its domain.
pub const TAU_MAP: f64 = 1e-8;

/// Tilted-slit parameters realizing one chordal step with driver increment
/// `delta` and capacity `dt`: `s = √(16·dt + δ²)`, `a = (s−δ)/2`,
/// `b = (s+δ)/2`, `α = (s+δ)/(2s)`.
pub(crate) fn slit_params(delta: f64, dt: f64) -> (f64, f64, f64) {
    let s = (16.0 * dt + delta * delta).sqrt();
    ((s - delta) / 2.0, (s + delta) / 2.0, (s + delta) / (2.0 * s))
}

/// Computes the chordal trace at every grid point.
///
/// Returns tips `γ(t_k)` for `k = 0..N`; the curve starts at `W_0` on the
/// real line. Cost is quadratic in the number of steps.
pub fn chordal_trace(driver: &ChordalDriver) -> Result<Vec<C>, LoewnerError> {
    chordal_trace_strided(driver, 1)
}

/// Computes the chordal trace at every `stride`-th grid point (plus the
/// final one). `stride = 1` evaluates every tip.
pub fn chordal_trace_strided(
    driver: &ChordalDriver,
    stride: usize,
) -> Result<Vec<C>, LoewnerError> {
    if driver.times.len() != driver.w.len() || driver.times.len() < 2 {
        return Err(LoewnerError::BadParameter("driver grid and values disagree".into()));
    }
    let stride = stride.max(1);
    let n = driver.times.len() - 1;
    let mut stack = MapStack::identity(super::Canonical::HalfPlane);
    stack.normalization = super::NormalizationRecord::Loewner;
    let mut tips = Vec::with_capacity(n / stride + 2);
    tips.push(C::new(driver.w[0], 0.0));
    for k in 1..=n {
        let dt = driver.times[k] - driver.times[k - 1];
        if dt <= 0.0 {
            return Err(LoewnerError::BadParameter(format!("grid not increasing at {k}")));
        }
        let delta = driver.w[k] - driver.w[k - 1];
        let (a, b, alpha) = slit_params(delta, dt);
        stack.push(MapElem::TiltedSlit { base: driver.w[k - 1], a, b, alpha });
        if k % stride == 0 || k == n {
            let tip = stack.from_canonical(C::new(driver.w[k], 0.0));
            if !tip.is_finite() || tip.im < -1e-6 {
                return Err(LoewnerError::NumericalBlowup { step: k, magnitude: tip.norm() });
            }
            tips.push(tip);
        }
    }
    Ok(tips)
}

/// A radial trace: evaluated tips plus the renewal segmentation.
#[derive(Debug, Clone)]
pub struct RadialTrace {
    /// Driver grid indices realized in `points` (increasing).
    pub grid_indices: Vec<usize>,
    /// Times of the evaluated tips.
    pub times: Vec<f64>,
    /// Evaluated tips, transported into the component.
    pub points: Vec<C>,
    /// Renewal times copied from the driver, in order.
    pub renewal_times: Vec<f64>,
    /// Positions in `points` where a new inter-renewal segment begins.
    pub segment_starts: Vec<usize>,
}

impl RadialTrace {
    /// The trace split into inter-renewal segments (consecutive slices).
    pub fn segments(&self) -> Vec<&[C]> {
        let mut out = Vec::new();
        let mut prev = 0usize;
        for &s in &self.segment_starts {
            if s > prev {
                out.push(&self.points[prev..s]);
            }
            prev = s;
        }
        if prev < self.points.len() {
            out.push(&self.points[prev..]);
        }
        out
    }
}

/// Computes the radial trace of a driver and transports it through
/// `component` (an identity stack leaves it in the unit disk).
pub fn radial_trace(
    driver: &RadialDriver,
    component: &MapStack,
) -> Result<RadialTrace, LoewnerError> {
    radial_trace_strided(driver, component, 1)
}

/// Radial trace evaluated at every `stride`-th grid point; renewal grid
/// points and the final point are always included so the segmentation is
/// exact.
pub fn radial_trace_strided(
    driver: &RadialDriver,
    component: &MapStack,
    stride: usize,
) -> Result<RadialTrace, LoewnerError> {
    if driver.times.len() != driver.w.len() || driver.times.len() < 2 {
        return Err(LoewnerError::BadParameter("driver grid and values disagree".into()));
    }
    let stride = stride.max(1);
    let n = driver.times.len() - 1;
    let renewal_grid: Vec<usize> = driver.renewals.iter().map(|r| r.grid_index).collect();

    let mut stack = MapStack::identity(super::Canonical::Disk);
    stack.normalization = super::NormalizationRecord::Loewner;
    let mut grid_indices = Vec::new();
    let mut times = Vec::new();
    let mut points = Vec::new();
    let mut segment_starts = Vec::new();
    let mut next_renewal = 0usize;
    for k in 1..=n {
        let dt = driver.times[k] - driver.times[k - 1];
        if dt <= 0.0 {
            return Err(LoewnerError::BadParameter(format!("grid not increasing at {k}")));
        }
        // Constant-driver step at the angular midpoint of the step.
        let half_turn = (driver.w[k] / driver.w[k - 1]).arg() / 2.0;
        let angle = driver.w[k - 1].arg() + half_turn;
        stack.push(MapElem::RadialSlit { delta: dt, angle });
        let is_renewal = next_renewal < renewal_grid.len() && renewal_grid[next_renewal] == k;
        if is_renewal {
            segment_starts.push(points.len());
            next_renewal += 1;
        }
        if k % stride == 0 || k == n || is_renewal {
            let disk_tip = stack.from_canonical(driver.w[k]);
            if !disk_tip.is_finite() || disk_tip.norm() > 1.0 + 1e-6 {
                return Err(LoewnerError::NumericalBlowup {
                    step: k,
                    magnitude: disk_tip.norm(),
                });
            }
            grid_indices.push(k);
            times.push(driver.times[k]);
            points.push(component.from_canonical(disk_tip));
        }
    }
    Ok(RadialTrace {
        grid_indices,
        times,
        points,
        renewal_times: driver.renewals.iter().map(|r| r.time).collect(),
        segment_starts,
    })
}

/// Transports a curve given in the stack's canonical coordinates into the
/// stack's domain, refining where the image stretches.
///
/// Input points must lie in the canonical domain (closed unit disk or
/// closed upper half plane, with `TAU_MAP` slack). Midpoints are inserted
/// recursively while the image of a source segment is longer than
/// `refine_len` (pass 0.0 or ∞ to disable).
pub fn transport_curve(
    stack: &MapStack,
    curve: &[C],
    refine_len: f64,
) -> Result<Vec<C>, LoewnerError> {
    let inside = |p: C| -> bool {
        match stack.canonical {
            super::Canonical::Disk => p.norm() <= 1.0 + TAU_MAP,
            super::Canonical::HalfPlane => p.im >= -TAU_MAP,
        }
    };
    for (i, &p) in curve.iter().enumerate() {
        if !p.is_finite() || !inside(p) {
            return Err(LoewnerError::OutOfDomain { index: i });
        }
    }
    let refine = refine_len > 0.0 && refine_len.is_finite();
    let mut out = Vec::with_capacity(curve.len());
    if let Some(&first) = curve.first() {
        out.push(stack.from_canonical(first));
    }
    for win in curve.windows(2) {
        let (a, b) = (win[0], win[1]);
        let fb = stack.from_canonical(b);
        if refine {
            let fa = *out.last().unwrap();
            refine_segment(stack, a, b, fa, fb, refine_len, 0, &mut out);
        }
        out.push(fb);
    }
    if out.iter().any(|p| !p.is_finite()) {
        return Err(LoewnerError::NumericalBlowup { step: 0, magnitude: f64::INFINITY });
    }
    Ok(out)
}

/// Recursive midpoint insertion while the image segment is too long.
fn refine_segment(
    stack: &MapStack,
    a: C,
    b: C,
    fa: C,
    fb: C,
    refine_len: f64,
    depth: usize,
    out: &mut Vec<C>,
) {
    if depth >= 10 || (fb - fa).norm() <= refine_len {
        return;
    }
    let m = 0.5 * (a + b);
    let fm = stack.from_canonical(m);
    refine_segment(stack, a, m, fa, fm, refine_len, depth + 1, out);
    out.push(fm);
    refine_segment(stack, m, b, fm, fb, refine_len, depth + 1, out);
}

#[cfg(test)]
mod tests {
    use super::super::{sample_radial_kr, Canonical, Theta0};
    use super::*;
    use crate::conformal::Mobius;

    fn flat_chordal(times: Vec<f64>, w: Vec<f64>) -> ChordalDriver {
        let n = times.len();
        ChordalDriver {
            times,
            w,
            v_left: vec![0.0; n],
            v_right: vec![0.0; n],
            kappa: 6.0,
            rho_left: 0.0,
            rho_right: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn zero_driver_trace_is_the_vertical_segment() {
        let n = 1000usize;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let d = flat_chordal(times.clone(), vec![0.0; n + 1]);
        let trace = chordal_trace(&d).unwrap();
        for (k, &p) in trace.iter().enumerate() {
            let expected = C::new(0.0, 2.0 * times[k].sqrt());
            assert!((p - expected).norm() < 1e-9, "tip {p} vs {expected} at {k}");
        }
    }

    #[test]
    fn linear_driver_tip_converges_to_the_fine_reference() {
        let build = |dt: f64| {
            let n = (1.0 / dt).round() as usize;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
            let w: Vec<f64> = times.iter().map(|&t| 2.0 * t).collect();
            flat_chordal(times, w)
        };
        let fine = *chordal_trace_strided(&build(1e-5), usize::MAX).unwrap().last().unwrap();
        let coarse = *chordal_trace_strided(&build(4e-3), usize::MAX).unwrap().last().unwrap();
        assert!((coarse - fine).norm() < 1e-2, "coarse {coarse} vs fine {fine}");
    }

    #[test]
    fn trace_scales_exactly_with_the_driver_scaling() {
        // The slit-step composition commutes with z ↦ λz, so scaling the
        // driver by (t, W) ↦ (t/λ², W/λ) scales tips by 1/λ exactly.
        let n = 640usize;
        let dt = 1e-3;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let w: Vec<f64> = times.iter().map(|&t| 1.5 * t * t.sin()).collect();
        let lam = 2.0;
        let scaled_times: Vec<f64> = times.iter().map(|&t| t / (lam * lam)).collect();
        let scaled_w: Vec<f64> = w.iter().map(|&x| x / lam).collect();
        let base = chordal_trace(&flat_chordal(times, w)).unwrap();
        let scaled = chordal_trace(&flat_chordal(scaled_times, scaled_w)).unwrap();
        for (p, q) in base.iter().zip(&scaled) {
            assert!((p / lam - q).norm() < 1e-12);
        }
    }

    fn flat_radial(times: Vec<f64>, w: Vec<C>) -> RadialDriver {
        let n = times.len();
        RadialDriver {
            times,
            w: w.clone(),
            o: w,
            theta: vec![0.0; n],
            renewals: Vec::new(),
            kappa: 6.0,
            seed: 0,
        }
    }

    #[test]
    fn constant_radial_driver_traces_the_radial_segment() {
        let n = 500usize;
        let dt = 1e-3;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let d = flat_radial(times.clone(), vec![C::new(1.0, 0.0); n + 1]);
        let trace = radial_trace(&d, &MapStack::identity(Canonical::Disk)).unwrap();
        for (i, &p) in trace.points.iter().enumerate() {
            let t = trace.times[i];
            let e = t.exp();
            let x = (2.0 * e - 1.0) - 2.0 * (e * e - e).sqrt();
            assert!((p - C::new(x, 0.0)).norm() < 1e-10, "tip {p} vs {x} at t = {t}");
        }
    }

    #[test]
    fn rotating_radial_driver_converges_to_the_fine_reference() {
        let build = |dt: f64| {
            let n = (0.5 / dt).round() as usize;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
            let w: Vec<C> = times.iter().map(|&t| C::from_polar(1.0, 2.0 * t)).collect();
            flat_radial(times, w)
        };
        let id = MapStack::identity(Canonical::Disk);
        let fine = *radial_trace_strided(&build(1e-5), &id, usize::MAX).unwrap().points.last().unwrap();
        let coarse =
            *radial_trace_strided(&build(2e-3), &id, usize::MAX).unwrap().points.last().unwrap();
        assert!((coarse - fine).norm() < 1e-2, "coarse {coarse} vs fine {fine}");
    }

    #[test]
    fn radial_segments_split_exactly_at_renewal_times() {
        // Find a seed whose path renews within the horizon.
        let driver = (0..20)
            .map(|s| sample_radial_kr(6.0, 8.0, 1e-3, Theta0::Fixed(std::f64::consts::PI), s).unwrap())
            .find(|d| !d.renewals.is_empty())
            .expect("no renewals in any trial seed");
        let trace =
            radial_trace_strided(&driver, &MapStack::identity(Canonical::Disk), 25).unwrap();
        assert_eq!(trace.renewal_times.len(), driver.renewals.len());
        for (rt, ev) in trace.renewal_times.iter().zip(&driver.renewals) {
            assert_eq!(*rt, ev.time);
        }
        assert_eq!(trace.segment_starts.len(), driver.renewals.len());
        // Every renewal grid point is an evaluated tip and starts a segment.
        for (pos, ev) in trace.segment_starts.iter().zip(&driver.renewals) {
            assert_eq!(trace.grid_indices[*pos], ev.grid_index);
        }
        assert_eq!(
            trace.segments().len(),
            driver.renewals.len() + 1,
            "segments should be one more than interior boundaries"
        );
        for p in &trace.points {
            assert!(p.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn transport_through_identity_and_mobius_stacks() {
        let curve: Vec<C> = (0..50)
            .map(|k| C::from_polar(0.6, std::f64::consts::TAU * k as f64 / 50.0))
            .collect();
        let id = MapStack::identity(Canonical::Disk);
        assert_eq!(transport_curve(&id, &curve, 0.0).unwrap(), curve);

        let m = Mobius::rotation(0.7);
        let mut stack = MapStack::identity(Canonical::Disk);
        stack.push(MapElem::Mobius(m));
        let out = transport_curve(&stack, &curve, 0.0).unwrap();
        let minv = m.inverse();
        for (p, q) in curve.iter().zip(&out) {
            assert!((minv.apply(*p) - q).norm() < 1e-12);
        }

        // Out-of-domain input is rejected.
        let err = transport_curve(&stack, &[C::new(1.5, 0.0)], 0.0).unwrap_err();
        assert!(matches!(err, LoewnerError::OutOfDomain { index: 0 }));

        // Refinement adds points but keeps endpoints.
        let sparse = [C::new(-0.9, 0.0), C::new(0.9, 0.0)];
        let refined = transport_curve(&id, &sparse, 0.05).unwrap();
        assert!(refined.len() > 2, "expected refinement, got {}", refined.len());
        assert_eq!(*refined.first().unwrap(), sparse[0]);
        assert_eq!(*refined.last().unwrap(), sparse[1]);
    }
}
