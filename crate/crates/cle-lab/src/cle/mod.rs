//! Nested-loop ensemble samplers.
//!
//! The samplers here grow conformal loop ensembles for `κ ∈ (4, 8)` by
//! running the branching radial exploration inside one simply connected
//! component at a time: the weight-`κ−6` angle driver is run to its first
//! loop-closure renewal, the traced arc is sealed with a chordal
//! completion in the pinched-off pocket, and the remaining parts of the
//! component are explored recursively as independent components.
//!
//! Three public entry points cover the geometries:
//!
//! * [`origin_chain`]: the chain of loops surrounding a fixed interior
//!   point, outside-in — the cheapest object and the canonical one for
//!   scaling checks;
//! * [`sample_cle_disk`]: the full ensemble of macroscopic loops in the
//!   unit disk down to a resolution cutoff;
//! * [`sample_whole_plane`]: a whole-plane window cut from a large-disk
//!   sample.
//!
//! All samplers are deterministic functions of their seed: every random
//! choice is drawn from a stream keyed by the structural path of the
//! component that consumes it.

mod disk;
mod explorer;

pub use disk::{
    branch_concatenation, nk_exploration, sample_cle_disk, sample_cle_disk_with,
    sample_whole_plane, ArcLabel, BranchRecord, CleBudget, CleSample, LabelledArc,
};

use num_complex::Complex64 as C;

use crate::conformal::{
    map_simply_connected, ConformalError, DomainDescriptor, Mobius, Normalization,
};
use crate::geom::{
    default_geom_tol, polyline_diameter, winding_number_raw, Domain, GeomError, Loop, Point,
};
use crate::loewner::{Canonical, LoewnerError, MapElem, MapStack};
use crate::rng::StreamId;

use explorer::{explore_component, ExploreParams};

/// Errors from the ensemble samplers.
#[derive(Debug, thiserror::Error)]
pub enum CleError {
    /// A component shrank below the resolution the sampler can represent.
    #[error("component scale {scale:.3e} fell below the resolution floor {floor:.3e}")]
    ResolutionExhausted {
        /// Diameter of the offending component.
        scale: f64,
        /// Smallest representable component diameter.
        floor: f64,
    },
    /// A configured work cap was reached before the sample finished.
    #[error("exploration budget exhausted: {what}")]
    BudgetExceeded {
        /// Which budget ran out and at what count.
        what: String,
    },
    /// The sampler does not operate on the requested domain.
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    /// A parameter was outside its documented range.
    #[error("bad parameter: {0}")]
    BadParameter(String),
    /// A query asked for a loop the ensemble does not contain.
    #[error("no such loop: {0}")]
    NoSuchLoop(String),
    /// A boundary-arc query selected an empty arc.
    #[error("the requested boundary arc is empty")]
    EmptyArc,
    /// A sampled object degenerated at the working resolution.
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    /// A driver or map-stack evaluation failed.
    #[error(transparent)]
    Loewner(#[from] LoewnerError),
    /// A conformal-map construction failed.
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    /// A geometric primitive rejected its input.
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// The nested chain of loops around the origin, outside-in.
///
/// `loops[n]` winds once counterclockwise around the origin and
/// `loops[n+1]` lies in the closed region bounded by `loops[n]`;
/// `components[n]` maps that region onto the unit disk with the origin at
/// the centre. All loops are given in the coordinates of the original
/// domain.
#[derive(Debug, Clone)]
pub struct OriginChain {
    /// Successive loops around the origin, outermost first.
    pub loops: Vec<Loop>,
    /// `components[n]` uniformises the region bounded by `loops[n]`
    /// (origin to origin).
    pub components: Vec<MapStack>,
    /// Diffusivity in `(4, 8)`.
    pub kappa: f64,
    /// Master seed the chain was grown from.
    pub seed: u64,
}

impl OriginChain {
    /// Conformal radius of the region bounded by `loops[index]`, seen
    /// from the origin: the modulus of the uniformiser's derivative at
    /// the centre, measured by a central difference.
    pub fn conformal_radius(&self, index: usize) -> f64 {
        let st = &self.components[index];
        let h = 1e-5;
        let fp = st.from_canonical(C::new(h, 0.0));
        let fm = st.from_canonical(C::new(-h, 0.0));
        ((fp - fm) / C::new(2.0 * h, 0.0)).norm()
    }

    /// Ratio of successive conformal radii, `radius(n+1) / radius(n)`.
    ///
    /// These ratios are independent and identically distributed across
    /// `n`: each level restarts the same exploration in the uniformised
    /// image of the previous loop's interior.
    pub fn radius_ratio(&self, n: usize) -> f64 {
        self.conformal_radius(n + 1) / self.conformal_radius(n)
    }
}

/// Grows the chain of nested loops around the origin.
///
/// Each level runs one first-closure exploration in the region bounded by
/// the previous loop (the original domain for level 0), rooted at a
/// uniformly random boundary point. The domain must contain the origin in
/// its interior: the unit disk, an origin-centred ball, or an explicit
/// simply connected component. Levels whose region has shrunk below ten
/// times the geometric tolerance of the original domain fail with
/// [`CleError::ResolutionExhausted`].
///
/// Loops around a fixed interior point contract by many orders of
/// magnitude per level (the log conformal radius steps by a heavy-tailed
/// renewal increment), so deep chains exhaust the resolution floor for
/// most seeds. Callers that need a fixed depth should try seeds in
/// sequence and keep the chains that resolve; each attempt is a
/// deterministic function of its seed, so the scan is reproducible.
pub fn origin_chain(
    kappa: f64,
    domain: &Domain,
    depth: usize,
    dt: f64,
    seed: u64,
) -> Result<OriginChain, CleError> {
    check_kappa(kappa)?;
    if depth == 0 {
        return Err(CleError::BadParameter("depth must be at least 1".into()));
    }
    if !(dt > 0.0) {
        return Err(CleError::BadParameter("dt must be positive".into()));
    }
    let root = root_stack(domain)?;
    let floor = 10.0 * default_geom_tol(domain);
    let params = ExploreParams::default();

    let mut loops: Vec<Loop> = Vec::with_capacity(depth);
    let mut components: Vec<MapStack> = Vec::with_capacity(depth);
    let mut current = root;
    let mut scale = domain.diameter();
    for level in 0..depth {
        if scale < floor {
            return Err(CleError::ResolutionExhausted { scale, floor });
        }
        let path = StreamId::root().child(level as u32);
        let ex = explore_component(kappa, &current, origin(), seed, &path, dt, &params)?;
        let next = component_stack(ex.loop_path.points(), origin())?;
        scale = ex.loop_path.diameter();
        loops.push(ex.loop_path);
        components.push(next.clone());
        current = next;
    }
    Ok(OriginChain { loops, components, kappa, seed })
}

fn origin() -> C {
    C::new(0.0, 0.0)
}

fn check_kappa(kappa: f64) -> Result<(), CleError> {
    if kappa <= 4.0 || kappa >= 8.0 {
        return Err(CleError::BadParameter(format!("kappa {kappa} outside (4, 8)")));
    }
    Ok(())
}

/// Builds the map-onto-the-disk stack for the original domain.
fn root_stack(domain: &Domain) -> Result<MapStack, CleError> {
    match domain {
        Domain::Disk => Ok(MapStack::identity(Canonical::Disk)),
        Domain::WholePlaneWindow { radius } => {
            if !(*radius > 0.0) {
                return Err(CleError::BadParameter("window radius must be positive".into()));
            }
            let mut st = MapStack::identity(Canonical::Disk);
            st.push(MapElem::Mobius(Mobius::scaling(1.0 / radius)));
            Ok(st)
        }
        Domain::Component { boundary } => component_stack(boundary, origin()),
        Domain::Annulus { .. } => Err(CleError::UnsupportedDomain(
            "the origin chain needs the origin in the domain's interior; an annulus excludes it"
                .into(),
        )),
    }
}

/// Chord-to-depth ratio for adaptive boundary decimation. A kept chord is
/// about this fraction of its distance to the interior target, so the
/// boundary stays resolved at every scale on its approach to the target
/// while far parts are kept coarse.
const ADAPTIVE_ALPHA: f64 = 1.0 / 24.0;

/// Direction turns sharper than this (degrees) are clipped before
/// welding, which rejects near-reversals. Removing a spike's apex moves
/// the boundary by at most one chord length — far less than the local
/// distance to the target under the adaptive spacing.
const CLIP_TURN_DEG: f64 = 168.0;

/// Keeps a subset of a closed ring whose chord lengths scale with the
/// distance to `target`. The walk starts at the vertex farthest from the
/// target so the outermost scale anchors the spacing.
fn adaptive_decimate(ring: &[C], target: C, alpha: f64) -> Vec<C> {
    let n = ring.len();
    let start = (0..n)
        .max_by(|&i, &j| (ring[i] - target).norm().total_cmp(&(ring[j] - target).norm()))
        .unwrap_or(0);
    let mut out = vec![ring[start]];
    for step in 1..n {
        let p = ring[(start + step) % n];
        let last = *out.last().unwrap();
        let depth = (p - target).norm().min((last - target).norm());
        if (p - last).norm() >= alpha * depth {
            out.push(p);
        }
    }
    while out.len() > 1 {
        let gap = (out[out.len() - 1] - out[0]).norm();
        let depth = (out[out.len() - 1] - target).norm().min((out[0] - target).norm());
        if gap < 0.05 * alpha * depth {
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// Removes spike apexes until every turn is below `max_turn` radians.
fn clip_spikes(pts: &mut Vec<C>, max_turn: f64) {
    while pts.len() >= 16 {
        let n = pts.len();
        let mut worst = (0usize, 0.0f64);
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let (u, v) = (b - a, c - b);
            if u.norm() == 0.0 || v.norm() == 0.0 {
                pts.remove(i);
                worst = (0, f64::INFINITY);
                break;
            }
            let turn = (v / u).arg().abs();
            if turn > worst.1 {
                worst = (i, turn);
            }
        }
        if worst.1 == f64::INFINITY {
            continue;
        }
        if worst.1 <= max_turn {
            return;
        }
        pts.remove(worst.0);
    }
}

/// Builds a conformal map from the region bounded by `boundary` onto the
/// unit disk sending `target` to the origin.
///
/// The boundary is recentred and rescaled to unit size (welding
/// tolerances are absolute), decimated so vertex spacing tracks the
/// distance to the target, cleared of near-reversal spikes, and handed to
/// the boundary-welding map builder. Boundaries the builder still rejects
/// are retried coarser, which smooths sub-chord features away.
pub(crate) fn component_stack(boundary: &[Point], target: Point) -> Result<MapStack, CleError> {
    let diam = polyline_diameter(boundary);
    if !(diam > 0.0) {
        return Err(CleError::Degenerate("component boundary has zero extent".into()));
    }
    let (mut lo, mut hi) = (boundary[0], boundary[0]);
    for &p in boundary {
        lo = C::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = C::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let centre = (lo + hi) / 2.0;
    let aff = Mobius::scaling(2.0 / diam).compose(&Mobius::translation(-centre));
    let scaled: Vec<C> = boundary.iter().map(|&z| aff.apply(z)).collect();
    let t_scaled = aff.apply(target);
    if winding_number_raw(&scaled, t_scaled).abs() != 1 {
        return Err(CleError::Degenerate(
            "target point is not simply enclosed by the component boundary".into(),
        ));
    }

    let mut last_err: Option<CleError> = None;
    for (mult, turn_deg) in [(1.0, CLIP_TURN_DEG), (2.0, 162.0), (4.0, 156.0)] {
        let mut pts = adaptive_decimate(&scaled, t_scaled, ADAPTIVE_ALPHA * mult);
        clip_spikes(&mut pts, turn_deg.to_radians());
        if pts.len() < 8 {
            last_err = Some(CleError::Degenerate(
                "component boundary degenerated during decimation".into(),
            ));
            continue;
        }
        if winding_number_raw(&pts, t_scaled).abs() != 1 {
            last_err = Some(CleError::Degenerate(
                "decimation broke the enclosure of the target point".into(),
            ));
            continue;
        }
        let desc = match DomainDescriptor::simply_connected(pts) {
            Ok(d) => d,
            Err(e) => {
                last_err = Some(e.into());
                continue;
            }
        };
        // Any build failure is worth a coarser retry: roughness rejections
        // and numerical blowups alike trace back to boundary features near
        // the vertex scale.
        match map_simply_connected(&desc, Normalization::InteriorPoint(t_scaled)) {
            Ok(zip) => {
                let mut st = MapStack::identity(Canonical::Disk);
                st.push(MapElem::Mobius(aff));
                st.extend(&zip);
                return Ok(st);
            }
            Err(e) => {
                last_err = Some(e.into());
            }
        }
    }
    Err(last_err
        .unwrap_or_else(|| CleError::Degenerate("component boundary could not be prepared".into())))
}
