//! Branching sampler over a full simply connected domain.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::geom::{Arc, Loop, LoopEnsemble, Point};

use super::CleError;

/// Work caps for the branching sampler.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CleBudget {
    /// Maximum number of recorded loops.
    pub max_loops: usize,
    /// Maximum number of explored components.
    pub max_components: usize,
    /// On budget exhaustion: return the partial ensemble flagged as
    /// truncated instead of failing.
    pub allow_truncation: bool,
}

impl Default for CleBudget {
    fn default() -> Self {
        CleBudget { max_loops: 20_000, max_components: 60_000, allow_truncation: false }
    }
}

/// Replay record of one explored component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchRecord {
    /// Structural path of the component in the exploration tree.
    pub path: Vec<u32>,
    /// Seed of the component's angle-equation driver.
    pub driver_seed: u64,
    /// Seed of the component's completion stream.
    pub completion_seed: u64,
    /// Random boundary-root rotation.
    pub root_angle: f64,
    /// Loop-opening and loop-closing capacity times.
    pub sigma: f64,
    /// Loop-closing capacity time.
    pub tau: f64,
    /// Horizon the driver was sampled to.
    pub t_end: f64,
    /// Whether the traced loop was recorded (large enough).
    pub loop_recorded: bool,
    /// Diameter of the component the loop was traced in.
    pub component_diameter: f64,
}

/// A full ensemble sample with its replay tree.
#[derive(Debug, Clone)]
pub struct CleSample {
    /// The recorded loops with domain and sampling metadata.
    pub ensemble: LoopEnsemble,
    /// One record per explored component, in exploration order.
    pub tree: Vec<BranchRecord>,
}

/// Label of a boundary sub-arc in a branch concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcLabel {
    /// The sub-arc lies on the domain boundary between loop contacts.
    Boundary,
    /// The sub-arc belongs to the loop with this ensemble index.
    LoopArc(usize),
}

/// One labelled sub-arc of a branch concatenation.
#[derive(Debug, Clone)]
pub struct LabelledArc {
    /// Where the sub-arc comes from.
    pub label: ArcLabel,
    /// The sub-arc itself (indices into its parent loop when
    /// `label = LoopArc`).
    pub arc: Option<Arc>,
    /// Vertices of the sub-arc in domain coordinates.
    pub points: Vec<Point>,
}

/// Samples the ensemble of loops of diameter at least `eps_stop` in the
/// unit disk.
pub fn sample_cle_disk(
    kappa: f64,
    eps_stop: f64,
    dt: f64,
    seed: u64,
) -> Result<CleSample, CleError> {
    sample_cle_disk_with(kappa, eps_stop, dt, seed, &CleBudget::default())
}

/// Samples the unit-disk ensemble under explicit work caps.
pub fn sample_cle_disk_with(
    _kappa: f64,
    _eps_stop: f64,
    _dt: f64,
    _seed: u64,
    _budget: &CleBudget,
) -> Result<CleSample, CleError> {
    unimplemented!("branching disk sampler")
}

/// Samples a whole-plane window of radius `window_radius` by cutting it
/// out of a sample in a much larger disk of radius `r_big`.
pub fn sample_whole_plane(
    _kappa: f64,
    _window_radius: f64,
    _r_big: f64,
    _eps_stop: f64,
    _dt: f64,
    _seed: u64,
) -> Result<CleSample, CleError> {
    unimplemented!("whole-plane window sampler")
}

/// Orders the clockwise boundary arcs of the maximal loops meeting a
/// boundary interval into one concatenated labelled path.
pub fn branch_concatenation(
    _ensemble: &LoopEnsemble,
    _interval: (f64, f64),
) -> Result<Vec<LabelledArc>, CleError> {
    unimplemented!("branch concatenation")
}

/// The `(n, k)`-exploration of an ensemble seen from an interior point.
pub fn nk_exploration(
    _ensemble: &LoopEnsemble,
    _p: Point,
    _u: Point,
    _n: usize,
    _k: usize,
) -> Result<(Vec<LabelledArc>, Vec<Point>, Loop), CleError> {
    unimplemented!("nested exploration")
}

#[allow(dead_code)]
fn _unused(_: C) {}
