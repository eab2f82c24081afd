//! Loewner evolution engines.
//!
//! This module provides the three layers the samplers are built on:
//!
//! * [`MapStack`]: compositions of closed-form elementary conformal maps
//!   (slit steps, geodesic/edge openings, Möbius factors) with evaluation
//!   in both directions;
//! * driving processes: chordal `SLE_κ(ρ_L; ρ_R)` paths and the radial
//!   weight-`κ−6` angle equation with its renewal bookkeeping;
//! * trace computation: turning a driver into a curve by backward
//!   composition of per-step slit maps.

mod drivers;
mod stack;
mod traces;

pub use drivers::{
    sample_chordal_driver, sample_radial_kr, sample_radial_kr_with, scan_renewals, ChordalDriver,
    RadialDriver, RadialOptions, RenewalEvent, Theta0, DEFAULT_EPS_THETA, KAPPA_DT_LIMIT,
};
pub use stack::{Canonical, MapElem, MapStack, NormalizationRecord};
pub use traces::{
    chordal_trace, chordal_trace_strided, radial_trace, radial_trace_strided, transport_curve,
    RadialTrace, TAU_MAP,
};
pub(crate) use drivers::sample_standard_normal;
pub(crate) use traces::slit_params;

/// Errors from drivers, traces, and stack evaluation.
#[derive(Debug, thiserror::Error)]
pub enum LoewnerError {
    /// The requested Euler step violates the stability bound.
    #[error("time step too large: kappa*dt = {kappa_dt:.4} exceeds {limit}")]
    StepTooLarge {
        /// Product of diffusivity and step size.
        kappa_dt: f64,
        /// The enforced ceiling.
        limit: f64,
    },
    /// A parameter was outside its documented range.
    #[error("bad parameter: {0}")]
    BadParameter(String),
    /// An intermediate map evaluation left its domain.
    #[error("numerical blowup at step {step}: magnitude {magnitude:.3e}")]
    NumericalBlowup {
        /// Step index where the evaluation failed.
        step: usize,
        /// Offending magnitude.
        magnitude: f64,
    },
    /// The angle process approached a singularity with regularization off.
    #[error("angle {theta:.3e} too close to a singularity at time {time}")]
    AngleSingularity {
        /// Offending angle value.
        theta: f64,
        /// Time of the failure.
        time: f64,
    },
    /// A point handed to a transport was outside the stack's domain.
    #[error("point {index} of the curve is outside the map's domain")]
    OutOfDomain {
        /// Index of the offending point.
        index: usize,
    },
    /// Serialization I/O failure.
    #[error("driver i/o: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed serialized header.
    #[error("driver header: {0}")]
    Header(#[from] serde_json::Error),
}
