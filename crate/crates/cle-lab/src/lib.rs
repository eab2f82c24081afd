//! # cle-lab
//!
//! A simulation and verification laboratory for conformal loop ensembles
//! (CLE) in the non-simple regime `kappa ∈ (4, 8)`.
//!
//! The crate has three layers:
//!
//! * **Infrastructure** — loop-space geometry and metrics ([`geom`]),
//!   numerical conformal mapping ([`conformal`]), and Loewner-evolution
//!   engines ([`loewner`]).
//! * **Samplers** — branching-exploration CLE samplers for the disk, a large
//!   disk standing in for the whole plane, and the annulus ([`cle`],
//!   [`annulus`]), plus the annulus excursion calculus and its loop-resampling
//!   Markov chain ([`annulus`]).
//! * **Verification** — statistical experiments with seeded, reproducible
//!   reports ([`stats`]) and a command-line front end ([`cli`]).
//!
//! Everything is deterministic given a master seed: per-component random
//! streams are derived from the seed and a structural path, so results are
//! independent of traversal order and bit-identical across runs.
//!
//! A hands-on guide lives in `book/` (rendered with mdBook); its code
//! snippets are compiled and run as doc-tests via the [`guide`] module, so
//! the book cannot drift out of sync with the API.

pub mod annulus;
pub mod cle;
pub mod cli;
pub mod conformal;
pub mod geom;
pub mod guide;
pub mod loewner;
pub mod rng;
pub mod stats;
