//! Two-party interactive computation of the nearest lattice point on 2D
//! lattices.
//!
//! Two nodes each observe one coordinate of a point `x` in the plane and
//! cooperate over a rate-limited link to find the lattice point nearest to
//! `x`. The crate provides:
//!
//! - exact and Babai (nearest-plane) decoders for reduced 2D lattices
//!   ([`lattice`]);
//! - the geometry of Babai and Voronoi cells: boundary profiles, thresholds,
//!   offsets, and rectangle/cell intersection areas ([`geometry`]);
//! - closed-form rate and error-probability evaluators, in bits throughout
//!   ([`analytic`]);
//! - executable protocol state machines with exact ideal-codelength
//!   accounting: single-round schemes in both communication orders and the
//!   zero-error infinite-round bit exchange ([`protocols`]);
//! - a seeded, reproducible Monte Carlo harness with parameter sweeps and
//!   CSV/JSON emission ([`harness`]).

pub mod analytic;
mod error;
pub mod geometry;
pub mod harness;
pub mod lattice;
pub mod protocols;

pub use analytic::{
    allocate_bins, allocate_strip_bins, entropy, expected_split_entropy_12,
    expected_split_entropy_21, gamma_fn, infinite_round_quantities, pe_rate_constant,
    stage1_rate_limit, BinAllocation, Distribution, InfiniteRoundQuantities, RateErrorConstant,
};
pub use error::{Error, Result};
pub use geometry::{
    boundary_profile, cell_geometry, rect_voronoi_area, BoundaryProfile, CellGeometry,
    GeomInterval, OffsetSpec, ProfileSegment, Rect, StandardGeometry,
};
pub use harness::{
    estimate_error_prob, estimate_infinite_round, evaluate_point, infinite_round_histogram,
    point_seed, row_to_json, rows_to_csv, rows_to_json, single_round_stats,
    stage1_entropy_experiment, sweep, InfiniteRoundStats, RoundHistogram, RunConfig, SimEstimate,
    SingleRoundStats, StageOneEstimate, StageOneSource, SweepParameter, SweepRow, SweepSpec, Units,
};
pub use lattice::{Lattice2D, LatticePoint, Point};
pub use protocols::{
    round1_partition, run_infinite_round, run_single_round, run_stage1, Message, Node, Order,
    Protocol, ProtocolConfig, Transcript,
};
