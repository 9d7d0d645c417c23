//! Design, sizing, manufacturing export and flight simulation for
//! Kresling-origami rigid airships.
//!
//! Lengths are millimetres in geometry, mass and pattern code and metres
//! in the energy and flight modules.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod energy;
pub mod geometry;
pub mod mass;
pub mod mesh;
pub mod par;
pub mod pattern;
pub mod sim;
pub mod sweep;

pub use geometry::{derive_segment, fold_state, KreslingParams, SegmentGeometry, Stability};
pub use mass::{evaluate_design, DesignEvaluation, DesignInputs};
pub use par::Execution;
pub use sweep::{run_sweep, run_sweep_with, SweepGrid, SweepResult};
