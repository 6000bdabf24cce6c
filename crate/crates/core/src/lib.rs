// SPDX-License-Identifier: Apache-2.0

//! Analog placement with minimum-distance, symmetry and blockage constraints.
//!
//! Geometry is integral; costs and genes use a floating-point scalar `R`
//! (`f32` or `f64`). The `f64` aliases at the crate root cover the common case.

pub mod decoder;
pub mod evaluator;
pub mod io;
pub mod model;
pub mod refine;
mod scalar;
pub mod search;
pub mod syngen;

pub use decoder::{decode, Chromosome, DecodeError, Decoded, Decoder};
pub use evaluator::{criterion, evaluate, CriterionReport};
pub use model::{
    check_feasible, is_feasible, validate_instance, Axis, Blockage, CostWeights, DistanceSpec, InterfaceEntry,
    ModelError, Net, Placement, Point, ProximityPair, Rect, Side, SymmetryGroup, Variant,
};
pub use scalar::Real;

pub type Instance = model::Instance<f64>;
pub type Instance32 = model::Instance<f32>;
