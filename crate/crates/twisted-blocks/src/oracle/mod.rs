//! Independent reference computations: untwisted Verlinde numbers and brute-force
//! coinvariants on the projective line.

pub mod coinvariants;
pub mod verlinde;

pub use verlinde::{sl2_fusion_closed_form, IntWeight, WeightSystem};
