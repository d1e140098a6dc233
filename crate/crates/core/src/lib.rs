//! Generation, solving and scoring of defeasible-reasoning board-game problems.

pub mod eval;
pub mod generator;
pub mod knowledge;
pub mod pipeline;
pub mod render;
pub mod rng;
pub mod solver;
pub mod theory;
pub mod vocab;
