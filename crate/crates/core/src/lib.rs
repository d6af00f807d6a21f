//! Discrete-round simulation and analysis of depth-weighted block-tree
//! chain selection.

pub mod adversary;
pub mod analysis;
pub mod blocktree;
pub mod diffusion;
pub mod experiments;
pub mod mining;
pub mod sim;
