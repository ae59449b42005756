//! Modified curve shortening flow `d_t gamma = phi^{-1} d_s^2 gamma` of planar
//! curves in a Gibbons-Hawking potential, continued through neck pinches by
//! surgery at the singularities.

pub mod cli;
pub mod curve;
pub mod flow;
pub mod geom;
pub mod neckpinch;
pub mod pacman;
pub mod potential;
pub mod stability;
pub mod surgery;
