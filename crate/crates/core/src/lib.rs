//! Laminations of free-group automorphisms and Cannon-Thurston fibers of
//! their mapping tori, computed at finite depth.

pub mod automorphism;
pub mod cli;
pub mod config;
pub mod ctfiber;
pub mod lamination;
pub mod parse;
pub mod subgroup;
pub mod traintrack;
pub mod word;
