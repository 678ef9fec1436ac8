//! Command line and HTTP front ends for the group decision engine.

pub mod api;
pub mod cli;
pub mod runner;
