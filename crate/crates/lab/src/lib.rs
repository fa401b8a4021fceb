//! Convergence studies and reports for the diffuse-interface tumor growth
//! model: configuration, error norms against the glued approximation and
//! the sharp limit, rate fits, CSV/SVG output and the command-line tool.

pub mod compare;
pub mod config;
pub mod emit;
pub mod pipeline;
pub mod studies;
