//! Locally-iterative distributed coloring algorithms on a synchronous
//! round simulator.

pub mod ag;
pub mod algebra;
pub mod edge;
pub mod engine;
pub mod error;
pub mod graph;
pub mod linial;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod stab;
pub mod verify;

pub use error::{Error, Result};
