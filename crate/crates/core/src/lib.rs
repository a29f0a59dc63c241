//! CAD command sequences with pointer-based entity references.
//!
//! The crate is organised bottom-up: [`grammar`] holds the program AST and the
//! token-level parser, [`codec`] quantizes programs into token streams,
//! [`kernel`] executes programs into tagged-mesh solids, [`pointer`] turns
//! solids into candidate sets and resolves queries, [`neural`] carries the
//! reference encoder layers and losses and [`metrics`] scores meshes and
//! programs.

pub mod codec;
pub mod grammar;
pub mod kernel;
pub mod metrics;
pub mod neural;
pub mod pointer;

pub use nalgebra;

/// 3-vector used for positions and directions throughout the kernel.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 2-vector for sketch-plane coordinates.
pub type Vec2 = nalgebra::Vector2<f64>;
