//! Dimension of shrinking parallelepiped targets under products of
//! β-transformations, with β-expansion machinery and brute-force covering
//! and measure oracles.

pub mod beta;
pub mod cli;
pub mod config;
pub mod content;
pub mod dimension;
pub mod error;
pub mod geometry;
pub mod lab;
pub mod polygon;
pub mod precision;

pub use error::{Error, Module, Result};
