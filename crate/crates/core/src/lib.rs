//! Numerical toolkit for Douglas (alpha, beta)-metrics.

pub mod diffkit;
pub mod error;
pub mod geometry;
pub mod phifun;

pub use error::{Error, Result};
pub mod abmetric;
pub mod report;
pub mod deform;
pub mod atlas;
pub mod config;
pub mod suite;
