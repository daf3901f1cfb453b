//! Brownian motion on spider graphs: transition kernels, exit-time laws,
//! samplers, limit laws and the spectral transform.

pub mod acceptance;
pub mod error;
pub mod exit;
pub mod kernels;
pub mod limits;
pub mod numerics;
pub mod sampler;
pub mod spectral;
pub mod spider;

pub use error::{Error, Result};
pub use spider::{SpiderGraph, SpiderPoint};
