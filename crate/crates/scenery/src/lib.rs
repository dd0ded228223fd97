//! Scene-description engine.
//!
//! The pipeline: load a raster ([`raster`]), build its halving pyramid,
//! pick the working scale where per-pixel information density stops being
//! conserved ([`infodensity`]), segment the working level and refine the
//! partition down to full resolution ([`segmenter`]), turn the result into
//! a canonical textual description ([`descriptor`]), and interpret that
//! description against stored stories ([`semantics`]). [`cli`] wires the
//! stages into one executable.

pub mod cli;
pub mod descriptor;
pub mod infodensity;
pub mod raster;
pub mod segmenter;
pub mod semantics;
