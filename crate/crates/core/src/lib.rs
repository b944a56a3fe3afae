//! Codecs and transforms for TeX font metrics.
//!
//! Everything here works on in-memory buffers and needs only `alloc`; file
//! access, the command line and the build runner live in the `texfm` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod fixword;
pub mod afm;
pub mod encoding;
pub mod metrics;
pub mod optical;
pub mod pl;
#[cfg(feature = "proptest")]
pub mod testing;
pub mod tfm;
pub mod type1;
pub mod vf;

pub use fixword::FixWord;
pub use metrics::{CharDim, CharTag, FontMetrics, LigKernStep, ValidationReport, Violation};
