//! Transverse spatial modes through out-of-plane Sagnac interferometers.
//!
//! The crate models Hermite-Gauss and Laguerre-Gauss beams at the waist as
//! expansions over the HG basis, the geometric image rotation produced by
//! out-of-plane mirror paths, two-port Sagnac parity sorting and cascaded OAM
//! sorting, the polarization gadgets used to make those sorters efficient, and
//! the post-selected biphoton pipelines that turn a fiber plus a parity sorter
//! into a Bell-state source or a heralded single-photon source.
//!
//! Everything is a pure function of immutable values.

pub mod error;
pub mod geometry;
pub mod interferometer;
pub mod modes;
pub mod quantum;
pub mod render;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
