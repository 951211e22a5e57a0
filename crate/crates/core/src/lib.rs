//! Partitioned BCH codes for memories with stuck-at defects.
//!
//! The crate is layered bottom-up:
//!
//! * [`gf2`] and [`field`]: packed GF(2) linear algebra and GF(2^m) arithmetic.
//! * [`pbch`] and [`weights`]: construction of partitioned BCH codes and their
//!   weight distributions.
//! * [`channel`]: defect, erasure and bit-flip channel models and capacities.
//! * [`codec`]: masking encoders and the erasure / bounded-distance decoders.
//! * [`analysis`]: failure-probability bounds, estimates and redundancy allocation.
//! * [`harness`]: seeded, parallel Monte-Carlo experiments.

pub mod analysis;
pub mod channel;
pub mod codec;
pub mod error;
pub mod field;
pub mod gf2;
pub mod harness;
pub mod numeric;
pub mod pbch;
pub mod weights;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec};
pub use pbch::{build_pbch, CodeShape, PartitionedCode};
