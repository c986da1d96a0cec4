//! Analytics, channel model and receivers for the Gaussian many-access channel.
//!
//! Everything in this crate is a pure function of its inputs. Randomness is
//! drawn from counter-keyed streams (see [`rng`]) so that results do not depend
//! on evaluation order. The crate is `no_std` and only needs `alloc`; file
//! formats, configuration and the command line live in the `mnac-lab` crate.
//!
//! All information quantities are in nats.
#![no_std]
#![forbid(unsafe_code)]
// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod capacity;
pub mod channel;
pub mod detect;
pub mod error;
pub mod exponents;
pub mod numeric;
pub mod rng;

pub use error::{Error, Result};
