//! Higher-order staircase codes.
//!
//! A higher-order staircase code is fixed by three objects: an `(L, M)`
//! difference triangle set ([`dts`]) giving the block delays, an
//! `(M+1, S/L)`-net ([`net`]) giving the intra-block permutations, and a
//! systematic component code ([`hamming`]) of length `(M+1)S`. The
//! [`construction`] module resolves them into a code, [`codec`] encodes and
//! decodes streams of it, and [`sim`] measures bit error rates over a binary
//! symmetric channel.

pub mod algebra;
pub mod codec;
pub mod construction;
pub mod dts;
pub mod error;
pub mod hamming;
pub mod net;
pub mod sim;

pub use error::{Error, Result};
