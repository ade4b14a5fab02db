//! Simulator core for a multifunctional learning machine whose function
//! naming and addressing scheme embeds environmental codes.
//!
//! The crate models one machine two ways and lets them be compared:
//!
//! * [`machine`]: a symbolic dispatch table of learned functions whose
//!   name bit patterns may require person/location context bits. It is the
//!   deterministic oracle for every experiment.
//! * [`net`]: a small sigmoid feed-forward network with positive biases
//!   folded into the weight matrices, trained on the same packet mappings
//!   and instrumented for per-layer quiescence.
//!
//! Both consume the tagged data packets of [`codec`]: 19-bit input frames
//! carrying a 5-bit context header (source/time/person/location), a verb,
//! a function selector, and two operand digits. Environmental change is a
//! change of context header bits; a machine whose learned names or numeric
//! keys absorbed those bits stops producing well-formed output and falls
//! into a null dynamical state.
//!
//! [`memory`] stores past events as memory-tagged records that can be
//! recalled by partial match and, as a recovery spoof, stripped back into
//! reality-tagged frames. [`scenario`] drives the transfer, attachment,
//! grief, and recovery experiments end to end and answers the Q&A battery.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all file and
//! process concerns live in the companion CLI crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod codec;
pub mod machine;
pub mod memory;
pub mod net;
pub mod scenario;
