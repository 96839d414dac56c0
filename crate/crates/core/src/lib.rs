//! TKIP and MoTKIP link-layer encapsulation with WEP and plaintext baselines.
//!
//! The crate is organised bottom-up: [`crypto`] holds RC4, CRC-32 and
//! Michael; [`keymix`] the two-phase per-packet key mixing; [`codec`] the
//! frame formats; [`session`] the per-association state (TSC sequencing,
//! replay window, countermeasures); and [`sim`] a seeded lossy link that
//! accounts on-air bytes and crypto work for each scheme.

pub mod codec;
pub mod crypto;
mod error;
pub mod keymix;
pub mod ops;
pub mod session;
pub mod sim;
pub mod vectors;

pub use error::{Error, Result};
